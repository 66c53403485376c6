#pragma once

#include <algorithm>
#include <complex>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "twistbeam/grid.hpp"
#include "twistbeam/lgbasis.hpp"

namespace twistbeam {

using Complex = std::complex<double>;
using Sampler = std::function<Complex(double rho, double phi)>;

/// Mode window: 0 <= n <= n_max, l_min <= l <= l_max.
struct Truncation {
  int n_max = 12;
  int l_min = -25;
  int l_max = 25;

  void validate() const;
  bool contains(ModeIndex idx) const { return idx.n >= 0 && idx.n <= n_max && idx.l >= l_min && idx.l <= l_max; }
  int max_abs_l() const { return std::max(std::abs(l_min), std::abs(l_max)); }
  /// n_max = 12 and l in [l_a - 25, l_a + 25].
  static Truncation around(int l_a, int n_max = 12, int half_width = 25) {
    return {n_max, l_a - half_width, l_a + half_width};
  }
};

/// Expansion coefficients over the Laguerre-Gaussian basis.
struct ModeSpectrum {
  std::map<ModeIndex, Complex> entries;
  Truncation truncation;
  BasisConvention convention;
  double captured_norm = 0.0;  // sum |c|^2
  double source_norm = 0.0;    // ||psi||^2 of the expanded state
  std::vector<std::string> warnings;

  double deficit() const { return source_norm - captured_norm; }
  void recompute_captured_norm();
  Complex coefficient(ModeIndex idx) const;
};

namespace decomposition {

struct PureState {
  int n = 0;
  int l = 0;
};

/// Pure state with the half plane pi < phi < 2 pi blocked.
struct HalfBlockedState {
  int n = 0;
  int l = 0;
};

struct CustomState {
  Sampler psi;
  std::optional<double> source_norm;       // computed by quadrature when unset
  std::vector<double> angular_breakpoints;  // angles where psi may jump, in [0, 2 pi)
};

/// State at z = 0 plus the envelope initial data (b0, b0').
struct InitialState {
  std::variant<PureState, HalfBlockedState, CustomState> shape;
  double b0 = 1.0;
  double b0_prime = 0.0;
};

/// psi(rho, phi, 0) of the state itself (pure/half-blocked built in the given convention).
Sampler state_sampler(const InitialState& state, BasisConvention conv = {});

/// psi_ho(rho, phi, 0) = b0 psi(b0 rho, phi, 0) exp(-i b0 b0' rho^2 / 2).
Sampler map_initial(const InitialState& state, BasisConvention conv = {});

std::vector<double> angular_breakpoints(const InitialState& state);

struct QuadSpec {
  int radial_order = 200;
  int angular_order = 512;
  std::optional<double> radial_extent;      // default from the basis decay of the mode window
  std::vector<double> angular_breakpoints;  // piecewise Gauss-Legendre in phi when non-empty
  double convergence_tol = 1e-8;            // max |c(order) - c(2 order)| before NumericalError
};

struct OverlapValue {
  Complex value;
  double error_estimate = 0.0;
};

/// <psi_{n,l}, psi0> by Gauss-Legendre in rho times a uniform or piecewise Gauss-Legendre
/// rule in phi, with the error estimated against doubled orders.
OverlapValue overlap_quadrature(const Sampler& psi0, ModeIndex idx, BasisConvention conv, const QuadSpec& quad);

struct OverlapTable {
  std::map<ModeIndex, Complex> values;
  double error_estimate = 0.0;
};

/// All coefficients of a truncation window from one sampling of psi0. Execution::serial is
/// the reference path for the OpenMP kernel.
OverlapTable overlap_table(const Sampler& psi0, const Truncation& trunc, BasisConvention conv, const QuadSpec& quad,
                           Execution exec = Execution::parallel);

/// Closed-form coefficient of the half-blocked state (n_a, l_a) on mode (n, l), for b0 = 1, b0' = 0.
Complex arc_coefficient(int n_a, int l_a, int n, int l);

struct DecomposeOptions {
  BasisConvention convention;
  QuadSpec quad;
  double norm_floor = 0.99;  // captured/source below this attaches a warning
};

/// Closed forms for pure and half-blocked states at b0 = 1, b0' = 0; quadrature otherwise.
ModeSpectrum decompose(const InitialState& state, const Truncation& trunc, const DecomposeOptions& opts = {});

/// ||psi||^2 of the state (exact for pure and half-blocked, quadrature for custom).
double source_norm(const InitialState& state, BasisConvention conv = {}, const QuadSpec& quad = {});

}  // namespace decomposition
}  // namespace twistbeam
