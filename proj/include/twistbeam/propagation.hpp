#pragma once

#include <array>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "twistbeam/decomposition.hpp"
#include "twistbeam/envelope.hpp"
#include "twistbeam/grid.hpp"

namespace twistbeam::propagation {

/// Sub-spectra with l > 0, l < 0 and l = 0.
struct ComponentSpectra {
  ModeSpectrum plus;
  ModeSpectrum minus;
  ModeSpectrum zero;
};

ComponentSpectra component_split(const ModeSpectrum& spec);

/// Applies the residual Gouy factor exp(-i omega0 (2n + 1) tau) to every coefficient.
ModeSpectrum reference_evolve(const ModeSpectrum& part, double tau);

/// sum_{n,l} c_{n,l} psi_{n,l}(rho, phi).
Complex evaluate(const ModeSpectrum& spec, double rho, double phi);

/// Grid for synthesis. When rho is empty n_rho Gauss-Legendre nodes are laid out on
/// [0, b(z) max(extent_factor, sqrt(2n + |l| + 1) + 5)] for the widest populated mode.
struct GridSpec {
  int n_rho = 256;
  int n_phi = 256;
  double extent_factor = 6.0;
  std::vector<double> rho;
  std::vector<double> rho_weight;
};

struct Observables {
  double norm = 0.0;
  double mean_lz = 0.0;
  double mean_rho2 = 0.0;
  double gouy_phase = 0.0;  // |c|^2-weighted omega0 (2n + |l| + 1) * phase advance
};

enum class Component { plus = 0, minus = 1, zero = 2 };

struct PropagationResult {
  StateGrid total;
  std::array<StateGrid, 3> components;  // indexed by Component
  Observables observables;
  envelope::EnvelopePoint envelope;
  envelope::RotationAngles angles;
};

/// Three-component closed-form solution at z: each part evolves with the residual Gouy
/// phase, is mapped through the Ermakov scaling and chirp, and rotated by its own angle
/// (plus: phi_+, minus: phi_-, zero: Larmor). Rotation is applied as exp(i l angle) per mode.
PropagationResult synthesize(const ModeSpectrum& spec, const envelope::EnvelopeSolution& env, int charge_sign,
                             double z, const GridSpec& grid = {}, Execution exec = Execution::parallel);

/// Total wavefunction at arbitrary points (rho, phi), same formula as synthesize.
std::vector<Complex> evaluate_points(const ModeSpectrum& spec, const envelope::EnvelopeSolution& env,
                                     int charge_sign, double z, std::span<const std::pair<double, double>> points);

/// Single-mode closed form for a pure state launched at b0 = 1, b0' = 0.
Complex pure_mode_solution(ModeIndex idx, BasisConvention conv, const envelope::EnvelopeSolution& env,
                           int charge_sign, double z, double rho, double phi);

/// omega0 (2n + |l| + 1) * phase_advance.
double gouy_phase(ModeIndex idx, BasisConvention conv, double phase_advance);

/// Grid observables. mean_lz is spectral when a spectrum is given, otherwise from an
/// angular DFT of each ring. Throws NumericalError when the grid does not resolve the state.
Observables observables(const StateGrid& grid, const ModeSpectrum* spectrum = nullptr);

/// mean L_z from the grid alone.
double grid_mean_lz(const StateGrid& grid);

/// Fraction of the norm on the outermost ring and in the top quarter of angular harmonics.
struct Resolution {
  double edge_fraction = 0.0;
  double angular_tail_fraction = 0.0;
  bool resolved(double tol = 1e-6) const { return edge_fraction < tol && angular_tail_fraction < tol; }
};
Resolution resolution(const StateGrid& grid);

}  // namespace twistbeam::propagation
