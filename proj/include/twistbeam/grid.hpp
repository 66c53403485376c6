#pragma once

#include <complex>
#include <vector>

namespace twistbeam {

enum class Execution { serial, parallel };

/// Complex samples psi(rho_i, phi_j) on a polar grid. phi is uniform on [0, 2 pi);
/// rho_weight[i] approximates the integral of f rho drho as sum_i rho_weight[i] f(rho_i).
struct StateGrid {
  std::vector<double> rho;
  std::vector<double> rho_weight;
  std::vector<double> phi;
  std::vector<std::complex<double>> values;  // row-major: values[i * phi.size() + j]
  double z = 0.0;

  std::size_t n_rho() const { return rho.size(); }
  std::size_t n_phi() const { return phi.size(); }
  std::complex<double>& at(std::size_t i, std::size_t j) { return values[i * phi.size() + j]; }
  const std::complex<double>& at(std::size_t i, std::size_t j) const { return values[i * phi.size() + j]; }
  double phi_weight() const;

  /// Integral of |psi|^2 over the plane.
  double norm() const;
  /// Throws ConfigError on inconsistent sizes, non-increasing rho, or a bad phi grid.
  void validate() const;
};

/// Empty grid on explicit radial nodes and weights.
StateGrid make_polar_grid(std::vector<double> rho, std::vector<double> rho_weight, int n_phi, double z = 0.0);

/// Midpoint radial nodes on [0, extent].
StateGrid make_uniform_polar_grid(int n_rho, double extent, int n_phi, double z = 0.0);

}  // namespace twistbeam
