#include "twistbeam/grid.hpp"

#include <cmath>
#include <numbers>

#include "twistbeam/errors.hpp"

namespace twistbeam {

double StateGrid::phi_weight() const { return 2.0 * std::numbers::pi / static_cast<double>(phi.size()); }

double StateGrid::norm() const {
  const std::size_t np = phi.size();
  double total = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    double ring = 0.0;
    for (std::size_t j = 0; j < np; ++j) ring += std::norm(values[i * np + j]);
    total += rho_weight[i] * ring;
  }
  return total * phi_weight();
}

void StateGrid::validate() const {
  if (rho.empty() || phi.empty()) throw ConfigError("state grid: empty axis");
  if (rho_weight.size() != rho.size()) throw ConfigError("state grid: radial weights do not match nodes");
  if (values.size() != rho.size() * phi.size()) throw ConfigError("state grid: value count does not match axes");
  for (std::size_t i = 1; i < rho.size(); ++i)
    if (!(rho[i] > rho[i - 1])) throw ConfigError("state grid: rho must be strictly increasing");
  if (rho.front() < 0.0) throw ConfigError("state grid: rho must be non-negative");
  const double dphi = phi_weight();
  for (std::size_t j = 0; j < phi.size(); ++j)
    if (std::abs(phi[j] - dphi * static_cast<double>(j)) > 1e-12) throw ConfigError("state grid: phi must be uniform on [0, 2 pi)");
}

StateGrid make_polar_grid(std::vector<double> rho, std::vector<double> rho_weight, int n_phi, double z) {
  if (n_phi < 1) throw ConfigError("state grid: n_phi must be positive");
  StateGrid g;
  g.rho = std::move(rho);
  g.rho_weight = std::move(rho_weight);
  g.phi.resize(static_cast<std::size_t>(n_phi));
  for (int j = 0; j < n_phi; ++j) g.phi[j] = 2.0 * std::numbers::pi * j / n_phi;
  g.values.assign(g.rho.size() * g.phi.size(), {});
  g.z = z;
  g.validate();
  return g;
}

StateGrid make_uniform_polar_grid(int n_rho, double extent, int n_phi, double z) {
  if (n_rho < 1) throw ConfigError("state grid: n_rho must be positive");
  if (!(extent > 0.0)) throw ConfigError("state grid: extent must be positive");
  const double h = extent / n_rho;
  std::vector<double> rho(n_rho), w(n_rho);
  for (int i = 0; i < n_rho; ++i) {
    rho[i] = (i + 0.5) * h;
    w[i] = rho[i] * h;
  }
  return make_polar_grid(std::move(rho), std::move(w), n_phi, z);
}

}  // namespace twistbeam
