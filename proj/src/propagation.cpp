#include "twistbeam/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "twistbeam/errors.hpp"
#include "twistbeam/special.hpp"

namespace twistbeam::propagation {

namespace {

constexpr double kNegligibleWeight = 1e-14;

ModeSpectrum empty_like(const ModeSpectrum& spec) {
  ModeSpectrum out;
  out.truncation = spec.truncation;
  out.convention = spec.convention;
  out.source_norm = spec.source_norm;
  return out;
}

// Coefficients of one component after evolution and rotation, grouped by l.
struct Block {
  int l = 0;
  std::vector<Complex> coeffs;  // index n
};

struct Plan {
  std::array<std::vector<Block>, 3> components;
  int n_max = 0;
  int max_abs_l = 0;
  double widest_mode = 1.0;  // max sqrt(2n + |l| + 1) over populated modes
};

Plan make_plan(const ModeSpectrum& spec, double tau, const envelope::RotationAngles& angles) {
  Plan plan;
  const double w = spec.convention.omega0;
  std::array<std::map<int, std::vector<Complex>>, 3> by_l;
  for (const auto& [idx, c] : spec.entries) {
    if (c == Complex{}) continue;
    const int comp = idx.l > 0 ? 0 : (idx.l < 0 ? 1 : 2);
    const double angle = comp == 0 ? angles.plus : (comp == 1 ? angles.minus : angles.larmor);
    const Complex d = c * std::polar(1.0, -w * (2.0 * idx.n + 1.0) * tau) * std::polar(1.0, idx.l * angle);
    auto& v = by_l[comp][idx.l];
    if (static_cast<int>(v.size()) <= idx.n) v.resize(idx.n + 1);
    v[idx.n] = d;
    plan.n_max = std::max(plan.n_max, idx.n);
    if (std::norm(c) > kNegligibleWeight) {
      plan.max_abs_l = std::max(plan.max_abs_l, std::abs(idx.l));
      plan.widest_mode = std::max(plan.widest_mode, std::sqrt(2.0 * idx.n + std::abs(idx.l) + 1.0));
    }
  }
  for (int k = 0; k < 3; ++k)
    for (auto& [l, v] : by_l[k]) plan.components[k].push_back({l, std::move(v)});
  return plan;
}

// psi_p(rho_i, phi_j) = (1/b) e^{i (b'/b) rho^2 / 2} sum_l e^{i l phi_j} sum_n d_{n,l} R_{n,l}(rho_i / b)
void fill_component(const std::vector<Block>& blocks, BasisConvention conv, double b, double chirp_rate,
                    StateGrid& grid, bool parallel) {
  const int nr = static_cast<int>(grid.n_rho());
  const int np = static_cast<int>(grid.n_phi());
  const int nb = static_cast<int>(blocks.size());
  if (nb == 0) return;
  std::vector<Complex> phases(static_cast<std::size_t>(nb) * np);
  for (int k = 0; k < nb; ++k)
    for (int j = 0; j < np; ++j) phases[static_cast<std::size_t>(k) * np + j] = std::polar(1.0, blocks[k].l * grid.phi[j]);

  auto row = [&](int i) {
    const double rho = grid.rho[i];
    const double u = rho / b;
    const Complex prefactor = std::polar(1.0 / b, 0.5 * chirp_rate * rho * rho);
    std::vector<double> rad;
    std::vector<Complex> amp(nb);
    for (int k = 0; k < nb; ++k) {
      rad.resize(blocks[k].coeffs.size());
      lgbasis::radial_sequence(blocks[k].l, conv, u, rad);
      Complex a{};
      for (std::size_t n = 0; n < rad.size(); ++n) a += blocks[k].coeffs[n] * rad[n];
      amp[k] = a * prefactor;
    }
    Complex* out = &grid.values[static_cast<std::size_t>(i) * np];
    for (int j = 0; j < np; ++j) {
      Complex s{};
      for (int k = 0; k < nb; ++k) s += amp[k] * phases[static_cast<std::size_t>(k) * np + j];
      out[j] = s;
    }
  };

  if (parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < nr; ++i) row(i);
  } else {
    for (int i = 0; i < nr; ++i) row(i);
  }
}

void check_convention(const ModeSpectrum& spec, const envelope::EnvelopeSolution& env) {
  spec.convention.validate();
  if (std::abs(spec.convention.omega0 - env.reference_frequency()) > 1e-14 * spec.convention.omega0)
    throw ConfigError("synthesize: basis omega0 differs from the envelope reference frequency");
}

// Angular DFT coefficient energies per ring: e_l = |(1/N) sum_j psi_j e^{-i l phi_j}|^2.
template <typename F>
void for_each_harmonic(const StateGrid& g, F&& visit) {
  const int np = static_cast<int>(g.n_phi());
  std::vector<Complex> table(static_cast<std::size_t>(np));
  for (int j = 0; j < np; ++j) table[j] = std::polar(1.0, -g.phi[j]);
  for (std::size_t i = 0; i < g.n_rho(); ++i) {
    const Complex* row = &g.values[i * np];
    for (int m = 0; m < np; ++m) {
      const int l = (m <= np / 2 - (np % 2 == 0 ? 1 : 0)) ? m : m - np;
      Complex acc{};
      for (int j = 0; j < np; ++j) acc += row[j] * table[(static_cast<long>(m) * j) % np];
      acc /= static_cast<double>(np);
      visit(i, l, std::norm(acc));
    }
  }
}

}  // namespace

ComponentSpectra component_split(const ModeSpectrum& spec) {
  ComponentSpectra out{empty_like(spec), empty_like(spec), empty_like(spec)};
  for (const auto& [idx, c] : spec.entries) {
    ModeSpectrum& target = idx.l > 0 ? out.plus : (idx.l < 0 ? out.minus : out.zero);
    target.entries[idx] = c;
  }
  out.plus.recompute_captured_norm();
  out.minus.recompute_captured_norm();
  out.zero.recompute_captured_norm();
  return out;
}

ModeSpectrum reference_evolve(const ModeSpectrum& part, double tau) {
  ModeSpectrum out = part;
  const double w = part.convention.omega0;
  for (auto& [idx, c] : out.entries) c *= std::polar(1.0, -w * (2.0 * idx.n + 1.0) * tau);
  return out;
}

Complex evaluate(const ModeSpectrum& spec, double rho, double phi) {
  Complex s{};
  for (const auto& [idx, c] : spec.entries)
    if (c != Complex{}) s += c * lgbasis::basis_eval(idx, spec.convention, rho, phi);
  return s;
}

double gouy_phase(ModeIndex idx, BasisConvention conv, double phase_advance) {
  return lgbasis::eigenvalue(idx, conv) * phase_advance;
}

PropagationResult synthesize(const ModeSpectrum& spec, const envelope::EnvelopeSolution& env, int charge_sign,
                             double z, const GridSpec& gs, Execution exec) {
  if (spec.entries.empty()) throw ConfigError("synthesize: empty spectrum");
  check_convention(spec, env);
  PropagationResult res;
  res.envelope = env.at(z);
  res.angles = envelope::rotation_angles(env, charge_sign, z);
  const double b = res.envelope.b;
  const double tau = res.envelope.phase_advance;
  const Plan plan = make_plan(spec, tau, res.angles);

  if (gs.n_phi < 4 * plan.max_abs_l) {
    std::ostringstream os;
    os << "synthesize: angular grid too coarse, n_phi = " << gs.n_phi << " < 4 * |l|max = " << 4 * plan.max_abs_l;
    throw ConfigError(os.str());
  }
  StateGrid base;
  if (gs.rho.empty()) {
    const double extent = b * std::max(gs.extent_factor, plan.widest_mode + 5.0);
    const QuadratureRule q = gauss_legendre(gs.n_rho, 0.0, extent);
    std::vector<double> w(q.nodes.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = q.weights[i] * q.nodes[i];
    base = make_polar_grid(q.nodes, std::move(w), gs.n_phi, z);
  } else {
    base = make_polar_grid(gs.rho, gs.rho_weight, gs.n_phi, z);
  }

  const bool parallel = exec == Execution::parallel;
  const double chirp_rate = res.envelope.b_prime / b;
  for (int k = 0; k < 3; ++k) {
    res.components[k] = base;
    fill_component(plan.components[k], spec.convention, b, chirp_rate, res.components[k], parallel);
  }
  res.total = base;
  for (std::size_t q = 0; q < base.values.size(); ++q)
    res.total.values[q] = res.components[0].values[q] + res.components[1].values[q] + res.components[2].values[q];

  // Spectral observables from the evolved coefficients.
  double weight = 0.0, lz = 0.0, gouy = 0.0;
  for (const auto& blocks : plan.components)
    for (const auto& blk : blocks)
      for (std::size_t n = 0; n < blk.coeffs.size(); ++n) {
        const double p = std::norm(blk.coeffs[n]);
        weight += p;
        lz += blk.l * p;
        gouy += p * gouy_phase({static_cast<int>(n), blk.l}, spec.convention, tau);
      }
  res.observables.norm = res.total.norm();
  res.observables.mean_lz = weight > 0.0 ? lz / weight : 0.0;
  res.observables.gouy_phase = weight > 0.0 ? gouy / weight : 0.0;
  double r2 = 0.0;
  const std::size_t np = res.total.n_phi();
  for (std::size_t i = 0; i < res.total.n_rho(); ++i) {
    double ring = 0.0;
    for (std::size_t j = 0; j < np; ++j) ring += std::norm(res.total.values[i * np + j]);
    r2 += res.total.rho_weight[i] * res.total.rho[i] * res.total.rho[i] * ring;
  }
  r2 *= res.total.phi_weight();
  res.observables.mean_rho2 = res.observables.norm > 0.0 ? r2 / res.observables.norm : 0.0;
  return res;
}

std::vector<Complex> evaluate_points(const ModeSpectrum& spec, const envelope::EnvelopeSolution& env,
                                     int charge_sign, double z, std::span<const std::pair<double, double>> points) {
  check_convention(spec, env);
  const auto p = env.at(z);
  const auto angles = envelope::rotation_angles(env, charge_sign, z);
  const Plan plan = make_plan(spec, p.phase_advance, angles);
  std::vector<Complex> out(points.size());
  const int count = static_cast<int>(points.size());
#pragma omp parallel for schedule(static)
  for (int q = 0; q < count; ++q) {
    const auto [rho, phi] = points[q];
    const double u = rho / p.b;
    const Complex prefactor = std::polar(1.0 / p.b, 0.5 * (p.b_prime / p.b) * rho * rho);
    std::vector<double> rad;
    Complex s{};
    for (const auto& blocks : plan.components)
      for (const auto& blk : blocks) {
        rad.resize(blk.coeffs.size());
        lgbasis::radial_sequence(blk.l, spec.convention, u, rad);
        Complex a{};
        for (std::size_t n = 0; n < rad.size(); ++n) a += blk.coeffs[n] * rad[n];
        s += a * std::polar(1.0, blk.l * phi);
      }
    out[q] = s * prefactor;
  }
  return out;
}

Complex pure_mode_solution(ModeIndex idx, BasisConvention conv, const envelope::EnvelopeSolution& env,
                           int charge_sign, double z, double rho, double phi) {
  const auto p = env.at(z);
  const double larmor = charge_sign * p.omega_integral;
  const Complex mode = lgbasis::basis_eval(idx, conv, rho / p.b, phi) / p.b;
  const double phase = 0.5 * (p.b_prime / p.b) * rho * rho - gouy_phase(idx, conv, p.phase_advance) + idx.l * larmor;
  return mode * std::polar(1.0, phase);
}

double grid_mean_lz(const StateGrid& grid) {
  double num = 0.0, den = 0.0;
  std::vector<double> ring_num(grid.n_rho(), 0.0), ring_den(grid.n_rho(), 0.0);
  for_each_harmonic(grid, [&](std::size_t i, int l, double e) {
    ring_num[i] += l * e;
    ring_den[i] += e;
  });
  for (std::size_t i = 0; i < grid.n_rho(); ++i) {
    num += grid.rho_weight[i] * ring_num[i];
    den += grid.rho_weight[i] * ring_den[i];
  }
  return den > 0.0 ? num / den : 0.0;
}

Resolution resolution(const StateGrid& grid) {
  Resolution r;
  const double total = grid.norm();
  if (!(total > 0.0)) return r;
  const std::size_t np = grid.n_phi();
  const std::size_t last = grid.n_rho() - 1;
  double edge = 0.0;
  for (std::size_t j = 0; j < np; ++j) edge += std::norm(grid.values[last * np + j]);
  r.edge_fraction = grid.rho_weight[last] * edge * grid.phi_weight() / total;

  const int cutoff = static_cast<int>(np) / 4;
  double tail = 0.0, all = 0.0;
  for_each_harmonic(grid, [&](std::size_t i, int l, double e) {
    all += grid.rho_weight[i] * e;
    if (std::abs(l) >= cutoff) tail += grid.rho_weight[i] * e;
  });
  r.angular_tail_fraction = all > 0.0 ? tail / all : 0.0;
  return r;
}

Observables observables(const StateGrid& grid, const ModeSpectrum* spectrum) {
  grid.validate();
  const Resolution res = resolution(grid);
  if (!res.resolved()) {
    std::ostringstream os;
    os << "observables: grid does not resolve the state (edge fraction " << res.edge_fraction
       << ", angular tail fraction " << res.angular_tail_fraction << ")";
    throw NumericalError(os.str());
  }
  Observables o;
  o.norm = grid.norm();
  if (spectrum) {
    double w = 0.0, lz = 0.0;
    for (const auto& [idx, c] : spectrum->entries) {
      w += std::norm(c);
      lz += idx.l * std::norm(c);
    }
    o.mean_lz = w > 0.0 ? lz / w : 0.0;
  } else {
    o.mean_lz = grid_mean_lz(grid);
  }
  const std::size_t np = grid.n_phi();
  double r2 = 0.0;
  for (std::size_t i = 0; i < grid.n_rho(); ++i) {
    double ring = 0.0;
    for (std::size_t j = 0; j < np; ++j) ring += std::norm(grid.values[i * np + j]);
    r2 += grid.rho_weight[i] * grid.rho[i] * grid.rho[i] * ring;
  }
  o.mean_rho2 = o.norm > 0.0 ? r2 * grid.phi_weight() / o.norm : 0.0;
  return o;
}

}  // namespace twistbeam::propagation
