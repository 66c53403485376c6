#include "twistbeam/decomposition.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "twistbeam/errors.hpp"
#include "twistbeam/special.hpp"

namespace twistbeam {

void Truncation::validate() const {
  if (n_max < 0) throw ConfigError("truncation: n_max must be non-negative");
  if (l_max < l_min) throw ConfigError("truncation: l_max must be >= l_min");
}

void ModeSpectrum::recompute_captured_norm() {
  captured_norm = 0.0;
  for (const auto& [idx, c] : entries) captured_norm += std::norm(c);
}

Complex ModeSpectrum::coefficient(ModeIndex idx) const {
  auto it = entries.find(idx);
  return it == entries.end() ? Complex{} : it->second;
}

namespace decomposition {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double phi) {
  double p = std::fmod(phi, kTwoPi);
  if (p < 0.0) p += kTwoPi;
  return p;
}

struct Grid2D {
  std::vector<double> rho, rho_weight;  // rho_weight includes the rho Jacobian
  std::vector<double> phi, phi_weight;
};

std::vector<double> normalized_breakpoints(std::vector<double> bps) {
  for (auto& b : bps) b = wrap_angle(b);
  std::sort(bps.begin(), bps.end());
  bps.erase(std::unique(bps.begin(), bps.end(), [](double a, double b) { return std::abs(a - b) < 1e-14; }),
            bps.end());
  return bps;
}

void angular_rule(int order, const std::vector<double>& breakpoints, Grid2D& g) {
  g.phi.clear();
  g.phi_weight.clear();
  const auto bps = normalized_breakpoints(breakpoints);
  if (bps.empty()) {
    for (int j = 0; j < order; ++j) {
      g.phi.push_back(kTwoPi * j / order);
      g.phi_weight.push_back(kTwoPi / order);
    }
    return;
  }
  const std::size_t pieces = bps.size();
  const int per_piece = std::max(16, order / static_cast<int>(pieces));
  for (std::size_t k = 0; k < pieces; ++k) {
    const double a = bps[k];
    const double b = (k + 1 < pieces) ? bps[k + 1] : bps[0] + kTwoPi;
    const auto rule = gauss_legendre(per_piece, a, b);
    for (int j = 0; j < per_piece; ++j) {
      g.phi.push_back(wrap_angle(rule.nodes[j]));
      g.phi_weight.push_back(rule.weights[j]);
    }
  }
}

double default_extent(int n_max, int max_abs_l, BasisConvention conv) {
  return (std::sqrt(2.0 * n_max + max_abs_l + 1.0) + 10.0) / std::sqrt(conv.omega0);
}

Grid2D make_grid(int radial_order, int angular_order, double extent, const std::vector<double>& breakpoints) {
  Grid2D g;
  const auto rule = gauss_legendre(radial_order, 0.0, extent);
  g.rho = rule.nodes;
  g.rho_weight.resize(rule.weights.size());
  for (std::size_t i = 0; i < rule.weights.size(); ++i) g.rho_weight[i] = rule.weights[i] * rule.nodes[i];
  angular_rule(angular_order, breakpoints, g);
  return g;
}

// Table of c_{n,l} over the window for one grid. Parallel over radial nodes for sampling and
// angular projection, over l for the radial projection.
std::map<ModeIndex, Complex> table_on_grid(const Sampler& psi0, const Truncation& trunc, BasisConvention conv,
                                           const Grid2D& g, bool parallel) {
  const int nr = static_cast<int>(g.rho.size());
  const int np = static_cast<int>(g.phi.size());
  const int nl = trunc.l_max - trunc.l_min + 1;
  const int nn = trunc.n_max + 1;

  // projections[i * nl + (l - l_min)] = sum_j w_j psi(rho_i, phi_j) e^{-i l phi_j}
  std::vector<Complex> phases(static_cast<std::size_t>(nl) * np);
  for (int li = 0; li < nl; ++li)
    for (int j = 0; j < np; ++j) phases[static_cast<std::size_t>(li) * np + j] = std::polar(1.0, -(trunc.l_min + li) * g.phi[j]);

  std::vector<Complex> projections(static_cast<std::size_t>(nr) * nl);
  auto project_row = [&](int i) {
    std::vector<Complex> row(np);
    for (int j = 0; j < np; ++j) row[j] = psi0(g.rho[i], g.phi[j]) * g.phi_weight[j];
    for (int li = 0; li < nl; ++li) {
      const Complex* ph = &phases[static_cast<std::size_t>(li) * np];
      Complex acc{};
      for (int j = 0; j < np; ++j) acc += row[j] * ph[j];
      projections[static_cast<std::size_t>(i) * nl + li] = acc;
    }
  };

  std::vector<Complex> coeffs(static_cast<std::size_t>(nl) * nn);
  auto radial_column = [&](int li) {
    const int l = trunc.l_min + li;
    std::vector<double> rad(nn);
    std::vector<Complex> acc(nn);
    for (int i = 0; i < nr; ++i) {
      lgbasis::radial_sequence(l, conv, g.rho[i], rad);
      const Complex p = projections[static_cast<std::size_t>(i) * nl + li] * g.rho_weight[i];
      for (int n = 0; n < nn; ++n) acc[n] += rad[n] * p;
    }
    for (int n = 0; n < nn; ++n) coeffs[static_cast<std::size_t>(li) * nn + n] = acc[n];
  };

  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < nr; ++i) project_row(i);
#pragma omp parallel for schedule(dynamic)
    for (int li = 0; li < nl; ++li) radial_column(li);
  } else {
    for (int i = 0; i < nr; ++i) project_row(i);
    for (int li = 0; li < nl; ++li) radial_column(li);
  }

  std::map<ModeIndex, Complex> out;
  for (int li = 0; li < nl; ++li)
    for (int n = 0; n < nn; ++n) out[{n, trunc.l_min + li}] = coeffs[static_cast<std::size_t>(li) * nn + n];
  return out;
}

OverlapTable overlap_table_impl(const Sampler& psi0, const Truncation& trunc, BasisConvention conv,
                                const QuadSpec& quad, bool parallel) {
  trunc.validate();
  conv.validate();
  if (quad.radial_order < 1 || quad.angular_order < 1) throw ConfigError("quadrature orders must be positive");
  const double extent = quad.radial_extent.value_or(default_extent(trunc.n_max, trunc.max_abs_l(), conv));
  const Grid2D coarse = make_grid(quad.radial_order, quad.angular_order, extent, quad.angular_breakpoints);
  const Grid2D fine = make_grid(2 * quad.radial_order, 2 * quad.angular_order, extent, quad.angular_breakpoints);
  OverlapTable t;
  const auto lo = table_on_grid(psi0, trunc, conv, coarse, parallel);
  t.values = table_on_grid(psi0, trunc, conv, fine, parallel);
  for (const auto& [idx, c] : t.values) t.error_estimate = std::max(t.error_estimate, std::abs(c - lo.at(idx)));
  return t;
}

}  // namespace

Sampler state_sampler(const InitialState& state, BasisConvention conv) {
  conv.validate();
  return std::visit(
      [conv](const auto& s) -> Sampler {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PureState>) {
          const ModeIndex idx{s.n, s.l};
          if (idx.n < 0) throw ConfigError("pure state: n must be non-negative");
          return [idx, conv](double rho, double phi) { return lgbasis::basis_eval(idx, conv, rho, phi); };
        } else if constexpr (std::is_same_v<T, HalfBlockedState>) {
          const ModeIndex idx{s.n, s.l};
          if (idx.n < 0) throw ConfigError("half-blocked state: n must be non-negative");
          return [idx, conv](double rho, double phi) {
            const double p = wrap_angle(phi);
            return (p <= std::numbers::pi) ? lgbasis::basis_eval(idx, conv, rho, phi) : Complex{};
          };
        } else {
          if (!s.psi) throw ConfigError("custom state: sampler is empty");
          return s.psi;
        }
      },
      state.shape);
}

Sampler map_initial(const InitialState& state, BasisConvention conv) {
  if (!(state.b0 > 0.0)) throw ConfigError("map_initial: b0 must be positive");
  Sampler psi = state_sampler(state, conv);
  const double b0 = state.b0;
  const double chirp = b0 * state.b0_prime;
  if (b0 == 1.0 && chirp == 0.0) return psi;
  return [psi, b0, chirp](double rho, double phi) {
    return b0 * psi(b0 * rho, phi) * std::polar(1.0, -0.5 * chirp * rho * rho);
  };
}

std::vector<double> angular_breakpoints(const InitialState& state) {
  if (std::holds_alternative<HalfBlockedState>(state.shape)) return {0.0, std::numbers::pi};
  if (const auto* c = std::get_if<CustomState>(&state.shape)) return c->angular_breakpoints;
  return {};
}

OverlapValue overlap_quadrature(const Sampler& psi0, ModeIndex idx, BasisConvention conv, const QuadSpec& quad) {
  if (idx.n < 0) throw ConfigError("mode index: n must be non-negative");
  const Truncation single{idx.n, idx.l, idx.l};
  QuadSpec q = quad;
  if (!q.radial_extent) q.radial_extent = default_extent(idx.n, std::abs(idx.l), conv);
  const OverlapTable t = overlap_table_impl(psi0, single, conv, q, false);
  // Error estimate is the largest doubled-order difference over n = 0..idx.n at this l.
  const OverlapValue v{t.values.at(idx), t.error_estimate};
  if (v.error_estimate > q.convergence_tol) {
    std::ostringstream os;
    os << "overlap_quadrature: no convergence for (n=" << idx.n << ", l=" << idx.l << "), |c(N) - c(2N)| = "
       << v.error_estimate;
    throw NumericalError(os.str());
  }
  return v;
}

OverlapTable overlap_table(const Sampler& psi0, const Truncation& trunc, BasisConvention conv, const QuadSpec& quad,
                           Execution exec) {
  return overlap_table_impl(psi0, trunc, conv, quad, exec == Execution::parallel);
}

Complex arc_coefficient(int n_a, int l_a, int n, int l) {
  if (n < 0 || n_a < 0) throw ConfigError("arc_coefficient: radial numbers must be non-negative");
  const int dl = l - l_a;
  if (dl != 0 && dl % 2 == 0) return {0.0, 0.0};
  if (dl == 0) return {n == n_a ? 0.5 : 0.0, 0.0};

  const int al = std::abs(l);
  const int ala = std::abs(l_a);
  const double half_sum = 0.5 * (al + ala);
  const double gamma = 0.5 * (al - ala);

  long double sum = 0.0L;
  for (int k = 0; k <= n; ++k) {
    const long double term = static_cast<long double>(generalized_binomial(n_a + ala, k)) *
                             generalized_binomial(k + gamma, n_a) *
                             generalized_binomial(half_sum + n - k - 1.0, n - k);
    sum += ((n_a + k) % 2 == 0) ? term : -term;
  }
  const double log_prefactor = 0.5 * (log_factorial(n) + log_factorial(n_a) - log_factorial(n + al) -
                                      log_factorial(n_a + ala)) +
                               std::lgamma(half_sum + 1.0);
  const double radial = std::exp(log_prefactor) * static_cast<double>(sum);
  return {0.0, radial * (2.0 / (l_a - l)) / kTwoPi};
}

double source_norm(const InitialState& state, BasisConvention conv, const QuadSpec& quad) {
  if (std::holds_alternative<PureState>(state.shape)) return 1.0;
  if (std::holds_alternative<HalfBlockedState>(state.shape)) return 0.5;
  const auto& custom = std::get<CustomState>(state.shape);
  if (custom.source_norm) return *custom.source_norm;
  // |psi|^2 integrated on the physical plane; the initial map is unitary.
  const Sampler psi = state_sampler(state, conv);
  const double extent = quad.radial_extent.value_or(default_extent(0, 0, conv) * 2.0);
  const Grid2D g = make_grid(2 * quad.radial_order, 2 * quad.angular_order, extent, custom.angular_breakpoints);
  double total = 0.0;
  for (std::size_t i = 0; i < g.rho.size(); ++i)
    for (std::size_t j = 0; j < g.phi.size(); ++j) total += g.rho_weight[i] * g.phi_weight[j] * std::norm(psi(g.rho[i], g.phi[j]));
  return total;
}

ModeSpectrum decompose(const InitialState& state, const Truncation& trunc, const DecomposeOptions& opts) {
  trunc.validate();
  opts.convention.validate();
  if (!(state.b0 > 0.0)) throw ConfigError("decompose: b0 must be positive");

  ModeSpectrum spec;
  spec.truncation = trunc;
  spec.convention = opts.convention;
  spec.source_norm = source_norm(state, opts.convention, opts.quad);
  const bool focal = state.b0 == 1.0 && state.b0_prime == 0.0;

  if (focal && std::holds_alternative<PureState>(state.shape)) {
    const auto& p = std::get<PureState>(state.shape);
    for (int l = trunc.l_min; l <= trunc.l_max; ++l)
      for (int n = 0; n <= trunc.n_max; ++n) spec.entries[{n, l}] = (n == p.n && l == p.l) ? Complex{1.0, 0.0} : Complex{};
  } else if (focal && std::holds_alternative<HalfBlockedState>(state.shape)) {
    const auto& h = std::get<HalfBlockedState>(state.shape);
    std::vector<std::pair<ModeIndex, Complex>> flat;
    for (int l = trunc.l_min; l <= trunc.l_max; ++l)
      for (int n = 0; n <= trunc.n_max; ++n) flat.push_back({{n, l}, {}});
    const int count = static_cast<int>(flat.size());
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < count; ++k) flat[k].second = arc_coefficient(h.n, h.l, flat[k].first.n, flat[k].first.l);
    for (const auto& [idx, c] : flat) spec.entries[idx] = c;
  } else {
    QuadSpec q = opts.quad;
    if (q.angular_breakpoints.empty()) q.angular_breakpoints = angular_breakpoints(state);
    const OverlapTable t = overlap_table(map_initial(state, opts.convention), trunc, opts.convention, q);
    if (t.error_estimate > q.convergence_tol) {
      std::ostringstream os;
      os << "decompose: overlap quadrature not converged, |c(N) - c(2N)| = " << t.error_estimate;
      throw NumericalError(os.str());
    }
    spec.entries = t.values;
  }
  spec.recompute_captured_norm();
  if (spec.source_norm > 0.0 && spec.captured_norm / spec.source_norm < opts.norm_floor) {
    std::ostringstream os;
    os << "captured norm fraction " << spec.captured_norm / spec.source_norm << " below floor " << opts.norm_floor
       << " (deficit " << spec.deficit() << ")";
    spec.warnings.push_back(os.str());
  }
  return spec;
}

}  // namespace decomposition
}  // namespace twistbeam
