#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <cstdlib>
#include <set>
#include <string>
#include <vector>

#include "twistbeam/config.hpp"
#include "twistbeam/decomposition.hpp"
#include "twistbeam/envelope.hpp"
#include "twistbeam/fields.hpp"
#include "twistbeam/oracle.hpp"
#include "twistbeam/propagation.hpp"

using namespace twistbeam;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

double glaser_omega(double z) { return 2.0 * 16.0 / (16.0 + (z - 15.0) * (z - 15.0)); }

int failures = 0;

void report(int id, bool pass, const std::string& what) {
  std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", what.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, static_cast<double>(args)...);
  return buf;
}

const envelope::EnvelopeSolution& glaser_env() {
  static const auto env = envelope::solve_ermakov(glaser_omega, 1.0, 0.0, 0.0, 30.0);
  return env;
}

decomposition::QuadSpec arc_quad(int radial, int angular) {
  decomposition::QuadSpec q;
  q.radial_order = radial;
  q.angular_order = angular;
  q.angular_breakpoints = {0.0, std::numbers::pi};
  q.convergence_tol = 1.0;
  return q;
}

void criteria_1_2() {
  const auto t0 = Clock::now();
  double worst = 0.0, worst_zero = 0.0;
  bool exact = true;
  for (int na : {0, 1})
    for (int la : {1, -3, 4}) {
      const auto psi = decomposition::state_sampler({decomposition::HalfBlockedState{na, la}});
      const Truncation t{8, -12, 12};
      const auto q1 = decomposition::overlap_table(psi, t, {}, arc_quad(150, 48));
      const auto q2 = decomposition::overlap_table(psi, t, {}, arc_quad(300, 96));
      for (const auto& [idx, v] : q2.values) {
        const Complex c = decomposition::arc_coefficient(na, la, idx.n, idx.l);
        const int dl = idx.l - la;
        if (dl != 0 && dl % 2 == 0) {
          exact = exact && c == Complex(0.0, 0.0);
          worst_zero = std::max({worst_zero, std::abs(v), std::abs(q1.values.at(idx))});
          continue;
        }
        if (idx.l == la) {
          const Complex want = idx.n == na ? Complex(0.5, 0.0) : Complex(0.0, 0.0);
          exact = exact && c == want;
          if (idx.n != na) {
            worst_zero = std::max({worst_zero, std::abs(v), std::abs(q1.values.at(idx))});
            continue;
          }
        }
        worst = std::max(worst, std::abs(c - v) / std::abs(c));
      }
    }
  const double elapsed = seconds_since(t0);
  report(1, worst < 1e-10 && elapsed < 60.0,
         fmt("closed form vs doubled-order quadrature: max rel err %.3g (tol 1e-10), %.1f s (limit 60 s)", worst, elapsed));
  report(2, exact && worst_zero < 1e-14,
         fmt("anchor c = 1/2 and selection-rule zeros exact in closed form; quadrature zeros below %.2g", worst_zero));
}

void criterion_3() {
  const decomposition::InitialState s{decomposition::HalfBlockedState{0, 1}};
  const auto spec = decomposition::decompose(s, Truncation{12, -25, 25});
  bool monotone = true;
  double prev = spec.source_norm;
  std::string widths;
  for (int w = 1; w <= 40; ++w) {
    const auto t = decomposition::decompose(s, Truncation{12, -w, w});
    monotone = monotone && t.deficit() <= prev;
    prev = t.deficit();
  }
  report(3, spec.captured_norm >= 0.49 && monotone,
         fmt("captured norm %.8f of source %.3g (need >= 0.49); deficit monotone in |l| window: ", spec.captured_norm,
             spec.source_norm) +
             (monotone ? "yes" : "no"));
}

void criterion_4() {
  double free_err = 0.0;
  for (auto [b0, bp] : {std::pair{1.0, 0.0}, std::pair{0.5, 0.3}, std::pair{2.0, -0.4}}) {
    const auto sol = envelope::solve_ermakov([](double) { return 0.0; }, b0, bp, 0.0, 20.0);
    for (int k = 0; k <= 2000; ++k) {
      const double z = 0.01 * k;
      const double ref = (b0 + bp * z) * (b0 + bp * z) + z * z / (b0 * b0);
      free_err = std::max(free_err, std::abs(sol.at(z).beta() - ref) / ref);
    }
  }
  const auto m = envelope::solve_ermakov([](double) { return 1.0; }, 1.0, 0.0, 0.0, 30.0);
  double matched = 0.0;
  for (int k = 0; k <= 3000; ++k) matched = std::max(matched, std::abs(m.at(0.01 * k).b - 1.0));
  const double ep = envelope::ep_invariant(glaser_env(), glaser_omega).max_abs_residual;
  report(4, free_err < 1e-8 && matched < 1e-10 && ep < 1e-8,
         fmt("free-space b^2 rel err %.3g (1e-8); matched |b-1| %.3g (1e-10); Glaser residual %.3g (1e-8)", free_err,
             matched, ep));
}

void criterion_5() {
  double ident = 0.0;
  for (int q : {1, -1})
    for (const auto& a : envelope::rotation_angles(glaser_env(), q))
      ident = std::max(ident, std::abs(a.plus + a.minus - 2.0 * a.larmor));
  const auto m = envelope::solve_ermakov([](double) { return 1.0; }, 1.0, 0.0, 0.0, 30.0);
  double co = 0.0;
  for (const auto& a : envelope::rotation_angles(m, 1)) co = std::max(co, std::abs(a.plus));
  report(5, ident < 1e-10 && co < 1e-10,
         fmt("max |phi+ + phi- - 2 larmor| %.3g (1e-10); matched co-rotating max |phi+| %.3g (1e-10)", ident, co));
}

double distance_on_oracle_grid(const ModeSpectrum& spec, const envelope::EnvelopeSolution& env, int charge, double z,
                               const StateGrid& g) {
  propagation::GridSpec gs;
  gs.rho = g.rho;
  gs.rho_weight = g.rho_weight;
  gs.n_phi = static_cast<int>(g.n_phi());
  return oracle::l2_distance(propagation::synthesize(spec, env, charge, z, gs).total, g);
}

double worst_oracle_drift = 0.0;

void criterion_6() {
  const auto t0 = Clock::now();
  const auto spec = decomposition::decompose({decomposition::PureState{0, 1}}, Truncation::around(1));
  oracle::OracleConfig cfg;
  const std::vector<double> zs{5.0, 10.0, 16.0, 20.0, 25.0, 30.0};
  const auto r = oracle::oracle_propagate(oracle::lg_state(0, 1), glaser_omega, -1, 0.0, zs, cfg);
  double worst = 0.0;
  for (std::size_t k = 0; k < zs.size(); ++k)
    worst = std::max(worst, distance_on_oracle_grid(spec, glaser_env(), -1, zs[k], r.snapshots[k]));
  for (double d : r.level_norm_drift) worst_oracle_drift = std::max(worst_oracle_drift, d);
  const double elapsed = seconds_since(t0);

  // Same mesh, halving the step: the differences isolate the z-step error. A beam matched to
  // the frame is nearly stationary there, so this one starts 40% wider and breathes.
  std::vector<StateGrid> runs;
  for (double dz : {8e-3, 4e-3, 2e-3}) {
    oracle::OracleConfig c = cfg;
    c.richardson_levels = 1;
    c.dz = dz;
    c.boundary_tol = 1e-6;
    runs.push_back(oracle::oracle_propagate(oracle::lg_state(0, 1, 1.0, 1.4), glaser_omega, -1, 0.0, {30.0}, c).snapshots[0]);
  }
  const double d01 = oracle::l2_distance(runs[0], runs[1]);
  const double d12 = oracle::l2_distance(runs[1], runs[2]);
  const double ratio = d01 / d12;
  report(6, worst < 1e-4 && std::abs(ratio - 4.0) < 0.4 && elapsed < 300.0,
         fmt("max distance %.3g over z in [5, 30] (1e-4); dz-halving error ratio %.3f (second order: 4, differences %.3g, %.3g); %.1f s (limit 300 s)",
             worst, ratio, d01, d12, elapsed));
}

// Relative L1 mismatch between a component's intensity at z and its initial intensity
// scaled by b and rotated by the component angle.
double revival_mismatch(const ModeSpectrum& part, const StateGrid& grid, double b, double angle) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < grid.n_rho(); ++i)
    for (std::size_t j = 0; j < grid.n_phi(); ++j) {
      const double ref = std::norm(propagation::evaluate(part, grid.rho[i] / b, grid.phi[j] + angle)) / (b * b);
      num += grid.rho_weight[i] * std::abs(std::norm(grid.at(i, j)) - ref);
      den += grid.rho_weight[i] * ref;
    }
  return num / den;
}

void criterion_7() {
  const fs::path dir = fs::path(TWISTBEAM_SOURCE_DIR) / "configs";
  bool pass = true;
  std::string detail;
  for (const char* name : {"fig2_half_blocked_l1.json", "fig2_half_blocked_lm3.json"}) {
    const auto t0 = Clock::now();
    const auto rc = config::load_config(dir / name);
    const auto spec = decomposition::decompose(rc.initial_state(), rc.truncation);
    const auto& b = rc.beam;
    const auto r = oracle::oracle_propagate(oracle::half_blocked_state(b.n_a, b.l_a), glaser_omega, b.charge_sign,
                                            rc.z.start, rc.z.snapshots, rc.verify.oracle);
    double worst = 0.0;
    for (std::size_t k = 0; k < rc.z.snapshots.size(); ++k)
      worst = std::max(worst, distance_on_oracle_grid(spec, glaser_env(), b.charge_sign, rc.z.snapshots[k], r.snapshots[k]));
    for (double d : r.level_norm_drift) worst_oracle_drift = std::max(worst_oracle_drift, d);
    const double rel_deficit = spec.deficit() / spec.source_norm;
    const double bound = std::sqrt(rel_deficit) + 5e-3;
    const double abs_bound = std::sqrt(spec.deficit()) + 5e-3;
    pass = pass && worst <= bound;
    detail += fmt("l_a=%+.0f: distance %.4f <= %.4f (relative deficit; absolute-deficit reading %.4f), ", b.l_a, worst,
                  bound, abs_bound);
    detail += fmt("%.0f s; ", seconds_since(t0));
  }

  double revival = 0.0;
  for (int la : {1, -3}) {
    const auto spec = decomposition::decompose({decomposition::HalfBlockedState{0, la}}, Truncation::around(la));
    const auto parts = propagation::component_split(spec);
    const double zpi = glaser_env().z_at_phase_advance(std::numbers::pi);
    const auto res = propagation::synthesize(spec, glaser_env(), -1, zpi);
    const double b = res.envelope.b;
    using propagation::Component;
    revival = std::max(revival, revival_mismatch(parts.plus, res.components[int(Component::plus)], b, res.angles.plus));
    revival = std::max(revival, revival_mismatch(parts.minus, res.components[int(Component::minus)], b, res.angles.minus));
    revival = std::max(revival, revival_mismatch(parts.zero, res.components[int(Component::zero)], b, res.angles.larmor));
  }
  pass = pass && revival < 1e-3;
  report(7, pass, detail + fmt("revival at phase advance pi: component L1 mismatch %.3g (1e-3)", revival));
}

void criterion_8() {
  double norm_drift = 0.0, lz_drift = 0.0;
  for (const decomposition::InitialState& s :
       {decomposition::InitialState{decomposition::PureState{0, 1}}, decomposition::InitialState{decomposition::HalfBlockedState{0, 1}},
        decomposition::InitialState{decomposition::HalfBlockedState{0, -3}}}) {
    const int la = std::holds_alternative<decomposition::PureState>(s.shape) ? 1
                                                                               : std::get<decomposition::HalfBlockedState>(s.shape).l;
    const auto spec = decomposition::decompose(s, Truncation::around(la));
    const auto o0 = propagation::synthesize(spec, glaser_env(), -1, 0.0).observables;
    for (int k = 1; k <= 60; ++k) {
      const auto o = propagation::synthesize(spec, glaser_env(), -1, 0.5 * k).observables;
      norm_drift = std::max(norm_drift, std::abs(o.norm - o0.norm));
      lz_drift = std::max(lz_drift, std::abs(o.mean_lz - o0.mean_lz));
    }
  }
  report(8, norm_drift < 1e-8 && lz_drift < 1e-8 && worst_oracle_drift < 1e-8,
         fmt("closed-form norm drift %.3g, mean Lz drift %.3g, oracle norm drift %.3g (all 1e-8)", norm_drift, lz_drift,
             worst_oracle_drift));
}

void criterion_9() {
  using namespace fields;
  const double R = 0.01, L = 2000.0 * R, I = 1000.0;
  SolenoidGeometry sol;
  sol.sheets = {{{-L, R, I}, {L, R, I}}};
  sol.z_min = -L;
  sol.z_max = L;
  const double solenoid = std::abs(biot_savart_onaxis(sol, 0.0).value - kMu0 * I) / (kMu0 * I);

  const double eps = 0.02e-6;
  SolenoidGeometry thin;
  const double lo = 0.1 - eps / 2, hi = 0.1 + eps / 2;
  thin.sheets = {{{lo, 0.02, 5.0 / (hi - lo)}, {hi, 0.02, 5.0 / (hi - lo)}}};
  thin.z_min = -1.0;
  thin.z_max = 1.0;
  double loop = 0.0;
  for (double z : {-0.2, 0.0, 0.05, 0.1, 0.25}) {
    const double d = z - 0.1;
    const double ref = 0.5 * kMu0 * 5.0 * 0.02 * 0.02 / std::pow(d * d + 0.02 * 0.02, 1.5);
    loop = std::max(loop, std::abs(biot_savart_onaxis(thin, z).value - ref) / ref);
  }
  report(9, solenoid < 1e-6 && loop < 1e-10,
         fmt("long solenoid vs mu0 I rel err %.3g (1e-6); thin sheet vs loop closed form %.3g (1e-10)", solenoid, loop));
}

void criterion_10() {
  bool structure = true;
  std::string detail;
  for (int la : {1, -3}) {
    const auto spec = decomposition::decompose({decomposition::HalfBlockedState{0, la}}, Truncation::around(la));
    ModeIndex peak{};
    double best = -1.0;
    bool support = true;
    for (const auto& [idx, c] : spec.entries) {
      if (std::abs(c) > best) {
        best = std::abs(c);
        peak = idx;
      }
      const int dl = idx.l - la;
      if (dl != 0 && dl % 2 == 0 && c != Complex(0.0, 0.0)) support = false;
      if (dl % 2 != 0 && idx.n == 0 && std::abs(dl) <= 5 && c == Complex(0.0, 0.0)) support = false;
    }
    structure = structure && peak.l == la && support;
    detail += fmt("(0,%+.0f) peak at l=%+.0f, support %s; ", la, peak.l) + (support ? "l_a and odd offsets" : "VIOLATED") + "; ";
  }
  int turns_b = 0, turns_minus = 0;
  bool plus_monotone = true;
  const auto& env = glaser_env();
  double pb = 0.0, pp = 0.0, pm = 0.0;
  double prev_b = env.at(0.0).b, prev_plus = 0.0, prev_minus = 0.0;
  for (int k = 1; k <= 3000; ++k) {
    const double z = 0.01 * k;
    const double b = env.at(z).b;
    const auto a = envelope::rotation_angles(env, -1, z);
    const double db = b - prev_b, dp = a.plus - prev_plus, dm = a.minus - prev_minus;
    if (k > 1) {
      if (db * pb < 0) ++turns_b;
      if (dm * pm < 0) ++turns_minus;
      if (dp * pp <= 0) plus_monotone = false;
    }
    pb = db;
    pp = dp;
    pm = dm;
    prev_b = b;
    prev_plus = a.plus;
    prev_minus = a.minus;
  }
  const bool fig2 = turns_b >= 1 && turns_minus >= 1 && plus_monotone;
  report(10, structure && fig2,
         detail + fmt("b turning points %.0f, phi- turning points %.0f, phi+ monotone ", turns_b, turns_minus) +
             (plus_monotone ? "yes" : "no"));
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  auto want = [&](int c) { return only.empty() || only.count(c) > 0; };
  if (want(1) || want(2)) criteria_1_2();
  if (want(3)) criterion_3();
  if (want(4)) criterion_4();
  if (want(5)) criterion_5();
  if (want(6)) criterion_6();
  if (want(7)) criterion_7();
  if (want(8)) criterion_8();
  if (want(9)) criterion_9();
  if (want(10)) criterion_10();
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
