#include "twistbeam/envelope.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "twistbeam/errors.hpp"

namespace twistbeam::envelope {

namespace {

using State = std::array<double, 4>;  // b, b', phase advance, omega integral

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct Rhs {
  const OmegaFn& omega;
  double w2;
  State operator()(double z, const State& y) const {
    const double om = omega(z);
    const double b = y[0];
    const double b2 = b * b;
    return {y[1], w2 / (b2 * b) - om * om * b, 1.0 / b2, om};
  }
};

State axpy(const State& y, double h, std::initializer_list<std::pair<double, const State*>> terms) {
  State r = y;
  for (const auto& [c, k] : terms)
    for (std::size_t i = 0; i < 4; ++i) r[i] += h * c * (*k)[i];
  return r;
}

EnvelopePoint make_point(double z, const State& y, double om, double w2) {
  EnvelopePoint p;
  p.z = z;
  p.b = y[0];
  p.b_prime = y[1];
  p.b_second = w2 / (y[0] * y[0] * y[0]) - om * om * y[0];
  p.phase_advance = y[2];
  p.omega_integral = y[3];
  p.omega = om;
  return p;
}

struct Quintic {
  double c[6];
  double value(double t) const { return c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * (c[4] + t * c[5])))); }
  double d1(double t) const {
    return c[1] + t * (2 * c[2] + t * (3 * c[3] + t * (4 * c[4] + t * 5 * c[5])));
  }
  double d2(double t) const { return 2 * c[2] + t * (6 * c[3] + t * (12 * c[4] + t * 20 * c[5])); }
};

Quintic quintic_hermite(double h, double p0, double d0, double s0, double p1, double d1, double s1) {
  Quintic q{};
  q.c[0] = p0;
  q.c[1] = h * d0;
  q.c[2] = 0.5 * h * h * s0;
  const double A = p1 - (q.c[0] + q.c[1] + q.c[2]);
  const double B = h * d1 - (q.c[1] + 2 * q.c[2]);
  const double C = h * h * s1 - 2 * q.c[2];
  q.c[3] = 10 * A - 4 * B + 0.5 * C;
  q.c[4] = -15 * A + 7 * B - C;
  q.c[5] = 6 * A - 3 * B + 0.5 * C;
  return q;
}

double cubic_hermite(double h, double t, double p0, double d0, double p1, double d1) {
  const double c1 = h * d0;
  const double A = p1 - p0 - c1;
  const double B = h * d1 - c1;
  return p0 + t * (c1 + t * ((3 * A - B) + t * (-2 * A + B)));
}

}  // namespace

EnvelopeSolution::EnvelopeSolution(std::vector<EnvelopePoint> nodes, double z_start, double reference_frequency)
    : nodes_(std::move(nodes)), z_start_(z_start), reference_frequency_(reference_frequency) {
  if (nodes_.empty()) throw ConfigError("EnvelopeSolution: no nodes");
}

EnvelopePoint EnvelopeSolution::at(double z) const {
  if (z < z_begin() - 1e-12 || z > z_end() + 1e-12) {
    std::ostringstream os;
    os << "envelope: z = " << z << " outside solved range [" << z_begin() << ", " << z_end() << "]";
    throw ConfigError(os.str());
  }
  if (nodes_.size() == 1) return nodes_.front();
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), z, [](double v, const EnvelopePoint& p) { return v < p.z; });
  std::size_t i = (it == nodes_.begin()) ? 0 : static_cast<std::size_t>(it - nodes_.begin()) - 1;
  if (i >= nodes_.size() - 1) i = nodes_.size() - 2;
  const EnvelopePoint& p0 = nodes_[i];
  const EnvelopePoint& p1 = nodes_[i + 1];
  const double h = p1.z - p0.z;
  const double t = std::clamp((z - p0.z) / h, 0.0, 1.0);
  if (t == 0.0) return p0;
  if (t == 1.0) return p1;

  const Quintic qb = quintic_hermite(h, p0.b, p0.b_prime, p0.b_second, p1.b, p1.b_prime, p1.b_second);
  auto tau_second = [](const EnvelopePoint& p) { return -2.0 * p.b_prime / (p.b * p.b * p.b); };
  const Quintic qt = quintic_hermite(h, p0.phase_advance, 1.0 / (p0.b * p0.b), tau_second(p0), p1.phase_advance,
                                     1.0 / (p1.b * p1.b), tau_second(p1));

  EnvelopePoint out;
  out.z = z;
  out.b = qb.value(t);
  out.b_prime = qb.d1(t) / h;
  out.b_second = qb.d2(t) / (h * h);
  out.phase_advance = qt.value(t);
  out.omega_integral = cubic_hermite(h, t, p0.omega_integral, p0.omega, p1.omega_integral, p1.omega);
  out.omega = std::numeric_limits<double>::quiet_NaN();
  return out;
}

double EnvelopeSolution::z_at_phase_advance(double target) const {
  const bool forward = target >= 0.0;
  auto start = std::lower_bound(nodes_.begin(), nodes_.end(), z_start_,
                                [](const EnvelopePoint& p, double v) { return p.z < v; });
  if (forward) {
    for (auto it = start; it + 1 != nodes_.end() && it != nodes_.end(); ++it) {
      if (it->phase_advance <= target && (it + 1)->phase_advance >= target) {
        double lo = it->z, hi = (it + 1)->z;
        for (int k = 0; k < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++k) {
          const double mid = 0.5 * (lo + hi);
          (at(mid).phase_advance < target ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
      }
    }
  } else {
    for (auto it = start; it != nodes_.begin(); --it) {
      if (it->phase_advance >= target && (it - 1)->phase_advance <= target) {
        double lo = (it - 1)->z, hi = it->z;
        for (int k = 0; k < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++k) {
          const double mid = 0.5 * (lo + hi);
          (at(mid).phase_advance < target ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
      }
    }
  }
  throw ConfigError("envelope: phase advance " + std::to_string(target) + " not reached in solved range");
}

EnvelopeSolution solve_ermakov(const OmegaFn& omega, double b0, double b0_prime, double z_from, double z_to,
                               const StepControl& control) {
  if (!(b0 > 0.0)) throw ConfigError("solve_ermakov: b0 must be positive");
  if (!(control.reference_frequency > 0.0)) throw ConfigError("solve_ermakov: reference frequency must be positive");
  if (!(control.abs_tol > 0.0) || !(control.rel_tol >= 0.0) || !(control.dense_tol > 0.0))
    throw ConfigError("solve_ermakov: bad tolerances");

  const double w2 = control.reference_frequency * control.reference_frequency;
  const Rhs f{omega, w2};
  const double dir = (z_to >= z_from) ? 1.0 : -1.0;
  const double span = std::abs(z_to - z_from);

  std::vector<EnvelopePoint> nodes;
  State y{b0, b0_prime, 0.0, 0.0};
  double z = z_from;
  State k1 = f(z, y);
  nodes.push_back(make_point(z, y, k1[3], w2));
  if (span == 0.0) return EnvelopeSolution(std::move(nodes), z_from, control.reference_frequency);

  double h = std::min({control.initial_step, control.max_step, span});
  while (dir * (z_to - z) > 0.0) {
    if (h < control.min_step) {
      std::ostringstream os;
      os << "solve_ermakov: step size underflow at z = " << z;
      throw NumericalError(os.str());
    }
    bool last = false;
    if (h >= std::abs(z_to - z)) {
      h = std::abs(z_to - z);
      last = true;
    }
    const double hs = dir * h;
    const State k2 = f(z + c2 * hs, axpy(y, hs, {{a21, &k1}}));
    const State k3 = f(z + c3 * hs, axpy(y, hs, {{a31, &k1}, {a32, &k2}}));
    const State k4 = f(z + c4 * hs, axpy(y, hs, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const State k5 = f(z + c5 * hs, axpy(y, hs, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const State k6 = f(z + hs, axpy(y, hs, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const State y_new = axpy(y, hs, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    const double z_new = last ? z_to : z + hs;

    bool bad = !(y_new[0] > 0.0) || !std::isfinite(y_new[0]) || !std::isfinite(y_new[1]);
    State k7{};
    double err = 0.0;
    if (!bad) {
      k7 = f(z_new, y_new);
      for (std::size_t i = 0; i < 4; ++i) {
        const double e = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const double sc = control.abs_tol + control.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
        err += (e / sc) * (e / sc);
      }
      err = std::sqrt(err / 4.0);
      bad = !std::isfinite(err);
    }
    if (bad) {
      h *= 0.2;
      continue;
    }
    double dense = 0.0;
    if (err <= 1.0 && y_new[0] >= control.collapse_threshold) {
      // ODE residual of the interpolant at the step midpoint.
      const EnvelopePoint& p0 = nodes.back();
      const Quintic q = quintic_hermite(hs, p0.b, p0.b_prime, p0.b_second, y_new[0], y_new[1],
                                        w2 / (y_new[0] * y_new[0] * y_new[0]) - k7[3] * k7[3] * y_new[0]);
      const double bm = q.value(0.5);
      const double om = omega(z + 0.5 * hs);
      dense = std::abs(q.d2(0.5) / (hs * hs) + om * om * bm - w2 / (bm * bm * bm)) / control.dense_tol;
      if (!std::isfinite(dense)) dense = 1e300;
    }
    if (err <= 1.0 && dense > 1.0) {
      h *= std::clamp(0.9 * std::pow(dense, -0.25), 0.2, 0.9);
      continue;
    }
    if (err <= 1.0) {
      if (y_new[0] < control.collapse_threshold) {
        std::ostringstream os;
        os << "solve_ermakov: envelope collapse (b = " << y_new[0] << ") at z = " << z_new;
        throw NumericalError(os.str());
      }
      z = z_new;
      y = y_new;
      k1 = k7;
      nodes.push_back(make_point(z, y, k1[3], w2));
      if (last) break;
      double fac = (err == 0.0) ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      if (dense > 0.0) fac = std::min(fac, std::max(0.2, 0.9 * std::pow(dense, -0.25)));
      h = std::min(h * fac, control.max_step);
    } else {
      h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 1.0);
    }
  }
  if (dir < 0.0) std::reverse(nodes.begin(), nodes.end());
  return EnvelopeSolution(std::move(nodes), z_from, control.reference_frequency);
}

EpDiagnostics ep_invariant(const EnvelopeSolution& sol, const OmegaFn& omega) {
  EpDiagnostics d;
  const double w2 = sol.reference_frequency() * sol.reference_frequency();
  const auto& nodes = sol.nodes();
  for (const auto& p : nodes) {
    const double om = omega(p.z);
    d.first_integral.push_back(p.b_prime * p.b_prime + om * om * p.b * p.b + w2 / (p.b * p.b));
  }
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double zm = 0.5 * (nodes[i].z + nodes[i + 1].z);
    const EnvelopePoint p = sol.at(zm);
    const double om = omega(zm);
    const double r = p.b_second + om * om * p.b - w2 / (p.b * p.b * p.b);
    d.z.push_back(zm);
    d.residual.push_back(r);
    d.max_abs_residual = std::max(d.max_abs_residual, std::abs(r));
  }
  return d;
}

RotationAngles rotation_angles(const EnvelopeSolution& sol, int charge_sign, double z) {
  if (charge_sign != 1 && charge_sign != -1) throw ConfigError("charge sign must be +1 or -1");
  const EnvelopePoint p = sol.at(z);
  RotationAngles r;
  r.z = z;
  r.larmor = charge_sign * p.omega_integral;
  r.plus = r.larmor - sol.reference_frequency() * p.phase_advance;
  r.minus = r.larmor + sol.reference_frequency() * p.phase_advance;
  return r;
}

std::vector<RotationAngles> rotation_angles(const EnvelopeSolution& sol, int charge_sign) {
  if (charge_sign != 1 && charge_sign != -1) throw ConfigError("charge sign must be +1 or -1");
  std::vector<RotationAngles> out;
  out.reserve(sol.nodes().size());
  for (const auto& p : sol.nodes()) {
    RotationAngles r;
    r.z = p.z;
    r.larmor = charge_sign * p.omega_integral;
    r.plus = r.larmor - sol.reference_frequency() * p.phase_advance;
    r.minus = r.larmor + sol.reference_frequency() * p.phase_advance;
    out.push_back(r);
  }
  return out;
}

}  // namespace twistbeam::envelope
