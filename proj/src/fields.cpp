#include "twistbeam/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "twistbeam/errors.hpp"

namespace twistbeam::fields {

double glaser_field(double B0, double a, double c, double z) {
  if (!(a > 0.0)) throw ConfigError("glaser_field: half-width a must be positive");
  const double d = z - c;
  return B0 * a * a / (a * a + d * d);
}

double glaser_field_derivative(double B0, double a, double c, double z) {
  if (!(a > 0.0)) throw ConfigError("glaser_field: half-width a must be positive");
  const double d = z - c;
  const double den = a * a + d * d;
  return -2.0 * B0 * a * a * d / (den * den);
}

void SolenoidGeometry::validate() const {
  if (sheets.empty() && loops.empty()) throw ConfigError("solenoid geometry has no windings");
  if (!(z_max > z_min)) throw ConfigError("solenoid integration window must satisfy z_min < z_max");
  if (!std::isfinite(z_min) || !std::isfinite(z_max)) throw ConfigError("solenoid integration window must be finite");
  if (quadrature_order != 15 && quadrature_order != 31 && quadrature_order != 61)
    throw ConfigError("solenoid quadrature_order must be 15, 31 or 61");
  for (const auto& sheet : sheets) {
    if (sheet.size() < 2) throw ConfigError("a current sheet needs at least two samples");
    for (std::size_t i = 0; i < sheet.size(); ++i) {
      if (!(sheet[i].radius > 0.0)) throw ConfigError("solenoid radius must be strictly positive");
      if (i > 0 && !(sheet[i].z0 > sheet[i - 1].z0)) throw ConfigError("sheet samples must have increasing z0");
    }
  }
  for (const auto& loop : loops)
    if (!(loop.radius > 0.0)) throw ConfigError("loop radius must be strictly positive");
}

namespace {

template <unsigned Points>
QuadratureValue kronrod(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, Points>::integrate(f, a, b, 20, rel_tol, &err);
  return {v, err};
}

QuadratureValue integrate_panel(const std::function<double(double)>& f, double a, double b, int order,
                                double rel_tol) {
  switch (order) {
    case 31: return kronrod<31>(f, a, b, rel_tol);
    case 61: return kronrod<61>(f, a, b, rel_tol);
    default: return kronrod<15>(f, a, b, rel_tol);
  }
}

double lerp(const SheetSample& s0, const SheetSample& s1, double z0, double SheetSample::*member) {
  const double t = (z0 - s0.z0) / (s1.z0 - s0.z0);
  return (1.0 - t) * (s0.*member) + t * (s1.*member);
}

}  // namespace

QuadratureValue biot_savart_onaxis(const SolenoidGeometry& geom, double z) {
  geom.validate();
  QuadratureValue total;
  double tail_bound = 0.0;

  for (const auto& sheet : geom.sheets) {
    double max_ir2 = 0.0;
    double min_r = std::numeric_limits<double>::infinity();
    for (const auto& s : sheet) {
      max_ir2 = std::max(max_ir2, std::abs(s.current) * s.radius * s.radius);
      min_r = std::min(min_r, s.radius);
    }

    for (std::size_t i = 0; i + 1 < sheet.size(); ++i) {
      const SheetSample& s0 = sheet[i];
      const SheetSample& s1 = sheet[i + 1];
      // u is the offset from the left end of the current panel.
      double origin = 0.0;
      auto integrand = [&](double u) {
        const double z0 = origin + u;
        const double r = lerp(s0, s1, z0, &SheetSample::radius);
        const double cur = lerp(s0, s1, z0, &SheetSample::current);
        const double d = (z - origin) - u;
        const double q = d * d + r * r;
        return cur * r * r / (q * std::sqrt(q));
      };
      std::function<double(double)> fn = integrand;

      // Omitted parts of this segment: bounded by max|I R^2| / (d^2 + R_min^2)^{3/2} times length.
      auto bound = [&](double lo, double hi) {
        if (!(hi > lo)) return 0.0;
        const double d = (z < lo) ? lo - z : (z > hi ? z - hi : 0.0);
        const double q = d * d + min_r * min_r;
        return max_ir2 * (hi - lo) / (q * std::sqrt(q));
      };
      tail_bound += bound(s0.z0, std::min(s1.z0, geom.z_min));
      tail_bound += bound(std::max(s0.z0, geom.z_max), s1.z0);

      const double lo = std::max(s0.z0, geom.z_min);
      const double hi = std::min(s1.z0, geom.z_max);
      if (!(hi > lo)) continue;
      // Split at the observation point so the peak of the kernel sits on a panel edge.
      std::vector<double> cuts{lo};
      if (z > lo && z < hi) cuts.push_back(z);
      cuts.push_back(hi);
      for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        origin = cuts[k];
        const auto part = integrate_panel(fn, 0.0, cuts[k + 1] - cuts[k], geom.quadrature_order, geom.rel_tol);
        total.value += part.value;
        total.error_estimate += std::abs(part.error_estimate);
      }
    }
  }
  total.value *= 0.5 * kMu0;
  total.error_estimate *= 0.5 * kMu0;
  tail_bound *= 0.5 * kMu0;

  for (const auto& loop : geom.loops) {
    const double d = z - loop.z0;
    const double q = d * d + loop.radius * loop.radius;
    total.value += 0.5 * kMu0 * loop.current * loop.radius * loop.radius / (q * std::sqrt(q));
  }

  const double tol = std::max(geom.abs_tol, geom.rel_tol * std::abs(total.value));
  if (tail_bound > tol)
    throw NumericalError("biot_savart_onaxis: integration window too small, tail bound " + std::to_string(tail_bound) +
                         " exceeds tolerance " + std::to_string(tol));
  total.error_estimate += tail_bound;
  return total;
}

CubicSpline::CubicSpline(std::vector<double> z, std::vector<double> values) : z_(std::move(z)), y_(std::move(values)) {
  const std::size_t n = z_.size();
  if (n < 2 || y_.size() != n) throw ConfigError("tabulated profile needs at least two (z, B) samples");
  for (std::size_t i = 1; i < n; ++i)
    if (!(z_[i] > z_[i - 1])) throw ConfigError("tabulated profile z samples must be strictly increasing");
  m_.assign(n, 0.0);
  if (n == 2) return;
  // Tridiagonal system for interior second derivatives, natural ends.
  std::vector<double> c(n, 0.0), d(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = z_[i] - z_[i - 1];
    const double h1 = z_[i + 1] - z_[i];
    const double a = h0 / 6.0;
    const double b = (h0 + h1) / 3.0;
    const double cc = h1 / 6.0;
    const double rhs = (y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0;
    const double denom = b - a * c[i - 1];
    c[i] = cc / denom;
    d[i] = (rhs - a * d[i - 1]) / denom;
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    m_[i] = d[i] - c[i] * m_[i + 1];
    if (i == 1) break;
  }
}

double CubicSpline::operator()(double z) const {
  if (z < z_.front() || z > z_.back())
    throw ConfigError("tabulated profile: z = " + std::to_string(z) + " outside table range (extrapolation)");
  auto it = std::upper_bound(z_.begin(), z_.end(), z);
  std::size_t i = (it == z_.begin()) ? 0 : static_cast<std::size_t>(it - z_.begin()) - 1;
  if (i >= z_.size() - 1) i = z_.size() - 2;
  const double h = z_[i + 1] - z_[i];
  const double a = (z_[i + 1] - z) / h;
  const double b = (z - z_[i]) / h;
  return a * y_[i] + b * y_[i + 1] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

std::string to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::glaser: return "glaser";
    case ProfileKind::tabulated: return "tabulated";
    case ProfileKind::synthesized: return "synthesized";
    case ProfileKind::free_space: return "free_space";
  }
  return "unknown";
}

namespace {

double dense_abs_max(const CubicSpline& s) {
  double m = 0.0;
  const auto& z = s.knots();
  for (std::size_t i = 0; i + 1 < z.size(); ++i)
    for (int k = 0; k < 16; ++k) m = std::max(m, std::abs(s(z[i] + (z[i + 1] - z[i]) * k / 16.0)));
  return std::max(m, std::abs(s(z.back())));
}

}  // namespace

FieldProfile FieldProfile::glaser(double B0, double a, double c) {
  if (!(a > 0.0)) throw ConfigError("glaser profile: half-width a must be positive");
  FieldProfile p;
  p.kind_ = ProfileKind::glaser;
  p.B0_ = B0;
  p.a_ = a;
  p.c_ = c;
  p.b_max_ = std::abs(B0);
  p.z_lo_ = -std::numeric_limits<double>::infinity();
  p.z_hi_ = std::numeric_limits<double>::infinity();
  return p;
}

FieldProfile FieldProfile::tabulated(std::vector<double> z, std::vector<double> bz) {
  FieldProfile p;
  p.kind_ = ProfileKind::tabulated;
  p.table_ = CubicSpline(std::move(z), std::move(bz));
  p.z_lo_ = p.table_.front();
  p.z_hi_ = p.table_.back();
  p.stencil_ = (p.z_hi_ - p.z_lo_) / static_cast<double>(p.table_.knots().size() - 1);
  p.b_max_ = dense_abs_max(p.table_);
  return p;
}

FieldProfile FieldProfile::synthesized(const SolenoidGeometry& geom, const std::vector<double>& z_samples) {
  std::vector<double> bz(z_samples.size());
  for (std::size_t i = 0; i < z_samples.size(); ++i) bz[i] = biot_savart_onaxis(geom, z_samples[i]).value;
  FieldProfile p = tabulated(z_samples, std::move(bz));
  p.kind_ = ProfileKind::synthesized;
  return p;
}

FieldProfile FieldProfile::free_space() {
  FieldProfile p;
  p.kind_ = ProfileKind::free_space;
  p.z_lo_ = -std::numeric_limits<double>::infinity();
  p.z_hi_ = std::numeric_limits<double>::infinity();
  return p;
}

void FieldProfile::set_stencil_width(double h) {
  if (!(h > 0.0)) throw ConfigError("stencil width must be positive");
  stencil_ = h;
}

double FieldProfile::bz(double z) const {
  switch (kind_) {
    case ProfileKind::glaser: return glaser_field(B0_, a_, c_, z);
    case ProfileKind::tabulated:
    case ProfileKind::synthesized: return table_(z);
    case ProfileKind::free_space: return 0.0;
  }
  return 0.0;
}

double FieldProfile::dbz_dz(double z) const {
  switch (kind_) {
    case ProfileKind::glaser: return glaser_field_derivative(B0_, a_, c_, z);
    case ProfileKind::free_space: return 0.0;
    case ProfileKind::tabulated:
    case ProfileKind::synthesized: break;
  }
  if (z < z_lo_ || z > z_hi_)
    throw ConfigError("tabulated profile: derivative requested outside table range (extrapolation)");
  const double h = std::min(stencil_, 0.25 * (z_hi_ - z_lo_));
  if (z - 2.0 * h >= z_lo_ && z + 2.0 * h <= z_hi_)
    return (-table_(z + 2 * h) + 8.0 * table_(z + h) - 8.0 * table_(z - h) + table_(z - 2 * h)) / (12.0 * h);
  if (z - 2.0 * h < z_lo_) {
    double f[5];
    for (int k = 0; k < 5; ++k) f[k] = table_(z + k * h);
    return (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h);
  }
  double f[5];
  for (int k = 0; k < 5; ++k) f[k] = table_(z - k * h);
  return (25.0 * f[0] - 48.0 * f[1] + 36.0 * f[2] - 16.0 * f[3] + 3.0 * f[4]) / (12.0 * h);
}

Vec3 transverse_field(const FieldProfile& profile, double x, double y, double z) {
  const double g = profile.dbz_dz(z);
  return {-0.5 * x * g, -0.5 * y * g, profile.bz(z)};
}

double magnetic_length(double b_max, double charge) {
  return 2.0 * std::sqrt(kHbar / (std::abs(charge) * b_max));
}

NormalizedField normalize(const FieldProfile& profile, const NormalizationUnits& units) {
  NormalizedField out;
  if (profile.kind() == ProfileKind::free_space) {
    out.omega = [](double) { return 0.0; };
    out.rho_h = std::numeric_limits<double>::quiet_NaN();
    out.free_space = true;
    return out;
  }
  const double bmax = profile.b_max();
  if (!(bmax > 0.0)) throw ConfigError("normalize: identically zero field profile; use the free_space kind instead");
  out.b_max = bmax;
  if (units.wavenumber) {
    if (!(*units.wavenumber > 0.0)) throw ConfigError("normalize: wavenumber must be positive");
    out.rho_h = magnetic_length(bmax, units.charge);
    out.z_scale = *units.wavenumber * out.rho_h * out.rho_h;
  } else {
    // Already-normalized coordinates: the magnetic length is the unit of transverse length.
    out.rho_h = 1.0;
    out.z_scale = 1.0;
  }
  const double scale = out.z_scale;
  out.omega = [profile, bmax, scale](double zn) { return 2.0 * profile.bz(zn * scale) / bmax; };
  return out;
}

}  // namespace twistbeam::fields
