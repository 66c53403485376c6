#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace twistbeam::fields {

inline constexpr double kMu0 = 1.25663706212e-6;           // T m / A
inline constexpr double kHbar = 1.054571817e-34;           // J s
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C

/// B0 a^2 / (a^2 + (z - c)^2). Throws ConfigError for a <= 0.
double glaser_field(double B0, double a, double c, double z);
double glaser_field_derivative(double B0, double a, double c, double z);

/// One sample of a current sheet: radius R(z0) and surface current per unit length I(z0).
struct SheetSample {
  double z0 = 0.0;
  double radius = 0.0;
  double current = 0.0;
};

/// Filamentary loop carrying a total current, the delta-concentrated limit of a sheet.
struct CurrentLoop {
  double z0 = 0.0;
  double radius = 0.0;
  double current = 0.0;
};

struct SolenoidGeometry {
  // Each sheet is sampled on increasing z0; R and I are linear between samples.
  std::vector<std::vector<SheetSample>> sheets;
  std::vector<CurrentLoop> loops;
  double z_min = 0.0;
  double z_max = 0.0;
  int quadrature_order = 15;  // Kronrod points per panel: 15, 31 or 61
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;

  void validate() const;
};

struct QuadratureValue {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// On-axis B_z of a set of axisymmetric current sheets and loops.
/// Sheet contributions outside [z_min, z_max] are bounded analytically; a bound above
/// tolerance raises NumericalError.
QuadratureValue biot_savart_onaxis(const SolenoidGeometry& geom, double z);

/// Natural cubic spline through (z, B) samples.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> z, std::vector<double> values);

  double operator()(double z) const;
  double front() const { return z_.front(); }
  double back() const { return z_.back(); }
  const std::vector<double>& knots() const { return z_; }
  const std::vector<double>& values() const { return y_; }

 private:
  std::vector<double> z_;
  std::vector<double> y_;
  std::vector<double> m_;  // second derivatives
};

enum class ProfileKind { glaser, tabulated, synthesized, free_space };

std::string to_string(ProfileKind kind);

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Axisymmetric on-axis longitudinal field B_z(z).
class FieldProfile {
 public:
  static FieldProfile glaser(double B0, double a, double c);
  static FieldProfile tabulated(std::vector<double> z, std::vector<double> bz);
  /// Samples biot_savart_onaxis on z_samples and interpolates the result.
  static FieldProfile synthesized(const SolenoidGeometry& geom, const std::vector<double>& z_samples);
  static FieldProfile free_space();

  ProfileKind kind() const { return kind_; }
  double bz(double z) const;
  /// dB_z/dz: analytic for Glaser, 4th-order differences of the interpolant otherwise.
  double dbz_dz(double z) const;
  /// max |B_z| over the declared domain; zero for free space.
  double b_max() const { return b_max_; }
  /// Domain over which the profile is defined (infinite for Glaser and free space).
  double z_lo() const { return z_lo_; }
  double z_hi() const { return z_hi_; }

  /// Finite-difference step for tabulated derivatives (defaults to the mean knot spacing).
  void set_stencil_width(double h);
  double stencil_width() const { return stencil_; }

  double glaser_B0() const { return B0_; }
  double glaser_a() const { return a_; }
  double glaser_c() const { return c_; }
  const CubicSpline& table() const { return table_; }

 private:
  ProfileKind kind_ = ProfileKind::free_space;
  double B0_ = 0.0, a_ = 1.0, c_ = 0.0;
  CubicSpline table_;
  double stencil_ = 0.0;
  double b_max_ = 0.0;
  double z_lo_ = 0.0, z_hi_ = 0.0;
};

/// Linearized near-axis field (-x/2 B_z', -y/2 B_z', B_z). Diagnostic only.
Vec3 transverse_field(const FieldProfile& profile, double x, double y, double z);

/// Coordinate convention for normalization. When wavenumber is unset the profile's z axis
/// is already the normalized longitudinal coordinate; otherwise z is in metres and
/// z_normalized = z / (k rho_H^2).
struct NormalizationUnits {
  std::optional<double> wavenumber;  // 1/m
  double charge = kElementaryCharge;  // |q| in C
};

struct NormalizedField {
  std::function<double(double)> omega;  // Omega(z_normalized) = 2 B_z / B_max
  double rho_h = 0.0;                   // magnetic length; NaN for free space
  double z_scale = 1.0;                 // physical z per unit normalized z
  double b_max = 0.0;
  bool free_space = false;
};

/// Throws ConfigError for an identically-zero profile that is not declared free space.
NormalizedField normalize(const FieldProfile& profile, const NormalizationUnits& units = {});

/// 2 sqrt(hbar / (|q| B_max)), in metres.
double magnetic_length(double b_max, double charge = kElementaryCharge);

}  // namespace twistbeam::fields
