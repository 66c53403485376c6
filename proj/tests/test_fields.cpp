#include <doctest.h>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "twistbeam/errors.hpp"
#include "twistbeam/fields.hpp"

using namespace twistbeam;
using namespace twistbeam::fields;
using testing::rel;

namespace {

double loop_field(double current, double radius, double d) {
  return 0.5 * kMu0 * current * radius * radius / std::pow(d * d + radius * radius, 1.5);
}

}  // namespace

TEST_SUITE("fields") {
  TEST_CASE("glaser profile") {
    CHECK(glaser_field(2.0, 4.0, 15.0, 15.0) == 2.0);
    CHECK(glaser_field(2.0, 4.0, 15.0, 19.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(glaser_field(2.0, 4.0, 15.0, 11.0) == doctest::Approx(1.0).epsilon(1e-15));
    const double h = 1e-5;
    for (double z : {3.0, 14.0, 17.5}) {
      const double fd = (glaser_field(2.0, 4.0, 15.0, z + h) - glaser_field(2.0, 4.0, 15.0, z - h)) / (2 * h);
      CHECK(glaser_field_derivative(2.0, 4.0, 15.0, z) == doctest::Approx(fd).epsilon(1e-8));
    }
    CHECK_THROWS_AS(glaser_field(1.0, 0.0, 0.0, 0.0), ConfigError);
    const auto p = FieldProfile::glaser(1.0, 4.0, 15.0);
    CHECK(p.b_max() == 1.0);
    CHECK(p.dbz_dz(12.0) == doctest::Approx(glaser_field_derivative(1.0, 4.0, 15.0, 12.0)));
  }

  TEST_CASE("loop closed form and thin-sheet limit") {
    SolenoidGeometry g;
    g.loops = {{0.1, 0.02, 5.0}};
    g.z_min = -1.0;
    g.z_max = 1.0;
    for (double z : {-0.2, 0.0, 0.1, 0.25})
      CHECK(rel(biot_savart_onaxis(g, z).value, loop_field(5.0, 0.02, z - 0.1)) < 1e-10);

    const double eps = 0.02 * 1e-6;
    SolenoidGeometry thin;
    const double lo = 0.1 - eps / 2, hi = 0.1 + eps / 2;
    thin.sheets = {{{lo, 0.02, 5.0 / (hi - lo)}, {hi, 0.02, 5.0 / (hi - lo)}}};
    thin.z_min = -1.0;
    thin.z_max = 1.0;
    for (double z : {-0.2, 0.0, 0.05, 0.25})
      CHECK(rel(biot_savart_onaxis(thin, z).value, loop_field(5.0, 0.02, z - 0.1)) < 1e-10);
  }

  TEST_CASE("long solenoid approaches mu0 I") {
    const double R = 0.01, L = 2000.0 * R, I = 1000.0;
    SolenoidGeometry g;
    g.sheets = {{{-L, R, I}, {L, R, I}}};
    g.z_min = -L;
    g.z_max = L;
    const double b = biot_savart_onaxis(g, 0.0).value;
    CHECK(rel(b, kMu0 * I * L / std::hypot(L, R)) < 1e-10);
    CHECK(rel(b, kMu0 * I) < 1e-6);
  }

  TEST_CASE("tapered sheet against direct integration") {
    SolenoidGeometry g;
    g.sheets = {{{-0.1, 0.02, 800.0}, {0.0, 0.03, 1000.0}, {0.1, 0.02, 1200.0}}};
    g.z_min = -0.1;
    g.z_max = 0.1;
    g.quadrature_order = 61;
    // Composite Simpson on a fine mesh.
    for (double z : {-0.05, 0.0, 0.3}) {
      double ref = 0.0;
      for (std::size_t i = 0; i + 1 < g.sheets[0].size(); ++i) {
        const auto& a = g.sheets[0][i];
        const auto& b = g.sheets[0][i + 1];
        const int n = 200000;
        const double h = (b.z0 - a.z0) / n;
        double s = 0.0;
        for (int k = 0; k <= n; ++k) {
          const double t = static_cast<double>(k) / n;
          const double r = (1 - t) * a.radius + t * b.radius;
          const double c = (1 - t) * a.current + t * b.current;
          const double d = z - (a.z0 + k * h);
          const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
          s += w * c * r * r / std::pow(d * d + r * r, 1.5);
        }
        ref += s * h / 3.0;
      }
      ref *= 0.5 * kMu0;
      CHECK(rel(biot_savart_onaxis(g, z).value, ref) < 1e-9);
    }
  }

  TEST_CASE("truncated integration window is reported") {
    SolenoidGeometry g;
    g.sheets = {{{-1.0, 0.02, 1000.0}, {1.0, 0.02, 1000.0}}};
    g.z_min = -0.1;
    g.z_max = 0.1;
    CHECK_THROWS_AS(biot_savart_onaxis(g, 0.0), NumericalError);
    g.sheets[0][0].radius = -1.0;
    CHECK_THROWS_AS(biot_savart_onaxis(g, 0.0), ConfigError);
    SolenoidGeometry empty;
    empty.z_max = 1.0;
    CHECK_THROWS_AS(biot_savart_onaxis(empty, 0.0), ConfigError);
  }

  TEST_CASE("cubic spline") {
    std::vector<double> z, y;
    for (int i = 0; i <= 10; ++i) {
      z.push_back(0.3 * i);
      y.push_back(2.0 - 1.5 * z.back());
    }
    CubicSpline s(z, y);
    for (double t : {0.0, 0.05, 1.23, 2.99, 3.0}) CHECK(s(t) == doctest::Approx(2.0 - 1.5 * t).epsilon(1e-14));
    std::vector<double> yc;
    for (double t : z) yc.push_back(std::sin(t));
    CubicSpline sc(z, yc);
    for (std::size_t i = 0; i < z.size(); ++i) CHECK(sc(z[i]) == doctest::Approx(yc[i]).epsilon(1e-14));
    CHECK(std::abs(sc(1.05) - std::sin(1.05)) < 1e-3);
    CHECK_THROWS_AS(CubicSpline({0.0, 0.0}, {1.0, 2.0}), ConfigError);
    const auto p = FieldProfile::tabulated(z, yc);
    CHECK_THROWS_AS(p.bz(3.5), ConfigError);
  }

  TEST_CASE("normalization") {
    const auto g = normalize(FieldProfile::glaser(0.5, 4.0, 15.0));
    CHECK(g.omega(15.0) == doctest::Approx(2.0));
    CHECK(g.omega(19.0) == doctest::Approx(1.0));
    CHECK(g.b_max == 0.5);
    CHECK(g.rho_h == 1.0);
    CHECK(g.z_scale == 1.0);
    CHECK(magnetic_length(1.0) == doctest::Approx(2.0 * std::sqrt(kHbar / kElementaryCharge)));

    NormalizationUnits u;
    u.wavenumber = 1e11;
    const auto phys = normalize(FieldProfile::glaser(0.5, 4.0, 15.0), u);
    CHECK(phys.rho_h == doctest::Approx(magnetic_length(0.5)));
    CHECK(phys.z_scale == doctest::Approx(1e11 * phys.rho_h * phys.rho_h));

    const auto free = normalize(FieldProfile::free_space());
    CHECK(free.free_space);
    CHECK(free.omega(3.0) == 0.0);
    CHECK_THROWS_AS(normalize(FieldProfile::tabulated({0.0, 1.0}, {0.0, 0.0})), ConfigError);

    const auto t = transverse_field(FieldProfile::glaser(1.0, 4.0, 15.0), 0.1, -0.2, 12.0);
    CHECK(t.x == doctest::Approx(-0.05 * glaser_field_derivative(1.0, 4.0, 15.0, 12.0)));
    CHECK(t.z == doctest::Approx(glaser_field(1.0, 4.0, 15.0, 12.0)));
  }
}
