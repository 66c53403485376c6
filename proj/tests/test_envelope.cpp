#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "twistbeam/envelope.hpp"
#include "twistbeam/errors.hpp"

using namespace twistbeam;
using namespace twistbeam::envelope;
using testing::glaser_omega;
using testing::rel;

namespace {

// Fixed-step RK4 on (b, b', phase advance, integral of Omega).
std::array<double, 4> rk4_reference(double z1, double h) {
  std::array<double, 4> y{1.0, 0.0, 0.0, 0.0};
  auto f = [](double z, const std::array<double, 4>& u) {
    const double w = glaser_omega(z);
    return std::array<double, 4>{u[1], -w * w * u[0] + 1.0 / (u[0] * u[0] * u[0]), 1.0 / (u[0] * u[0]), w};
  };
  const int n = static_cast<int>(std::lround(z1 / h));
  for (int i = 0; i < n; ++i) {
    const double z = i * h;
    auto k1 = f(z, y);
    std::array<double, 4> t;
    for (int j = 0; j < 4; ++j) t[j] = y[j] + 0.5 * h * k1[j];
    auto k2 = f(z + 0.5 * h, t);
    for (int j = 0; j < 4; ++j) t[j] = y[j] + 0.5 * h * k2[j];
    auto k3 = f(z + 0.5 * h, t);
    for (int j = 0; j < 4; ++j) t[j] = y[j] + h * k3[j];
    auto k4 = f(z + h, t);
    for (int j = 0; j < 4; ++j) y[j] += h / 6.0 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
  }
  return y;
}

}  // namespace

TEST_SUITE("envelope") {
  TEST_CASE("free space") {
    for (auto [b0, bp] : {std::pair{1.0, 0.0}, std::pair{0.5, 0.3}, std::pair{2.0, -0.4}}) {
      const auto sol = solve_ermakov([](double) { return 0.0; }, b0, bp, 0.0, 20.0);
      for (double z = 0.0; z <= 20.0; z += 0.37) {
        const double ref = (b0 + bp * z) * (b0 + bp * z) + z * z / (b0 * b0);
        CHECK(rel(sol.at(z).beta(), ref) < 1e-8);
      }
    }
  }

  TEST_CASE("matched and constant frequency") {
    const auto m = solve_ermakov([](double) { return 1.0; }, 1.0, 0.0, 0.0, 30.0);
    for (double z = 0.0; z <= 30.0; z += 0.5) {
      CHECK(std::abs(m.at(z).b - 1.0) < 1e-10);
      CHECK(m.at(z).phase_advance == doctest::Approx(z).epsilon(1e-10));
    }
    const double w = 0.7, b0 = 1.3;
    const auto c = solve_ermakov([w](double) { return w; }, b0, 0.0, 0.0, 25.0);
    for (double z = 0.0; z <= 25.0; z += 0.9) {
      const double cs = std::cos(w * z), sn = std::sin(w * z);
      const double ref = b0 * b0 * cs * cs + sn * sn / (w * w * b0 * b0);
      CHECK(rel(c.at(z).beta(), ref) < 1e-8);
    }
    StepControl scaled;
    scaled.reference_frequency = 2.0;
    const auto s = solve_ermakov([](double) { return 2.0; }, 1.0, 0.0, 0.0, 5.0, scaled);
    CHECK(std::abs(s.at(4.0).b - 1.0) < 1e-10);
  }

  TEST_CASE("glaser run against fixed-step RK4") {
    const auto sol = solve_ermakov(glaser_omega, 1.0, 0.0, 0.0, 30.0);
    for (double z : {5.0, 16.0, 28.0, 30.0}) {
      const auto ref = rk4_reference(z, 5e-4);
      const auto p = sol.at(z);
      CHECK(rel(p.b, ref[0]) < 1e-7);
      CHECK(rel(p.phase_advance, ref[2]) < 1e-7);
      CHECK(rel(p.omega_integral, ref[3]) < 1e-9);
    }
    CHECK(sol.at(16.0).b == doctest::Approx(0.268).epsilon(5e-3));
    CHECK(sol.at(28.0).b == doctest::Approx(6.03).epsilon(5e-3));
    const auto d = ep_invariant(sol, glaser_omega);
    CHECK(d.max_abs_residual < 1e-8);
  }

  TEST_CASE("backward integration and phase lookup") {
    const auto fwd = solve_ermakov(glaser_omega, 1.0, 0.0, 0.0, 30.0);
    const auto end = fwd.at(30.0);
    const auto back = solve_ermakov(glaser_omega, end.b, end.b_prime, 30.0, 0.0);
    CHECK(back.z_begin() == 0.0);
    CHECK(back.at(0.0).b == doctest::Approx(1.0).epsilon(1e-7));
    const double zpi = fwd.z_at_phase_advance(std::numbers::pi);
    CHECK(fwd.at(zpi).phase_advance == doctest::Approx(std::numbers::pi).epsilon(1e-10));
    CHECK_THROWS_AS(fwd.z_at_phase_advance(1e6), ConfigError);
    CHECK_THROWS_AS(fwd.at(31.0), ConfigError);
  }

  TEST_CASE("rotation angles") {
    const auto sol = solve_ermakov(glaser_omega, 1.0, 0.0, 0.0, 30.0);
    for (int q : {1, -1})
      for (const auto& a : rotation_angles(sol, q)) CHECK(std::abs(a.plus + a.minus - 2.0 * a.larmor) < 1e-10);
    const auto a = rotation_angles(sol, -1, 20.0);
    CHECK(a.larmor == doctest::Approx(-sol.at(20.0).omega_integral));
    CHECK(a.minus - a.plus == doctest::Approx(2.0 * sol.at(20.0).phase_advance));

    const auto m = solve_ermakov([](double) { return 1.0; }, 1.0, 0.0, 0.0, 30.0);
    for (const auto& r : rotation_angles(m, 1)) CHECK(std::abs(r.plus) < 1e-10);
    for (const auto& r : rotation_angles(m, -1)) CHECK(std::abs(r.minus) < 1e-10);
    CHECK_THROWS_AS(rotation_angles(sol, 0, 1.0), ConfigError);
  }

  TEST_CASE("invalid input and collapse") {
    CHECK_THROWS_AS(solve_ermakov(glaser_omega, 0.0, 0.0, 0.0, 1.0), ConfigError);
    StepControl bad;
    bad.reference_frequency = -1.0;
    CHECK_THROWS_AS(solve_ermakov(glaser_omega, 1.0, 0.0, 0.0, 1.0, bad), ConfigError);
    CHECK_THROWS_AS(solve_ermakov([](double) { return 0.0; }, 1.0, -1e7, 0.0, 1.0), NumericalError);
  }
}
