#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "twistbeam/decomposition.hpp"
#include "twistbeam/errors.hpp"

using namespace twistbeam;
using namespace twistbeam::decomposition;

namespace {

InitialState half_blocked(int n, int l) { return {HalfBlockedState{n, l}}; }

QuadSpec arc_quad() {
  QuadSpec q;
  q.angular_breakpoints = {0.0, std::numbers::pi};
  q.angular_order = 64;
  q.radial_order = 160;
  return q;
}

}  // namespace

TEST_SUITE("decomposition") {
  TEST_CASE("closed-form arc coefficients") {
    const Complex c = arc_coefficient(0, 1, 2, -2);
    CHECK(std::abs(c.real()) < 1e-16);
    CHECK(c.imag() == doctest::Approx(0.0152688284969662).epsilon(1e-13));
    for (int na : {0, 1, 3})
      for (int la : {1, -3, 4, 0}) {
        CHECK(arc_coefficient(na, la, na, la) == Complex(0.5, 0.0));
        for (int n = 0; n <= 6; ++n)
          for (int l = la - 10; l <= la + 10; l += 2)
            if (l != la) CHECK(arc_coefficient(na, la, n, l) == Complex(0.0, 0.0));
        for (int n = 0; n <= 6; ++n)
          if (n != na) CHECK(arc_coefficient(na, la, n, la) == Complex(0.0, 0.0));
      }
    CHECK_THROWS_AS(arc_coefficient(-1, 1, 0, 0), ConfigError);
  }

  TEST_CASE("closed form agrees with quadrature") {
    const auto q = arc_quad();
    for (auto [na, la] : {std::pair{0, 1}, std::pair{1, -3}}) {
      const auto psi = state_sampler(half_blocked(na, la));
      for (int n : {0, 2, 5})
        for (int l : {la - 5, la - 1, la + 3, la + 7}) {
          const auto v = overlap_quadrature(psi, {n, l}, {}, q);
          const Complex c = arc_coefficient(na, la, n, l);
          CHECK(std::abs(v.value - c) <= 1e-10 * std::max(std::abs(c), 1e-3));
        }
    }
  }

  TEST_CASE("pure state spectrum") {
    const auto s = decompose({PureState{2, -3}}, Truncation{});
    CHECK(s.entries.size() == 13u * 51u);
    CHECK(s.coefficient({2, -3}) == Complex(1.0, 0.0));
    CHECK(s.captured_norm == 1.0);
    CHECK(s.source_norm == 1.0);
    CHECK(s.coefficient({0, 0}) == Complex(0.0, 0.0));
    const auto outside = decompose({PureState{0, 9}}, Truncation{4, -5, 5});
    CHECK(outside.captured_norm == 0.0);
    CHECK(outside.warnings.size() == 1);
  }

  TEST_CASE("Parseval for the half-blocked state") {
    const auto s = decompose(half_blocked(0, 1), Truncation::around(1));
    CHECK(s.source_norm == 0.5);
    CHECK(s.captured_norm < s.source_norm);
    CHECK(s.captured_norm == doctest::Approx(0.48879534172425396).epsilon(1e-12));
    double prev = s.source_norm;
    for (int w : {3, 7, 13, 19, 25}) {
      const auto t = decompose(half_blocked(0, 1), Truncation::around(1, 12, w));
      CHECK(t.deficit() < prev);
      prev = t.deficit();
    }
    double sum = 0.0;
    for (const auto& [k, c] : s.entries) sum += std::norm(c);
    CHECK(sum == doctest::Approx(s.captured_norm).epsilon(1e-14));
  }

  TEST_CASE("symmetry laws") {
    const auto q = arc_quad();
    const auto base = state_sampler(half_blocked(0, 1));
    CustomState conj_state{[&](double r, double p) { return std::conj(base(r, p)); }, 0.5, {0.0, std::numbers::pi}};
    CustomState refl_state{[&](double r, double p) { return std::conj(base(r, -p)); }, 0.5, {0.0, std::numbers::pi}};
    DecomposeOptions opts;
    opts.quad = q;
    const Truncation t{4, -6, 6};
    const auto sc = decompose({conj_state}, t, opts);
    const auto sr = decompose({refl_state}, t, opts);
    for (int n = 0; n <= 4; ++n)
      for (int l = -6; l <= 6; ++l) {
        CHECK(std::abs(sc.coefficient({n, l}) - std::conj(arc_coefficient(0, 1, n, -l))) < 1e-10);
        CHECK(std::abs(sr.coefficient({n, l}) - std::conj(arc_coefficient(0, 1, n, l))) < 1e-10);
      }
  }

  TEST_CASE("overlap table serial and parallel agree") {
    const auto q = arc_quad();
    const auto psi = state_sampler(half_blocked(0, -3));
    const Truncation t{6, -10, 4};
    const auto a = overlap_table(psi, t, {}, q, Execution::serial);
    const auto b = overlap_table(psi, t, {}, q, Execution::parallel);
    REQUIRE(a.values.size() == b.values.size());
    for (const auto& [k, v] : a.values) CHECK(b.values.at(k) == v);
  }

  TEST_CASE("mapped initial data") {
    InitialState s{PureState{0, 1}, 2.0, 0.3};
    const auto psi = map_initial(s);
    const auto raw = state_sampler(s);
    const double r = 0.7, p = 0.4;
    CHECK(std::abs(psi(r, p) - 2.0 * raw(2.0 * r, p) * std::polar(1.0, -2.0 * 0.3 * r * r / 2.0)) < 1e-14);
    CHECK(source_norm(s) == doctest::Approx(1.0));
    const auto spec = decompose(s, Truncation{30, -2, 4});
    CHECK(spec.captured_norm == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(spec.coefficient({0, 2})) < 1e-14);
    CHECK_THROWS_AS(decompose({PureState{0, 1}, -1.0, 0.0}, Truncation{}), ConfigError);
    CHECK_THROWS_AS((Truncation{-1, 0, 0}.validate()), ConfigError);
    CHECK_THROWS_AS((Truncation{3, 2, 1}.validate()), ConfigError);
  }
}
