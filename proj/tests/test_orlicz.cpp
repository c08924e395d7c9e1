#include <doctest.h>

#include <cmath>
#include <numbers>

#include "torsionflow/orlicz.hpp"

using namespace torsionflow;

namespace {

/// Composite Simpson rule with n (even) panels; an oracle independent of the
/// library's Gauss rules.
template <class F>
double simpson(F f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(lo * std::pow(hi / lo, double(i) / (n - 1)));
  return g;
}

}  // namespace

TEST_CASE("power family values and primitives") {
  CHECK(OrliczFamily::power(1).psi(2.0) == 2.0);
  CHECK(OrliczFamily::power(0).psi(7.3) == 1.0);
  CHECK(OrliczFamily::power(0.5).psi(4.0) == doctest::Approx(2.0));
  CHECK(OrliczFamily::power(1).capital_psi(3.0) == doctest::Approx(3.0));
  CHECK(OrliczFamily::power(0).capital_psi(1.0) == 0.0);
  CHECK(OrliczFamily::power(2).capital_psi(2.0) == doctest::Approx(2.0));
  CHECK(OrliczFamily::power(0).capital_psi(std::exp(2.0)) == doctest::Approx(2.0));

  CHECK_THROWS_AS(OrliczFamily::power(1).psi(-0.1), DomainError);
  CHECK_THROWS_AS(OrliczFamily::power(1).capital_psi(0.0), DomainError);
  CHECK_THROWS_AS(OrliczFamily::power(0).capital_psi(-1.0), DomainError);
  CHECK_THROWS_AS(OrliczFamily::power(-1), DomainError);
}

TEST_CASE("class tags and C0") {
  CHECK(OrliczFamily::power(1).class_tag() == OrliczClass::B);
  CHECK(OrliczFamily::power(0).class_tag() == OrliczClass::C);
  CHECK(OrliczFamily::power(1).c0() == 2.0);
  CHECK(OrliczFamily::power(3).c0() == 8.0);
  CHECK(OrliczFamily::power(0.5).c0() == doctest::Approx(std::sqrt(2.0)));
  CHECK(OrliczFamily::power(0).c0() == 1.0);
}

TEST_CASE("tabulated families") {
  const auto lin = OrliczFamily::table({0.0, 1.0, 2.0}, {0.0, 1.0, 2.0}, OrliczClass::B);
  CHECK(lin.psi(0.5) == doctest::Approx(0.5));
  CHECK(lin.psi(3.0) == 2.0);
  CHECK(lin.capital_psi(1.5) == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(lin.capital_psi(3.0) == doctest::Approx(2.0 + 2.0 * std::log(1.5)).epsilon(1e-10));
  CHECK(lin.c0() == 2.0);

  const auto flat = OrliczFamily::table({0.5, 4.0}, {1.0, 1.0}, OrliczClass::C);
  for (double s : {0.3, 1.0, 2.5, 6.0}) CHECK(flat.capital_psi(s) == doctest::Approx(std::log(s)).epsilon(1e-10));

  CHECK_THROWS_AS(OrliczFamily::table({0.1, 1.0}, {0.1, 1.0}, OrliczClass::B), DomainError);
  CHECK_THROWS_AS(OrliczFamily::table({0.0, 1.0, 1.0}, {0.0, 1.0, 2.0}, OrliczClass::B), DomainError);
  CHECK_THROWS_AS(OrliczFamily::table({0.0, 1.0}, {0.0, 0.0}, OrliczClass::B), DomainError);
}

TEST_CASE("regularization pieces") {
  const auto reg = regularize(OrliczFamily::power(1), 0.1);
  CHECK(reg.psi_hat(0.05) == std::pow(0.05, 2.1));
  CHECK(reg.psi_hat(0.5) == 0.5);
  const double mid = reg.psi_hat(0.15);
  CHECK(mid > std::pow(0.15, 2.1));
  CHECK(mid < 0.15);
  CHECK(mid <= 2.0);

  CHECK(reg.capital_psi_hat(0.0) == 0.0);
  CHECK(reg.capital_psi_hat(0.05) == doctest::Approx(std::pow(0.05, 2.1) / 2.1).epsilon(1e-14));
  const double one = reg.capital_psi_hat(1.0);
  CHECK(one <= 1.0);
  CHECK(one >= 0.8);

  CHECK_THROWS_AS(regularize(OrliczFamily::power(1), 0.0), EpsilonOutOfRange);
  CHECK_THROWS_AS(regularize(OrliczFamily::power(1), 0.6), EpsilonOutOfRange);
  CHECK_THROWS_AS(regularize(OrliczFamily::power(0), 0.1), WrongClass);
  CHECK_THROWS_AS(reg.psi_hat(-1e-3), DomainError);
}

TEST_CASE("Psi_hat against an independent quadrature") {
  for (double eps : {0.5, 0.1, 0.01}) {
    for (double p : {0.5, 1.0, 3.0}) {
      const auto reg = regularize(OrliczFamily::power(p), eps);
      const auto g = [&](double t) { return reg.psi_hat(t) / t; };
      for (double s : {1.2 * eps, 1.5 * eps, 1.99 * eps, 3.0 * eps, 1.0 + eps}) {
        const double core = std::pow(eps, 2 + eps) / (2 + eps);
        const double oracle = core + simpson(g, eps, std::min(s, 2 * eps)) +
                              (s > 2 * eps ? simpson(g, 2 * eps, s) : 0.0);
        CHECK(reg.capital_psi_hat(s) == doctest::Approx(oracle).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("junction slopes match") {
  for (double eps : {0.5, 0.1, 0.01}) {
    for (double p : {0.5, 1.0, 2.0, 3.0}) {
      const auto reg = regularize(OrliczFamily::power(p), eps);
      // Second-order one-sided differences; the truncation error scales as d^2.
      const double d = 1e-5 * eps;
      for (double s0 : {eps, 2 * eps}) {
        const double left = (3 * reg.psi_hat(s0) - 4 * reg.psi_hat(s0 - d) + reg.psi_hat(s0 - 2 * d)) / (2 * d);
        const double right = (-3 * reg.psi_hat(s0) + 4 * reg.psi_hat(s0 + d) - reg.psi_hat(s0 + 2 * d)) / (2 * d);
        CHECK(std::abs(left - right) <= 1e-6 * std::max(1.0, std::abs(left)));
      }
    }
  }
}

TEST_CASE("regularization contract on the parameter grid") {
  for (double eps : {0.5, 0.25, 0.1, 0.01}) {
    for (double p : {0.5, 1.0, 2.0, 3.0}) {
      const auto base = OrliczFamily::power(p);
      const auto reg = regularize(base, eps);
      for (double s : {0.0, 0.3 * eps, eps}) CHECK(reg.psi_hat(s) == std::pow(s, 2 + eps));
      for (double s : {2 * eps, 3 * eps, 10.0}) CHECK(reg.psi_hat(s) == base.psi(s));
      for (int i = 1; i < 100; ++i) {
        const double v = reg.psi_hat(eps * (1 + i / 100.0));
        CHECK(v > 0.0);
        CHECK(v <= base.c0());
      }
      double prev = -1.0, prev_hat = -1.0;
      for (double s : log_grid(2 * eps, 100.0, 40)) {
        const double full = base.capital_psi(s), hat = reg.capital_psi_hat(s);
        CHECK(hat >= full - base.capital_psi(2 * eps) - 1e-12);
        CHECK(full > prev);
        CHECK(hat > prev_hat);
        prev = full;
        prev_hat = hat;
      }
    }
  }
}

TEST_CASE("small-s condition") {
  CHECK(satisfies_small_s_condition(OrliczFamily::power(3)).holds);
  CHECK_FALSE(satisfies_small_s_condition(OrliczFamily::power(1)).holds);
  CHECK_FALSE(satisfies_small_s_condition(OrliczFamily::power(2)).holds);
  CHECK_FALSE(satisfies_small_s_condition(OrliczFamily::power(3)).heuristic);
  CHECK_THROWS_AS(satisfies_small_s_condition(OrliczFamily::power(0)), WrongClass);

  std::vector<double> s{0.0}, cube{0.0}, lin{0.0};
  for (double x : log_grid(1e-3, 1.0, 8)) {
    s.push_back(x);
    cube.push_back(x * x * x);
    lin.push_back(x);
  }
  const auto c = satisfies_small_s_condition(OrliczFamily::table(s, cube, OrliczClass::B));
  CHECK(c.heuristic);
  CHECK(c.holds);
  CHECK_FALSE(satisfies_small_s_condition(OrliczFamily::table(s, lin, OrliczClass::B)).holds);
}

TEST_CASE("class C admissibility integral") {
  const std::vector<double> ones(64, 1.0);
  const double v = class_c_admissibility(OrliczFamily::power(0), ones);
  CHECK(v == doctest::Approx(-kTwoPi * std::log(2.0)).epsilon(1e-6));
  const std::vector<double> threes(64, 3.0);
  CHECK(class_c_admissibility(OrliczFamily::power(0), threes) == doctest::Approx(3 * v).epsilon(1e-12));
  CHECK_THROWS_AS(class_c_admissibility(OrliczFamily::power(1), ones), WrongClass);
}
