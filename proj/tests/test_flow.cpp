#include <doctest.h>

#include <cmath>

#include "torsionflow/flow.hpp"

using namespace torsionflow;

namespace {

FlowConfig disk_config(double p, double R = 1.0) {
  FlowConfig c;
  c.mode = p > 2.0 ? FlowMode::Plain : p == 0.0 ? FlowMode::EvenLog : FlowMode::Epsilon;
  c.psi = OrliczFamily::power(p);
  c.initial.radius = R;
  return c;
}

double sup_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("eta on simple data") {
  const SupportFunction h = disk_support(64, 1.0);
  const std::vector<double> f(64, 1.0);
  // sum f psi dtheta = 2 pi for psi = 1.
  CHECK(eta(f, [](double) { return 1.0; }, h, kTwoPi / 4) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(eta(f, [](double s) { return s * s; }, scaled(h, 2.0), kTwoPi) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(eta(f, [](double) { return 1.0; }, h, 0.0), NonPositiveT);
  CHECK_THROWS_AS(eta(std::vector<double>(32, 1.0), [](double) { return 1.0; }, h, 1.0), GridMismatch);
}

TEST_CASE("velocity nearly vanishes on a ball") {
  for (double p : {1.0, 3.0}) {
    for (double R : {1.0, 2.0}) {
      const FlowProblem problem(disk_config(p, R));
      const FlowState s = problem.initial_state();
      const Velocity v = velocity(s, problem);
      CHECK(v.clamp_events == 0);
      CHECK(sup_abs(v.v) <= 2e-2 * v.eta * R);
      CHECK(v.eta == doctest::Approx(std::pow(R, p - 4)).epsilon(3e-2));
    }
  }
}

TEST_CASE("q floor clamps and keeps the velocity finite") {
  const FlowProblem problem(disk_config(3.0));
  FlowState s = problem.initial_state();
  s.torsion.q[5] = 0.0;
  s.torsion.q[9] = std::nan("");
  const Velocity v = velocity(s, problem);
  CHECK(v.clamp_events == 2);
  for (double x : v.v) CHECK(std::isfinite(x));
  CHECK(v.v[5] < 0.0);
}

TEST_CASE("one step from a ball stays a ball") {
  const FlowProblem problem(disk_config(3.0));
  const FlowState s0 = problem.initial_state();
  const FlowState s1 = step(s0, problem);
  for (std::size_t j = 0; j < 64; ++j) CHECK(std::abs(s1.h[j] - s0.h[j]) < 1e-6);
  CHECK(s1.step == 1);
  CHECK(s1.t > 0.0);
  CHECK(std::abs(s1.diag.T - s0.T0) <= 1e-12 * s0.T0);
}

TEST_CASE("renormalization controls T") {
  FlowConfig cfg;
  cfg.mode = FlowMode::Epsilon;
  cfg.psi = OrliczFamily::power(1.0);
  cfg.initial.kind = InitialBodySpec::Kind::Ellipse;
  cfg.initial.a = 1.3;
  cfg.initial.b = 1.0;

  const FlowProblem on(cfg);
  FlowState s = on.initial_state();
  for (int i = 0; i < 5; ++i) {
    s = step(s, on);
    CHECK(std::abs(s.diag.T - s.T0) <= 1e-12 * s.T0);
  }

  cfg.renormalize_T = false;
  const FlowProblem off(cfg);
  FlowState u = off.initial_state();
  for (int i = 0; i < 5; ++i) u = step(u, off);
  // Without the projection T drifts only by the discretization mismatch.
  CHECK(std::abs(u.diag.T - u.T0) <= 1e-3 * u.T0);
}

TEST_CASE("functional J") {
  FlowConfig c0 = disk_config(0.0);
  CHECK(std::abs(functional_J(disk_support(64, 1.0), FlowProblem(c0))) < 1e-14);
  CHECK(functional_J(disk_support(64, std::exp(1.0)), FlowProblem(c0)) == doctest::Approx(kTwoPi));

  FlowConfig c1 = disk_config(3.0);
  c1.psi = OrliczFamily::power(3.0);
  // Psi(s) = s^3 / 3 for p = 3.
  CHECK(functional_J(disk_support(64, 2.0), FlowProblem(c1)) == doctest::Approx(kTwoPi * 8.0 / 3.0));

  FlowConfig ce = disk_config(1.0);
  const double Je = functional_J(disk_support(64, 1.0), FlowProblem(ce));
  CHECK(Je <= kTwoPi);
  CHECK(Je >= 0.8 * kTwoPi);
}

TEST_CASE("residual properties") {
  FlowConfig cfg = disk_config(3.0);
  const FlowProblem problem(cfg);
  const SupportFunction h = ellipse_support(64, 1.3, 1.0);
  const Residual r1 = residual(h, problem);
  const Residual r2 = residual(scaled(h, 1.7), problem);
  CHECK(r1.sup_rel > 1e-2);
  CHECK(r2.sup_rel == doctest::Approx(r1.sup_rel).epsilon(1e-8));

  // gamma sum f psi dtheta equals 4 T_boundary for the default gamma.
  const ConvexBody body = build_body(h);
  const TorsionSolution sol = solve_torsion(body, cfg.n_radial);
  const Residual r = residual(body, sol, problem);
  double s = 0.0;
  for (std::size_t j = 0; j < 64; ++j) s += problem.f()[j] * problem.psi(h[j]) * h.dtheta();
  CHECK(r.gamma * s == doctest::Approx(4 * sol.T_boundary).epsilon(1e-10));

  const Residual ball = residual(disk_support(64, 1.0), problem, 1.0);
  CHECK(ball.gamma == 1.0);
  CHECK(ball.sup_rel <= 6e-2);
}

TEST_CASE("run: disk is stationary for p = 3") {
  const FlowResult r = run(disk_config(3.0));
  CHECK(r.stop_reason == StopReason::Converged);
  CHECK(r.series.size() <= 11);
  for (double v : r.h.samples()) CHECK(std::abs(v - 1.0) <= 1e-3);
  CHECK(r.gamma == doctest::Approx(1.0).epsilon(3e-2));
  CHECK(r.total_clamps == 0);
}

TEST_CASE("run: cosine data with p = 3 converges with decreasing J") {
  FlowConfig cfg = disk_config(3.0);
  cfg.f.kind = DensitySpec::Kind::Cosine;
  cfg.f.a = 0.1;
  cfg.f.k = 1;
  long observed = 0;
  const FlowResult r = run(cfg, [&](const FlowState&) { ++observed; });
  CHECK(r.stop_reason == StopReason::Converged);
  CHECK(observed == long(r.series.size()));
  CHECK(r.series.back().J <= r.series.front().J);
  CHECK(r.series.back().residual_sup <= cfg.stop.residual_tol);
  for (const auto& rec : r.series) CHECK(std::abs(rec.T - r.T0) <= 1e-12 * r.T0);
}

TEST_CASE("run: budget and snapshots") {
  FlowConfig cfg;
  cfg.mode = FlowMode::Epsilon;
  cfg.psi = OrliczFamily::power(1.0);
  cfg.initial.kind = InitialBodySpec::Kind::Ellipse;
  cfg.initial.a = 1.2;
  cfg.stop.max_steps = 10;
  cfg.output.snapshot_every = 5;
  const FlowResult r = run(cfg);
  CHECK(r.stop_reason == StopReason::MaxSteps);
  CHECK(r.series.size() == 11);
  REQUIRE(r.snapshots.size() == 3);
  CHECK(r.snapshots[2].step == 10);
  for (std::size_t i = 1; i < r.series.size(); ++i) CHECK(r.series[i].t > r.series[i - 1].t);
}

TEST_CASE("config validation") {
  FlowConfig plain_p1;
  plain_p1.psi = OrliczFamily::power(1.0);
  CHECK_THROWS_AS(validate(plain_p1), ConfigError);
  plain_p1.allow_positivity_loss = true;
  CHECK_NOTHROW(validate(plain_p1));

  FlowConfig plain_c;
  plain_c.psi = OrliczFamily::power(0.0);
  CHECK_THROWS_AS(validate(plain_c), ConfigError);

  FlowConfig odd = disk_config(0.0);
  odd.f.kind = DensitySpec::Kind::Cosine;
  odd.f.a = 0.1;
  odd.f.k = 1;
  try {
    validate(odd);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field == "f");
    CHECK(std::string(e.what()).find("f not even") != std::string::npos);
  }

  FlowConfig shifted = disk_config(0.0);
  shifted.initial.center = {0.1, 0.0};
  CHECK_THROWS_AS(validate(shifted), ConfigError);

  FlowConfig eps = disk_config(1.0);
  eps.epsilon = 0.7;
  CHECK_THROWS_AS(validate(eps), ConfigError);

  FlowConfig grid = disk_config(3.0);
  grid.n_theta = 31;
  CHECK_THROWS_AS(validate(grid), ConfigError);

  FlowConfig bad = disk_config(3.0);
  bad.initial.kind = InitialBodySpec::Kind::Table;
  bad.initial.samples = std::vector<double>(64, 1.0);
  bad.initial.samples[3] = -1.0;
  CHECK_THROWS_AS(FlowProblem(bad).initial_state(), ConfigError);
}

TEST_CASE("even_log keeps exact antipodal symmetry") {
  FlowConfig cfg = disk_config(0.0);
  cfg.initial.kind = InitialBodySpec::Kind::Ellipse;
  cfg.initial.a = 1.2;
  cfg.stop.max_steps = 50;
  double gap = 0.0;
  run(cfg, [&](const FlowState& s) {
    for (std::size_t j = 0; j < s.h.size(); ++j) gap = std::max(gap, std::abs(s.h[j] - s.h[s.h.antipode(j)]));
  });
  CHECK(gap <= 1e-12);
}
