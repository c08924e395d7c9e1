#include "torsionflow/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

namespace torsionflow {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double rel_error(double measured, double expected) {
  return std::abs(measured - expected) / std::abs(expected);
}

CheckReport relative(std::string name, double measured, double expected, double tol,
                     std::string provenance) {
  CheckReport r;
  r.name = std::move(name);
  r.measured = {measured};
  r.expected = {expected};
  r.tolerance = tol;
  r.metric = "relative";
  r.provenance = std::move(provenance);
  r.pass = rel_error(measured, expected) <= tol;
  return r;
}

CheckReport upper_bound(std::string name, double measured, double bound, std::string provenance) {
  CheckReport r;
  r.name = std::move(name);
  r.measured = {measured};
  r.expected = {bound};
  r.metric = "upper_bound";
  r.provenance = std::move(provenance);
  r.pass = measured <= bound;
  return r;
}

CheckReport lower_bound(std::string name, double measured, double bound, std::string provenance) {
  CheckReport r = upper_bound(std::move(name), measured, bound, std::move(provenance));
  r.metric = "lower_bound";
  r.pass = measured >= bound;
  return r;
}

double solve_T(const SupportFunction& h, std::size_t n_radial) {
  return solve_torsion(build_body(h), n_radial).T_volume;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

std::string body_label(const SupportFunction& h) {
  return "N=" + std::to_string(h.size()) + ",h in [" + num(h.min()) + "," +
         num(h.max()) + "]";
}

}  // namespace

UnknownSuite::UnknownSuite(const std::string& name) : Error("unknown verify suite '" + name + "'") {}

nlohmann::json to_json(const CheckReport& r) {
  return {{"name", r.name},         {"measured", r.measured}, {"expected", r.expected},
          {"tolerance", r.tolerance}, {"metric", r.metric},   {"provenance", r.provenance},
          {"pass", r.pass},         {"runtime_ms", r.runtime_ms}, {"note", r.note}};
}

std::vector<CheckReport> check_disk(double R, std::size_t n_theta, std::size_t n_radial,
                                    const Tolerances& tol) {
  const auto start = Clock::now();
  const ConvexBody body = build_body(disk_support(n_theta, R));
  const TorsionSolution sol = solve_torsion(body, n_radial);
  const double ms = elapsed_ms(start);
  const std::string tag = "(R=" + num(R) + ")";

  std::vector<CheckReport> out;
  out.push_back(relative("disk.T" + tag, sol.T_volume, kTwoPi * std::pow(R, 4) / 4.0, tol.disk_T,
                         "analytic"));
  const auto [qmin, qmax] = std::minmax_element(sol.q.begin(), sol.q.end());
  CheckReport q = relative("disk.q" + tag, *qmax, R, tol.disk_q, "analytic");
  q.measured = {*qmin, *qmax};
  q.pass = std::max(rel_error(*qmin, R), rel_error(*qmax, R)) <= tol.disk_q;
  q.note = "measured = {min q, max q}";
  out.push_back(q);
  out.push_back(relative("disk.U0" + tag, sol.U[0], R * R / 2.0, tol.disk_center, "analytic"));
  for (auto& r : out) r.runtime_ms = ms;
  return out;
}

CheckReport check_homogeneity(const SupportFunction& h, double lambda, std::size_t n_radial,
                              const Tolerances& tol) {
  const auto start = Clock::now();
  const double ratio = solve_T(scaled(h, lambda), n_radial) / solve_T(h, n_radial);
  CheckReport r = relative("homogeneity(lambda=" + num(lambda) + ")", ratio,
                           std::pow(lambda, 4), tol.homogeneity, "paper-identity");
  r.note = body_label(h);
  r.runtime_ms = elapsed_ms(start);
  return r;
}

CheckReport check_translation(const SupportFunction& h, Vec2 v, std::size_t n_radial,
                              const Tolerances& tol) {
  if (!(norm(v) < h.min())) throw DomainError("translation must keep the origin interior");
  const auto start = Clock::now();
  const double T0 = solve_T(h, n_radial);
  const double T1 = solve_T(translated(h, v), n_radial);
  CheckReport r = upper_bound("translation(v=" + num(v.x) + "," + num(v.y) + ")",
                              std::abs(T1 - T0) / T0, tol.translation, "paper-identity");
  r.tolerance = tol.translation;
  r.note = body_label(h);
  r.runtime_ms = elapsed_ms(start);
  return r;
}

CheckReport check_variational(const SupportFunction& h0, const SupportFunction& h1, double delta,
                              std::size_t n_radial, const Tolerances& tol) {
  const auto start = Clock::now();
  const ConvexBody body0 = build_body(h0);
  const TorsionSolution sol0 = solve_torsion(body0, n_radial);
  const double surface = variational_derivative(body0, h1, sol0);
  const double plus = solve_T(minkowski_combine(h0, h1, delta), n_radial);
  const double minus = solve_T(minkowski_combine(h0, h1, -delta), n_radial);
  const double fd = (plus - minus) / (2.0 * delta);
  CheckReport r = relative("variational", surface, fd, tol.variational, "paper-identity");
  r.note = "measured = surface integral, expected = centered difference; h0 " + body_label(h0) +
           ", h1 " + body_label(h1);
  r.runtime_ms = elapsed_ms(start);
  return r;
}

CheckReport check_gradient_bound(const SupportFunction& h, std::size_t n_radial) {
  const auto start = Clock::now();
  const ConvexBody body = build_body(h);
  const TorsionSolution sol = solve_torsion(body, n_radial);
  CheckReport r = upper_bound("gradient_bound", *std::max_element(sol.q.begin(), sol.q.end()),
                              body.diameter, "paper-identity");
  r.note = body_label(h);
  r.runtime_ms = elapsed_ms(start);
  return r;
}

CheckReport check_normal_alignment(const SupportFunction& h, std::size_t n_radial,
                                   const Tolerances& tol) {
  const auto start = Clock::now();
  const ConvexBody body = build_body(h);
  const TorsionSolution sol = solve_torsion(body, n_radial);
  std::vector<double> angles(h.size());
  for (std::size_t j = 0; j < h.size(); ++j) {
    const Vec2 g = sol.boundary_gradient[j];
    const Vec2 inward = -1.0 * unit(h.theta(j));
    const double c = std::clamp(dot(g, inward) / norm(g), -1.0, 1.0);
    angles[j] = std::acos(c) * 180.0 / M_PI;
  }
  std::sort(angles.begin(), angles.end());
  const auto at = [&](double q) {
    return angles[std::min(angles.size() - 1, std::size_t(std::ceil(q * double(angles.size()))) - 1)];
  };
  CheckReport r;
  r.name = "normal_alignment";
  r.measured = {at(tol.normal_quantile), at(0.5)};
  r.expected = {tol.normal_angle_deg};
  r.tolerance = tol.normal_quantile;
  r.metric = "quantile";
  r.provenance = "paper-identity";
  r.pass = r.measured[0] <= tol.normal_angle_deg;
  r.note = "measured = {quantile angle, median angle} in degrees; " + body_label(h);
  r.runtime_ms = elapsed_ms(start);
  return r;
}

std::vector<CheckReport> check_ball_stationarity(double R, double p, double c, FlowMode mode,
                                                 std::size_t n_theta, const Tolerances& tol) {
  const auto start = Clock::now();
  FlowConfig cfg;
  cfg.mode = mode;
  cfg.psi = OrliczFamily::power(p);
  cfg.f.c = c;
  cfg.n_theta = n_theta;
  cfg.initial.radius = R;
  const FlowProblem problem(cfg);
  const FlowState s = problem.initial_state();
  double vmax = 0.0;
  for (double v : s.velocity) vmax = std::max(vmax, std::abs(v));
  const double gamma_exact = std::pow(R, 4.0 - p) / c;
  const Residual res = residual(s.body, s.torsion, problem, gamma_exact);
  const double ms = elapsed_ms(start);

  const std::string tag = "(R=" + num(R) + ",p=" + num(p) + "," +
                          to_string(mode) + ")";
  std::vector<CheckReport> out;
  out.push_back(upper_bound("ball.velocity" + tag, vmax / (s.eta * R), tol.stationarity_velocity,
                            "analytic"));
  out.back().note = "measured = sup|v| / (eta R)";
  out.push_back(upper_bound("ball.residual" + tag, res.sup_rel, tol.stationarity_residual,
                            "analytic"));
  out.back().note = "gamma = R^(4-p)/c";
  out.push_back(relative("ball.gamma" + tag, 1.0 / s.eta, gamma_exact, tol.stationarity_gamma,
                         "analytic"));
  for (auto& r : out) {
    r.tolerance = r.metric == "relative" ? r.tolerance : r.expected[0];
    r.runtime_ms = ms;
  }
  return out;
}

std::vector<CheckReport> check_ball_stationarity(double R, double p, double c, std::size_t n_theta,
                                                 const Tolerances& tol) {
  const FlowMode mode = p == 0.0 ? FlowMode::EvenLog : p > 2.0 ? FlowMode::Plain : FlowMode::Epsilon;
  return check_ball_stationarity(R, p, c, mode, n_theta, tol);
}

FlowConfig scenario_ellipse_to_disk() {
  FlowConfig c;
  c.mode = FlowMode::Epsilon;
  c.psi = OrliczFamily::power(1.0);
  c.epsilon = 0.1;
  c.initial.kind = InitialBodySpec::Kind::Ellipse;
  c.initial.a = 1.2;
  c.initial.b = 1.0;
  return c;
}

FlowConfig scenario_positivity() {
  FlowConfig c;
  c.mode = FlowMode::Epsilon;
  c.psi = OrliczFamily::power(1.0);
  c.epsilon = 0.1;
  c.initial.radius = 0.5;
  c.initial.center = {0.45, 0.0};
  c.stop.max_steps = 800;
  return c;
}

FlowConfig scenario_even(bool cosine_density) {
  FlowConfig c;
  c.mode = FlowMode::EvenLog;
  c.psi = OrliczFamily::power(0.0);
  if (cosine_density) {
    c.f.kind = DensitySpec::Kind::Cosine;
    c.f.a = 0.05;
    c.f.k = 2;
  } else {
    c.initial.kind = InitialBodySpec::Kind::Ellipse;
    c.initial.a = 1.2;
    c.initial.b = 1.0;
  }
  return c;
}

std::vector<CheckReport> check_flow_invariants(const FlowResult& result, const Tolerances& tol) {
  double max_increase = -std::numeric_limits<double>::infinity();
  double max_drift = 0.0;
  for (std::size_t i = 0; i < result.series.size(); ++i) {
    const StepRecord& r = result.series[i];
    max_drift = std::max(max_drift, std::abs(r.T - result.T0) / result.T0);
    if (i > 0) max_increase = std::max(max_increase, r.J - result.series[i - 1].J);
  }
  const std::string tag = "(" + std::to_string(result.series.size() - 1) + " steps)";
  std::vector<CheckReport> out;
  out.push_back(upper_bound("flow.T_conserved" + tag, max_drift, tol.conservation, "paper-identity"));
  out.back().note = "max_t |T - T0| / T0";
  out.push_back(upper_bound("flow.J_monotone" + tag, max_increase, tol.monotone_slack,
                            "paper-identity"));
  out.back().note = "max per-step increase of J";
  for (auto& r : out) r.tolerance = r.expected[0];
  return out;
}

std::vector<CheckReport> check_disk_limit(const FlowResult& result, const Tolerances& tol) {
  std::vector<CheckReport> out;
  CheckReport conv;
  conv.name = "flow.converged";
  conv.measured = {result.series.back().residual_sup};
  conv.metric = "upper_bound";
  conv.provenance = "analytic";
  conv.pass = result.stop_reason == StopReason::Converged;
  conv.note = std::string("stop_reason = ") + to_string(result.stop_reason);
  out.push_back(conv);

  const double r_star = std::pow(2.0 * result.T0 / M_PI, 0.25);
  double dev = 0.0;
  for (double v : result.h.samples()) dev = std::max(dev, std::abs(v - r_star) / r_star);
  out.push_back(upper_bound("flow.disk_radius", dev, tol.disk_radius, "analytic"));
  out.back().tolerance = tol.disk_radius;
  out.back().note = "max |h - r*| / r* with r* = (2 T0 / pi)^(1/4) = " + num(r_star);
  return out;
}

std::vector<CheckReport> check_positivity(const FlowResult& result, double floor) {
  const auto& s = result.series;
  double overall = std::numeric_limits<double>::infinity();
  for (const auto& r : s) overall = std::min(overall, r.min_h);
  const std::size_t mid = s.size() / 2;
  double tail = std::numeric_limits<double>::infinity();
  for (std::size_t i = mid; i < s.size(); ++i) tail = std::min(tail, s[i].min_h);

  std::vector<CheckReport> out;
  out.push_back(lower_bound("flow.min_h_floor", overall, floor, "paper-identity"));
  out.push_back(lower_bound("flow.min_h_no_decay", tail, (1.0 - 1e-3) * s[mid].min_h,
                            "paper-identity"));
  out.back().note = "min over the final half vs (1 - 1e-3) * value at the midpoint";
  out.back().pass = out.back().pass && result.stop_reason != StopReason::PositivityLoss;
  return out;
}

std::vector<CheckReport> check_even_run(const FlowConfig& config, bool expect_disk,
                                        const Tolerances& tol) {
  const auto start = Clock::now();
  double max_gap = 0.0;
  const FlowResult result = run(config, [&](const FlowState& s) {
    for (std::size_t j = 0; j < s.h.size(); ++j)
      max_gap = std::max(max_gap, std::abs(s.h[j] - s.h[s.h.antipode(j)]));
  });
  std::vector<CheckReport> out;
  out.push_back(upper_bound("even.antipodal_gap", max_gap, tol.parity, "paper-identity"));
  out.back().tolerance = tol.parity;
  out.push_back(upper_bound("even.residual", result.series.back().residual_sup,
                            config.stop.residual_tol, "paper-identity"));
  out.back().tolerance = config.stop.residual_tol;
  out.back().pass = out.back().pass && result.stop_reason == StopReason::Converged;
  if (expect_disk) {
    auto limit = check_disk_limit(result, tol);
    out.push_back(limit[1]);
  }
  const double ms = elapsed_ms(start);
  for (auto& r : out) {
    r.name += expect_disk ? "(f=1)" : "(f=cosine)";
    r.runtime_ms = ms;
  }
  return out;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {
      "disk",          "homogeneity",      "translation",       "variational",
      "gradient_bound", "normal_alignment", "ball_stationarity", "flow"};
  return names;
}

namespace {

void append(std::vector<CheckReport>& out, std::vector<CheckReport> more) {
  for (auto& r : more) out.push_back(std::move(r));
}

std::vector<CheckReport> timed_flow(const FlowConfig& config,
                                    const std::function<std::vector<CheckReport>(const FlowResult&)>& checks) {
  const auto start = Clock::now();
  const FlowResult result = run(config);
  auto out = checks(result);
  const double ms = elapsed_ms(start);
  for (auto& r : out) r.runtime_ms = ms;
  return out;
}

void run_one(const std::string& name, const Tolerances& tol, std::vector<CheckReport>& out) {
  const std::size_t N = 64;
  const SupportFunction disk = disk_support(N, 1.0);
  const SupportFunction ellipse = ellipse_support(N, 1.5, 1.0);
  const auto tagged = [](CheckReport r, const std::string& body) {
    r.name += "[" + body + "]";
    return r;
  };
  if (name == "disk") {
    append(out, check_disk(1.0, N, kDefaultRadial, tol));
  } else if (name == "homogeneity") {
    for (double lambda : {0.5, 2.0, 3.0})
      out.push_back(tagged(check_homogeneity(disk, lambda, kDefaultRadial, tol), "disk"));
    for (double lambda : {0.5, 2.0, 3.0})
      out.push_back(tagged(check_homogeneity(ellipse, lambda, kDefaultRadial, tol), "ellipse(1.5,1)"));
  } else if (name == "translation") {
    out.push_back(tagged(check_translation(disk, {0.3, 0.0}, kDefaultRadial, tol), "disk"));
    out.push_back(tagged(check_translation(ellipse, {0.1, 0.1}, kDefaultRadial, tol), "ellipse(1.5,1)"));
  } else if (name == "variational") {
    out.push_back(tagged(check_variational(disk, disk, 1e-3, kDefaultRadial, tol), "disk,disk"));
    out.push_back(tagged(check_variational(disk, ellipse, 1e-3, kDefaultRadial, tol), "disk,ellipse"));
    out.push_back(tagged(check_variational(ellipse, disk, 1e-3, kDefaultRadial, tol), "ellipse,disk"));
  } else if (name == "gradient_bound") {
    out.push_back(tagged(check_gradient_bound(disk), "disk"));
    out.push_back(tagged(check_gradient_bound(ellipse_support(N, 2.0, 1.0)), "ellipse(2,1)"));
    out.push_back(tagged(check_gradient_bound(ellipse_support(N, 3.0, 0.5)), "ellipse(3,0.5)"));
  } else if (name == "normal_alignment") {
    out.push_back(tagged(check_normal_alignment(disk, kDefaultRadial, tol), "disk"));
    out.push_back(tagged(check_normal_alignment(ellipse_support(N, 2.0, 1.0), kDefaultRadial, tol),
                         "ellipse(2,1)"));
  } else if (name == "ball_stationarity") {
    for (double R : {1.0, 2.0})
      for (double p : {0.0, 1.0, 3.0}) append(out, check_ball_stationarity(R, p, 1.0, N, tol));
  } else if (name == "flow") {
    append(out, timed_flow(scenario_ellipse_to_disk(), [&](const FlowResult& r) {
             auto reports = check_flow_invariants(r, tol);
             append(reports, check_disk_limit(r, tol));
             return reports;
           }));
    const FlowConfig pos = scenario_positivity();
    const double floor = 0.5 * std::min(pos.epsilon, pos.initial.support(pos.n_theta).min());
    append(out, timed_flow(pos, [&](const FlowResult& r) {
             auto reports = check_flow_invariants(r, tol);
             append(reports, check_positivity(r, floor));
             return reports;
           }));
    append(out, check_even_run(scenario_even(true), false, tol));
    append(out, check_even_run(scenario_even(false), true, tol));
  } else {
    throw UnknownSuite(name);
  }
}

}  // namespace

std::vector<CheckReport> run_suite(const std::vector<std::string>& names, const Tolerances& tol) {
  std::vector<std::string> expanded;
  for (const auto& n : names) {
    if (n == "all") expanded.insert(expanded.end(), suite_names().begin(), suite_names().end());
    else if (std::find(suite_names().begin(), suite_names().end(), n) == suite_names().end())
      throw UnknownSuite(n);
    else expanded.push_back(n);
  }
  std::vector<CheckReport> out;
  for (const auto& n : expanded) run_one(n, tol, out);
  return out;
}

}  // namespace torsionflow
