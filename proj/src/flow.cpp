#include "torsionflow/flow.hpp"

#include <algorithm>
#include <cmath>

namespace torsionflow {

namespace {

double max_antipodal_gap(std::span<const double> s) {
  const std::size_t n = s.size(), half = n / 2;
  double gap = 0.0, scale = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    gap = std::max(gap, std::abs(s[j] - s[(j + half) % n]));
    scale = std::max(scale, std::abs(s[j]));
  }
  return scale > 0.0 ? gap / scale : gap;
}

double q_floor_for(const FlowConfig& config, const ConvexBody& body) {
  return config.q_floor.value_or(1e-6 * body.diameter);
}

}  // namespace

ConfigError::ConfigError(std::string f, const std::string& reason)
    : Error("config error at '" + f + "': " + reason), field(std::move(f)) {}

NonPositiveT::NonPositiveT(double T)
    : Error("torsional rigidity must be positive, got " + std::to_string(T)) {}

StepFailure::StepFailure(StopReason r, const std::string& what) : Error(what), reason(r) {}

const char* to_string(FlowMode m) {
  switch (m) {
    case FlowMode::Plain: return "plain";
    case FlowMode::Epsilon: return "epsilon";
    case FlowMode::EvenLog: return "even_log";
  }
  return "?";
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::Converged: return "Converged";
    case StopReason::MaxSteps: return "MaxSteps";
    case StopReason::ConvexityLoss: return "ConvexityLoss";
    case StopReason::PositivityLoss: return "PositivityLoss";
    case StopReason::SolverFailure: return "SolverFailure";
  }
  return "?";
}

std::vector<double> DensitySpec::sample(std::size_t n_theta) const {
  std::vector<double> s(n_theta);
  switch (kind) {
    case Kind::Const:
      std::fill(s.begin(), s.end(), c);
      break;
    case Kind::Cosine:
      for (std::size_t j = 0; j < n_theta; ++j)
        s[j] = c * (1.0 + a * std::cos(double(k) * kTwoPi * double(j) / double(n_theta)));
      break;
    case Kind::Table:
      if (samples.size() != n_theta)
        throw ConfigError("f.path", "table has " + std::to_string(samples.size()) +
                                        " rows, grid has " + std::to_string(n_theta));
      s = samples;
      break;
  }
  return s;
}

SupportFunction InitialBodySpec::support(std::size_t n_theta) const {
  switch (kind) {
    case Kind::Disk: return disk_support(n_theta, radius, center);
    case Kind::Ellipse: return translated(ellipse_support(n_theta, a, b), center);
    case Kind::Table:
      if (samples.size() != n_theta)
        throw ConfigError("initial.path", "table has " + std::to_string(samples.size()) +
                                              " rows, grid has " + std::to_string(n_theta));
      return SupportFunction(samples);
  }
  throw ConfigError("initial.kind", "unknown kind");
}

void validate(const FlowConfig& c) {
  if (c.n_theta < 16 || c.n_theta % 2 != 0)
    throw ConfigError("grid.n_theta", "must be even and >= 16");
  if (c.n_radial < 8) throw ConfigError("grid.n_radial", "must be >= 8");

  if (c.f.kind == DensitySpec::Kind::Cosine && !(std::abs(c.f.a) < 1.0))
    throw ConfigError("f.a", "cosine amplitude must satisfy |a| < 1");
  const std::vector<double> f = c.f.sample(c.n_theta);
  for (double v : f)
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("f", "density must be strictly positive");

  if (c.initial.kind == InitialBodySpec::Kind::Table) (void)c.initial.support(c.n_theta);
  if (c.initial.kind == InitialBodySpec::Kind::Disk && !(c.initial.radius > 0.0))
    throw ConfigError("initial.R", "radius must be positive");
  if (c.initial.kind == InitialBodySpec::Kind::Ellipse && !(c.initial.a > 0.0 && c.initial.b > 0.0))
    throw ConfigError("initial", "ellipse semi-axes must be positive");

  const OrliczClass cls = c.psi.class_tag();
  switch (c.mode) {
    case FlowMode::Plain:
      if (cls != OrliczClass::B)
        throw ConfigError("mode", "plain mode needs a class B psi; use even_log for class C");
      if (!satisfies_small_s_condition(c.psi).holds && !c.allow_positivity_loss)
        throw ConfigError("psi", c.psi.describe() +
                                     " violates liminf s^2/psi(s) = infinity as s -> 0+; "
                                     "use mode epsilon or set allow_positivity_loss");
      break;
    case FlowMode::Epsilon:
      if (cls != OrliczClass::B) throw ConfigError("mode", "epsilon mode needs a class B psi");
      if (!(c.epsilon > 0.0 && c.epsilon <= 0.5))
        throw ConfigError("epsilon", "must lie in (0, 1/2]");
      break;
    case FlowMode::EvenLog: {
      if (cls != OrliczClass::C) throw ConfigError("mode", "even_log mode needs a class C psi");
      if (max_antipodal_gap(f) > 1e-12) throw ConfigError("f", "f not even");
      const SupportFunction h0 = c.initial.support(c.n_theta);
      if (max_antipodal_gap(h0.samples()) > 1e-12)
        throw ConfigError("initial", "initial body not origin-symmetric");
      break;
    }
  }

  const SteppingConfig& s = c.stepping;
  if (!(s.dt0 > 0.0)) throw ConfigError("stepping.dt0", "must be positive");
  if (!(s.dt_max > 0.0)) throw ConfigError("stepping.dt_max", "must be positive");
  if (s.delta_max && !(*s.delta_max > 0.0))
    throw ConfigError("stepping.delta_max", "must be positive");
  if (!(s.safety > 0.0 && s.safety <= 1.0)) throw ConfigError("stepping.safety", "must lie in (0, 1]");
  if (c.q_floor && !(*c.q_floor > 0.0)) throw ConfigError("q_floor", "must be positive");
  if (!(c.rho_floor > 0.0)) throw ConfigError("rho_floor", "must be positive");
  if (!(c.stop.residual_tol > 0.0)) throw ConfigError("stop.residual_tol", "must be positive");
  if (c.stop.max_steps < 0) throw ConfigError("stop.max_steps", "must be non-negative");
  if (c.output.snapshot_every < 0)
    throw ConfigError("output.snapshot_every", "must be non-negative");
}

FlowProblem::FlowProblem(FlowConfig config) : config_(std::move(config)) {
  validate(config_);
  f_ = config_.f.sample(config_.n_theta);
  if (config_.mode == FlowMode::Epsilon) reg_.emplace(config_.psi, config_.epsilon);
}

double FlowProblem::psi(double s) const { return reg_ ? reg_->psi_hat(s) : config_.psi.psi(s); }

double FlowProblem::capital_psi(double s) const {
  return reg_ ? reg_->capital_psi_hat(s) : config_.psi.capital_psi(s);
}

double eta(std::span<const double> f, const std::function<double(double)>& psi,
           const SupportFunction& h, double T) {
  if (!(T > 0.0)) throw NonPositiveT(T);
  if (f.size() != h.size()) throw GridMismatch(f.size(), h.size());
  double s = 0.0;
  for (std::size_t j = 0; j < h.size(); ++j) s += f[j] * psi(h[j]);
  return s * h.dtheta() / ((kDimension + 2) * T);
}

Velocity velocity(const FlowState& state, const FlowProblem& problem) {
  const auto f = problem.f();
  const double floor = q_floor_for(problem.config(), state.body);
  Velocity out;
  out.eta = eta(f, [&](double s) { return problem.psi(s); }, state.h, state.torsion.T_boundary);
  out.v.resize(state.h.size());
  for (std::size_t j = 0; j < state.h.size(); ++j) {
    double q = state.torsion.q[j];
    if (!(q >= floor)) {
      q = floor;
      ++out.clamp_events;
    }
    out.v[j] = -f[j] * problem.psi(state.h[j]) / (q * q * state.body.rho[j]) + out.eta * state.h[j];
  }
  return out;
}

double functional_J(const SupportFunction& h, const FlowProblem& problem) {
  const auto f = problem.f();
  if (f.size() != h.size()) throw GridMismatch(f.size(), h.size());
  double s = 0.0;
  for (std::size_t j = 0; j < h.size(); ++j) s += f[j] * problem.capital_psi(h[j]);
  return s * h.dtheta();
}

Residual residual(const ConvexBody& body, const TorsionSolution& torsion,
                  const FlowProblem& problem, std::optional<double> gamma) {
  const auto f = problem.f();
  Residual r;
  r.gamma = gamma ? *gamma
                  : 1.0 / eta(f, [&](double s) { return problem.psi(s); }, body.h,
                              torsion.T_boundary);
  r.profile.resize(body.size());
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < body.size(); ++j) {
    const double rhs = r.gamma * f[j] * problem.psi(body.h[j]);
    r.profile[j] = body.h[j] * torsion.q[j] * torsion.q[j] * body.rho[j] - rhs;
    num = std::max(num, std::abs(r.profile[j]));
    den = std::max(den, std::abs(rhs));
  }
  r.sup_rel = num / den;
  return r;
}

Residual residual(const SupportFunction& h, const FlowProblem& problem,
                  std::optional<double> gamma) {
  const ConvexBody body = build_body(h, problem.config().rho_floor);
  const TorsionSolution torsion = solve_torsion(body, build_mesh(body, problem.config().n_radial));
  return residual(body, torsion, problem, gamma);
}

namespace {

void refresh(FlowState& s, const FlowProblem& problem) {
  const Velocity v = velocity(s, problem);
  s.eta = v.eta;
  s.velocity = v.v;
  Diagnostics& d = s.diag;
  d.min_h = s.h.min();
  d.max_h = s.h.max();
  d.min_rho = s.body.min_rho();
  d.max_rho = s.body.max_rho();
  d.min_q = *std::min_element(s.torsion.q.begin(), s.torsion.q.end());
  d.J = functional_J(s.h, problem);
  d.T = s.torsion.T_volume;
  d.residual_sup = residual(s.body, s.torsion, problem, 1.0 / s.eta).sup_rel;
  d.clamp_events = v.clamp_events;
}

}  // namespace

FlowState FlowProblem::make_state(const SupportFunction& h, double T0,
                                  std::span<const double> warm_start) const {
  ConvexBody body = build_body(h, config_.rho_floor);
  const FanMesh mesh = build_mesh(body, config_.n_radial);
  TorsionSolution torsion = solve_torsion(body, mesh, {}, warm_start);
  FlowState s{h, std::move(body), std::move(torsion)};
  s.dt = config_.stepping.dt0;
  s.T0 = T0 > 0.0 ? T0 : s.torsion.T_volume;
  refresh(s, *this);
  return s;
}

FlowState FlowProblem::initial_state() const {
  SupportFunction h0 = config_.initial.support(config_.n_theta);
  try {
    return make_state(h0, 0.0);
  } catch (const NonPositive& e) {
    throw ConfigError("initial", e.what());
  } catch (const NonConvex& e) {
    throw ConfigError("initial", e.what());
  }
}

FlowState step(const FlowState& state, const FlowProblem& problem) {
  const FlowConfig& cfg = problem.config();
  const std::size_t n = state.h.size();
  const auto f = problem.f();

  // Explicit diffusion limit: d v / d rho'' = f psi / (q^2 rho^2).
  const double floor = q_floor_for(cfg, state.body);
  double diffusion = 0.0, vmax = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double q = std::max(state.torsion.q[j], floor);
    const double rho = state.body.rho[j];
    diffusion = std::max(diffusion, f[j] * problem.psi(state.h[j]) / (q * q * rho * rho));
    vmax = std::max(vmax, std::abs(state.velocity[j]));
  }
  const double delta_max = cfg.stepping.delta_max.value_or(1e-3 * state.h.max());
  double dt = std::min(state.dt, cfg.stepping.dt_max);
  if (diffusion > 0.0)
    dt = std::min(dt, cfg.stepping.safety * 2.0 / (diffusion * second_derivative_spectral_radius(n)));
  if (vmax > 0.0) dt = std::min(dt, delta_max / vmax);

  StopReason last = StopReason::ConvexityLoss;
  std::string last_what;
  for (int attempt = 0; attempt <= cfg.stepping.max_halvings; ++attempt, dt *= 0.5) {
    std::vector<double> next(n);
    for (std::size_t j = 0; j < n; ++j) next[j] = state.h[j] + dt * state.velocity[j];
    SupportFunction candidate(std::move(next));
    if (cfg.mode == FlowMode::EvenLog) candidate = even_project(candidate);

    ConvexBody body = [&] {
      try {
        return build_body(candidate, cfg.rho_floor);
      } catch (const NonPositive& e) {
        last = StopReason::PositivityLoss;
        last_what = e.what();
      } catch (const NonConvex& e) {
        last = StopReason::ConvexityLoss;
        last_what = e.what();
      }
      return ConvexBody{candidate};
    }();
    if (body.rho.empty()) continue;

    const FanMesh mesh = build_mesh(body, cfg.n_radial);
    TorsionSolution torsion = solve_torsion(body, mesh, {}, state.torsion.U);

    FlowState out{candidate, std::move(body), std::move(torsion)};
    if (cfg.renormalize_T) {
      // T is homogeneous of degree 4; the torsion solution scales exactly.
      const double lambda = std::pow(state.T0 / out.torsion.T_volume, 0.25);
      out.h = scaled(out.h, lambda);
      out.body = build_body(out.h, cfg.rho_floor);
      out.torsion = out.torsion.scaled(lambda);
      out.torsion.T_boundary = boundary_rigidity(out.body, out.torsion.q);
    }
    out.t = state.t + dt;
    out.T0 = state.T0;
    out.step = state.step + 1;
    if (attempt == 0) {
      out.streak = state.streak + 1;
      out.dt = state.dt;
      if (out.streak >= cfg.stepping.grow_after) {
        out.dt = std::min(state.dt * cfg.stepping.grow_factor, cfg.stepping.dt_max);
        out.streak = 0;
      }
    } else {
      out.streak = 0;
      out.dt = dt;
    }
    refresh(out, problem);
    return out;
  }
  throw StepFailure(last, "step rejected after " + std::to_string(cfg.stepping.max_halvings) +
                              " halvings: " + last_what);
}

namespace {

StepRecord record_of(const FlowState& s, double dt) {
  const Diagnostics& d = s.diag;
  return {s.step, s.t, dt, d.T, d.J, s.eta, d.min_h, d.max_h, d.min_rho, d.max_rho,
          d.min_q, d.residual_sup, d.clamp_events};
}

}  // namespace

FlowResult run(const FlowProblem& problem, const StateObserver& observer) {
  const FlowConfig& cfg = problem.config();
  FlowState state = problem.initial_state();
  FlowResult result{state.h};
  result.T0 = state.T0;
  result.series.push_back(record_of(state, 0.0));
  result.total_clamps += state.diag.clamp_events;
  if (observer) observer(state);
  const long every = cfg.output.snapshot_every;
  if (every > 0) result.snapshots.push_back({state.step, state.t, state.body.boundary});

  for (;;) {
    if (state.diag.residual_sup <= cfg.stop.residual_tol) {
      result.stop_reason = StopReason::Converged;
      break;
    }
    if (state.step >= cfg.stop.max_steps || state.t >= cfg.stop.t_max) {
      result.stop_reason = StopReason::MaxSteps;
      break;
    }
    try {
      const double t_prev = state.t;
      state = step(state, problem);
      result.series.push_back(record_of(state, state.t - t_prev));
      result.total_clamps += state.diag.clamp_events;
      if (observer) observer(state);
      if (every > 0 && state.step % every == 0)
        result.snapshots.push_back({state.step, state.t, state.body.boundary});
    } catch (const StepFailure& e) {
      result.stop_reason = e.reason;
      result.message = e.what();
      break;
    } catch (const SolverDiverged& e) {
      result.stop_reason = StopReason::SolverFailure;
      result.message = e.what();
      break;
    }
  }
  result.h = state.h;
  result.gamma = 1.0 / state.eta;
  result.diagnostics = state.diag;
  return result;
}

FlowResult run(const FlowConfig& config, const StateObserver& observer) {
  return run(FlowProblem(config), observer);
}

}  // namespace torsionflow
