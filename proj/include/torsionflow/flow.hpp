#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "torsionflow/geometry.hpp"
#include "torsionflow/orlicz.hpp"
#include "torsionflow/torsion.hpp"

namespace torsionflow {

/// Invalid or incompatible configuration; `field` is a dotted path.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& reason);
  std::string field;
};

class NonPositiveT : public Error {
 public:
  explicit NonPositiveT(double T);
};

/// plain: psi as given (class B); epsilon: psi replaced by its regularization;
/// even_log: class C with even data, antipodal projection after each step.
enum class FlowMode { Plain, Epsilon, EvenLog };

enum class StopReason { Converged, MaxSteps, ConvexityLoss, PositivityLoss, SolverFailure };

const char* to_string(FlowMode m);
const char* to_string(StopReason r);

/// Positive data density f on the circle.
struct DensitySpec {
  enum class Kind { Const, Cosine, Table };
  Kind kind = Kind::Const;
  double c = 1.0;
  /// cosine(c, a, k): c (1 + a cos k theta)
  double a = 0.0;
  int k = 1;
  std::vector<double> samples;
  std::string path;

  std::vector<double> sample(std::size_t n_theta) const;
};

struct InitialBodySpec {
  enum class Kind { Disk, Ellipse, Table };
  Kind kind = Kind::Disk;
  double radius = 1.0;
  /// Translation applied to disk and ellipse bodies.
  Vec2 center{};
  double a = 1.0;
  double b = 1.0;
  std::vector<double> samples;
  std::string path;

  SupportFunction support(std::size_t n_theta) const;
};

struct SteppingConfig {
  double dt0 = 1e-3;
  double dt_max = 1.0;
  /// Max sup-norm change of h per step; defaults to 1e-3 max h.
  std::optional<double> delta_max;
  /// Fraction of the explicit diffusion stability limit.
  double safety = 0.5;
  int max_halvings = 30;
  int grow_after = 5;
  double grow_factor = 1.25;
};

struct StopConfig {
  double residual_tol = 1e-4;
  double t_max = std::numeric_limits<double>::infinity();
  long max_steps = 1000000;
};

struct OutputConfig {
  std::string dir;
  long snapshot_every = 0;
};

struct FlowConfig {
  FlowMode mode = FlowMode::Plain;
  OrliczFamily psi = OrliczFamily::power(3.0);
  /// Source file of a tabulated psi, kept for the config echo.
  std::string psi_path;
  double epsilon = 0.1;
  /// Allows plain mode for psi failing liminf s^2/psi(s) = infinity.
  bool allow_positivity_loss = false;
  DensitySpec f;
  std::size_t n_theta = 64;
  std::size_t n_radial = kDefaultRadial;
  InitialBodySpec initial;
  SteppingConfig stepping;
  bool renormalize_T = true;
  /// Defaults to 1e-6 times the current diameter.
  std::optional<double> q_floor;
  double rho_floor = kDefaultRhoFloor;
  StopConfig stop;
  OutputConfig output;
};

/// Throws ConfigError describing the first violated constraint.
void validate(const FlowConfig& config);

struct Diagnostics {
  double min_h = 0.0, max_h = 0.0;
  double min_rho = 0.0, max_rho = 0.0;
  double min_q = 0.0;
  double J = 0.0;
  double T = 0.0;
  double residual_sup = 0.0;
  long clamp_events = 0;
};

/// Accepted flow state with its geometric and torsion caches.
struct FlowState {
  SupportFunction h;
  ConvexBody body;
  TorsionSolution torsion;
  double t = 0.0;
  double dt = 0.0;
  double T0 = 0.0;
  double eta = 0.0;
  long step = 0;
  int streak = 0;
  /// Normal velocity at this state and the number of clamped q values.
  std::vector<double> velocity;
  Diagnostics diag;
};

struct Velocity {
  std::vector<double> v;
  long clamp_events = 0;
  double eta = 0.0;
};

struct Residual {
  std::vector<double> profile;
  double sup_rel = 0.0;
  double gamma = 0.0;
};

/// Configured problem: data samples, the effective Orlicz function psi* and
/// its primitive (psi_hat and Psi_hat in epsilon mode).
class FlowProblem {
 public:
  explicit FlowProblem(FlowConfig config);

  const FlowConfig& config() const { return config_; }
  std::span<const double> f() const { return f_; }
  double psi(double s) const;
  double capital_psi(double s) const;
  const std::optional<RegularizedOrlicz>& regularized() const { return reg_; }

  /// Builds body, torsion solution, velocity and diagnostics for h.
  FlowState make_state(const SupportFunction& h, double T0,
                       std::span<const double> warm_start = {}) const;
  FlowState initial_state() const;

 private:
  FlowConfig config_;
  std::vector<double> f_;
  std::optional<RegularizedOrlicz> reg_;
};

/// Raised by `step` when the halving budget is exhausted.
class StepFailure : public Error {
 public:
  StepFailure(StopReason reason, const std::string& what);
  StopReason reason;
};

/// sum_j f_j psi(h_j) dtheta / (4 T).
double eta(std::span<const double> f, const std::function<double(double)>& psi,
           const SupportFunction& h, double T);

/// v_j = -f_j psi*(h_j) / (max(q_j, q_floor)^2 rho_j) + eta h_j, using the
/// state's cached body and torsion solution.
Velocity velocity(const FlowState& state, const FlowProblem& problem);

/// One forward-Euler step with sup-change cap, diffusion stability cap,
/// convexity/positivity backtracking and T renormalization.
FlowState step(const FlowState& state, const FlowProblem& problem);

/// sum_j f_j Psi*(h_j) dtheta.
double functional_J(const SupportFunction& h, const FlowProblem& problem);

/// profile_j = h_j q_j^2 rho_j - gamma f_j psi*(h_j), gamma defaulting to 1/eta.
Residual residual(const ConvexBody& body, const TorsionSolution& torsion,
                  const FlowProblem& problem, std::optional<double> gamma = std::nullopt);
Residual residual(const SupportFunction& h, const FlowProblem& problem,
                  std::optional<double> gamma = std::nullopt);

struct StepRecord {
  long step = 0;
  double t = 0.0, dt = 0.0;
  double T = 0.0, J = 0.0, eta = 0.0;
  double min_h = 0.0, max_h = 0.0;
  double min_rho = 0.0, max_rho = 0.0;
  double min_q = 0.0;
  double residual_sup = 0.0;
  long clamps = 0;
};

struct Snapshot {
  long step = 0;
  double t = 0.0;
  std::vector<Vec2> boundary;
};

struct FlowResult {
  SupportFunction h;
  double gamma = 0.0;
  double T0 = 0.0;
  StopReason stop_reason = StopReason::MaxSteps;
  std::string message;
  std::vector<StepRecord> series;
  std::vector<Snapshot> snapshots;
  Diagnostics diagnostics;
  long total_clamps = 0;
};

/// Iterates `step` until the relative residual drops below the tolerance or a
/// budget is exhausted. Throws ConfigError for an invalid initial body.
/// `observer`, when set, sees every accepted state including the initial one.
using StateObserver = std::function<void(const FlowState&)>;
FlowResult run(const FlowProblem& problem, const StateObserver& observer = {});
FlowResult run(const FlowConfig& config, const StateObserver& observer = {});

}  // namespace torsionflow
