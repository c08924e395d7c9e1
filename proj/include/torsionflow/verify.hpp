#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "torsionflow/flow.hpp"

namespace torsionflow {

class UnknownSuite : public Error {
 public:
  explicit UnknownSuite(const std::string& name);
};

/// One pass/fail comparison. `metric` is "relative", "absolute", "upper_bound",
/// "lower_bound" or "quantile"; `provenance` is "analytic", "paper-identity"
/// or "cross-oracle".
struct CheckReport {
  std::string name;
  std::vector<double> measured;
  std::vector<double> expected;
  double tolerance = 0.0;
  std::string metric;
  std::string provenance;
  bool pass = false;
  double runtime_ms = 0.0;
  std::string note;
};

nlohmann::json to_json(const CheckReport& r);

/// Discretization budgets; defaults match the (64, 32) resolution.
struct Tolerances {
  double disk_T = 1e-2;
  double disk_q = 2e-2;
  double disk_center = 1e-2;
  double homogeneity = 1e-2;
  double translation = 1e-2;
  double variational = 2e-2;
  double normal_angle_deg = 5.0;
  double normal_quantile = 0.9;
  double stationarity_velocity = 1e-2;
  double stationarity_residual = 2e-2;
  double stationarity_gamma = 3e-2;
  double monotone_slack = 1e-8;
  double conservation = 1e-12;
  double parity = 1e-12;
  double disk_radius = 1e-2;
};

/// T vs pi R^4/2, q vs R and U(0) vs R^2/2.
std::vector<CheckReport> check_disk(double R, std::size_t n_theta = 64,
                                    std::size_t n_radial = kDefaultRadial,
                                    const Tolerances& tol = {});

/// T(lambda K)/T(K) against lambda^4.
CheckReport check_homogeneity(const SupportFunction& h, double lambda,
                              std::size_t n_radial = kDefaultRadial, const Tolerances& tol = {});

/// |T(K + v) - T(K)| / T(K). Throws DomainError unless |v| < min h.
CheckReport check_translation(const SupportFunction& h, Vec2 v,
                              std::size_t n_radial = kDefaultRadial, const Tolerances& tol = {});

/// Centered difference of t -> T(h0 + t h1) against sum h1 q0^2 rho0 dtheta.
CheckReport check_variational(const SupportFunction& h0, const SupportFunction& h1,
                              double delta = 1e-3, std::size_t n_radial = kDefaultRadial,
                              const Tolerances& tol = {});

/// max_j q_j <= diameter.
CheckReport check_gradient_bound(const SupportFunction& h, std::size_t n_radial = kDefaultRadial);

/// Angle between the boundary element gradient and -x(theta_j): the chosen
/// quantile of angles must stay below the angle budget. measured = {quantile
/// angle, median angle} in degrees.
CheckReport check_normal_alignment(const SupportFunction& h, std::size_t n_radial = kDefaultRadial,
                                   const Tolerances& tol = {});

/// Ball of radius R with f = c and psi = s^p. Mode: even_log for p = 0, plain
/// when p > 2, epsilon otherwise. Reports velocity, residual and gamma.
std::vector<CheckReport> check_ball_stationarity(double R, double p, double c = 1.0,
                                                 std::size_t n_theta = 64,
                                                 const Tolerances& tol = {});
std::vector<CheckReport> check_ball_stationarity(double R, double p, double c, FlowMode mode,
                                                 std::size_t n_theta = 64,
                                                 const Tolerances& tol = {});

/// Canned flow scenarios.
FlowConfig scenario_ellipse_to_disk();
FlowConfig scenario_positivity();
FlowConfig scenario_even(bool cosine_density);

/// Per-step T conservation and J monotonicity over a finished run.
std::vector<CheckReport> check_flow_invariants(const FlowResult& result, const Tolerances& tol = {});

/// Converged run with constant data ends on the disk of conserved T.
std::vector<CheckReport> check_disk_limit(const FlowResult& result, const Tolerances& tol = {});

/// min_h stays above floor and has no downward trend over the last half.
std::vector<CheckReport> check_positivity(const FlowResult& result, double floor);

/// Runs an even_log scenario, checking the antipodal gap after every step.
std::vector<CheckReport> check_even_run(const FlowConfig& config, bool expect_disk,
                                        const Tolerances& tol = {});

/// Suites: disk, homogeneity, translation, variational, gradient_bound,
/// normal_alignment, ball_stationarity, flow, all.
std::vector<CheckReport> run_suite(const std::vector<std::string>& names, const Tolerances& tol = {});

const std::vector<std::string>& suite_names();

}  // namespace torsionflow
