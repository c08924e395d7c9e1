#include "torsionflow/cli.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "torsionflow/config.hpp"
#include "torsionflow/io.hpp"
#include "torsionflow/verify.hpp"

namespace torsionflow {

namespace fs = std::filesystem;

namespace {

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// --out, then TORSIONFLOW_OUT, then output.dir from the config, then "out".
fs::path output_dir(const std::string& flag, const FlowConfig& config) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("TORSIONFLOW_OUT"); env && *env) return env;
  if (!config.output.dir.empty()) return config.output.dir;
  return "out";
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  return os;
}

int exit_code(StopReason r) {
  switch (r) {
    case StopReason::Converged: return 0;
    case StopReason::MaxSteps: return 2;
    case StopReason::ConvexityLoss:
    case StopReason::PositivityLoss: return 3;
    case StopReason::SolverFailure: return 4;
  }
  return 1;
}

int cmd_run(const std::string& config_path, const std::string& out_flag) {
  const FlowConfig config = parse_config(config_path);
  const fs::path dir = output_dir(out_flag, config);
  fs::create_directories(dir);
  const std::string started = utc_now();
  const FlowResult result = run(config);

  {
    auto os = open_out(dir / "series.csv");
    write_series_csv(os, result.series);
  }
  open_out(dir / "final.json") << result_to_json(result, config).dump(2) << '\n';
  if (!result.snapshots.empty()) {
    fs::create_directories(dir / "snapshots");
    for (const Snapshot& s : result.snapshots) {
      char name[40];
      std::snprintf(name, sizeof name, "step_%08ld.csv", s.step);
      auto os = open_out(dir / "snapshots" / name);
      write_polyline_csv(os, s.boundary);
    }
  }
  const nlohmann::json resolved = config_to_json(config);
  const nlohmann::json manifest = {{"tool", "torsionflow"},
                                   {"version", kToolVersion},
                                   {"config", resolved},
                                   {"config_sha256", sha256_hex(resolved.dump())},
                                   {"started_at", started},
                                   {"finished_at", utc_now()}};
  open_out(dir / "manifest.json") << manifest.dump(2) << '\n';

  std::cerr << "stop: " << to_string(result.stop_reason) << " after "
            << result.series.back().step << " steps, residual "
            << result.series.back().residual_sup << ", gamma " << result.gamma << '\n';
  if (!result.message.empty()) std::cerr << result.message << '\n';
  return exit_code(result.stop_reason);
}

int cmd_measure(const std::string& config_path, const std::string& out_flag) {
  const FlowConfig config = parse_config(config_path);
  const ConvexBody body = build_body(config.initial.support(config.n_theta), config.rho_floor);
  const TorsionSolution sol = solve_torsion(body, config.n_radial);
  const std::vector<double> m = torsional_measure_density(body, sol);
  const nlohmann::json j = {{"T_volume", sol.T_volume},         {"T_work", sol.T_work},
                            {"T_boundary", sol.T_boundary},     {"q", sol.q},
                            {"m", m},                           {"cg_iterations", sol.cg_iterations}};
  std::cout << j.dump(2) << '\n';

  const char* env = std::getenv("TORSIONFLOW_OUT");
  if (!out_flag.empty() || (env && *env)) {
    const fs::path dir = output_dir(out_flag, config);
    fs::create_directories(dir);
    auto os = open_out(dir / "boundary.csv");
    os << "theta,h,x,y,q,m\n";
    for (std::size_t k = 0; k < body.size(); ++k)
      os << format_double(body.h.theta(k)) << ',' << format_double(body.h[k]) << ','
         << format_double(body.boundary[k].x) << ',' << format_double(body.boundary[k].y) << ','
         << format_double(sol.q[k]) << ',' << format_double(m[k]) << '\n';
  }
  return 0;
}

int cmd_residual(const std::string& config_path, const std::string& h_path,
                 const std::optional<double>& gamma) {
  const FlowConfig config = parse_config(config_path);
  const FlowProblem problem(config);
  std::vector<double> h;
  try {
    h = read_grid_values(h_path);
  } catch (const Error& e) {
    throw ConfigError("--h", e.what());
  }
  if (h.size() != config.n_theta)
    throw ConfigError("--h", "file has " + std::to_string(h.size()) + " rows, grid has " +
                                 std::to_string(config.n_theta));
  const Residual r = residual(SupportFunction(h), problem, gamma);
  std::cout << nlohmann::json{{"sup_rel", r.sup_rel}, {"gamma", r.gamma}, {"profile", r.profile}}.dump(2)
            << '\n';
  return 0;
}

int cmd_verify(const std::vector<std::string>& suites, const std::string& out) {
  const auto reports = run_suite(suites.empty() ? std::vector<std::string>{"all"} : suites);
  nlohmann::json arr = nlohmann::json::array();
  bool ok = true;
  for (const auto& r : reports) {
    arr.push_back(to_json(r));
    ok = ok && r.pass;
    std::cerr << (r.pass ? "PASS " : "FAIL ") << r.name << '\n';
  }
  if (out.empty()) std::cout << arr.dump(2) << '\n';
  else open_out(out) << arr.dump(2) << '\n';
  return ok ? 0 : 1;
}

}  // namespace

int dispatch(int argc, char** argv) {
  CLI::App app{"Planar flow solver for the Orlicz-Minkowski problem of torsional rigidity"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  std::string config_path, out, h_path;
  std::optional<double> gamma;
  std::vector<std::string> suites;

  auto* run_cmd = app.add_subcommand("run", "Run the flow to convergence or budget");
  run_cmd->add_option("--config", config_path, "JSON config file")->required();
  run_cmd->add_option("--out", out, "Output directory");

  auto* measure_cmd = app.add_subcommand("measure", "Solve torsion on the initial body");
  measure_cmd->add_option("--config", config_path, "JSON config file")->required();
  measure_cmd->add_option("--out", out, "Directory for boundary.csv");

  auto* residual_cmd = app.add_subcommand("residual", "Residual of the stationary equation");
  residual_cmd->set_help_flag("--help", "Print this help message and exit");
  residual_cmd->add_option("--config", config_path, "JSON config file")->required();
  residual_cmd->add_option("--h", h_path, "CSV of theta,h samples")->required();
  residual_cmd->add_option("--gamma", gamma, "Constant gamma (default 1/eta)");

  auto* verify_cmd = app.add_subcommand("verify", "Run oracle and property suites");
  verify_cmd->add_option("--suite", suites, "Suite name (repeatable; default all)");
  verify_cmd->add_option("--out", out, "Write the JSON report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run_cmd) return cmd_run(config_path, out);
    if (*measure_cmd) return cmd_measure(config_path, out);
    if (*residual_cmd) return cmd_residual(config_path, h_path, gamma);
    if (*verify_cmd) return cmd_verify(suites, out);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const UnknownSuite& e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const SolverDiverged& e) {
    std::cerr << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace torsionflow
