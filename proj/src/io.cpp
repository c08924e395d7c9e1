#include "torsionflow/io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace torsionflow {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

bool parse_number(const std::string& cell, double& out) {
  std::size_t used = 0;
  try {
    out = std::stod(cell, &used);
  } catch (const std::exception&) {
    return false;
  }
  while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
  return used == cell.size();
}

}  // namespace

std::vector<std::array<double, 2>> read_csv_pairs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::array<double, 2>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto comma = line.find(',');
    std::array<double, 2> row{};
    const bool ok = comma != std::string::npos && parse_number(line.substr(0, comma), row[0]) &&
                    parse_number(line.substr(comma + 1), row[1]);
    if (!ok) {
      if (rows.empty() && line_no == 1) continue;  // header
      throw Error(path.string() + ":" + std::to_string(line_no) + ": expected two numbers");
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<double> read_grid_values(const std::filesystem::path& path) {
  std::vector<double> out;
  for (const auto& row : read_csv_pairs(path)) out.push_back(row[1]);
  return out;
}

void write_support_csv(std::ostream& os, const SupportFunction& h) {
  os << "theta,h\n";
  for (std::size_t j = 0; j < h.size(); ++j)
    os << format_double(h.theta(j)) << ',' << format_double(h[j]) << '\n';
}

void write_polyline_csv(std::ostream& os, const std::vector<Vec2>& points) {
  os << "x,y\n";
  for (const Vec2& p : points) os << format_double(p.x) << ',' << format_double(p.y) << '\n';
}

void write_series_csv(std::ostream& os, const std::vector<StepRecord>& series) {
  os << kSeriesHeader << '\n';
  for (const StepRecord& r : series) {
    os << format_double(r.t) << ',' << format_double(r.dt) << ',' << format_double(r.T) << ','
       << format_double(r.J) << ',' << format_double(r.eta) << ',' << format_double(r.min_h) << ','
       << format_double(r.max_h) << ',' << format_double(r.min_rho) << ','
       << format_double(r.max_rho) << ',' << format_double(r.min_q) << ','
       << format_double(r.residual_sup) << ',' << r.clamps << '\n';
  }
}

namespace {

nlohmann::json vec2_json(Vec2 v) { return nlohmann::json::array({v.x, v.y}); }

nlohmann::json psi_json(const FlowConfig& c) {
  nlohmann::json j;
  if (c.psi.is_power()) {
    j = {{"kind", "power"}, {"p", c.psi.exponent()}};
  } else {
    j = {{"kind", "table"}, {"path", c.psi_path}};
    j["s"] = std::vector<double>(c.psi.knots().begin(), c.psi.knots().end());
    j["values"] = std::vector<double>(c.psi.knot_values().begin(), c.psi.knot_values().end());
  }
  j["class"] = to_string(c.psi.class_tag());
  return j;
}

nlohmann::json density_json(const DensitySpec& f) {
  switch (f.kind) {
    case DensitySpec::Kind::Const: return {{"kind", "const"}, {"c", f.c}};
    case DensitySpec::Kind::Cosine: return {{"kind", "cosine"}, {"c", f.c}, {"a", f.a}, {"k", f.k}};
    case DensitySpec::Kind::Table: return {{"kind", "table"}, {"path", f.path}};
  }
  return {};
}

nlohmann::json initial_json(const InitialBodySpec& b) {
  switch (b.kind) {
    case InitialBodySpec::Kind::Disk:
      return {{"kind", "disk"}, {"R", b.radius}, {"center", vec2_json(b.center)}};
    case InitialBodySpec::Kind::Ellipse:
      return {{"kind", "ellipse"}, {"a", b.a}, {"b", b.b}, {"center", vec2_json(b.center)}};
    case InitialBodySpec::Kind::Table: return {{"kind", "table"}, {"path", b.path}};
  }
  return {};
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json config_to_json(const FlowConfig& c) {
  nlohmann::json j;
  j["mode"] = to_string(c.mode);
  j["psi"] = psi_json(c);
  j["epsilon"] = c.epsilon;
  j["allow_positivity_loss"] = c.allow_positivity_loss;
  j["f"] = density_json(c.f);
  j["grid"] = {{"n_theta", c.n_theta}, {"n_radial", c.n_radial}};
  j["initial"] = initial_json(c.initial);
  const SteppingConfig& s = c.stepping;
  j["stepping"] = {{"dt0", s.dt0},
                   {"dt_max", s.dt_max},
                   {"delta_max", optional_json(s.delta_max)},
                   {"safety", s.safety},
                   {"max_halvings", s.max_halvings},
                   {"grow_after", s.grow_after},
                   {"grow_factor", s.grow_factor}};
  j["renormalize_T"] = c.renormalize_T;
  j["q_floor"] = optional_json(c.q_floor);
  j["rho_floor"] = c.rho_floor;
  // JSON has no infinity; an unbounded horizon is written as null.
  j["stop"] = {{"residual_tol", c.stop.residual_tol},
               {"t_max", std::isfinite(c.stop.t_max) ? nlohmann::json(c.stop.t_max) : nlohmann::json()},
               {"max_steps", c.stop.max_steps}};
  j["output"] = {{"dir", c.output.dir}, {"snapshot_every", c.output.snapshot_every}};
  return j;
}

nlohmann::json result_to_json(const FlowResult& r, const FlowConfig& config) {
  nlohmann::json j;
  j["config"] = config_to_json(config);
  j["h"] = std::vector<double>(r.h.samples().begin(), r.h.samples().end());
  j["gamma"] = r.gamma;
  j["stop_reason"] = to_string(r.stop_reason);
  j["message"] = r.message;
  j["T0"] = r.T0;
  j["steps"] = r.series.empty() ? 0 : r.series.back().step;
  j["t"] = r.series.empty() ? 0.0 : r.series.back().t;
  const Diagnostics& d = r.diagnostics;
  j["diagnostics"] = {{"min_h", d.min_h},     {"max_h", d.max_h}, {"min_rho", d.min_rho},
                      {"max_rho", d.max_rho}, {"min_q", d.min_q}, {"J", d.J},
                      {"T", d.T},             {"residual_sup", d.residual_sup}};
  j["total_clamps"] = r.total_clamps;
  return j;
}

}  // namespace torsionflow
