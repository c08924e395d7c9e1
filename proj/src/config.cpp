#include "torsionflow/config.hpp"

#include <fstream>
#include <set>

#include "torsionflow/io.hpp"

namespace torsionflow {

namespace {

using nlohmann::json;

/// View of one JSON object that rejects keys outside an allowed set.
class Section {
 public:
  Section(const json& node, std::string path, std::set<std::string> allowed)
      : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(label(), "expected an object");
    for (const auto& item : node_.items())
      if (!allowed.count(item.key())) throw ConfigError(field(item.key()), "unknown key");
  }

  bool has(const std::string& key) const { return node_.contains(key) && !node_[key].is_null(); }
  const json& at(const std::string& key) const { return node_[key]; }
  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    if (!at(key).is_number()) throw ConfigError(field(key), "expected a number");
    return at(key).get<double>();
  }
  std::optional<double> optional_number(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return number(key, 0.0);
  }
  long integer(const std::string& key, long fallback) const {
    if (!has(key)) return fallback;
    if (!at(key).is_number_integer()) throw ConfigError(field(key), "expected an integer");
    return at(key).get<long>();
  }
  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    if (!at(key).is_boolean()) throw ConfigError(field(key), "expected true or false");
    return at(key).get<bool>();
  }
  std::string string(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    if (!at(key).is_string()) throw ConfigError(field(key), "expected a string");
    return at(key).get<std::string>();
  }
  std::string required_string(const std::string& key) const {
    if (!has(key)) throw ConfigError(field(key), "missing");
    return string(key, "");
  }
  Vec2 point(const std::string& key) const {
    if (!has(key)) return {};
    const json& v = at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      throw ConfigError(field(key), "expected [x, y]");
    return {v[0].get<double>(), v[1].get<double>()};
  }

 private:
  const json& node_;
  std::string path_;
  std::string label() const { return path_.empty() ? "<root>" : path_; }
};

std::string resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal().string();
}

OrliczClass parse_class(const Section& s, const std::string& key, OrliczClass fallback) {
  if (!s.has(key)) return fallback;
  const std::string v = s.string(key, "");
  if (v == "B") return OrliczClass::B;
  if (v == "C") return OrliczClass::C;
  throw ConfigError(s.field(key), "expected \"B\" or \"C\"");
}

void parse_psi(const json& node, const std::filesystem::path& base, FlowConfig& c) {
  const Section s(node, "psi", {"kind", "p", "path", "class"});
  const std::string kind = s.required_string("kind");
  if (kind == "power") {
    c.psi = OrliczFamily::power(s.number("p", 3.0));
    if (s.has("class") && parse_class(s, "class", c.psi.class_tag()) != c.psi.class_tag())
      throw ConfigError("psi.class", "does not match the power exponent");
    if (s.has("path")) throw ConfigError("psi.path", "only valid for kind table");
  } else if (kind == "table") {
    c.psi_path = resolve(base, s.required_string("path"));
    std::vector<double> knots, values;
    try {
      for (const auto& row : read_csv_pairs(c.psi_path)) {
        knots.push_back(row[0]);
        values.push_back(row[1]);
      }
      c.psi = OrliczFamily::table(knots, values, parse_class(s, "class", OrliczClass::B));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError("psi.path", e.what());
    }
  } else {
    throw ConfigError("psi.kind", "expected power or table, got '" + kind + "'");
  }
}

std::vector<double> load_table(const std::string& field, const std::string& path) {
  try {
    return read_grid_values(path);
  } catch (const Error& e) {
    throw ConfigError(field, e.what());
  }
}

void parse_density(const json& node, const std::filesystem::path& base, DensitySpec& f) {
  const Section s(node, "f", {"kind", "c", "a", "k", "path"});
  const std::string kind = s.required_string("kind");
  if (kind == "const") {
    f.kind = DensitySpec::Kind::Const;
    f.c = s.number("c", 1.0);
  } else if (kind == "cosine") {
    f.kind = DensitySpec::Kind::Cosine;
    f.c = s.number("c", 1.0);
    f.a = s.number("a", 0.0);
    f.k = int(s.integer("k", 1));
  } else if (kind == "table") {
    f.kind = DensitySpec::Kind::Table;
    f.path = resolve(base, s.required_string("path"));
    f.samples = load_table("f.path", f.path);
  } else {
    throw ConfigError("f.kind", "expected const, cosine or table, got '" + kind + "'");
  }
}

void parse_initial(const json& node, const std::filesystem::path& base, InitialBodySpec& b) {
  const Section s(node, "initial", {"kind", "R", "center", "a", "b", "path"});
  const std::string kind = s.required_string("kind");
  if (kind == "disk") {
    b.kind = InitialBodySpec::Kind::Disk;
    b.radius = s.number("R", 1.0);
    b.center = s.point("center");
  } else if (kind == "ellipse") {
    b.kind = InitialBodySpec::Kind::Ellipse;
    b.a = s.number("a", 1.0);
    b.b = s.number("b", 1.0);
    b.center = s.point("center");
  } else if (kind == "table") {
    b.kind = InitialBodySpec::Kind::Table;
    b.path = resolve(base, s.required_string("path"));
    b.samples = load_table("initial.path", b.path);
  } else {
    throw ConfigError("initial.kind", "expected disk, ellipse or table, got '" + kind + "'");
  }
}

std::size_t grid_size(const Section& s, const std::string& key, std::size_t fallback) {
  const long v = s.integer(key, long(fallback));
  if (v <= 0) throw ConfigError(s.field(key), "must be positive");
  return std::size_t(v);
}

}  // namespace

FlowConfig parse_config_json(const json& doc, const std::filesystem::path& base_dir) {
  const Section root(doc, "",
                     {"mode", "psi", "epsilon", "allow_positivity_loss", "f", "grid", "initial",
                      "stepping", "renormalize_T", "q_floor", "rho_floor", "stop", "output"});
  FlowConfig c;
  const std::string mode = root.string("mode", "plain");
  if (mode == "plain") c.mode = FlowMode::Plain;
  else if (mode == "epsilon") c.mode = FlowMode::Epsilon;
  else if (mode == "even_log") c.mode = FlowMode::EvenLog;
  else throw ConfigError("mode", "expected plain, epsilon or even_log, got '" + mode + "'");

  if (!root.has("psi")) throw ConfigError("psi", "missing");
  parse_psi(root.at("psi"), base_dir, c);
  c.epsilon = root.number("epsilon", c.epsilon);
  c.allow_positivity_loss = root.boolean("allow_positivity_loss", false);
  if (root.has("f")) parse_density(root.at("f"), base_dir, c.f);
  if (root.has("grid")) {
    const Section g(root.at("grid"), "grid", {"n_theta", "n_radial"});
    c.n_theta = grid_size(g, "n_theta", c.n_theta);
    c.n_radial = grid_size(g, "n_radial", c.n_radial);
  }
  if (!root.has("initial")) throw ConfigError("initial", "missing");
  parse_initial(root.at("initial"), base_dir, c.initial);
  if (root.has("stepping")) {
    const Section s(root.at("stepping"), "stepping",
                    {"dt0", "dt_max", "delta_max", "safety", "max_halvings", "grow_after",
                     "grow_factor"});
    SteppingConfig& st = c.stepping;
    st.dt0 = s.number("dt0", st.dt0);
    st.dt_max = s.number("dt_max", st.dt_max);
    st.delta_max = s.optional_number("delta_max");
    st.safety = s.number("safety", st.safety);
    st.max_halvings = int(s.integer("max_halvings", st.max_halvings));
    st.grow_after = int(s.integer("grow_after", st.grow_after));
    st.grow_factor = s.number("grow_factor", st.grow_factor);
  }
  c.renormalize_T = root.boolean("renormalize_T", true);
  c.q_floor = root.optional_number("q_floor");
  c.rho_floor = root.number("rho_floor", c.rho_floor);
  if (root.has("stop")) {
    const Section s(root.at("stop"), "stop", {"residual_tol", "t_max", "max_steps"});
    c.stop.residual_tol = s.number("residual_tol", c.stop.residual_tol);
    c.stop.t_max = s.number("t_max", c.stop.t_max);
    c.stop.max_steps = s.integer("max_steps", c.stop.max_steps);
  }
  if (root.has("output")) {
    const Section s(root.at("output"), "output", {"dir", "snapshot_every"});
    c.output.dir = s.string("dir", "");
    if (!c.output.dir.empty()) c.output.dir = resolve(base_dir, c.output.dir);
    c.output.snapshot_every = s.integer("snapshot_every", 0);
  }
  validate(c);
  return c;
}

FlowConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  }
  return parse_config_json(doc, path.parent_path());
}

}  // namespace torsionflow
