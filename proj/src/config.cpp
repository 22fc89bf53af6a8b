#include "reflest/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace reflest::config {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool one_token(const std::string& s) {
  for (char c : s)
    if (std::isspace(static_cast<unsigned char>(c))) return false;
  return !s.empty();
}

[[noreturn]] void fail(const std::string& source, int line, const std::string& what) {
  throw ConfigError(source + " line " + std::to_string(line) + ": " + what);
}

double real_from(const std::string& key, const std::string& text, int line) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || static_cast<std::size_t>(end - begin) != text.size())
    throw ConfigError("field '" + key + "' (line " + std::to_string(line) +
                      "): not a number: '" + text + "'");
  return v;
}

long long int_from(const std::string& key, const std::string& text, int line) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const long long v = std::strtoll(begin, &end, 10);
  if (end == begin || static_cast<std::size_t>(end - begin) != text.size())
    throw ConfigError("field '" + key + "' (line " + std::to_string(line) +
                      "): not an integer: '" + text + "'");
  return v;
}

}  // namespace

bool Node::has(const std::string& key) const { return values.count(key) != 0; }

bool Node::has_section(const std::string& key) const { return sections.count(key) != 0; }

const Node& Node::section(const std::string& key) const {
  const auto it = sections.find(key);
  if (it == sections.end()) throw ConfigError("missing section: " + key);
  return it->second;
}

std::string Node::get_string(const std::string& key) const {
  const auto it = values.find(key);
  if (it == values.end()) throw ConfigError("missing field: " + key);
  return it->second;
}

std::string Node::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? values.at(key) : fallback;
}

double Node::get_real(const std::string& key) const {
  return real_from(key, get_string(key), value_lines.at(key));
}

double Node::get_real(const std::string& key, double fallback) const {
  return has(key) ? get_real(key) : fallback;
}

long long Node::get_int(const std::string& key) const {
  return int_from(key, get_string(key), value_lines.at(key));
}

long long Node::get_int(const std::string& key, long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::vector<double> Node::get_reals(const std::string& key) const {
  const std::string raw = get_string(key);
  const int line = value_lines.at(key);
  std::vector<double> out;
  std::istringstream iss(raw);
  std::string piece;
  while (iss >> piece) out.push_back(real_from(key, piece, line));
  if (out.empty())
    throw ConfigError("field '" + key + "' (line " + std::to_string(line) +
                      "): empty list");
  return out;
}

std::vector<double> Node::get_reals(const std::string& key,
                                    const std::vector<double>& fallback) const {
  return has(key) ? get_reals(key) : fallback;
}

Node parse(const std::string& text, const std::string& source) {
  Node root;
  std::vector<Node*> stack{&root};
  std::vector<std::pair<std::string, int>> open_sections;

  std::istringstream iss(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(iss, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;

    if (line == "}") {
      if (stack.size() == 1) fail(source, lineno, "unmatched '}'");
      stack.pop_back();
      open_sections.pop_back();
      continue;
    }

    if (line.back() == '{') {
      const std::string name = trim(line.substr(0, line.size() - 1));
      if (!one_token(name)) fail(source, lineno, "bad section header: '" + line + "'");
      if (stack.back()->sections.count(name))
        fail(source, lineno, "duplicate section '" + name + "'");
      Node& child = stack.back()->sections[name];
      stack.push_back(&child);
      open_sections.emplace_back(name, lineno);
      continue;
    }

    std::size_t split = 0;
    while (split < line.size() && !std::isspace(static_cast<unsigned char>(line[split])))
      ++split;
    const std::string key = line.substr(0, split);
    const std::string value = trim(line.substr(split));
    if (value.empty()) fail(source, lineno, "field '" + key + "' has no value");
    if (stack.back()->values.count(key))
      fail(source, lineno, "duplicate key '" + key + "'");
    stack.back()->values[key] = value;
    stack.back()->value_lines[key] = lineno;
  }

  if (stack.size() > 1)
    throw ConfigError(source + ": unterminated section '" + open_sections.back().first +
                      "' opened at line " + std::to_string(open_sections.back().second));
  return root;
}

Node parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) throw ConfigError("cannot open config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "skorokhod-demo", "penalization-sweep", "mortensen",      "viscosity-sweep",
      "filtering",      "identification",     "boundary-table",
  };
  return names;
}

namespace {

struct Defaults {
  std::string scenario;
  GridSpec grid;
};

Defaults defaults_for(const std::string& experiment) {
  if (experiment == "skorokhod-demo") return {"figure1", {16.0, 64, 16.0, 4096}};
  if (experiment == "penalization-sweep") return {"figure1", {16.0, 64, 16.0, 4000}};
  if (experiment == "mortensen") return {"linear-quadratic", {4.0, 200, 1.0, 200}};
  if (experiment == "viscosity-sweep") return {"figure1", {8.0, 200, 1.0, 800}};
  if (experiment == "filtering") return {"constant-obs", {4.0, 200, 1.0, 400}};
  if (experiment == "identification") return {"figure1", {8.0, 100, 2.0, 100}};
  return {"boundary-probe", {4.0, 100, 1.5, 150}};  // boundary-table
}

void require_monotone(const std::string& key, const std::vector<double>& v) {
  if (v.size() < 2) return;
  const bool increasing = v[1] > v[0];
  for (std::size_t k = 1; k < v.size(); ++k) {
    const bool step_up = v[k] > v[k - 1];
    if (v[k] == v[k - 1] || step_up != increasing)
      throw ConfigError("field '" + key + "': ladder must be strictly monotone");
  }
}

ProblemSpec scenario_from(const Node& root, const std::string& fallback,
                          std::string& label) {
  try {
    if (root.has("scenario")) {
      label = root.get_string("scenario");
      return builtin_scenario(label);
    }
    if (root.has_section("scenario")) {
      const Node& sec = root.section("scenario");
      const std::string family = sec.get_string("family");
      if (family == "linear-quadratic" &&
          (sec.has("a") || sec.has("c") || sec.has("m") || sec.has("sigma0") ||
           sec.has("x0"))) {
        const double a = sec.get_real("a");
        const double c = sec.get_real("c");
        const double m = sec.get_real("m");
        const double sigma0 = sec.get_real("sigma0");
        const double x0 = sec.get_real("x0");
        const double plateau = sec.get_real("plateau", 8.0);
        std::ostringstream name;
        name << "linear-quadratic(a=" << a << ",c=" << c << ",m=" << m
             << ",sigma0=" << sigma0 << ",x0=" << x0 << ")";
        label = name.str();
        return linear_quadratic_scenario(a, c, m, sigma0, x0, plateau);
      }
      label = family;
      return builtin_scenario(family);
    }
    label = fallback;
    return builtin_scenario(fallback);
  } catch (const std::invalid_argument& err) {
    throw ConfigError(std::string("field 'scenario': ") + err.what());
  }
}

}  // namespace

ExperimentConfig load(const Node& root) {
  ExperimentConfig cfg;
  cfg.root = root;
  cfg.experiment = root.get_string("experiment");

  const auto& names = experiment_names();
  bool known = false;
  for (const auto& n : names) known = known || n == cfg.experiment;
  if (!known) {
    std::string list;
    for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
    throw ConfigError("field 'experiment': unknown value '" + cfg.experiment +
                      "' (one of: " + list + ")");
  }

  const Defaults def = defaults_for(cfg.experiment);
  cfg.scenario = scenario_from(root, def.scenario, cfg.scenario_label);

  cfg.grid = def.grid;
  if (root.has_section("grid")) {
    const Node& g = root.section("grid");
    cfg.grid.xmax = g.get_real("xmax", cfg.grid.xmax);
    cfg.grid.nx = static_cast<int>(g.get_int("nx", cfg.grid.nx));
    cfg.grid.T = g.get_real("T", cfg.grid.T);
    cfg.grid.nt = static_cast<int>(g.get_int("nt", cfg.grid.nt));
  }
  try {
    cfg.grid.validate();
  } catch (const std::invalid_argument& err) {
    throw ConfigError(std::string("section 'grid': ") + err.what());
  }

  cfg.kappa_ladder = root.get_reals("kappa_ladder", {});
  cfg.eps_ladder = root.get_reals("eps_ladder", {});
  require_monotone("kappa_ladder", cfg.kappa_ladder);
  require_monotone("eps_ladder", cfg.eps_ladder);

  if (root.has("seed")) {
    const long long s = root.get_int("seed");
    if (s < 0) throw ConfigError("field 'seed': must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(s);
    cfg.seed_given = true;
  }
  const bool stochastic = cfg.experiment == "mortensen" || cfg.experiment == "filtering";
  if (stochastic && !cfg.seed_given)
    throw ConfigError("missing field: seed (required for stochastic experiments)");

  cfg.out_dir = root.get_string("out", "out/" + cfg.experiment);
  return cfg;
}

ExperimentConfig load_file(const std::string& path) { return load(parse_file(path)); }

}  // namespace reflest::config
