#include "condenser/config.hpp"

#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>

namespace condenser {

namespace {

[[noreturn]] void fail(int line, const std::string& what) {
  throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// strips a trailing comment outside of quotes
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

double parse_double(const std::string& v, int line) {
  const std::string t = trim(v);
  if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
  try {
    size_t used = 0;
    const double x = std::stod(t, &used);
    if (used != t.size()) fail(line, "trailing characters after number '" + t + "'");
    return x;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    fail(line, "expected a number, got '" + t + "'");
  }
}

int parse_int(const std::string& v, int line) {
  const double x = parse_double(v, line);
  if (x != std::floor(x)) fail(line, "expected an integer, got '" + trim(v) + "'");
  return static_cast<int>(x);
}

bool parse_bool(const std::string& v, int line) {
  const std::string t = trim(v);
  if (t == "true") return true;
  if (t == "false") return false;
  fail(line, "expected true or false, got '" + t + "'");
}

std::string parse_string(const std::string& v, int line) {
  const std::string t = trim(v);
  if (t.size() >= 2 && t.front() == '"' && t.back() == '"') return t.substr(1, t.size() - 2);
  if (!t.empty() && t.front() == '"') fail(line, "unterminated string");
  return t;
}

// [[x,y,z,c], ...]
std::vector<std::array<double, 4>> parse_atoms(const std::string& v, int line) {
  std::string t;
  for (char c : v)
    if (!std::isspace(static_cast<unsigned char>(c))) t += c;
  if (t.size() < 2 || t.front() != '[' || t.back() != ']')
    fail(line, "atoms must be a list of [x, y, z, charge] rows");
  t = t.substr(1, t.size() - 2);
  std::vector<std::array<double, 4>> out;
  size_t i = 0;
  while (i < t.size()) {
    if (t[i] == ',') {
      ++i;
      continue;
    }
    if (t[i] != '[') fail(line, "atoms must be a list of [x, y, z, charge] rows");
    const size_t close = t.find(']', i);
    if (close == std::string::npos) fail(line, "unterminated atom row");
    std::stringstream row(t.substr(i + 1, close - i - 1));
    std::array<double, 4> a{};
    std::string cell;
    int k = 0;
    while (std::getline(row, cell, ',')) {
      if (k >= 4) fail(line, "atom rows take exactly 4 entries");
      a[k++] = parse_double(cell, line);
    }
    if (k != 4) fail(line, "atom rows take exactly 4 entries");
    out.push_back(a);
    i = close + 1;
  }
  return out;
}

}  // namespace

RunConfig parse_config(std::istream& in, const std::string& name) {
  RunConfig cfg;
  cfg.name = name;
  std::string section;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section != "geometry" && section != "kernel" && section != "field" &&
          section != "constraint" && section != "solver" && section != "assertions")
        fail(line, "unknown section [" + section + "]");
      continue;
    }
    const size_t eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string val = s.substr(eq + 1);
    if (section.empty()) fail(line, "key '" + key + "' outside any section");

    if (section == "geometry") {
      if (key == "example") cfg.geometry.example = parse_string(val, line);
      else if (key == "resolution") cfg.geometry.resolution = parse_int(val, line);
      else if (key == "truncation_radius") cfg.geometry.truncation_radius = parse_double(val, line);
      else if (key == "points_file") cfg.geometry.points_file = parse_string(val, line);
      else if (key == "domain") cfg.geometry.domain = parse_string(val, line);
      else if (key == "domain_radius") cfg.geometry.domain_radius = parse_double(val, line);
      else fail(line, "unknown key '" + key + "' in [geometry]");
    } else if (section == "kernel") {
      if (key == "alpha") cfg.kernel.alpha = parse_double(val, line);
      else if (key == "diag_scale") cfg.kernel.diag_scale = parse_double(val, line);
      else fail(line, "unknown key '" + key + "' in [kernel]");
    } else if (section == "field") {
      if (key == "kind") cfg.field.kind = parse_string(val, line);
      else if (key == "values_file") cfg.field.values_file = parse_string(val, line);
      else if (key == "atoms") cfg.field.atoms = parse_atoms(val, line);
      else fail(line, "unknown key '" + key + "' in [field]");
    } else if (section == "constraint") {
      if (key == "kind") cfg.constraint.kind = parse_string(val, line);
      else if (key == "scale") cfg.constraint.scale = parse_double(val, line);
      else if (key == "decay_power") cfg.constraint.decay_power = parse_double(val, line);
      else fail(line, "unknown key '" + key + "' in [constraint]");
    } else if (section == "solver") {
      if (key == "tol") cfg.solver.tol = parse_double(val, line);
      else if (key == "max_iter") cfg.solver.max_iter = parse_int(val, line);
      else if (key == "seed") cfg.solver.seed = static_cast<std::uint64_t>(parse_double(val, line));
      else if (key == "renorm_tol") cfg.solver.renorm_tol = parse_double(val, line);
      else if (key == "pot_tol") cfg.solver.pot_tol = parse_double(val, line);
      else if (key == "direct_solve") cfg.solver.direct_solve = parse_bool(val, line);
      else fail(line, "unknown key '" + key + "' in [solver]");
    } else {  // assertions
      if (key == "expect_feasible") cfg.assertions.expect_feasible = parse_bool(val, line);
      else if (key == "expect_energy_escape")
        cfg.assertions.expect_energy_escape = parse_bool(val, line);
      else if (key == "max_duality_gap") cfg.assertions.max_duality_gap = parse_double(val, line);
      else if (key == "max_frostman_rel") cfg.assertions.max_frostman_rel = parse_double(val, line);
      else if (key == "max_mass_deficit") cfg.assertions.max_mass_deficit = parse_double(val, line);
      else if (key == "min_support_fraction")
        cfg.assertions.min_support_fraction = parse_double(val, line);
      else if (key == "min_boundary_fraction")
        cfg.assertions.min_boundary_fraction = parse_double(val, line);
      else if (key == "max_escape_ratio") cfg.assertions.max_escape_ratio = parse_double(val, line);
      else fail(line, "unknown key '" + key + "' in [assertions]");
    }
  }

  if (cfg.geometry.resolution < 4) throw ConfigError("config: resolution must be at least 4");
  if (!(cfg.kernel.alpha > 0.0 && cfg.kernel.alpha <= 2.0))
    throw ConfigError("config: alpha must lie in (0, 2]");
  if (cfg.field.kind != "zero" && cfg.field.kind != "values" && cfg.field.kind != "swept")
    throw ConfigError("config: field kind must be zero, values, or swept");
  if (cfg.field.kind == "values" && cfg.field.values_file.empty())
    throw ConfigError("config: field kind 'values' needs values_file");
  if (cfg.field.kind == "swept" && cfg.field.atoms.empty())
    throw ConfigError("config: field kind 'swept' needs at least one atom");
  if (cfg.constraint.kind != "none" && cfg.constraint.kind != "density" &&
      cfg.constraint.kind != "annuli-decay")
    throw ConfigError("config: constraint kind must be none, density, or annuli-decay");
  if (!(cfg.solver.tol > 0.0)) throw ConfigError("config: solver tol must be positive");
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse_config(in, std::filesystem::path(path).stem().string());
}

}  // namespace condenser
