#include "homog/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace homog {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

[[noreturn]] void fail(const std::string& name, int line, const std::string& what) {
  throw ConfigError(name + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

ConfigFile ConfigFile::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path.string());
}

ConfigFile ConfigFile::parse_string(std::string_view text, std::string name) {
  ConfigFile f;
  f.name_ = std::move(name);
  f.text_ = std::string(text);

  std::string section;
  int line_no = 0;
  std::istringstream in(f.text_);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') fail(f.name_, line_no, "unterminated section header");
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      if (section.empty()) fail(f.name_, line_no, "empty section name");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      fail(f.name_, line_no, "expected 'key = value' or a [section] header");
    Entry e;
    e.section = section;
    e.key = trim(std::string_view(t).substr(0, eq));
    e.value = trim(std::string_view(t).substr(eq + 1));
    e.line = line_no;
    if (e.key.empty()) fail(f.name_, line_no, "empty key");
    for (const Entry& prev : f.entries_)
      if (prev.section == e.section && prev.key == e.key)
        fail(f.name_, line_no,
             "duplicate key '" + e.key + "' in section [" + e.section + "]");
    f.entries_.push_back(std::move(e));
  }
  return f;
}

const ConfigFile::Entry* ConfigFile::find(const std::string& section,
                                          const std::string& key) const {
  for (const Entry& e : entries_)
    if (e.section == section && e.key == key) {
      e.used = true;
      return &e;
    }
  return nullptr;
}

std::optional<std::string> ConfigFile::get(const std::string& section,
                                           const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e) return std::nullopt;
  return e->value;
}

std::string ConfigFile::require(const std::string& section,
                                const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e)
    throw ConfigError(name_ + ": missing required key '" + key +
                      "' in section [" + section + "]");
  return e->value;
}

double ConfigFile::get_double(const std::string& section, const std::string& key,
                              double fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  try {
    std::size_t pos = 0;
    const double v = std::stod(e->value, &pos);
    if (trim(std::string_view(e->value).substr(pos)).empty()) return v;
  } catch (...) {
  }
  fail(name_, e->line, "expected a number for '" + key + "', got '" + e->value + "'");
}

int ConfigFile::get_int(const std::string& section, const std::string& key,
                        int fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  try {
    std::size_t pos = 0;
    const int v = std::stoi(e->value, &pos);
    if (trim(std::string_view(e->value).substr(pos)).empty()) return v;
  } catch (...) {
  }
  fail(name_, e->line, "expected an integer for '" + key + "', got '" + e->value + "'");
}

std::vector<double> ConfigFile::get_list(const std::string& section,
                                         const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e) return {};
  std::vector<double> out;
  std::string item;
  std::istringstream in(e->value);
  while (std::getline(in, item, ',')) {
    const std::string t = trim(item);
    if (t.empty()) fail(name_, e->line, "empty element in list '" + key + "'");
    try {
      std::size_t pos = 0;
      const double v = std::stod(t, &pos);
      if (!trim(std::string_view(t).substr(pos)).empty()) throw std::exception();
      out.push_back(v);
    } catch (...) {
      fail(name_, e->line, "expected a number in list '" + key + "', got '" + t + "'");
    }
  }
  return out;
}

Expr ConfigFile::get_expr(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e)
    throw ConfigError(name_ + ": missing required expression '" + key +
                      "' in section [" + section + "]");
  try {
    return parse(e->value);
  } catch (const ParseError& err) {
    fail(name_, e->line, std::string("in expression '") + key + "': " + err.what());
  }
}

void ConfigFile::finish() const {
  for (const Entry& e : entries_)
    if (!e.used)
      fail(name_, e.line,
           "unknown key '" + e.key + "' in section [" + e.section + "]");
}

std::string_view kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::cell1d: return "cell1d";
    case ExperimentKind::cell2d: return "cell2d";
    case ExperimentKind::solve1d: return "solve1d";
    case ExperimentKind::solve2d: return "solve2d";
    case ExperimentKind::lb1d: return "lb1d";
    case ExperimentKind::lb2d: return "lb2d";
    case ExperimentKind::convergence: return "convergence";
  }
  return "?";
}

namespace {

ExperimentKind parse_kind(const std::string& s, const std::string& name) {
  if (s == "cell1d") return ExperimentKind::cell1d;
  if (s == "cell2d") return ExperimentKind::cell2d;
  if (s == "solve1d") return ExperimentKind::solve1d;
  if (s == "solve2d") return ExperimentKind::solve2d;
  if (s == "lb1d") return ExperimentKind::lb1d;
  if (s == "lb2d") return ExperimentKind::lb2d;
  if (s == "convergence") return ExperimentKind::convergence;
  throw ConfigError(name + ": unknown experiment kind '" + s + "'");
}

std::vector<double> eta_sweep(const ConfigFile& f) {
  const std::vector<double> etas = f.get_list("sweep", "eta");
  if (etas.empty())
    throw ConfigError(f.name() + ": [sweep] eta must list at least one value");
  std::set<double> seen;
  for (double e : etas) {
    if (!(e > 0.0))
      throw ConfigError(f.name() + ": eta values must be positive");
    if (!seen.insert(e).second)
      throw ConfigError(f.name() + ": eta values must be distinct");
  }
  return etas;
}

std::optional<double> optional_eta(const ConfigFile& f, const std::string& sec) {
  if (!f.get(sec, "eta")) return std::nullopt;
  const double e = f.get_double(sec, "eta", 0.0);
  if (!(e > 0.0)) throw ConfigError(f.name() + ": eta must be positive");
  return e;
}

}  // namespace

ExperimentConfig ExperimentConfig::load(const ConfigFile& f) {
  ExperimentConfig cfg;
  cfg.kind = parse_kind(f.require("experiment", "kind"), f.name());
  cfg.name = f.get("experiment", "name").value_or(std::string(kind_name(cfg.kind)));

  switch (cfg.kind) {
    case ExperimentKind::cell1d: {
      Cell1dSpec s;
      s.kappa.expr = f.get_expr("cell", "kappa");
      s.length = f.get_double("cell", "length", 1.0);
      s.eta = optional_eta(f, "cell");
      s.n_quad = f.get_int("solver", "n_quad", 256);
      s.nodes = f.get_int("solver", "nodes", 257);
      if (!(s.length > 0.0)) throw ConfigError(f.name() + ": length must be positive");
      if (s.nodes < 2) throw ConfigError(f.name() + ": nodes must be >= 2");
      cfg.spec = std::move(s);
      break;
    }
    case ExperimentKind::cell2d: {
      Cell2dSpec s;
      s.kappa.expr = f.get_expr("cell", "kappa");
      s.length = f.get_double("cell", "length", 1.0);
      s.resolution = f.get_int("cell", "resolution", 64);
      s.eta = optional_eta(f, "cell");
      s.tol = f.get_double("solver", "tol", 1e-10);
      if (!(s.length > 0.0)) throw ConfigError(f.name() + ": length must be positive");
      if (s.resolution < 8)
        throw ConfigError(f.name() + ": resolution must be >= 8");
      cfg.spec = std::move(s);
      break;
    }
    case ExperimentKind::solve1d: {
      Solve1dSpec s;
      s.kappa.expr = f.get_expr("problem", "kappa");
      s.cell_kappa.expr = f.get_expr("cell", "kappa");
      s.etas = eta_sweep(f);
      s.flux_h = f.get_double("problem", "h", 1.0);
      s.u0 = f.get_double("problem", "u0", 0.0);
      s.output_nodes = f.get_int("solver", "output_nodes", 2001);
      s.n_quad = f.get_int("solver", "n_quad", 0);
      if (s.output_nodes < 2)
        throw ConfigError(f.name() + ": output_nodes must be >= 2");
      cfg.spec = std::move(s);
      break;
    }
    case ExperimentKind::solve2d: {
      Solve2dSpec s;
      s.kappa.expr = f.get_expr("problem", "kappa");
      s.cell_kappa.expr = f.get_expr("cell", "kappa");
      s.etas = eta_sweep(f);
      s.flux_h = f.get_double("problem", "h", 1.0);
      s.m = f.get_int("solver", "m", 256);
      s.tol = f.get_double("solver", "tol", 1e-8);
      s.cell_resolution = f.get_int("cell", "resolution", 64);
      s.cell_tol = f.get_double("cell", "tol", 1e-10);
      cfg.spec = std::move(s);
      break;
    }
    case ExperimentKind::lb1d: {
      Lb1dSpec s;
      const auto builtin = f.get("chart", "builtin");
      if (builtin) {
        if (*builtin != "wrinkled_sine")
          throw ConfigError(f.name() + ": unknown builtin chart '" + *builtin + "'");
        s.builtin_curve = true;
      } else {
        s.x1 = f.get_expr("chart", "x1");
        s.x2 = f.get_expr("chart", "x2");
      }
      s.etas = eta_sweep(f);
      s.flux_h = f.get_double("problem", "h", 1.0);
      s.output_nodes = f.get_int("solver", "output_nodes", 2001);
      s.macro_nodes = f.get_int("solver", "macro_nodes", 101);
      s.n_quad = f.get_int("solver", "n_quad", 0);
      if (s.output_nodes < 2 || s.macro_nodes < 2)
        throw ConfigError(f.name() + ": node counts must be >= 2");
      cfg.spec = std::move(s);
      break;
    }
    case ExperimentKind::lb2d: {
      Lb2dSpec s;
      s.f = f.get_expr("chart", "f");
      s.eta = f.get_double("chart", "eta", 0.25);
      if (!(s.eta > 0.0)) throw ConfigError(f.name() + ": eta must be positive");
      s.xs1 = f.get_list("points", "x1");
      s.xs2 = f.get_list("points", "x2");
      if (s.xs1.empty() || s.xs2.empty())
        throw ConfigError(f.name() + ": [points] x1 and x2 must be non-empty lists");
      s.resolution = f.get_int("solver", "resolution", 32);
      s.tol = f.get_double("solver", "tol", 1e-10);
      if (s.resolution < 8)
        throw ConfigError(f.name() + ": resolution must be >= 8");
      cfg.spec = std::move(s);
      break;
    }
    case ExperimentKind::convergence: {
      ConvergenceSpec s;
      s.table = f.require("input", "table");
      cfg.spec = std::move(s);
      break;
    }
  }
  f.finish();
  return cfg;
}

}  // namespace homog
