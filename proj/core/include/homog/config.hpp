#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "homog/beltrami.hpp"
#include "homog/fields.hpp"

namespace homog {

/// Flat INI-style config: [section] headers, key = value lines, # or ;
/// comments. Values keep everything after the first '=' (trimmed), so
/// expression strings need no quoting.
class ConfigFile {
public:
  static ConfigFile parse_file(const std::filesystem::path& path);
  static ConfigFile parse_string(std::string_view text, std::string name);

  std::optional<std::string> get(const std::string& section,
                                 const std::string& key) const;
  std::string require(const std::string& section, const std::string& key) const;

  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  int get_int(const std::string& section, const std::string& key,
              int fallback) const;
  std::vector<double> get_list(const std::string& section,
                               const std::string& key) const;
  Expr get_expr(const std::string& section, const std::string& key) const;

  /// Throws ConfigError if any key was never consumed (catches typos).
  void finish() const;

  const std::string& name() const { return name_; }
  const std::string& text() const { return text_; }

private:
  struct Entry {
    std::string section, key, value;
    int line = 0;
    mutable bool used = false;
  };

  const Entry* find(const std::string& section, const std::string& key) const;

  std::string name_;
  std::string text_;
  std::vector<Entry> entries_;
};

enum class ExperimentKind { cell1d, cell2d, solve1d, solve2d, lb1d, lb2d, convergence };

std::string_view kind_name(ExperimentKind k);

struct Cell1dSpec {
  ScalarCoefficient kappa;
  double length = 1.0;
  std::optional<double> eta;
  int n_quad = 256;
  int nodes = 257;
};

struct Cell2dSpec {
  ScalarCoefficient kappa;
  double length = 1.0;
  int resolution = 64;
  std::optional<double> eta;
  double tol = 1e-10;
};

struct Solve1dSpec {
  ScalarCoefficient kappa;       // multiscale coefficient in X1, ETA
  ScalarCoefficient cell_kappa;  // one-period cell coefficient in Y1
  std::vector<double> etas;
  double flux_h = 1.0;
  double u0 = 0.0;
  int output_nodes = 2001;
  int n_quad = 0;  // 0: derived from eta
};

struct Solve2dSpec {
  ScalarCoefficient kappa;       // in X1, X2, ETA
  ScalarCoefficient cell_kappa;  // in Y1, Y2
  std::vector<double> etas;
  double flux_h = 1.0;
  int m = 256;
  double tol = 1e-8;
  int cell_resolution = 64;
  double cell_tol = 1e-10;
};

struct Lb1dSpec {
  bool builtin_curve = false;     // wrinkled sine curve with closed-form metric
  std::optional<Expr> x1, x2;     // explicit curve components otherwise
  std::vector<double> etas;
  double flux_h = 1.0;
  int output_nodes = 2001;
  int macro_nodes = 101;
  int n_quad = 0;
};

struct Lb2dSpec {
  Expr f;  // graph-surface height in X1, X2, Y1, Y2, ETA
  double eta = 0.25;
  std::vector<double> xs1, xs2;  // macro points: cartesian product
  int resolution = 32;
  double tol = 1e-10;
};

struct ConvergenceSpec {
  std::filesystem::path table;  // CSV with eta,max_err,l2_err
};

/// Validated experiment description. `load` throws ConfigError on missing or
/// unknown keys, unparsable expressions, or invalid sweeps (eta values must
/// be positive and distinct, and the list non-empty).
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::cell1d;
  std::string name;
  std::variant<Cell1dSpec, Cell2dSpec, Solve1dSpec, Solve2dSpec, Lb1dSpec,
               Lb2dSpec, ConvergenceSpec>
      spec;

  static ExperimentConfig load(const ConfigFile& file);
};

}  // namespace homog
