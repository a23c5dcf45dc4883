#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "homog/expr.hpp"

namespace homog {

/// Scalar material coefficient given as an expression in X1[, X2] and
/// optionally Y1[, Y2] and ETA, together with a positivity floor checked at
/// every sampled point.
struct ScalarCoefficient {
  Expr expr;
  double kappa_min = 1e-12;
};

/// 2x2 matrix-valued coefficient. Sampling validates symmetry
/// (|a12 - a21| <= 1e-12 * scale) and positive definiteness at every point.
struct MatrixCoefficient {
  Expr a11, a12, a21, a22;
  bool symmetric = true;
  double eig_min = 1e-12;
};

/// Uniform node grid on [a, b] with n >= 2 nodes.
struct Grid1D {
  double a = 0.0;
  double b = 1.0;
  int n = 2;

  static Grid1D uniform(double a, double b, int n);

  double spacing() const { return (b - a) / (n - 1); }
  double node(int i) const { return a + i * spacing(); }
};

/// One periodic cell of side `length` discretized into n x n cells with
/// cell-centered sample points. Indices wrap in both directions.
struct PeriodicGrid2D {
  double length = 1.0;
  int n = 8;

  static PeriodicGrid2D unit(int n);
  static PeriodicGrid2D sized(double length, int n);

  double spacing() const { return length / n; }
  double center(int i) const { return (i + 0.5) * spacing(); }
  int wrap(int i) const {
    int m = i % n;
    return m < 0 ? m + n : m;
  }
  int index(int i, int j) const { return wrap(j) * n + wrap(i); }
  int cells() const { return n * n; }
};

/// Cell-centered m x m grid on the unit square (macro domain).
struct Grid2D {
  int m = 8;

  static Grid2D unit(int m);

  double spacing() const { return 1.0 / m; }
  double center(int i) const { return (i + 0.5) * spacing(); }
  int index(int i, int j) const { return j * m + i; }
  int cells() const { return m * m; }
};

/// Slow-coordinate point used when sampling a two-scale coefficient on a
/// cell grid: binds X1 (and X2 when given), leaving the grid coordinate to
/// the fast variables Y1[, Y2].
struct SlowPoint {
  double x1 = 0.0;
  std::optional<double> x2;
};

// Sampling conventions:
//  - Grid1D / PeriodicGrid2D coordinates bind the fast variables Y1[, Y2];
//    they also bind X1[, X2] unless a SlowPoint is given.
//  - Grid2D (macro grid) coordinates bind X1, X2 only.
//  - `eta` binds ETA when given.
// Every sample is checked against the coefficient's kappa_min floor; a
// violation raises EllipticityError naming the offending point.
std::vector<double> sample_scalar(const ScalarCoefficient& c, const Grid1D& g,
                                  std::optional<SlowPoint> slow = {},
                                  std::optional<double> eta = {});
std::vector<double> sample_scalar(const ScalarCoefficient& c,
                                  const PeriodicGrid2D& g,
                                  std::optional<SlowPoint> slow = {},
                                  std::optional<double> eta = {});
std::vector<double> sample_scalar(const ScalarCoefficient& c, const Grid2D& g,
                                  std::optional<double> eta = {});

struct MatrixSamples {
  std::vector<double> a11, a12, a22;
};

MatrixSamples sample_matrix(const MatrixCoefficient& c, const PeriodicGrid2D& g,
                            std::optional<SlowPoint> slow = {},
                            std::optional<double> eta = {});

struct PeriodicityReport {
  bool pass = false;
  double worst_violation = 0.0;  // max |c(y) - c(y+period)| over the checks
  double worst_point = 0.0;
  int checks = 0;
};

/// Checks |c(y) - c(y+period)| <= 1e-9 * (1 + |c(y)|) at n_checks random
/// points (deterministic for a fixed seed). `variable` selects the shifted
/// variable; when omitted, the single non-ETA variable referenced by the
/// expression is used.
PeriodicityReport validate_periodicity(const ScalarCoefficient& c, double period,
                                       int n_checks,
                                       std::optional<Var> variable = {},
                                       std::optional<double> eta = {},
                                       std::uint64_t seed = 0);

}  // namespace homog
