#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "homog/cell2d.hpp"
#include "homog/expr.hpp"
#include "homog/fields.hpp"
#include "homog/homog1d.hpp"

namespace homog {

/// Parameterized curve (dim 1) or graph surface (dim 2). Components are
/// expressions in the slow coordinates X1[, X2]; two-scale charts may also
/// reference the fast coordinates Y1[, Y2] (unit period) and ETA. Tangent
/// vectors come from central finite differences of step `fd_step`; for
/// two-scale charts the physical tangent is d/dX + (1/eta) d/dY.
struct SurfaceChart {
  int dim = 2;
  std::vector<Expr> components;
  double fd_step = 1e-6;

  bool two_scale() const;

  /// Graph surface (X1, X2, f).
  static SurfaceChart graph(Expr f, double fd_step = 1e-6);
  /// Planar curve (X1, height).
  static SurfaceChart curve(Expr height, double fd_step = 1e-6);
};

/// Metric data at one point: g, det g, g^{-1}, and the divergence-form
/// coefficient A = sqrt(|g|) g^{-1}. In 1D only the *11 entries are used and
/// A reduces to g^{-1/2}.
struct MetricEval {
  int dim = 2;
  double g11 = 0.0, g12 = 0.0, g22 = 0.0;
  double det = 0.0;
  double inv11 = 0.0, inv12 = 0.0, inv22 = 0.0;
  double a11 = 0.0, a12 = 0.0, a22 = 0.0;
};

/// Physical evaluation at X (two-scale charts are evaluated at Y = X/eta).
/// Throws on a degenerate metric (det <= 1e-12).
MetricEval metric_from_chart(const SurfaceChart& c, double x1, double x2 = 0.0,
                             std::optional<double> eta = {});

/// Frozen-X cell evaluation at fast point Y (standard two-scale convention).
MetricEval metric_cell(const SurfaceChart& c, double x1, double x2, double y1,
                       double y2, double eta);

/// Scalar two-scale metric g(X, Y) of a parameterized curve; Y has unit
/// period. Feeds the pointwise-in-X 1D cell problems.
struct TwoScaleMetric1D {
  std::function<double(double, double)> g;

  /// Closed-form metric of the curve (X, sin(pi X) + eta sin(2 pi X / eta)):
  /// g = 1 + pi^2 (cos^2(pi X) + 4 cos(pi X) cos(2 pi Y) + 4 cos^2(2 pi Y)).
  static TwoScaleMetric1D wrinkled_sine_curve();

  /// Metric of an arbitrary two-scale curve chart via finite differences.
  static TwoScaleMetric1D from_chart(const SurfaceChart& c, double eta);
};

/// kappa(X, Y) = g(X, Y)^{-1/2}; throws on non-positive metric.
double lb_coefficient_1d(const TwoScaleMetric1D& m, double x, double y);

/// Per-node harmonic mean of kappa(X, .) over the unit fast period: the cell
/// problem is solved at every macro node.
std::vector<double> homogenize_pointwise_1d(const TwoScaleMetric1D& m,
                                            const Grid1D& macro_nodes,
                                            int n_quad = 0);

/// khat(X) as a callable (harmonic mean over the fast period at each X).
std::function<double(double)> pointwise_khat(const TwoScaleMetric1D& m,
                                             int n_quad = 0);

enum class LbMode { exact, homogenized };

/// Curve heat conduction with flux h at the right end: exact mode solves
/// with kappa(X) = g(X, X/eta)^{-1/2}; homogenized mode with khat(X).
SolutionField1D solve_lb_1d(const TwoScaleMetric1D& m, double eta, double flux_h,
                            LbMode mode, const Grid1D& out, int n_quad = 0);

struct PointTensor {
  double x1 = 0.0, x2 = 0.0;
  HomogenizedTensor tensor;
};

/// Matrix-coefficient cell problems for A(X, .) = sqrt(|g|) g^{-1} sampled on
/// an N x N unit cell at every macro point; X is frozen inside each cell.
/// Results are indexed like `macro_points`; per-point solves run on up to
/// `threads` threads (they are independent; assembly order is deterministic).
std::vector<PointTensor> homogenize_lb_2d(
    const SurfaceChart& c, const std::vector<std::array<double, 2>>& macro_points,
    double eta, int cell_resolution, double tol = 1e-10, int threads = 1);

struct DualBasisReport {
  bool pass = false;
  double max_delta_error = 0.0;    // max |x^i . x_j - delta_ij|
  double max_inverse_error = 0.0;  // max |x^i . x^j - (g^{-1})_ij|
  double tol = 0.0;
};

/// Checks the dual-basis identities x^i . x_j = delta_ij and
/// x^i . x^j = (g^{-1})_ij at one chart point.
DualBasisReport dual_basis_check(const SurfaceChart& c, double x1, double x2,
                                 std::optional<double> eta = {},
                                 double tol = 1e-8);

struct DivergenceCheckReport {
  std::vector<double> steps;
  std::vector<double> errors;      // |flux-balance estimate - closed form|
  double reference = 0.0;          // closed-form Laplace-Beltrami value
  double observed_order = 0.0;     // least-squares slope of log err vs log step
  bool order_defined = false;      // false when errors sit at the noise floor
};

/// Evaluates the finite-area flux balance of the surface divergence for
/// V = surface gradient of `field` over shrinking coordinate rectangles and
/// compares against the closed-form divergence-form operator assembled from
/// finite differences. Smooth data gives observed order ~= 2.
DivergenceCheckReport divergence_consistency_check(
    const SurfaceChart& c, const Expr& field, double x1, double x2,
    const std::vector<double>& steps, std::optional<double> eta = {});

}  // namespace homog
