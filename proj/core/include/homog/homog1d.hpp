#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "homog/fields.hpp"

namespace homog {

/// Pointwise conductivity on an interval.
using Coefficient1D = std::function<double(double)>;

struct SolutionField1D {
  Grid1D grid;
  std::vector<double> values;
};

/// 1D multiscale boundary value problem on [0, 1]: Dirichlet U(0) = u0,
/// prescribed flux kappa * dU/dX = h at X = 1.
struct BVP1D {
  ScalarCoefficient conductivity;  // in X1 (and ETA)
  double eta = 1.0;
  double u0 = 0.0;
  double h = 1.0;
};

/// Unit-gradient cell corrector on [0, L]: chi(0) = chi(L) = 0.
struct Corrector1D {
  Grid1D grid;
  std::vector<double> chi;
};

struct ErrorNorms1D {
  double max_norm = 0.0;
  double l2_norm = 0.0;
};

/// Exact flux-constancy solve: with zero source the flux is constant, so
/// U(X) = u0 + h * \int_0^X dxi / kappa(xi). The integral is evaluated with
/// composite 5-point Gauss-Legendre panels plus a doubling check to 1e-10.
/// Every coefficient evaluation is checked against kappa_min.
SolutionField1D solve_flux_bvp(const Coefficient1D& kappa, double u0, double h,
                               int n_quad, const Grid1D& out,
                               double kappa_min = 1e-12);

/// As above for an expression-backed problem. Enforces n_quad >= 20 / eta.
SolutionField1D solve_bvp_1d(const BVP1D& p, int n_quad, const Grid1D& out);

/// Closed-form cell corrector for a unit temperature gradient:
/// chi(Y) = -Y + khat * \int_0^Y dxi / kappa(xi), khat the harmonic mean.
/// The endpoint values are exactly zero.
Corrector1D corrector_1d(const Coefficient1D& kappa_cell, const Grid1D& grid,
                         int n_quad = 0, double kappa_min = 1e-12);
Corrector1D corrector_1d(const ScalarCoefficient& kappa_cell, const Grid1D& grid,
                         int n_quad = 0, std::optional<SlowPoint> slow = {},
                         std::optional<double> eta = {});

/// Harmonic mean (L / \int_0^L dxi / kappa)... the effective 1D conductivity.
/// Independent of L for a fixed microstructure.
double harmonic_mean(const Coefficient1D& kappa_cell, int n_quad,
                     double length = 1.0, double kappa_min = 1e-12);
double harmonic_mean(const ScalarCoefficient& kappa_cell, int n_quad,
                     double length = 1.0, std::optional<SlowPoint> slow = {},
                     std::optional<double> eta = {});

/// Flux-form effective conductivity (1/L) \int kappa (1 + dchi/dY) dY with
/// the corrector derivative taken from the closed form. Equals the harmonic
/// mean; computing both is a consistency check. Throws MismatchError when
/// `chi` does not belong to this coefficient/grid.
double flux_form_mean(const Coefficient1D& kappa_cell, const Corrector1D& chi,
                      int n_quad = 0, double kappa_min = 1e-12);
double flux_form_mean(const ScalarCoefficient& kappa_cell, const Corrector1D& chi,
                      int n_quad = 0, std::optional<SlowPoint> slow = {},
                      std::optional<double> eta = {});

/// Homogenized solve U(X) = u0 + h * X / khat (constant coefficient).
SolutionField1D solve_homogenized_1d(double khat, double u0, double h,
                                     const Grid1D& out);
/// X-dependent variant: U(X) = u0 + h * \int_0^X dxi / khat(xi).
SolutionField1D solve_homogenized_1d(const std::function<double(double)>& khat,
                                     double u0, double h, int n_quad,
                                     const Grid1D& out);

/// Max-norm and discrete L2 norm (trapezoid weights) of a - b on a shared grid.
ErrorNorms1D error_norms(const SolutionField1D& a, const SolutionField1D& b);

/// Adapts an expression-backed coefficient to a pointwise callable using the
/// cell sampling convention (coordinate binds Y1, and X1 unless `slow` given).
Coefficient1D coefficient_callable(const ScalarCoefficient& c,
                                   std::optional<SlowPoint> slow = {},
                                   std::optional<double> eta = {});

}  // namespace homog
