#pragma once

#include <functional>
#include <vector>

#include "homog/cell2d.hpp"
#include "homog/fields.hpp"

namespace homog {

/// Macroscale problem on the unit square: U = 0 on the left edge, prescribed
/// normal flux `flux_h` on the right edge, insulated top and bottom.
struct MacroProblem2D {
  int m = 64;          // m x m cell-centered grid
  double flux_h = 1.0;
  double tol = 1e-10;  // relative residual of the conjugate-gradient solve
};

struct SolutionField2D {
  Grid2D grid;
  std::vector<double> u;  // cell-centered values, row-major (j * m + i)
};

struct ErrorNorms2D {
  double max_norm = 0.0;
  double l2_norm = 0.0;
};

/// Fully resolved multiscale solve with the same conservative scheme as the
/// cell solver (harmonic face conductivities) on a non-periodic grid.
/// Requires m >= 20 / eta so the fast scale is resolved.
SolutionField2D solve_multiscale_2d(const MacroProblem2D& p,
                                    const ScalarCoefficient& kappa, double eta);
/// Variant taking conductivities already sampled at the Grid2D cell centers.
SolutionField2D solve_multiscale_2d(const MacroProblem2D& p,
                                    const std::vector<double>& kappa_samples);

/// Macroscale solve with a constant or X-dependent effective tensor. The
/// off-diagonal entry enters through cross-gradients averaged from adjacent
/// cell-center differences; the assembled system stays symmetric.
SolutionField2D solve_homogenized_2d(const MacroProblem2D& p,
                                     const HomogenizedTensor& t);
SolutionField2D solve_homogenized_2d(
    const MacroProblem2D& p,
    const std::function<HomogenizedTensor(double, double)>& tensor_at);

/// Max-norm and discrete L2 norm of a - b. Fields on different resolutions
/// are compared by bilinearly interpolating the coarser one.
ErrorNorms2D error_norms(const SolutionField2D& a, const SolutionField2D& b);

}  // namespace homog
