#pragma once

#include <functional>
#include <vector>

#include "homog/errors.hpp"

namespace homog {

/// Composite 5-point Gauss-Legendre rule over [a, b] with `panels` equal
/// panels. Exact for polynomials of degree 9 on each panel.
double gauss_legendre(const std::function<double(double)>& f, double a, double b,
                      int panels);

/// Integrates with panel doubling until two successive refinements agree to
/// `rel_tol` (relative to the magnitude of the integral, with an absolute
/// floor). Throws SolverError when `max_doublings` is exhausted.
double integrate_to_tolerance(const std::function<double(double)>& f, double a,
                              double b, int initial_panels,
                              double rel_tol = 1e-10, int max_doublings = 20);

/// Cumulative integral of f at the given strictly increasing nodes:
/// result[k] = integral from nodes[0] to nodes[k]. `total_panels` panels are
/// distributed over the node intervals proportionally to interval length
/// (at least one per interval), then doubled until the cumulative values are
/// stable to `rel_tol`.
std::vector<double> cumulative_integral(const std::function<double(double)>& f,
                                        const std::vector<double>& nodes,
                                        int total_panels, double rel_tol = 1e-10,
                                        int max_doublings = 20);

}  // namespace homog
