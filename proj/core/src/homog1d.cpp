#include "homog/homog1d.hpp"

#include <cmath>
#include <string>

#include "homog/quadrature.hpp"

namespace homog {

namespace {

Coefficient1D guarded(const Coefficient1D& kappa, double kappa_min) {
  return [kappa, kappa_min](double x) {
    const double v = kappa(x);
    if (!(v >= kappa_min))
      throw EllipticityError("coefficient = " + std::to_string(v) + " at " +
                             std::to_string(x) +
                             " violates the positivity floor " +
                             std::to_string(kappa_min));
    return v;
  };
}

std::vector<double> grid_nodes(const Grid1D& g) {
  std::vector<double> nodes(g.n);
  for (int i = 0; i < g.n; ++i) nodes[i] = g.node(i);
  return nodes;
}

int auto_panels(const Grid1D& g, int n_quad) {
  if (n_quad > 0) return n_quad;
  return std::max(4 * (g.n - 1), 256);
}

}  // namespace

Coefficient1D coefficient_callable(const ScalarCoefficient& c,
                                   std::optional<SlowPoint> slow,
                                   std::optional<double> eta) {
  Bindings base;
  if (eta) base.set(Var::Eta, *eta);
  if (slow) {
    base.set(Var::X1, slow->x1);
    if (slow->x2) base.set(Var::X2, *slow->x2);
  }
  const bool bind_slow = !slow.has_value();
  Expr expr = c.expr;
  return [expr, base, bind_slow](double y) mutable {
    Bindings b = base;
    b.set(Var::Y1, y);
    if (bind_slow) b.set(Var::X1, y);
    return expr.eval(b);
  };
}

SolutionField1D solve_flux_bvp(const Coefficient1D& kappa, double u0, double h,
                               int n_quad, const Grid1D& out, double kappa_min) {
  const auto resistivity = [g = guarded(kappa, kappa_min)](double x) {
    return 1.0 / g(x);
  };
  const auto cum = cumulative_integral(resistivity, grid_nodes(out),
                                       std::max(1, n_quad));
  SolutionField1D sol;
  sol.grid = out;
  sol.values.resize(out.n);
  for (int i = 0; i < out.n; ++i) sol.values[i] = u0 + h * cum[i];
  return sol;
}

SolutionField1D solve_bvp_1d(const BVP1D& p, int n_quad, const Grid1D& out) {
  if (!(p.eta > 0.0)) throw Error("solve_bvp_1d: eta must be positive");
  if (n_quad < 20.0 / p.eta)
    throw SolverError("solve_bvp_1d: quadrature resolution too low: n_quad = " +
                      std::to_string(n_quad) + " but at least 20/eta = " +
                      std::to_string(20.0 / p.eta) + " panels are required");
  Bindings b;
  b.set(Var::Eta, p.eta);
  Expr expr = p.conductivity.expr;
  Coefficient1D kappa = [expr, b](double x) mutable {
    b.set(Var::X1, x).set(Var::Y1, x);
    return expr.eval(b);
  };
  return solve_flux_bvp(kappa, p.u0, p.h, n_quad, out, p.conductivity.kappa_min);
}

Corrector1D corrector_1d(const Coefficient1D& kappa_cell, const Grid1D& grid,
                         int n_quad, double kappa_min) {
  if (grid.a != 0.0) throw Error("corrector_1d: cell grid must start at 0");
  const auto resistivity = [g = guarded(kappa_cell, kappa_min)](double y) {
    return 1.0 / g(y);
  };
  const auto cum = cumulative_integral(resistivity, grid_nodes(grid),
                                       auto_panels(grid, n_quad));
  const double length = grid.b;
  const double khat = length / cum.back();

  Corrector1D c;
  c.grid = grid;
  c.chi.resize(grid.n);
  for (int i = 0; i < grid.n; ++i) c.chi[i] = -grid.node(i) + khat * cum[i];
  // chi(L) = -L + (L / total) * total; pin both ends to exactly zero
  c.chi.front() = 0.0;
  c.chi.back() = 0.0;
  return c;
}

Corrector1D corrector_1d(const ScalarCoefficient& kappa_cell, const Grid1D& grid,
                         int n_quad, std::optional<SlowPoint> slow,
                         std::optional<double> eta) {
  return corrector_1d(coefficient_callable(kappa_cell, slow, eta), grid, n_quad,
                      kappa_cell.kappa_min);
}

double harmonic_mean(const Coefficient1D& kappa_cell, int n_quad, double length,
                     double kappa_min) {
  if (!(length > 0.0)) throw Error("harmonic_mean: cell length must be positive");
  const auto resistivity = [g = guarded(kappa_cell, kappa_min)](double y) {
    return 1.0 / g(y);
  };
  const double total = integrate_to_tolerance(resistivity, 0.0, length,
                                              std::max(n_quad, 16));
  return length / total;
}

double harmonic_mean(const ScalarCoefficient& kappa_cell, int n_quad,
                     double length, std::optional<SlowPoint> slow,
                     std::optional<double> eta) {
  return harmonic_mean(coefficient_callable(kappa_cell, slow, eta), n_quad,
                       length, kappa_cell.kappa_min);
}

double flux_form_mean(const Coefficient1D& kappa_cell, const Corrector1D& chi,
                      int n_quad, double kappa_min) {
  const Grid1D& g = chi.grid;
  if (g.a != 0.0) throw MismatchError("flux_form_mean: corrector grid must start at 0");
  const double length = g.b;
  const auto k = guarded(kappa_cell, kappa_min);
  const double khat = harmonic_mean(kappa_cell, std::max(n_quad, 4 * (g.n - 1)),
                                    length, kappa_min);

  // the corrector must match the closed form for this coefficient
  const Corrector1D expected = corrector_1d(kappa_cell, g, n_quad, kappa_min);
  if (chi.chi.size() != expected.chi.size())
    throw MismatchError("flux_form_mean: corrector grid does not match the cell");
  for (std::size_t i = 0; i < chi.chi.size(); ++i)
    if (std::fabs(chi.chi[i] - expected.chi[i]) > 1e-6 * length)
      throw MismatchError(
          "flux_form_mean: corrector does not belong to this coefficient "
          "(mismatch at node " + std::to_string(i) + ")");

  // integrand kappa * (1 + dchi/dY) with dchi/dY = khat/kappa - 1
  const auto integrand = [&](double y) {
    const double kappa = k(y);
    const double dchi = khat / kappa - 1.0;
    return kappa * (1.0 + dchi);
  };
  const double total = integrate_to_tolerance(integrand, 0.0, length,
                                              std::max(n_quad, 16));
  return total / length;
}

double flux_form_mean(const ScalarCoefficient& kappa_cell, const Corrector1D& chi,
                      int n_quad, std::optional<SlowPoint> slow,
                      std::optional<double> eta) {
  return flux_form_mean(coefficient_callable(kappa_cell, slow, eta), chi, n_quad,
                        kappa_cell.kappa_min);
}

SolutionField1D solve_homogenized_1d(double khat, double u0, double h,
                                     const Grid1D& out) {
  if (!(khat > 0.0))
    throw EllipticityError("solve_homogenized_1d: khat must be positive, got " +
                           std::to_string(khat));
  SolutionField1D sol;
  sol.grid = out;
  sol.values.resize(out.n);
  for (int i = 0; i < out.n; ++i)
    sol.values[i] = u0 + h * (out.node(i) - out.a) / khat;
  return sol;
}

SolutionField1D solve_homogenized_1d(const std::function<double(double)>& khat,
                                     double u0, double h, int n_quad,
                                     const Grid1D& out) {
  return solve_flux_bvp(khat, u0, h, std::max(1, n_quad), out);
}

ErrorNorms1D error_norms(const SolutionField1D& a, const SolutionField1D& b) {
  if (a.grid.n != b.grid.n || a.grid.a != b.grid.a || a.grid.b != b.grid.b)
    throw MismatchError("error_norms: fields live on different grids");
  ErrorNorms1D norms;
  const double h = a.grid.spacing();
  double sq = 0.0;
  for (int i = 0; i < a.grid.n; ++i) {
    const double d = a.values[i] - b.values[i];
    norms.max_norm = std::max(norms.max_norm, std::fabs(d));
    const double w = (i == 0 || i == a.grid.n - 1) ? 0.5 * h : h;
    sq += w * d * d;
  }
  norms.l2_norm = std::sqrt(sq);
  return norms;
}

}  // namespace homog
