#include "homog/fields.hpp"

#include <cmath>
#include <random>
#include <string>

namespace homog {

namespace {

std::string point_text(double x, std::optional<double> y = {}) {
  std::string s = "(" + std::to_string(x);
  if (y) s += ", " + std::to_string(*y);
  s += ")";
  return s;
}

void check_floor(double value, double floor, double x, std::optional<double> y,
                 const char* what) {
  // NaN also fails this comparison
  if (!(value >= floor))
    throw EllipticityError(std::string(what) + " = " + std::to_string(value) +
                           " at " + point_text(x, y) +
                           " violates the positivity floor " +
                           std::to_string(floor));
}

}  // namespace

Grid1D Grid1D::uniform(double a, double b, int n) {
  if (!(b > a)) throw Error("Grid1D: domain must satisfy b > a");
  if (n < 2) throw Error("Grid1D: need at least two nodes");
  return Grid1D{a, b, n};
}

PeriodicGrid2D PeriodicGrid2D::unit(int n) { return sized(1.0, n); }

PeriodicGrid2D PeriodicGrid2D::sized(double length, int n) {
  if (!(length > 0.0)) throw Error("PeriodicGrid2D: cell side must be positive");
  if (n < 1) throw Error("PeriodicGrid2D: resolution must be >= 1");
  return PeriodicGrid2D{length, n};
}

Grid2D Grid2D::unit(int m) {
  if (m < 1) throw Error("Grid2D: resolution must be >= 1");
  return Grid2D{m};
}

std::vector<double> sample_scalar(const ScalarCoefficient& c, const Grid1D& g,
                                  std::optional<SlowPoint> slow,
                                  std::optional<double> eta) {
  std::vector<double> out(g.n);
  Bindings b;
  if (eta) b.set(Var::Eta, *eta);
  if (slow) {
    b.set(Var::X1, slow->x1);
    if (slow->x2) b.set(Var::X2, *slow->x2);
  }
  for (int i = 0; i < g.n; ++i) {
    const double y = g.node(i);
    b.set(Var::Y1, y);
    if (!slow) b.set(Var::X1, y);
    const double v = c.expr.eval(b);
    check_floor(v, c.kappa_min, y, {}, "coefficient");
    out[i] = v;
  }
  return out;
}

std::vector<double> sample_scalar(const ScalarCoefficient& c,
                                  const PeriodicGrid2D& g,
                                  std::optional<SlowPoint> slow,
                                  std::optional<double> eta) {
  std::vector<double> out(g.cells());
  Bindings b;
  if (eta) b.set(Var::Eta, *eta);
  if (slow) {
    b.set(Var::X1, slow->x1);
    if (slow->x2) b.set(Var::X2, *slow->x2);
  }
  for (int j = 0; j < g.n; ++j) {
    const double y2 = g.center(j);
    for (int i = 0; i < g.n; ++i) {
      const double y1 = g.center(i);
      b.set(Var::Y1, y1).set(Var::Y2, y2);
      if (!slow) b.set(Var::X1, y1).set(Var::X2, y2);
      const double v = c.expr.eval(b);
      check_floor(v, c.kappa_min, y1, y2, "coefficient");
      out[g.index(i, j)] = v;
    }
  }
  return out;
}

std::vector<double> sample_scalar(const ScalarCoefficient& c, const Grid2D& g,
                                  std::optional<double> eta) {
  std::vector<double> out(g.cells());
  Bindings b;
  if (eta) b.set(Var::Eta, *eta);
  for (int j = 0; j < g.m; ++j) {
    const double x2 = g.center(j);
    for (int i = 0; i < g.m; ++i) {
      const double x1 = g.center(i);
      b.set(Var::X1, x1).set(Var::X2, x2);
      const double v = c.expr.eval(b);
      check_floor(v, c.kappa_min, x1, x2, "coefficient");
      out[g.index(i, j)] = v;
    }
  }
  return out;
}

MatrixSamples sample_matrix(const MatrixCoefficient& c, const PeriodicGrid2D& g,
                            std::optional<SlowPoint> slow,
                            std::optional<double> eta) {
  MatrixSamples out;
  out.a11.resize(g.cells());
  out.a12.resize(g.cells());
  out.a22.resize(g.cells());
  Bindings b;
  if (eta) b.set(Var::Eta, *eta);
  if (slow) {
    b.set(Var::X1, slow->x1);
    if (slow->x2) b.set(Var::X2, *slow->x2);
  }
  for (int j = 0; j < g.n; ++j) {
    const double y2 = g.center(j);
    for (int i = 0; i < g.n; ++i) {
      const double y1 = g.center(i);
      b.set(Var::Y1, y1).set(Var::Y2, y2);
      if (!slow) b.set(Var::X1, y1).set(Var::X2, y2);
      const double a11 = c.a11.eval(b);
      const double a12 = c.a12.eval(b);
      const double a21 = c.a21.eval(b);
      const double a22 = c.a22.eval(b);
      const double scale =
          std::max({std::fabs(a11), std::fabs(a12), std::fabs(a22), 1.0});
      if (c.symmetric && std::fabs(a12 - a21) > 1e-12 * scale)
        throw MismatchError("matrix coefficient is not symmetric at " +
                            point_text(y1, y2));
      // positive definiteness: both eigenvalues above the floor
      const double det = a11 * a22 - a12 * a21;
      if (!(a11 >= c.eig_min) || !(det >= c.eig_min * c.eig_min))
        throw EllipticityError("matrix coefficient is not positive definite at " +
                               point_text(y1, y2));
      const int idx = g.index(i, j);
      out.a11[idx] = a11;
      out.a12[idx] = 0.5 * (a12 + a21);
      out.a22[idx] = a22;
    }
  }
  return out;
}

PeriodicityReport validate_periodicity(const ScalarCoefficient& c, double period,
                                       int n_checks, std::optional<Var> variable,
                                       std::optional<double> eta,
                                       std::uint64_t seed) {
  if (!(period > 0.0)) throw Error("validate_periodicity: period must be positive");
  if (n_checks < 1) throw Error("validate_periodicity: need at least one check");

  Var var = Var::Y1;
  if (variable) {
    var = *variable;
  } else {
    // pick the single non-ETA variable the expression actually uses
    int found = 0;
    for (Var v : {Var::X1, Var::X2, Var::Y1, Var::Y2}) {
      if (c.expr.references(v)) {
        var = v;
        ++found;
      }
    }
    if (found != 1)
      throw Error("validate_periodicity: expression does not reference exactly "
                  "one coordinate variable; pass the variable explicitly");
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 2.0 * period);

  PeriodicityReport report;
  report.checks = n_checks;
  bool pass = true;
  Bindings b;
  if (eta) b.set(Var::Eta, *eta);
  for (int k = 0; k < n_checks; ++k) {
    // other referenced coordinates get their own random values per check
    for (Var v : {Var::X1, Var::X2, Var::Y1, Var::Y2})
      if (v != var && c.expr.references(v)) b.set(v, dist(rng));
    const double y = dist(rng);
    b.set(var, y);
    const double v0 = c.expr.eval(b);
    b.set(var, y + period);
    const double v1 = c.expr.eval(b);
    const double diff = std::fabs(v0 - v1);
    if (diff > report.worst_violation) {
      report.worst_violation = diff;
      report.worst_point = y;
    }
    if (diff > 1e-9 * (1.0 + std::fabs(v0))) pass = false;
  }
  report.pass = pass;
  return report;
}

}  // namespace homog
