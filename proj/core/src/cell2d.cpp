#include "homog/cell2d.hpp"

#include <cmath>
#include <string>

namespace homog {

namespace {

inline double hmean(double a, double b) { return 2.0 * a * b / (a + b); }

// Internal view of a cell problem: scalar problems set a12 = nullptr and
// reuse kappa for both diagonal entries.
struct CoefficientView {
  const PeriodicGrid2D& grid;
  const std::vector<double>& a11;
  const std::vector<double>& a22;
  const std::vector<double>* a12;  // may be null
};

void validate(const CoefficientView& v, int direction, double tol) {
  if (direction != 1 && direction != 2)
    throw Error("solve_cell_2d: direction must be 1 or 2");
  if (!(tol > 0.0) || tol > 1e-4)
    throw Error("solve_cell_2d: tol must lie in (0, 1e-4]");
  const std::size_t cells = static_cast<std::size_t>(v.grid.cells());
  if (v.a11.size() != cells || v.a22.size() != cells ||
      (v.a12 && v.a12->size() != cells))
    throw MismatchError("solve_cell_2d: sample count does not match the grid");
  for (std::size_t c = 0; c < cells; ++c) {
    const double d11 = v.a11[c], d22 = v.a22[c];
    const double o = v.a12 ? (*v.a12)[c] : 0.0;
    if (!(d11 > 0.0) || !(d11 * d22 - o * o > 0.0))
      throw EllipticityError("cell coefficient is not positive definite at cell " +
                             std::to_string(c));
  }
}

// Operator of the conservative scheme, y := L x. Diagonal entries couple
// through faces with harmonic averaging; the off-diagonal entry enters as a
// cell-centered cross term that keeps the matrix exactly symmetric.
void apply_operator(const CoefficientView& v, const std::vector<double>& x,
                    std::vector<double>& y) {
  const int n = v.grid.n;
  const auto& a11 = v.a11;
  const auto& a22 = v.a22;
  for (int j = 0; j < n; ++j) {
    const int jn = (j + 1 == n) ? 0 : j + 1;
    const int js = (j == 0) ? n - 1 : j - 1;
    for (int i = 0; i < n; ++i) {
      const int ie = (i + 1 == n) ? 0 : i + 1;
      const int iw = (i == 0) ? n - 1 : i - 1;
      const int c = j * n + i;
      const int e = j * n + ie;
      const int w = j * n + iw;
      const int nn = jn * n + i;
      const int s = js * n + i;
      const double ke = hmean(a11[c], a11[e]);
      const double kw = hmean(a11[c], a11[w]);
      const double kn = hmean(a22[c], a22[nn]);
      const double ks = hmean(a22[c], a22[s]);
      y[c] = ke * (x[c] - x[e]) + kw * (x[c] - x[w]) + kn * (x[c] - x[nn]) +
             ks * (x[c] - x[s]);
    }
  }
  if (!v.a12) return;
  const auto& a12 = *v.a12;
  for (int j = 0; j < n; ++j) {
    const int jn = (j + 1 == n) ? 0 : j + 1;
    const int js = (j == 0) ? n - 1 : j - 1;
    for (int i = 0; i < n; ++i) {
      const int ie = (i + 1 == n) ? 0 : i + 1;
      const int iw = (i == 0) ? n - 1 : i - 1;
      const int c = j * n + i;
      const int e = j * n + ie;
      const int w = j * n + iw;
      const int nn = jn * n + i;
      const int s = js * n + i;
      const double cx = a12[c] * (x[nn] - x[s]) * 0.25;
      const double cy = a12[c] * (x[e] - x[w]) * 0.25;
      y[e] += cx;
      y[w] -= cx;
      y[nn] += cy;
      y[s] -= cy;
    }
  }
}

std::vector<double> build_rhs(const CoefficientView& v, int direction) {
  const int n = v.grid.n;
  const double h = v.grid.spacing();
  std::vector<double> b(v.grid.cells(), 0.0);
  const auto& diag = (direction == 1) ? v.a11 : v.a22;
  for (int j = 0; j < n; ++j) {
    const int jn = (j + 1 == n) ? 0 : j + 1;
    const int js = (j == 0) ? n - 1 : j - 1;
    for (int i = 0; i < n; ++i) {
      const int ie = (i + 1 == n) ? 0 : i + 1;
      const int iw = (i == 0) ? n - 1 : i - 1;
      const int c = j * n + i;
      double rhs = 0.0;
      if (direction == 1) {
        rhs = (hmean(diag[c], diag[j * n + ie]) -
               hmean(diag[c], diag[j * n + iw])) * h;
        if (v.a12) rhs += ((*v.a12)[jn * n + i] - (*v.a12)[js * n + i]) * 0.5 * h;
      } else {
        rhs = (hmean(diag[c], diag[jn * n + i]) -
               hmean(diag[c], diag[js * n + i])) * h;
        if (v.a12) rhs += ((*v.a12)[j * n + ie] - (*v.a12)[j * n + iw]) * 0.5 * h;
      }
      b[c] = rhs;
    }
  }
  return b;
}

void subtract_mean(std::vector<double>& x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  for (double& v : x) v -= mean;
}

Corrector2D solve(const CoefficientView& v, int direction, double tol) {
  validate(v, direction, tol);
  const int cells = v.grid.cells();

  Corrector2D out;
  out.grid = v.grid;
  out.direction = direction;
  out.chi.assign(cells, 0.0);

  std::vector<double> b = build_rhs(v, direction);
  subtract_mean(b);  // compatibility holds analytically; remove rounding drift
  double bnorm = 0.0;
  for (double e : b) bnorm += e * e;
  bnorm = std::sqrt(bnorm);
  if (bnorm == 0.0) return out;  // constant coefficient: zero corrector

  // conjugate gradient on the zero-mean subspace
  std::vector<double> x(cells, 0.0), r = b, p = b, q(cells);
  double rr = bnorm * bnorm;
  const long cap = 10L * cells;
  for (long it = 1; it <= cap; ++it) {
    apply_operator(v, p, q);
    double pq = 0.0;
    for (int c = 0; c < cells; ++c) pq += p[c] * q[c];
    if (!(pq > 0.0))
      throw SolverError("solve_cell_2d: conjugate gradient broke down (p'Ap = " +
                        std::to_string(pq) + ")");
    const double alpha = rr / pq;
    for (int c = 0; c < cells; ++c) {
      x[c] += alpha * p[c];
      r[c] -= alpha * q[c];
    }
    if (it % 64 == 0) subtract_mean(r);
    double rr_next = 0.0;
    for (int c = 0; c < cells; ++c) rr_next += r[c] * r[c];
    if (std::sqrt(rr_next) <= tol * bnorm) {
      subtract_mean(x);
      out.chi = std::move(x);
      out.iterations = static_cast<int>(it);
      out.residual = std::sqrt(rr_next) / bnorm;
      return out;
    }
    const double beta = rr_next / rr;
    rr = rr_next;
    for (int c = 0; c < cells; ++c) p[c] = r[c] + beta * p[c];
  }
  throw SolverError("solve_cell_2d: no convergence after " + std::to_string(cap) +
                    " iterations (relative residual " +
                    std::to_string(std::sqrt(rr) / bnorm) + ")");
}

HomogenizedTensor assemble(const CoefficientView& v, const Corrector2D& chi1,
                           const Corrector2D& chi2) {
  if (chi1.grid.n != v.grid.n || chi2.grid.n != v.grid.n ||
      chi1.grid.length != v.grid.length || chi2.grid.length != v.grid.length)
    throw MismatchError("assemble_tensor: corrector grid does not match the cell");
  if (chi1.direction != 1 || chi2.direction != 2)
    throw MismatchError("assemble_tensor: correctors must be for directions 1 and 2");

  const int n = v.grid.n;
  const double h = v.grid.spacing();
  const double h2 = h * h;
  const double area = v.grid.length * v.grid.length;

  // khat_{j,l}: j indexes the flux component (face family), l the corrector.
  double k[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  const std::vector<double>* chi[2] = {&chi1.chi, &chi2.chi};

  for (int j = 0; j < n; ++j) {
    const int jn = (j + 1 == n) ? 0 : j + 1;
    const int js = (j == 0) ? n - 1 : j - 1;
    for (int i = 0; i < n; ++i) {
      const int ie = (i + 1 == n) ? 0 : i + 1;
      const int iw = (i == 0) ? n - 1 : i - 1;
      const int c = j * n + i;
      const int e = j * n + ie;
      const int nn = jn * n + i;
      const int s = js * n + i;
      const double ke = hmean(v.a11[c], v.a11[e]);  // east face, flux comp 1
      const double kn = hmean(v.a22[c], v.a22[nn]);  // north face, flux comp 2
      for (int l = 0; l < 2; ++l) {
        const auto& ch = *chi[l];
        k[0][l] += ke * ((l == 0 ? h2 : 0.0) + (ch[e] - ch[c]) * h);
        k[1][l] += kn * ((l == 1 ? h2 : 0.0) + (ch[nn] - ch[c]) * h);
        if (v.a12) {
          const double o = (*v.a12)[c];
          k[0][l] += o * ((l == 1 ? h2 : 0.0) + (ch[nn] - ch[s]) * 0.5 * h);
          k[1][l] += o * ((l == 0 ? h2 : 0.0) + (ch[e] - ch[j * n + iw]) * 0.5 * h);
        }
      }
    }
  }

  HomogenizedTensor t;
  t.k11 = k[0][0] / area;
  t.k12 = k[0][1] / area;
  t.k21 = k[1][0] / area;
  t.k22 = k[1][1] / area;
  return t;
}

double section_flux(const CoefficientView& v, const Corrector2D& chi,
                    int direction, int section) {
  if (section < 0 || section >= v.grid.n)
    throw Error("cross_section_flux: section index out of range");
  if (direction != 1 && direction != 2)
    throw Error("cross_section_flux: direction must be 1 or 2");
  const int n = v.grid.n;
  const double h = v.grid.spacing();
  const auto& ch = chi.chi;
  const int applied = chi.direction;
  double total = 0.0;
  if (direction == 1) {
    // flux component q1 through the column of east faces at i = section
    const int i = section;
    const int ie = (i + 1 == n) ? 0 : i + 1;
    for (int j = 0; j < n; ++j) {
      const int c = j * n + i;
      const int e = j * n + ie;
      const double ke = hmean(v.a11[c], v.a11[e]);
      total += ke * ((applied == 1 ? h : 0.0) + (ch[e] - ch[c]));
      if (v.a12) {
        const int jn = (j + 1 == n) ? 0 : j + 1;
        const int js = (j == 0) ? n - 1 : j - 1;
        const double gc = (applied == 2 ? h : 0.0) +
                          (ch[jn * n + i] - ch[js * n + i]) * 0.5;
        const double ge = (applied == 2 ? h : 0.0) +
                          (ch[jn * n + ie] - ch[js * n + ie]) * 0.5;
        total += 0.5 * ((*v.a12)[c] * gc + (*v.a12)[e] * ge);
      }
    }
  } else {
    const int j = section;
    const int jn = (j + 1 == n) ? 0 : j + 1;
    for (int i = 0; i < n; ++i) {
      const int c = j * n + i;
      const int nn = jn * n + i;
      const double kn = hmean(v.a22[c], v.a22[nn]);
      total += kn * ((applied == 2 ? h : 0.0) + (ch[nn] - ch[c]));
      if (v.a12) {
        const int ie = (i + 1 == n) ? 0 : i + 1;
        const int iw = (i == 0) ? n - 1 : i - 1;
        const double gc = (applied == 1 ? h : 0.0) +
                          (ch[j * n + ie] - ch[j * n + iw]) * 0.5;
        const double gn = (applied == 1 ? h : 0.0) +
                          (ch[jn * n + ie] - ch[jn * n + iw]) * 0.5;
        total += 0.5 * ((*v.a12)[c] * gc + (*v.a12)[nn] * gn);
      }
    }
  }
  return total;
}

FluxSpreadReport flux_spread(const CoefficientView& v, const Corrector2D& chi,
                             int direction) {
  FluxSpreadReport rep;
  const int n = v.grid.n;
  rep.section_flux.resize(n);
  for (int s = 0; s < n; ++s)
    rep.section_flux[s] = section_flux(v, chi, direction, s);
  double mean = 0.0;
  for (double f : rep.section_flux) mean += f;
  mean /= n;
  double var = 0.0;
  for (double f : rep.section_flux) var += (f - mean) * (f - mean);
  rep.mean = mean;
  rep.stddev = std::sqrt(var / n);
  double coeff_scale = 0.0;
  for (int c = 0; c < v.grid.cells(); ++c) coeff_scale += v.a11[c] + v.a22[c];
  coeff_scale = coeff_scale / (2.0 * v.grid.cells()) * v.grid.length;
  rep.rel_spread = rep.stddev / std::max(std::fabs(mean), coeff_scale);
  return rep;
}

CoefficientView scalar_view(const CellProblem2D& p) {
  return CoefficientView{p.grid, p.kappa, p.kappa, nullptr};
}

CoefficientView matrix_view(const MatrixCellProblem2D& p) {
  return CoefficientView{p.grid, p.a11, p.a22, &p.a12};
}

}  // namespace

std::array<double, 2> HomogenizedTensor::eigenvalues() const {
  const double off = 0.5 * (k12 + k21);
  const double tr = k11 + k22;
  const double disc = std::sqrt(0.25 * (k11 - k22) * (k11 - k22) + off * off);
  return {0.5 * tr - disc, 0.5 * tr + disc};
}

bool HomogenizedTensor::spd() const {
  const auto eig = eigenvalues();
  return eig[0] > 0.0 && eig[1] > 0.0;
}

Corrector2D solve_cell_2d(const CellProblem2D& p, int direction, double tol) {
  if (p.grid.n < 8)
    throw Error("solve_cell_2d: resolution must be at least 8");
  return solve(scalar_view(p), direction, tol);
}

Corrector2D solve_cell_2d(const MatrixCellProblem2D& p, int direction, double tol) {
  if (p.grid.n < 8)
    throw Error("solve_cell_2d: resolution must be at least 8");
  return solve(matrix_view(p), direction, tol);
}

HomogenizedTensor assemble_tensor(const CellProblem2D& p, const Corrector2D& chi1,
                                  const Corrector2D& chi2) {
  return assemble(scalar_view(p), chi1, chi2);
}

HomogenizedTensor assemble_tensor(const MatrixCellProblem2D& p,
                                  const Corrector2D& chi1,
                                  const Corrector2D& chi2) {
  return assemble(matrix_view(p), chi1, chi2);
}

double cross_section_flux(const CellProblem2D& p, const Corrector2D& chi,
                          int direction, int section) {
  return section_flux(scalar_view(p), chi, direction, section);
}

double cross_section_flux(const MatrixCellProblem2D& p, const Corrector2D& chi,
                          int direction, int section) {
  return section_flux(matrix_view(p), chi, direction, section);
}

FluxSpreadReport cross_section_flux_spread(const CellProblem2D& p,
                                           const Corrector2D& chi,
                                           int direction) {
  return flux_spread(scalar_view(p), chi, direction);
}

FluxSpreadReport cross_section_flux_spread(const MatrixCellProblem2D& p,
                                           const Corrector2D& chi,
                                           int direction) {
  return flux_spread(matrix_view(p), chi, direction);
}

SymmetryReport verify_symmetry(const HomogenizedTensor& t, double tol) {
  SymmetryReport rep;
  rep.gap = std::fabs(t.k12 - t.k21);
  rep.scale = std::max({std::fabs(t.k11), std::fabs(t.k12), std::fabs(t.k21),
                        std::fabs(t.k22)});
  rep.tol = tol;
  rep.pass = rep.gap <= tol * rep.scale;
  return rep;
}

}  // namespace homog
