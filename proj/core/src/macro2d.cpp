#include "homog/macro2d.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace homog {

namespace {

inline double hmean(double a, double b) { return 2.0 * a * b / (a + b); }

// 9-point stencil in a padded (m+2)^2 layout; the halo ring stays zero.
// Slot layout: index (dj+1)*3 + (di+1); slot 4 is the diagonal.
struct Stencil {
  int m = 0;
  int stride = 0;
  std::array<std::vector<double>, 9> a;
  std::vector<double> b;

  explicit Stencil(int m_) : m(m_), stride(m_ + 2) {
    const int size = stride * stride;
    for (auto& s : a) s.assign(size, 0.0);
    b.assign(size, 0.0);
  }

  int idx(int i, int j) const { return (j + 1) * stride + (i + 1); }

  void add(int i, int j, int di, int dj, double w) {
    a[(dj + 1) * 3 + (di + 1)][idx(i, j)] += w;
  }
};

constexpr int kSlotOffset[9][2] = {{-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {0, 0},
                                   {1, 0},   {-1, 1}, {0, 1},  {1, 1}};
constexpr int kLowerSlots[4] = {0, 1, 2, 3};
constexpr int kUpperSlots[4] = {5, 6, 7, 8};

// Per-cell first-derivative stencils (dimensionless weights, units of 1/h).
// Dirichlet left edge: ghost value -u0 keeps the edge value at zero.
// Neumann right edge and insulated top/bottom: one-sided / reflected forms.
struct DiffEntry {
  int di, dj;
  double w;
};

int dx_stencil(int i, int m, DiffEntry out[2]) {
  if (i == 0) {
    out[0] = {0, 0, 0.5};
    out[1] = {1, 0, 0.5};
  } else if (i == m - 1) {
    out[0] = {-1, 0, -1.0};
    out[1] = {0, 0, 1.0};
  } else {
    out[0] = {-1, 0, -0.5};
    out[1] = {1, 0, 0.5};
  }
  return 2;
}

int dy_stencil(int j, int m, DiffEntry out[2]) {
  if (j == 0) {
    out[0] = {0, 0, -0.5};
    out[1] = {0, 1, 0.5};
  } else if (j == m - 1) {
    out[0] = {0, -1, -0.5};
    out[1] = {0, 0, 0.5};
  } else {
    out[0] = {0, -1, -0.5};
    out[1] = {0, 1, 0.5};
  }
  return 2;
}

// Assembles the conservative scheme for per-cell coefficients (a12 may be
// empty for the scalar 5-point case).
Stencil assemble(int m, double flux_h, const std::vector<double>& a11,
                 const std::vector<double>& a12,
                 const std::vector<double>& a22) {
  Stencil st(m);
  const double h = 1.0 / m;
  auto cell = [m](int i, int j) { return j * m + i; };

  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      if (i + 1 < m) {  // interior east face
        const double ke = hmean(a11[cell(i, j)], a11[cell(i + 1, j)]);
        st.add(i, j, 0, 0, ke);
        st.add(i, j, 1, 0, -ke);
        st.add(i + 1, j, 0, 0, ke);
        st.add(i + 1, j, -1, 0, -ke);
      }
      if (j + 1 < m) {  // interior north face
        const double kn = hmean(a22[cell(i, j)], a22[cell(i, j + 1)]);
        st.add(i, j, 0, 0, kn);
        st.add(i, j, 0, 1, -kn);
        st.add(i, j + 1, 0, 0, kn);
        st.add(i, j + 1, 0, -1, -kn);
      }
    }
    // Dirichlet half-cell on the left, prescribed flux on the right
    st.add(0, j, 0, 0, 2.0 * a11[cell(0, j)]);
    st.b[st.idx(m - 1, j)] += flux_h * h;
  }

  if (!a12.empty()) {
    DiffEntry dx[2], dy[2];
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i < m; ++i) {
        const double o = a12[cell(i, j)];
        if (o == 0.0) continue;
        const int nx = dx_stencil(i, m, dx);
        const int ny = dy_stencil(j, m, dy);
        for (int p = 0; p < nx; ++p) {
          for (int q = 0; q < ny; ++q) {
            const double w = o * dx[p].w * dy[q].w;
            // symmetric scatter of the cross energy term
            st.add(i + dx[p].di, j + dx[p].dj, dy[q].di - dx[p].di,
                   dy[q].dj - dx[p].dj, w);
            st.add(i + dy[q].di, j + dy[q].dj, dx[p].di - dy[q].di,
                   dx[p].dj - dy[q].dj, w);
          }
        }
      }
    }
  }
  return st;
}

void apply(const Stencil& st, const std::vector<double>& x,
           std::vector<double>& y) {
  const int m = st.m;
  const int stride = st.stride;
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      const int c = (j + 1) * stride + (i + 1);
      double acc = 0.0;
      for (int s = 0; s < 9; ++s) {
        const double w = st.a[s][c];
        if (w != 0.0)
          acc += w * x[c + kSlotOffset[s][1] * stride + kSlotOffset[s][0]];
      }
      y[c] = acc;
    }
  }
}

// Symmetric Gauss-Seidel (SSOR with omega = 1) preconditioner:
// M = (D + L) D^{-1} (D + U), applied as two triangular sweeps.
void ssor_apply(const Stencil& st, const std::vector<double>& r,
                std::vector<double>& z) {
  const int m = st.m;
  const int stride = st.stride;
  std::fill(z.begin(), z.end(), 0.0);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      const int c = (j + 1) * stride + (i + 1);
      double t = r[c];
      for (int s : kLowerSlots) {
        const double w = st.a[s][c];
        if (w != 0.0)
          t -= w * z[c + kSlotOffset[s][1] * stride + kSlotOffset[s][0]];
      }
      z[c] = t / st.a[4][c];
    }
  }
  for (int j = m - 1; j >= 0; --j) {
    for (int i = m - 1; i >= 0; --i) {
      const int c = (j + 1) * stride + (i + 1);
      double t = st.a[4][c] * z[c];
      for (int s : kUpperSlots) {
        const double w = st.a[s][c];
        if (w != 0.0)
          t -= w * z[c + kSlotOffset[s][1] * stride + kSlotOffset[s][0]];
      }
      z[c] = t / st.a[4][c];
    }
  }
}

SolutionField2D pcg_solve(const Stencil& st, double tol) {
  const int m = st.m;
  const int size = st.stride * st.stride;

  double bnorm = 0.0;
  for (double v : st.b) bnorm += v * v;
  bnorm = std::sqrt(bnorm);

  SolutionField2D sol;
  sol.grid = Grid2D::unit(m);
  sol.u.assign(m * m, 0.0);
  if (bnorm == 0.0) return sol;

  std::vector<double> x(size, 0.0), r = st.b, z(size, 0.0), p(size, 0.0),
      q(size, 0.0);
  ssor_apply(st, r, z);
  p = z;
  double rz = 0.0;
  for (int c = 0; c < size; ++c) rz += r[c] * z[c];

  const long cap = 10L * m * m;
  for (long it = 1; it <= cap; ++it) {
    apply(st, p, q);
    double pq = 0.0;
    for (int c = 0; c < size; ++c) pq += p[c] * q[c];
    if (!(pq > 0.0))
      throw SolverError("macro2d: conjugate gradient broke down (p'Ap = " +
                        std::to_string(pq) + ")");
    const double alpha = rz / pq;
    double rr = 0.0;
    for (int c = 0; c < size; ++c) {
      x[c] += alpha * p[c];
      r[c] -= alpha * q[c];
      rr += r[c] * r[c];
    }
    if (std::sqrt(rr) <= tol * bnorm) {
      for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i)
          sol.u[j * m + i] = x[(j + 1) * st.stride + (i + 1)];
      return sol;
    }
    ssor_apply(st, r, z);
    double rz_next = 0.0;
    for (int c = 0; c < size; ++c) rz_next += r[c] * z[c];
    const double beta = rz_next / rz;
    rz = rz_next;
    for (int c = 0; c < size; ++c) p[c] = z[c] + beta * p[c];
  }
  throw SolverError("macro2d: no convergence after " + std::to_string(cap) +
                    " iterations");
}

void validate_problem(const MacroProblem2D& p) {
  if (p.m < 2) throw Error("macro2d: resolution must be at least 2");
  if (!(p.tol > 0.0) || p.tol > 1e-4)
    throw Error("macro2d: tol must lie in (0, 1e-4]");
}

}  // namespace

SolutionField2D solve_multiscale_2d(const MacroProblem2D& p,
                                    const ScalarCoefficient& kappa, double eta) {
  validate_problem(p);
  if (!(eta > 0.0)) throw Error("solve_multiscale_2d: eta must be positive");
  if (p.m < 20.0 / eta)
    throw SolverError("solve_multiscale_2d: grid under-resolves the fast scale: "
                      "m = " + std::to_string(p.m) + " but 20/eta = " +
                      std::to_string(20.0 / eta));
  return solve_multiscale_2d(p, sample_scalar(kappa, Grid2D::unit(p.m), eta));
}

SolutionField2D solve_multiscale_2d(const MacroProblem2D& p,
                                    const std::vector<double>& kappa_samples) {
  validate_problem(p);
  if (kappa_samples.size() != static_cast<std::size_t>(p.m) * p.m)
    throw MismatchError("solve_multiscale_2d: sample count does not match m");
  for (double k : kappa_samples)
    if (!(k > 0.0))
      throw EllipticityError("solve_multiscale_2d: non-positive conductivity sample");
  const Stencil st =
      assemble(p.m, p.flux_h, kappa_samples, {}, kappa_samples);
  return pcg_solve(st, p.tol);
}

SolutionField2D solve_homogenized_2d(const MacroProblem2D& p,
                                     const HomogenizedTensor& t) {
  return solve_homogenized_2d(p, [&t](double, double) { return t; });
}

SolutionField2D solve_homogenized_2d(
    const MacroProblem2D& p,
    const std::function<HomogenizedTensor(double, double)>& tensor_at) {
  validate_problem(p);
  const Grid2D g = Grid2D::unit(p.m);
  std::vector<double> a11(g.cells()), a12(g.cells()), a22(g.cells());
  bool any_offdiag = false;
  for (int j = 0; j < p.m; ++j) {
    for (int i = 0; i < p.m; ++i) {
      const HomogenizedTensor t = tensor_at(g.center(i), g.center(j));
      if (!t.spd())
        throw EllipticityError("solve_homogenized_2d: tensor is not SPD at (" +
                               std::to_string(g.center(i)) + ", " +
                               std::to_string(g.center(j)) + ")");
      const int c = g.index(i, j);
      a11[c] = t.k11;
      a12[c] = 0.5 * (t.k12 + t.k21);
      a22[c] = t.k22;
      if (a12[c] != 0.0) any_offdiag = true;
    }
  }
  const Stencil st = assemble(p.m, p.flux_h, a11,
                              any_offdiag ? a12 : std::vector<double>{}, a22);
  return pcg_solve(st, p.tol);
}

ErrorNorms2D error_norms(const SolutionField2D& a, const SolutionField2D& b) {
  const SolutionField2D* fine = &a;
  const SolutionField2D* coarse = &b;
  if (fine->grid.m < coarse->grid.m) std::swap(fine, coarse);

  const int mf = fine->grid.m;
  const int mc = coarse->grid.m;
  const double hc = coarse->grid.spacing();

  ErrorNorms2D norms;
  const double cell_area = fine->grid.spacing() * fine->grid.spacing();
  double sq = 0.0;
  for (int j = 0; j < mf; ++j) {
    for (int i = 0; i < mf; ++i) {
      const double x = fine->grid.center(i);
      const double y = fine->grid.center(j);
      double cv;
      if (mc == mf) {
        cv = coarse->u[j * mc + i];
      } else {
        // bilinear interpolation from coarse cell centers; cells outside the
        // center hull extrapolate bilinearly from the outermost patch
        double s = x / hc - 0.5, t = y / hc - 0.5;
        int i0 = std::clamp(static_cast<int>(std::floor(s)), 0, mc - 2);
        int j0 = std::clamp(static_cast<int>(std::floor(t)), 0, mc - 2);
        const double fs = s - i0;
        const double ft = t - j0;
        const double u00 = coarse->u[j0 * mc + i0];
        const double u10 = coarse->u[j0 * mc + i0 + 1];
        const double u01 = coarse->u[(j0 + 1) * mc + i0];
        const double u11 = coarse->u[(j0 + 1) * mc + i0 + 1];
        cv = (1 - fs) * (1 - ft) * u00 + fs * (1 - ft) * u10 +
             (1 - fs) * ft * u01 + fs * ft * u11;
      }
      const double d = fine->u[j * mf + i] - cv;
      norms.max_norm = std::max(norms.max_norm, std::fabs(d));
      sq += d * d * cell_area;
    }
  }
  norms.l2_norm = std::sqrt(sq);
  return norms;
}

}  // namespace homog
