#include "homog/beltrami.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "homog/quadrature.hpp"

namespace homog {

namespace {

constexpr double kDegenerateFloor = 1e-12;

double eval_at(const Expr& e, double x1, double x2, double y1, double y2,
               std::optional<double> eta) {
  Bindings b;
  b.set(Var::X1, x1).set(Var::X2, x2).set(Var::Y1, y1).set(Var::Y2, y2);
  if (eta) b.set(Var::Eta, *eta);
  return e.eval(b);
}

// Physical tangent d x / d X_dir at (X, Y): central differences in the slow
// coordinate plus (1/eta) times the fast-coordinate difference when the
// component depends on Y.
std::vector<double> tangent(const SurfaceChart& c, int dir, double x1, double x2,
                            double y1, double y2, std::optional<double> eta) {
  const double s = c.fd_step;
  std::vector<double> t(c.components.size(), 0.0);
  for (std::size_t k = 0; k < c.components.size(); ++k) {
    const Expr& e = c.components[k];
    double dx1 = x1, dx2 = x2;
    double* slow = (dir == 0) ? &dx1 : &dx2;
    const double s0 = *slow;
    *slow = s0 + s;
    const double fp = eval_at(e, dx1, dx2, y1, y2, eta);
    *slow = s0 - s;
    const double fm = eval_at(e, dx1, dx2, y1, y2, eta);
    *slow = s0;
    double d = (fp - fm) / (2.0 * s);

    const Var fast_var = (dir == 0) ? Var::Y1 : Var::Y2;
    if (e.references(fast_var)) {
      if (!eta)
        throw Error("two-scale chart evaluation requires eta");
      double dy1 = y1, dy2 = y2;
      double* fast = (dir == 0) ? &dy1 : &dy2;
      const double f0 = *fast;
      *fast = f0 + s;
      const double gp = eval_at(e, x1, x2, dy1, dy2, eta);
      *fast = f0 - s;
      const double gm = eval_at(e, x1, x2, dy1, dy2, eta);
      d += (gp - gm) / (2.0 * s) / *eta;
    }
    t[k] = d;
  }
  return t;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

MetricEval metric_from_tangents(int dim, const std::vector<double>& t1,
                                const std::vector<double>& t2) {
  MetricEval m;
  m.dim = dim;
  if (dim == 1) {
    m.g11 = dot(t1, t1);
    m.det = m.g11;
    if (!(m.det > kDegenerateFloor))
      throw EllipticityError("degenerate metric: |g| = " + std::to_string(m.det));
    m.inv11 = 1.0 / m.g11;
    m.a11 = 1.0 / std::sqrt(m.g11);
    return m;
  }
  m.g11 = dot(t1, t1);
  m.g12 = dot(t1, t2);
  m.g22 = dot(t2, t2);
  m.det = m.g11 * m.g22 - m.g12 * m.g12;
  if (!(m.det > kDegenerateFloor))
    throw EllipticityError("degenerate metric: |g| = " + std::to_string(m.det));
  m.inv11 = m.g22 / m.det;
  m.inv12 = -m.g12 / m.det;
  m.inv22 = m.g11 / m.det;
  const double root = std::sqrt(m.det);
  m.a11 = root * m.inv11;
  m.a12 = root * m.inv12;
  m.a22 = root * m.inv22;
  return m;
}

struct TangentFrame {
  std::vector<double> t1, t2;
  MetricEval m;
};

TangentFrame frame_at(const SurfaceChart& c, double x1, double x2, double y1,
                      double y2, std::optional<double> eta) {
  if (c.components.size() < static_cast<std::size_t>(c.dim))
    throw Error("chart needs at least dim embedding components");
  TangentFrame f;
  f.t1 = tangent(c, 0, x1, x2, y1, y2, eta);
  if (c.dim == 2) f.t2 = tangent(c, 1, x1, x2, y1, y2, eta);
  f.m = metric_from_tangents(c.dim, f.t1, c.dim == 2 ? f.t2 : f.t1);
  return f;
}

}  // namespace

bool SurfaceChart::two_scale() const {
  for (const Expr& e : components)
    if (e.references(Var::Y1) || e.references(Var::Y2)) return true;
  return false;
}

SurfaceChart SurfaceChart::graph(Expr f, double fd_step) {
  SurfaceChart c;
  c.dim = 2;
  c.components = {parse("X1"), parse("X2"), std::move(f)};
  c.fd_step = fd_step;
  return c;
}

SurfaceChart SurfaceChart::curve(Expr height, double fd_step) {
  SurfaceChart c;
  c.dim = 1;
  c.components = {parse("X1"), std::move(height)};
  c.fd_step = fd_step;
  return c;
}

MetricEval metric_from_chart(const SurfaceChart& c, double x1, double x2,
                             std::optional<double> eta) {
  double y1 = x1, y2 = x2;
  if (c.two_scale()) {
    if (!eta) throw Error("two-scale chart evaluation requires eta");
    y1 = x1 / *eta;
    y2 = x2 / *eta;
  }
  return frame_at(c, x1, x2, y1, y2, eta).m;
}

MetricEval metric_cell(const SurfaceChart& c, double x1, double x2, double y1,
                       double y2, double eta) {
  return frame_at(c, x1, x2, y1, y2, eta).m;
}

TwoScaleMetric1D TwoScaleMetric1D::wrinkled_sine_curve() {
  TwoScaleMetric1D m;
  m.g = [](double x, double y) {
    const double pi = 3.14159265358979323846;
    const double cs = std::cos(pi * x);
    const double cf = std::cos(2.0 * pi * y);
    return 1.0 + pi * pi * (cs * cs + 4.0 * cs * cf + 4.0 * cf * cf);
  };
  return m;
}

TwoScaleMetric1D TwoScaleMetric1D::from_chart(const SurfaceChart& c, double eta) {
  if (c.dim != 1)
    throw Error("TwoScaleMetric1D::from_chart requires a curve chart");
  TwoScaleMetric1D m;
  m.g = [c, eta](double x, double y) {
    return frame_at(c, x, 0.0, y, 0.0, eta).m.g11;
  };
  return m;
}

double lb_coefficient_1d(const TwoScaleMetric1D& m, double x, double y) {
  const double g = m.g(x, y);
  if (!(g > 0.0))
    throw EllipticityError("non-positive metric g = " + std::to_string(g) +
                           " at (X, Y) = (" + std::to_string(x) + ", " +
                           std::to_string(y) + ")");
  return 1.0 / std::sqrt(g);
}

std::function<double(double)> pointwise_khat(const TwoScaleMetric1D& m,
                                             int n_quad) {
  const int panels = n_quad > 0 ? n_quad : 32;
  return [m, panels](double x) {
    return harmonic_mean([&m, x](double y) { return lb_coefficient_1d(m, x, y); },
                         panels, 1.0);
  };
}

std::vector<double> homogenize_pointwise_1d(const TwoScaleMetric1D& m,
                                            const Grid1D& macro_nodes,
                                            int n_quad) {
  const auto khat = pointwise_khat(m, n_quad);
  std::vector<double> out(macro_nodes.n);
  for (int i = 0; i < macro_nodes.n; ++i) out[i] = khat(macro_nodes.node(i));
  return out;
}

SolutionField1D solve_lb_1d(const TwoScaleMetric1D& m, double eta, double flux_h,
                            LbMode mode, const Grid1D& out, int n_quad) {
  if (!(eta > 0.0)) throw Error("solve_lb_1d: eta must be positive");
  if (mode == LbMode::exact) {
    const int panels =
        std::max(n_quad, static_cast<int>(std::ceil(20.0 / eta)));
    Coefficient1D kappa = [m, eta](double x) {
      return lb_coefficient_1d(m, x, x / eta);
    };
    return solve_flux_bvp(kappa, 0.0, flux_h, panels, out);
  }
  // the homogenized coefficient has only macroscopic variation
  return solve_flux_bvp(pointwise_khat(m, n_quad), 0.0, flux_h,
                        std::max(n_quad, 256), out);
}

std::vector<PointTensor> homogenize_lb_2d(
    const SurfaceChart& c, const std::vector<std::array<double, 2>>& macro_points,
    double eta, int cell_resolution, double tol, int threads) {
  if (c.dim != 2) throw Error("homogenize_lb_2d requires a surface chart");
  if (cell_resolution < 8)
    throw Error("homogenize_lb_2d: cell resolution must be at least 8");
  if (macro_points.empty()) return {};

  std::vector<PointTensor> table(macro_points.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= macro_points.size()) return;
      try {
        const double x1 = macro_points[i][0];
        const double x2 = macro_points[i][1];
        MatrixCellProblem2D p;
        p.grid = PeriodicGrid2D::unit(cell_resolution);
        p.a11.resize(p.grid.cells());
        p.a12.resize(p.grid.cells());
        p.a22.resize(p.grid.cells());
        for (int j = 0; j < p.grid.n; ++j) {
          for (int i2 = 0; i2 < p.grid.n; ++i2) {
            const MetricEval me = metric_cell(c, x1, x2, p.grid.center(i2),
                                              p.grid.center(j), eta);
            const int idx = p.grid.index(i2, j);
            p.a11[idx] = me.a11;
            p.a12[idx] = me.a12;
            p.a22[idx] = me.a22;
          }
        }
        const Corrector2D chi1 = solve_cell_2d(p, 1, tol);
        const Corrector2D chi2 = solve_cell_2d(p, 2, tol);
        table[i] = PointTensor{x1, x2, assemble_tensor(p, chi1, chi2)};
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  const int n_threads = std::max(1, std::min<int>(threads, macro_points.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return table;
}

DualBasisReport dual_basis_check(const SurfaceChart& c, double x1, double x2,
                                 std::optional<double> eta, double tol) {
  double y1 = x1, y2 = x2;
  if (c.two_scale()) {
    if (!eta) throw Error("two-scale chart evaluation requires eta");
    y1 = x1 / *eta;
    y2 = x2 / *eta;
  }
  const TangentFrame f = frame_at(c, x1, x2, y1, y2, eta);

  DualBasisReport rep;
  rep.tol = tol;
  if (c.dim == 1) {
    std::vector<double> dual(f.t1.size());
    for (std::size_t k = 0; k < f.t1.size(); ++k) dual[k] = f.m.inv11 * f.t1[k];
    rep.max_delta_error = std::fabs(dot(dual, f.t1) - 1.0);
    rep.max_inverse_error = std::fabs(dot(dual, dual) - f.m.inv11);
  } else {
    const std::size_t nc = f.t1.size();
    std::vector<double> d1(nc), d2(nc);
    for (std::size_t k = 0; k < nc; ++k) {
      d1[k] = f.m.inv11 * f.t1[k] + f.m.inv12 * f.t2[k];
      d2[k] = f.m.inv12 * f.t1[k] + f.m.inv22 * f.t2[k];
    }
    const double e11 = std::fabs(dot(d1, f.t1) - 1.0);
    const double e12 = std::fabs(dot(d1, f.t2));
    const double e21 = std::fabs(dot(d2, f.t1));
    const double e22 = std::fabs(dot(d2, f.t2) - 1.0);
    rep.max_delta_error = std::max({e11, e12, e21, e22});
    const double i11 = std::fabs(dot(d1, d1) - f.m.inv11);
    const double i12 = std::fabs(dot(d1, d2) - f.m.inv12);
    const double i22 = std::fabs(dot(d2, d2) - f.m.inv22);
    rep.max_inverse_error = std::max({i11, i12, i22});
  }
  rep.pass = rep.max_delta_error <= tol && rep.max_inverse_error <= tol;
  return rep;
}

DivergenceCheckReport divergence_consistency_check(
    const SurfaceChart& c, const Expr& field, double x1, double x2,
    const std::vector<double>& steps, std::optional<double> eta) {
  if (c.dim != 2)
    throw Error("divergence_consistency_check requires a surface chart");
  if (steps.size() < 2)
    throw Error("divergence_consistency_check: need at least two steps");

  const double fd = c.fd_step;
  auto grad_field = [&](double px, double py, double out[2]) {
    out[0] = (eval_at(field, px + fd, py, 0, 0, eta) -
              eval_at(field, px - fd, py, 0, 0, eta)) /
             (2.0 * fd);
    out[1] = (eval_at(field, px, py + fd, 0, 0, eta) -
              eval_at(field, px, py - fd, 0, 0, eta)) /
             (2.0 * fd);
  };
  // tangent-basis components of the surface gradient: V_i = (g^{-1} grad U)_i
  auto gradient_v = [&](double px, double py, double out[2]) {
    const MetricEval m = metric_from_chart(c, px, py, eta);
    double gu[2];
    grad_field(px, py, gu);
    out[0] = m.inv11 * gu[0] + m.inv12 * gu[1];
    out[1] = m.inv12 * gu[0] + m.inv22 * gu[1];
  };

  // closed-form operator: (1/sqrt|g|) d_i ( sqrt|g| (g^{-1})_ij d_j U ),
  // outer derivatives by central differences of step `outer`
  auto w_component = [&](double px, double py, int i) {
    const MetricEval m = metric_from_chart(c, px, py, eta);
    double gu[2];
    grad_field(px, py, gu);
    const double v = (i == 0) ? m.inv11 * gu[0] + m.inv12 * gu[1]
                              : m.inv12 * gu[0] + m.inv22 * gu[1];
    return std::sqrt(m.det) * v;
  };
  const double outer = 1e-4;
  const MetricEval center = metric_from_chart(c, x1, x2, eta);
  const double reference =
      ((w_component(x1 + outer, x2, 0) - w_component(x1 - outer, x2, 0)) +
       (w_component(x1, x2 + outer, 1) - w_component(x1, x2 - outer, 1))) /
      (2.0 * outer * std::sqrt(center.det));

  DivergenceCheckReport rep;
  rep.reference = reference;
  rep.steps = steps;
  rep.errors.reserve(steps.size());
  for (const double d : steps) {
    const double hd = 0.5 * d;
    double v[2];
    // side fluxes evaluated at side midpoints; side length scales by
    // sqrt(g_tangential) / sqrt((g^{-1})_normal) = sqrt(|g|)
    gradient_v(x1, x2 + hd, v);
    MetricEval m = metric_from_chart(c, x1, x2 + hd, eta);
    const double top = v[1] * d * std::sqrt(m.g11) / std::sqrt(m.inv22);
    gradient_v(x1, x2 - hd, v);
    m = metric_from_chart(c, x1, x2 - hd, eta);
    const double bottom = -v[1] * d * std::sqrt(m.g11) / std::sqrt(m.inv22);
    gradient_v(x1 + hd, x2, v);
    m = metric_from_chart(c, x1 + hd, x2, eta);
    const double right = v[0] * d * std::sqrt(m.g22) / std::sqrt(m.inv11);
    gradient_v(x1 - hd, x2, v);
    m = metric_from_chart(c, x1 - hd, x2, eta);
    const double left = -v[0] * d * std::sqrt(m.g22) / std::sqrt(m.inv11);

    const double estimate =
        (top + bottom + right + left) / (std::sqrt(center.det) * d * d);
    rep.errors.push_back(std::fabs(estimate - reference));
  }

  const double floor = 1e-7 * std::max(1.0, std::fabs(reference));
  bool above_floor = true;
  for (double e : rep.errors) above_floor = above_floor && e > floor;
  rep.order_defined = above_floor;
  if (above_floor) {
    // least-squares slope of log(err) against log(step)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = static_cast<int>(steps.size());
    for (int i = 0; i < n; ++i) {
      const double lx = std::log(steps[i]);
      const double ly = std::log(rep.errors[i]);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    rep.observed_order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return rep;
}

}  // namespace homog
