#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "homog/cell2d.hpp"
#include "homog/homog1d.hpp"
#include "oracles.hpp"

using namespace homog;

namespace {

constexpr double kPi = oracles::kPi;
const double kSqrt075 = std::sqrt(0.75);

CellProblem2D make_cell(int n, double length,
                        const std::function<double(double, double)>& kappa) {
  CellProblem2D p;
  p.grid = PeriodicGrid2D::sized(length, n);
  p.kappa.resize(p.grid.cells());
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      p.kappa[p.grid.index(i, j)] = kappa(p.grid.center(i), p.grid.center(j));
  return p;
}

double laminate(double y1, double) { return 1.0 + 0.5 * std::sin(2.0 * kPi * y1); }

// discrete harmonic/arithmetic means of the samples (the bounds the scheme
// satisfies exactly)
std::pair<double, double> sample_means(const CellProblem2D& p) {
  double inv = 0.0, mean = 0.0;
  for (double k : p.kappa) {
    inv += 1.0 / k;
    mean += k;
  }
  const double n = static_cast<double>(p.kappa.size());
  return {n / inv, mean / n};
}

}  // namespace

TEST_CASE("constant cell: zero corrector without iterating, identity-scaled tensor") {
  const auto p = make_cell(16, 1.0, [](double, double) { return 2.5; });
  const auto c1 = solve_cell_2d(p, 1);
  const auto c2 = solve_cell_2d(p, 2);
  CHECK(c1.iterations == 0);
  for (double v : c1.chi) CHECK(v == 0.0);
  const auto t = assemble_tensor(p, c1, c2);
  CHECK(t.k11 == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(t.k22 == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(std::fabs(t.k12) <= 1e-14);
  CHECK(std::fabs(t.k21) <= 1e-14);
}

TEST_CASE("solver validates its preconditions") {
  const auto p = make_cell(16, 1.0, [](double, double) { return 1.0; });
  CHECK_THROWS_AS(solve_cell_2d(p, 3), Error);
  CHECK_THROWS_AS(solve_cell_2d(p, 1, 1e-3), Error);   // tol must be <= 1e-4
  CHECK_THROWS_AS(solve_cell_2d(p, 1, -1.0), Error);
  auto small = make_cell(4, 1.0, [](double, double) { return 1.0; });
  CHECK_THROWS_AS(solve_cell_2d(small, 1), Error);     // N >= 8
  auto bad = p;
  bad.kappa[3] = -1.0;
  CHECK_THROWS_AS(solve_cell_2d(bad, 1), EllipticityError);
}

TEST_CASE("laminate: chi1 matches the extruded 1D corrector, chi2 vanishes") {
  const int n = 64;
  const auto p = make_cell(n, 1.0, laminate);
  const auto c1 = solve_cell_2d(p, 1, 1e-12);
  const auto c2 = solve_cell_2d(p, 2, 1e-12);

  // chi2 right-hand side vanishes identically for a Y1-laminate
  for (double v : c2.chi) CHECK(v == 0.0);

  // 1D closed-form corrector at cell centers, shifted to the discrete
  // zero-mean gauge, extruded in Y2
  const auto kap1d = [](double y) { return laminate(y, 0.0); };
  const double khat =
      1.0 / oracles::adaptive_simpson([&](double y) { return 1.0 / kap1d(y); }, 0.0, 1.0);
  std::vector<double> closed(n);
  double mean = 0.0;
  for (int i = 0; i < n; ++i) {
    const double y = p.grid.center(i);
    closed[i] = -y + khat * oracles::adaptive_simpson(
                                [&](double t) { return 1.0 / kap1d(t); }, 0.0, y);
    mean += closed[i];
  }
  mean /= n;
  double worst = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      worst = std::max(worst,
                       std::fabs(c1.chi[p.grid.index(i, j)] - (closed[i] - mean)));
  CHECK(worst <= 5e-3);

  // extrusion: no Y2 dependence at all
  double col = 0.0;
  for (int j = 1; j < n; ++j)
    for (int i = 0; i < n; ++i)
      col = std::max(col, std::fabs(c1.chi[p.grid.index(i, j)] -
                                    c1.chi[p.grid.index(i, 0)]));
  CHECK(col <= 1e-10);
}

TEST_CASE("laminate tensor: harmonic mean across, arithmetic along") {
  const auto p = make_cell(64, 1.0, laminate);
  const auto t = assemble_tensor(p, solve_cell_2d(p, 1, 1e-12), solve_cell_2d(p, 2, 1e-12));
  CHECK(t.k11 == doctest::Approx(kSqrt075).epsilon(1e-3));
  CHECK(t.k22 == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(std::fabs(t.k12) <= 1e-10);
  CHECK(std::fabs(t.k21) <= 1e-10);
  CHECK(verify_symmetry(t, 1e-8).pass);
}

TEST_CASE("rotated laminate tensor matches the closed-form rotation") {
  // kappa varies along (1,1): harmonic mean across the layers, arithmetic
  // along them, rotated back by 45 degrees
  const auto p = make_cell(64, 1.0, [](double y1, double y2) {
    return 1.0 + 0.5 * std::sin(2.0 * kPi * (y1 + y2));
  });
  const auto t = assemble_tensor(p, solve_cell_2d(p, 1, 1e-12), solve_cell_2d(p, 2, 1e-12));
  const double diag = 0.5 * (kSqrt075 + 1.0);
  const double off = 0.5 * (kSqrt075 - 1.0);
  CHECK(t.k11 == doctest::Approx(diag).epsilon(5e-4));
  CHECK(t.k22 == doctest::Approx(diag).epsilon(5e-4));
  CHECK(t.k12 == doctest::Approx(off).epsilon(5e-3));
  CHECK(std::fabs(t.k12) > 0.01);  // genuinely anisotropic
  CHECK(verify_symmetry(t, 1e-8).pass);
}

TEST_CASE("rotated laminate converges at second order") {
  const double diag = 0.5 * (kSqrt075 + 1.0);
  const double off = 0.5 * (kSqrt075 - 1.0);
  double errs[2];
  int idx = 0;
  for (int n : {32, 128}) {
    const auto p = make_cell(n, 1.0, [](double y1, double y2) {
      return 1.0 + 0.5 * std::sin(2.0 * kPi * (y1 + y2));
    });
    const auto t =
        assemble_tensor(p, solve_cell_2d(p, 1, 1e-12), solve_cell_2d(p, 2, 1e-12));
    errs[idx++] = std::max(std::fabs(t.k11 - diag), std::fabs(t.k12 - off));
  }
  const double order = std::log2(errs[0] / errs[1]) / 2.0;
  CHECK(order >= 1.8);
}

TEST_CASE("checkerboard corrector symmetries") {
  // kappa = 1 + 0.5 sin(2 pi Y1) sin(2 pi Y2): chi1 is odd under
  // Y1 -> L/2 - Y1 and even under Y2 -> L/2 - Y2 (both map the sampled
  // coefficient onto itself; the first flips the forcing direction)
  for (int res : {16, 32}) {
    const auto q = make_cell(res, 1.0, [](double y1, double y2) {
      return 1.0 + 0.5 * std::sin(2.0 * kPi * y1) * std::sin(2.0 * kPi * y2);
    });
    const auto c1 = solve_cell_2d(q, 1, 1e-12);
    double odd = 0.0, even = 0.0, scale = 0.0;
    for (int j = 0; j < res; ++j)
      for (int i = 0; i < res; ++i) {
        const double v = c1.chi[q.grid.index(i, j)];
        scale = std::max(scale, std::fabs(v));
        odd = std::max(odd, std::fabs(v + c1.chi[q.grid.index(res / 2 - 1 - i, j)]));
        even = std::max(even, std::fabs(v - c1.chi[q.grid.index(i, res / 2 - 1 - j)]));
      }
    CHECK(scale > 1e-3);
    CHECK(odd <= 1e-10);
    CHECK(even <= 1e-10);
  }
}

TEST_CASE("zero-mean gauge") {
  const auto p = make_cell(32, 1.0, [](double y1, double y2) {
    return 1.5 + 0.5 * std::sin(2.0 * kPi * y1) * std::cos(2.0 * kPi * y2);
  });
  const auto c1 = solve_cell_2d(p, 1, 1e-12);
  double sum = 0.0;
  const double h2 = p.grid.spacing() * p.grid.spacing();
  for (double v : c1.chi) sum += v * h2;
  CHECK(std::fabs(sum) <= 1e-10);
}

TEST_CASE("cross-section flux: uniform cell carries flux L through every section") {
  const auto p = make_cell(16, 1.0, [](double, double) { return 1.0; });
  const auto c1 = solve_cell_2d(p, 1);
  for (int s = 0; s < 16; ++s)
    CHECK(cross_section_flux(p, c1, 1, s) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(cross_section_flux(p, c1, 1, 99), Error);
}

TEST_CASE("cross-section flux equals khat11 L through every laminate section") {
  const auto p = make_cell(64, 1.0, laminate);
  const auto c1 = solve_cell_2d(p, 1, 1e-12);
  const auto c2 = solve_cell_2d(p, 2, 1e-12);
  const auto t = assemble_tensor(p, c1, c2);
  for (int s : {0, 7, 32, 63}) {
    const double f = cross_section_flux(p, c1, 1, s);
    CHECK(std::fabs(f - t.k11 * 1.0) <= 1e-8 * t.k11);
  }
  const auto spread = cross_section_flux_spread(p, c1, 1);
  CHECK(spread.rel_spread <= 1e-8);
}

TEST_CASE("flux through section 0 equals flux through section N/2") {
  const auto p = make_cell(32, 1.0, [](double y1, double y2) {
    return 1.0 + 0.3 * std::sin(2.0 * kPi * y1) + 0.2 * std::cos(2.0 * kPi * y2);
  });
  const auto c1 = solve_cell_2d(p, 1, 1e-12);
  const double f0 = cross_section_flux(p, c1, 1, 0);
  const double f16 = cross_section_flux(p, c1, 1, 16);
  CHECK(std::fabs(f0 - f16) <= 1e-10 * std::fabs(f0));
}

TEST_CASE("discrete conservation holds in every control volume") {
  // net flux of q = kappa (e1 + grad chi1) out of each cell, recomputed from
  // the public data with the scheme's own face conductivities
  const int n = 24;
  const auto p = make_cell(n, 1.0, [](double y1, double y2) {
    return 1.2 + 0.4 * std::sin(2.0 * kPi * y1) * std::cos(2.0 * kPi * y2);
  });
  const auto c1 = solve_cell_2d(p, 1, 1e-12);
  const double h = p.grid.spacing();
  auto hmean = [](double a, double b) { return 2.0 * a * b / (a + b); };
  double worst = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int c = p.grid.index(i, j);
      const int e = p.grid.index(i + 1, j), w = p.grid.index(i - 1, j);
      const int nn = p.grid.index(i, j + 1), s = p.grid.index(i, j - 1);
      const double fe = hmean(p.kappa[c], p.kappa[e]) * (c1.chi[e] - c1.chi[c] + h);
      const double fw = hmean(p.kappa[c], p.kappa[w]) * (c1.chi[c] - c1.chi[w] + h);
      const double fn = hmean(p.kappa[c], p.kappa[nn]) * (c1.chi[nn] - c1.chi[c]);
      const double fs = hmean(p.kappa[c], p.kappa[s]) * (c1.chi[c] - c1.chi[s]);
      worst = std::max(worst, std::fabs(fe - fw + fn - fs));
    }
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("tensor is independent of the cell side length") {
  const auto p1 = make_cell(32, 1.0, laminate);
  // same microstructure, two periods per side on a cell of side 2
  const auto p2 = make_cell(64, 2.0, [](double y1, double y2) {
    return laminate(y1 - std::floor(y1), y2);
  });
  const auto t1 = assemble_tensor(p1, solve_cell_2d(p1, 1, 1e-12), solve_cell_2d(p1, 2, 1e-12));
  const auto t2 = assemble_tensor(p2, solve_cell_2d(p2, 1, 1e-12), solve_cell_2d(p2, 2, 1e-12));
  CHECK(std::fabs(t1.k11 - t2.k11) <= 1e-8);
  CHECK(std::fabs(t1.k22 - t2.k22) <= 1e-8);
  CHECK(std::fabs(t1.k12 - t2.k12) <= 1e-8);
}

TEST_CASE("random smooth cells: symmetry, SPD, and sample Voigt-Reuss bounds") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const auto c = oracles::random_periodic_2d(rng);
    const auto p = make_cell(32, 1.0, [&](double y1, double y2) { return c(y1, y2); });
    const auto t =
        assemble_tensor(p, solve_cell_2d(p, 1, 1e-12), solve_cell_2d(p, 2, 1e-12));
    const auto rep = verify_symmetry(t, 1e-8);
    CHECK_MESSAGE(rep.pass, "gap ", rep.gap, " scale ", rep.scale);
    CHECK(t.spd());
    const auto [hm, am] = sample_means(p);
    const auto eig = t.eigenvalues();
    CHECK(eig[0] >= hm - 1e-6);
    CHECK(eig[1] <= am + 1e-6);
  }
}

TEST_CASE("assemble_tensor rejects mismatched correctors") {
  const auto p = make_cell(16, 1.0, laminate);
  const auto q = make_cell(32, 1.0, laminate);
  const auto c1 = solve_cell_2d(p, 1, 1e-10);
  const auto c2q = solve_cell_2d(q, 2, 1e-10);
  CHECK_THROWS_AS(assemble_tensor(p, c1, c2q), MismatchError);
  const auto c2 = solve_cell_2d(p, 2, 1e-10);
  CHECK_THROWS_AS(assemble_tensor(p, c2, c1), MismatchError);  // wrong directions
}

TEST_CASE("matrix-coefficient cells reduce to the scalar laminate limit") {
  // diagonal matrix A = diag(kappa(Y1), kappa(Y1)) must reproduce the scalar
  // laminate tensor
  const int n = 64;
  MatrixCellProblem2D p;
  p.grid = PeriodicGrid2D::unit(n);
  p.a11.resize(p.grid.cells());
  p.a12.assign(p.grid.cells(), 0.0);
  p.a22.resize(p.grid.cells());
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double k = laminate(p.grid.center(i), 0.0);
      p.a11[p.grid.index(i, j)] = k;
      p.a22[p.grid.index(i, j)] = k;
    }
  const auto t = assemble_tensor(p, solve_cell_2d(p, 1, 1e-12), solve_cell_2d(p, 2, 1e-12));
  CHECK(t.k11 == doctest::Approx(kSqrt075).epsilon(1e-3));
  CHECK(t.k22 == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(std::fabs(t.k12) <= 1e-10);

  // constant anisotropic coefficient passes through exactly
  MatrixCellProblem2D q;
  q.grid = PeriodicGrid2D::unit(16);
  q.a11.assign(q.grid.cells(), 2.0);
  q.a12.assign(q.grid.cells(), 0.5);
  q.a22.assign(q.grid.cells(), 1.0);
  const auto tq = assemble_tensor(q, solve_cell_2d(q, 1, 1e-12), solve_cell_2d(q, 2, 1e-12));
  CHECK(tq.k11 == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(tq.k12 == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(tq.k21 == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(tq.k22 == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("tensor eigenvalue helper") {
  HomogenizedTensor t{2.0, 0.5, 0.5, 1.0};
  const auto eig = t.eigenvalues();
  CHECK(eig[0] == doctest::Approx(1.5 - std::sqrt(0.5)).epsilon(1e-14));
  CHECK(eig[1] == doctest::Approx(1.5 + std::sqrt(0.5)).epsilon(1e-14));
  CHECK(t.spd());
  CHECK_FALSE(HomogenizedTensor{1.0, 2.0, 2.0, 1.0}.spd());
}
