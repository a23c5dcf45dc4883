#include "homog/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace homog {

namespace {

// 5-point Gauss-Legendre abscissae/weights on [-1, 1].
constexpr double kNodes[5] = {
    -0.90617984593866399280, -0.53846931010568309104, 0.0,
    0.53846931010568309104, 0.90617984593866399280};
constexpr double kWeights[5] = {
    0.23692688505618908751, 0.47862867049936646804, 0.56888888888888888889,
    0.47862867049936646804, 0.23692688505618908751};

double panel_sum(const std::function<double(double)>& f, double a, double b,
                 int panels) {
  const double width = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * width;
    const double half = 0.5 * width;
    double acc = 0.0;
    for (int q = 0; q < 5; ++q) acc += kWeights[q] * f(mid + half * kNodes[q]);
    total += half * acc;
  }
  return total;
}

}  // namespace

double gauss_legendre(const std::function<double(double)>& f, double a, double b,
                      int panels) {
  if (panels < 1) throw SolverError("gauss_legendre: panel count must be >= 1");
  if (!(b > a)) throw SolverError("gauss_legendre: empty or reversed interval");
  return panel_sum(f, a, b, panels);
}

double integrate_to_tolerance(const std::function<double(double)>& f, double a,
                              double b, int initial_panels, double rel_tol,
                              int max_doublings) {
  int panels = std::max(1, initial_panels);
  double coarse = gauss_legendre(f, a, b, panels);
  for (int i = 0; i < max_doublings; ++i) {
    panels *= 2;
    const double fine = panel_sum(f, a, b, panels);
    const double scale = std::max({std::fabs(fine), std::fabs(coarse), 1e-300});
    if (std::fabs(fine - coarse) <= rel_tol * scale) return fine;
    coarse = fine;
  }
  throw SolverError("quadrature did not reach the requested tolerance after " +
                    std::to_string(max_doublings) + " panel doublings");
}

std::vector<double> cumulative_integral(const std::function<double(double)>& f,
                                        const std::vector<double>& nodes,
                                        int total_panels, double rel_tol,
                                        int max_doublings) {
  const std::size_t n = nodes.size();
  if (n < 2) throw SolverError("cumulative_integral: need at least two nodes");
  for (std::size_t k = 1; k < n; ++k)
    if (!(nodes[k] > nodes[k - 1]))
      throw SolverError("cumulative_integral: nodes must be strictly increasing");

  const double span = nodes.back() - nodes.front();
  std::vector<int> panels(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double frac = (nodes[k + 1] - nodes[k]) / span;
    panels[k] = std::max(1, static_cast<int>(std::llround(total_panels * frac)));
  }

  auto pass = [&](std::vector<double>& cum) {
    cum.assign(n, 0.0);
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      acc += panel_sum(f, nodes[k], nodes[k + 1], panels[k]);
      cum[k + 1] = acc;
    }
  };

  std::vector<double> coarse, fine;
  pass(coarse);
  for (int i = 0; i < max_doublings; ++i) {
    for (auto& p : panels) p *= 2;
    pass(fine);
    double diff = 0.0, scale = 1e-300;
    for (std::size_t k = 0; k < n; ++k) {
      diff = std::max(diff, std::fabs(fine[k] - coarse[k]));
      scale = std::max(scale, std::fabs(fine[k]));
    }
    if (diff <= rel_tol * scale) return fine;
    coarse.swap(fine);
  }
  throw SolverError("cumulative quadrature did not reach the requested tolerance");
}

}  // namespace homog
