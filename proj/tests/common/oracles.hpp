#pragma once

// Test-side oracles, independent of the library's Gauss-Legendre path.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracles {

inline double simpson_rec(const std::function<double(double)>& f, double a,
                          double b, double fa, double fm, double fb,
                          double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

/// Adaptive Simpson quadrature (Richardson-corrected bisection).
inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double tol = 1e-12) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

constexpr double kPi = 3.14159265358979323846;

/// Smooth, strictly positive, 1-periodic coefficient built from a few random
/// Fourier modes. Amplitudes are budgeted so min >= c0 / 2.
struct RandomPeriodic1D {
  double c0 = 1.0;
  std::vector<double> amp, phase;  // mode k = index + 1

  double operator()(double y) const {
    double v = c0;
    for (std::size_t k = 0; k < amp.size(); ++k)
      v += amp[k] * std::sin(2.0 * kPi * (k + 1) * y + phase[k]);
    return v;
  }
};

inline RandomPeriodic1D random_periodic_1d(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RandomPeriodic1D c;
  c.c0 = 1.0 + u(rng);
  const int modes = 1 + static_cast<int>(u(rng) * 3.0);
  double budget = 0.5 * c.c0;
  for (int k = 0; k < modes; ++k) {
    const double a = budget * u(rng) / modes;
    c.amp.push_back(a);
    c.phase.push_back(2.0 * kPi * u(rng));
  }
  return c;
}

/// Smooth positive 1-periodic coefficient on the unit cell.
struct RandomPeriodic2D {
  double c0 = 1.0;
  struct Mode {
    int k1, k2;
    double amp, phase;
  };
  std::vector<Mode> modes;

  double operator()(double y1, double y2) const {
    double v = c0;
    for (const Mode& m : modes)
      v += m.amp * std::sin(2.0 * kPi * (m.k1 * y1 + m.k2 * y2) + m.phase);
    return v;
  }
};

inline RandomPeriodic2D random_periodic_2d(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RandomPeriodic2D c;
  c.c0 = 1.0 + u(rng);
  const int n = 2 + static_cast<int>(u(rng) * 3.0);
  const double budget = 0.45 * c.c0;
  for (int k = 0; k < n; ++k) {
    RandomPeriodic2D::Mode m;
    m.k1 = static_cast<int>(u(rng) * 3.0) - 1;  // -1..1
    m.k2 = static_cast<int>(u(rng) * 3.0) - 1;
    if (m.k1 == 0 && m.k2 == 0) m.k1 = 1;
    m.amp = budget * u(rng) / n;
    m.phase = 2.0 * kPi * u(rng);
    c.modes.push_back(m);
  }
  return c;
}

}  // namespace oracles
