#pragma once

// Test-only numerical oracles, independent of the library implementation.

#include <cmath>
#include <functional>

namespace oracles {

inline double simpson(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  return (b - a) / 6.0 * (f(a) + 4.0 * f(c) + f(b));
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double whole, double tol, int depth) {
  const double c = 0.5 * (a + b);
  const double left = simpson(f, a, c);
  const double right = simpson(f, c, b);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return adaptive_simpson_rec(f, a, c, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, c, b, right, 0.5 * tol, depth - 1);
}

/// Adaptive Simpson quadrature with Richardson correction.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-13, int depth = 40) {
  return adaptive_simpson_rec(f, a, b, simpson(f, a, b), tol, depth);
}

/// Semicircle density (2 / pi s^2) sqrt(s^2 - x^2) on [-s, s].
inline std::function<double(double)> semicircle_density(double sigma_star) {
  return [sigma_star](double x) {
    const double d = sigma_star * sigma_star - x * x;
    return d <= 0.0 ? 0.0 : 2.0 / (M_PI * sigma_star * sigma_star) * std::sqrt(d);
  };
}

/// E[x^k] against the semicircle by brute-force integration.
inline double semicircle_moment(double sigma_star, int k) {
  auto dens = semicircle_density(sigma_star);
  return adaptive_simpson([&](double x) { return std::pow(x, k) * dens(x); }, -sigma_star,
                          sigma_star);
}

/// E[e^{wx}] against the semicircle by brute-force integration.
inline double semicircle_mgf(double sigma_star, double w) {
  auto dens = semicircle_density(sigma_star);
  return adaptive_simpson([&](double x) { return std::exp(w * x) * dens(x); }, -sigma_star,
                          sigma_star);
}

/// Central difference of a scalar function.
inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracles
