#pragma once

// Independent reference computations used by the tests. Nothing here calls
// the library's own quadrature or closed forms.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

/// int_{x0}^{x1} f(x) dx by Boost's adaptive Gauss-Kronrod rule.
inline double integrate(const std::function<double(double)>& f, double x0, double x1, double tol = 1e-13,
                        unsigned max_depth = 25) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, x0, x1, max_depth, tol);
}

/// int_{x0}^{x1} int_{y0}^{y1} f(x, y) dy dx, both levels adaptive.
inline double integrate_2d(const std::function<double(double, double)>& f, double x0, double x1, double y0,
                           double y1, double tol = 1e-12) {
  return integrate([&](double x) { return integrate([&](double y) { return f(x, y); }, y0, y1, tol); }, x0, x1,
                   tol);
}

struct Estimate {
  double mean;
  double standard_error;
};

/// Monte Carlo estimate of (1/p) int_{S^{d-1}} |<e_1, sigma>|^p d sigma from
/// Gaussian directions.
inline Estimate sphere_constant(int d, double p, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  double sum = 0.0, sum_sq = 0.0;
  for (int s = 0; s < samples; ++s) {
    double first = 0.0, norm_sq = 0.0;
    for (int i = 0; i < d; ++i) {
      const double z = normal(rng);
      if (i == 0) first = z;
      norm_sq += z * z;
    }
    const double value = std::pow(std::abs(first) / std::sqrt(norm_sq), p);
    sum += value;
    sum_sq += value * value;
  }
  const double area = 2.0 * std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0);
  const double mean = sum / samples;
  const double variance = (sum_sq / samples - mean * mean) / (samples - 1);
  return {area * mean / p, area * std::sqrt(variance) / p};
}

/// Total k-hostility straight from the defining double sum (j from i).
inline double hostility_by_definition(const std::vector<std::int64_t>& u, const std::vector<double>& h, int k) {
  double total = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = i; j < u.size(); ++j) {
      const auto diff = u[j] > u[i] ? u[j] - u[i] : u[i] - u[j];
      if (diff > k) total += h[j - i - 1];
    }
  return total;
}

/// A step function given by explicit piece intervals.
struct Pieces {
  std::vector<double> lower, upper, value;
};

/// Unsymmetrised double integral over all ordered pairs of distinct pieces
/// of weight(|v_j - v_i|) * scale * |y - x|^{-1-p}. Pairs whose weight is
/// zero are skipped; callers must not pass touching active pairs.
inline double pair_integral(const Pieces& u, const std::function<double(double)>& weight, double scale, double p) {
  double total = 0.0;
  for (std::size_t i = 0; i < u.value.size(); ++i)
    for (std::size_t j = 0; j < u.value.size(); ++j) {
      if (i == j) continue;
      const double w = weight(std::abs(u.value[j] - u.value[i]));
      if (w == 0.0) continue;
      total += w * scale *
               integrate_2d([p](double x, double y) { return std::pow(std::abs(y - x), -1.0 - p); }, u.lower[i],
                            u.upper[i], u.lower[j], u.upper[j]);
    }
  return total;
}

}  // namespace oracle
