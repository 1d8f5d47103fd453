#pragma once

// The step-length energy P_{n,phi,p} on the unit simplex, its minimisation
// and the asymptotics of the minimum values I_{n,p}.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nlshape/parallel.hpp"

namespace nlshape::shape {

/// Lengths l_1..l_n, all positive, summing to 1 within 1e-12.
class SimplexLengths {
 public:
  explicit SimplexLengths(std::vector<double> lengths);
  static SimplexLengths equal(std::size_t n);

  const std::vector<double>& lengths() const { return lengths_; }
  std::size_t size() const { return lengths_.size(); }

 private:
  std::vector<double> lengths_;
};

/// S_{i,h} = l_i + ... + l_{i+h-1} for h = 1..max_h (0-based i).
class PartialSums {
 public:
  PartialSums(std::span<const double> lengths, std::size_t max_h);

  double operator()(std::size_t i, std::size_t h) const { return table_[i * max_h_ + (h - 1)]; }
  std::size_t max_h() const { return max_h_; }

 private:
  std::size_t n_;
  std::size_t max_h_;
  std::vector<double> table_;
};

/// P_{n,phi,p}(l) for phi = sum_k lambdas[k-1] phi_k. The span overload
/// accepts any positive lengths (not necessarily summing to 1).
double p_value(const std::vector<double>& lambdas, double p, const SimplexLengths& l);
double p_value(const std::vector<double>& lambdas, double p, std::span<const double> lengths);

/// dP/dl_j for every j.
std::vector<double> p_gradient(const std::vector<double>& lambdas, double p, const SimplexLengths& l);
std::vector<double> p_gradient(const std::vector<double>& lambdas, double p, std::span<const double> lengths);

/// P at l = (1/n, ..., 1/n), in closed form.
double equal_length_value(std::size_t n, const std::vector<double>& lambdas, double p);

struct MinimizationReport {
  SimplexLengths minimizer = SimplexLengths::equal(1);
  double value = 0.0;
  int iterations = 0;  // of the reported run
  /// max_j |l_j (g_j - <l, g>)| / max(1, |P|): the gradient in the softmax
  /// chart, i.e. the simplex-projected gradient weighted by l.
  double first_order_residual = 0.0;
  int restarts = 0;  // random starts tried (the equal-length start is extra)
  bool converged = false;
};

struct MinimizeOptions {
  int restarts = 8;
  double tolerance = 1e-10;
  std::uint64_t seed = kDefaultSeed;
  int max_iterations = 20000;
};

/// Multi-start L-BFGS over the simplex via l = softmax(xi) with xi_n = 0.
/// Non-convergence is reported through `converged`, with the best iterate.
MinimizationReport minimize_I(std::size_t n, const std::vector<double>& lambdas, double p,
                              const MinimizeOptions& options = {});

struct LimitEstimate {
  double constant = 0.0;
  double uncertainty = 0.0;
  std::string model_used;
  /// c from the c + a/n + b/n^2 fit, present with six or more points.
  std::optional<double> alternative_constant;
  double slope = 0.0;  // a of the primary fit
};

/// Fits I_n / n^p = c + a/n by least squares. Needs at least four distinct
/// increasing n; throws std::domain_error on an ill-conditioned fit.
LimitEstimate extrapolate_limit(const std::vector<std::pair<double, double>>& values, double p);

/// 2 log 2 (lambda_1 + lambda_2 + lambda_4 + ...). Throws unless the
/// coefficients are constant on dyadic packages.
double pca2_telescopic_prediction(const std::vector<double>& lambdas);

/// Index of the last non-zero coefficient (the m the law needs n > m for).
std::size_t effective_order(const std::vector<double>& lambdas);

}  // namespace nlshape::shape
