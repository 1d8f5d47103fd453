#include "nlshape/shape.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "nlshape/laws.hpp"

namespace nlshape::shape {

namespace {

void validate_lambdas(const std::vector<double>& lambdas) {
  if (lambdas.empty()) throw std::invalid_argument("coefficient sequence is empty");
  for (double lambda : lambdas)
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("coefficients must be finite and >= 0");
}

void validate_p(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("exponent p must satisfy p >= 1");
}

void validate_problem(std::size_t n, const std::vector<double>& lambdas, double p) {
  validate_lambdas(lambdas);
  validate_p(p);
  const std::size_t m = effective_order(lambdas);
  if (m == 0) throw std::invalid_argument("coefficients are all zero");
  if (n <= m) throw std::invalid_argument("need n > m = " + std::to_string(m) + " steps, got n = " + std::to_string(n));
}

void validate_lengths(std::span<const double> lengths) {
  for (double l : lengths)
    if (!(l > 0.0) || !std::isfinite(l)) throw std::invalid_argument("lengths must be finite and > 0");
}

// int_A^{A+d} sigma^{-p} d sigma.
double segment_integral(double p, double a, double d) {
  if (p == 1.0) return std::log1p(d / a);
  return -std::pow(a, 1.0 - p) * std::expm1((1.0 - p) * std::log1p(d / a)) / (p - 1.0);
}

}  // namespace

SimplexLengths::SimplexLengths(std::vector<double> lengths) : lengths_(std::move(lengths)) {
  if (lengths_.empty()) throw std::invalid_argument("simplex point needs n >= 1");
  validate_lengths(lengths_);
  const double total = std::accumulate(lengths_.begin(), lengths_.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("lengths must sum to 1");
}

SimplexLengths SimplexLengths::equal(std::size_t n) {
  if (n == 0) throw std::invalid_argument("simplex point needs n >= 1");
  return SimplexLengths(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

PartialSums::PartialSums(std::span<const double> lengths, std::size_t max_h)
    : n_(lengths.size()), max_h_(max_h), table_(lengths.size() * max_h, 0.0) {
  if (max_h == 0) throw std::invalid_argument("partial sums need max_h >= 1");
  for (std::size_t i = 0; i < n_; ++i) {
    double sum = 0.0;
    for (std::size_t h = 1; h <= max_h_ && i + h <= n_; ++h) {
      sum += lengths[i + h - 1];
      table_[i * max_h_ + (h - 1)] = sum;
    }
  }
}

std::size_t effective_order(const std::vector<double>& lambdas) {
  std::size_t m = lambdas.size();
  while (m > 0 && lambdas[m - 1] == 0.0) --m;
  return m;
}

double p_value(const std::vector<double>& lambdas, double p, const SimplexLengths& l) {
  return p_value(lambdas, p, std::span<const double>(l.lengths()));
}

double p_value(const std::vector<double>& lambdas, double p, std::span<const double> lengths) {
  const std::size_t n = lengths.size();
  validate_problem(n, lambdas, p);
  validate_lengths(lengths);
  const std::size_t m = effective_order(lambdas);
  const PartialSums s(lengths, m + 1);
  double total = 0.0;
  for (std::size_t k = 1; k <= m; ++k) {
    const double lambda = lambdas[k - 1];
    if (lambda == 0.0) continue;
    double inner = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) {
      // [S_{i,k}, S_{i,k+1}] and [S_{i+1,k}, S_{i,k+1}].
      inner += segment_integral(p, s(i, k), lengths[i + k]);
      inner += segment_integral(p, s(i + 1, k), lengths[i]);
    }
    total += lambda * inner;
  }
  return total;
}

std::vector<double> p_gradient(const std::vector<double>& lambdas, double p, const SimplexLengths& l) {
  return p_gradient(lambdas, p, std::span<const double>(l.lengths()));
}

std::vector<double> p_gradient(const std::vector<double>& lambdas, double p, std::span<const double> lengths) {
  const std::size_t n = lengths.size();
  validate_problem(n, lambdas, p);
  validate_lengths(lengths);
  const std::size_t m = effective_order(lambdas);
  const PartialSums s(lengths, m + 1);
  // Each S_{i,h} contributes its endpoint derivative to l_i..l_{i+h-1};
  // accumulate through a difference array.
  std::vector<double> diff(n + 1, 0.0);
  auto add_range = [&](std::size_t first, std::size_t last, double value) {
    diff[first] += value;
    diff[last + 1] -= value;
  };
  for (std::size_t k = 1; k <= m; ++k) {
    const double lambda = lambdas[k - 1];
    if (lambda == 0.0) continue;
    for (std::size_t i = 0; i + k < n; ++i) {
      const double b = std::pow(s(i, k + 1), -p);
      add_range(i, i + k, 2.0 * lambda * b);
      add_range(i, i + k - 1, -lambda * std::pow(s(i, k), -p));
      add_range(i + 1, i + k, -lambda * std::pow(s(i + 1, k), -p));
    }
  }
  std::vector<double> gradient(n);
  double running = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    running += diff[j];
    gradient[j] = running;
  }
  return gradient;
}

double equal_length_value(std::size_t n, const std::vector<double>& lambdas, double p) {
  validate_problem(n, lambdas, p);
  const double nd = static_cast<double>(n);
  double total = 0.0;
  for (std::size_t k = 1; k <= lambdas.size() && k < n; ++k) {
    const double kd = static_cast<double>(k);
    double per_term;
    if (p == 1.0) {
      per_term = std::log1p(1.0 / kd);
    } else {
      per_term = std::pow(nd, p - 1.0) * std::pow(kd, 1.0 - p) * -std::expm1((1.0 - p) * std::log1p(1.0 / kd)) /
                 (p - 1.0);
    }
    total += lambdas[k - 1] * 2.0 * (nd - kd) * per_term;
  }
  return total;
}

namespace {

struct Objective {
  const std::vector<double>& lambdas;
  double p;
  std::size_t n;

  // xi has n-1 free coordinates; the last logit is pinned at 0.
  std::vector<double> lengths(const Eigen::VectorXd& xi) const {
    double top = 0.0;
    for (Eigen::Index j = 0; j < xi.size(); ++j) top = std::max(top, xi[j]);
    std::vector<double> l(n);
    for (std::size_t j = 0; j + 1 < n; ++j) l[j] = std::exp(xi[static_cast<Eigen::Index>(j)] - top);
    l[n - 1] = std::exp(-top);
    const double total = std::accumulate(l.begin(), l.end(), 0.0);
    for (double& v : l) v /= total;
    return l;
  }

  double value(const Eigen::VectorXd& xi, Eigen::VectorXd& grad) const {
    const auto l = lengths(xi);
    const auto g = p_gradient(lambdas, p, std::span<const double>(l));
    double mean = 0.0;
    for (std::size_t j = 0; j < n; ++j) mean += l[j] * g[j];
    grad.resize(static_cast<Eigen::Index>(n - 1));
    for (std::size_t j = 0; j + 1 < n; ++j) grad[static_cast<Eigen::Index>(j)] = l[j] * (g[j] - mean);
    return p_value(lambdas, p, std::span<const double>(l));
  }
};

struct RunResult {
  std::vector<double> lengths;
  double value = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

double residual_of(const Eigen::VectorXd& grad, double value) {
  return (grad.size() == 0 ? 0.0 : grad.cwiseAbs().maxCoeff()) / std::max(1.0, std::abs(value));
}

RunResult run_lbfgs(const Objective& objective, Eigen::VectorXd x, double tolerance, int max_iterations) {
  constexpr int kHistory = 10;
  constexpr double kArmijo = 1e-4;
  Eigen::VectorXd grad;
  double f = objective.value(x, grad);
  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  RunResult result;
  int iteration = 0;
  for (; iteration < max_iterations; ++iteration) {
    if (residual_of(grad, f) <= tolerance) break;
    // Two-loop recursion.
    Eigen::VectorXd q = grad;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t h = s_hist.size(); h-- > 0;) {
      alpha[h] = rho_hist[h] * s_hist[h].dot(q);
      q -= alpha[h] * y_hist[h];
    }
    if (!s_hist.empty()) q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t h = 0; h < s_hist.size(); ++h) {
      const double beta = rho_hist[h] * y_hist[h].dot(q);
      q += (alpha[h] - beta) * s_hist[h];
    }
    Eigen::VectorXd direction = -q;
    double slope = grad.dot(direction);
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      direction = -grad;
      slope = -grad.squaredNorm();
    }
    double step = s_hist.empty() ? std::min(1.0, 1.0 / grad.cwiseAbs().maxCoeff()) : 1.0;
    Eigen::VectorXd next_grad;
    double next_f = f;
    bool accepted = false;
    // Near the minimum f differences drown in rounding; there the
    // approximate-Wolfe test of Hager and Zhang decides from the gradient.
    const double noise = 16.0 * std::numeric_limits<double>::epsilon() * std::abs(f);
    for (int trial = 0; trial < 60; ++trial) {
      const Eigen::VectorXd candidate = x + step * direction;
      next_f = objective.value(candidate, next_grad);
      if (step * direction.cwiseAbs().maxCoeff() < 1e-14 * (1.0 + x.cwiseAbs().maxCoeff())) break;
      if (std::isfinite(next_f)) {
        if (-step * slope > noise) {
          if (next_f <= f + kArmijo * step * slope) {
            accepted = true;
            break;
          }
        } else {
          const double next_slope = next_grad.dot(direction);
          if (next_f <= f + noise && next_slope <= -0.8 * slope && next_slope >= 0.9 * slope) {
            accepted = true;
            break;
          }
        }
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (s_hist.empty()) break;  // stalled even along steepest descent
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      continue;
    }
    const Eigen::VectorXd s = step * direction;
    const Eigen::VectorXd y = next_grad - grad;
    x += s;
    f = next_f;
    grad = next_grad;
    const double sy = s.dot(y);
    if (sy > 1e-14 * s.norm() * y.norm() && sy > 0.0) {
      if (s_hist.size() == kHistory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
    }
  }
  result.lengths = objective.lengths(x);
  result.value = f;
  result.residual = residual_of(grad, f);
  result.iterations = iteration;
  result.converged = result.residual <= tolerance;
  return result;
}

double length_variance(const std::vector<double>& l) {
  const double mean = 1.0 / static_cast<double>(l.size());
  double total = 0.0;
  for (double v : l) total += (v - mean) * (v - mean);
  return total / static_cast<double>(l.size());
}

}  // namespace

MinimizationReport minimize_I(std::size_t n, const std::vector<double>& lambdas, double p,
                              const MinimizeOptions& options) {
  validate_problem(n, lambdas, p);
  if (options.restarts < 0) throw std::invalid_argument("restart count must be >= 0");
  if (!(options.tolerance > 0.0)) throw std::invalid_argument("tolerance must be > 0");
  if (options.max_iterations < 1) throw std::invalid_argument("iteration budget must be >= 1");

  const Objective objective{lambdas, p, n};
  const auto dimension = static_cast<Eigen::Index>(n - 1);
  const std::size_t starts = static_cast<std::size_t>(options.restarts) + 1;
  std::vector<RunResult> runs(starts);
  parallel_for(starts, [&](std::size_t start) {
    Eigen::VectorXd xi = Eigen::VectorXd::Zero(dimension);
    if (start > 0) {
      std::mt19937_64 rng(split_seed(options.seed, start));
      std::uniform_real_distribution<double> uniform(-1.0, 1.0);
      for (Eigen::Index j = 0; j < dimension; ++j) xi[j] = uniform(rng);
    }
    runs[start] = run_lbfgs(objective, xi, options.tolerance, options.max_iterations);
  });

  // Prefer runs that met the residual tolerance; among those, values within
  // 1e-12 (relative) of the best tie and the most uniform lengths win.
  const bool any_converged = std::any_of(runs.begin(), runs.end(), [](const RunResult& r) { return r.converged; });
  auto eligible = [&](const RunResult& r) { return r.converged || !any_converged; };
  double best_value = std::numeric_limits<double>::infinity();
  for (const auto& run : runs)
    if (eligible(run)) best_value = std::min(best_value, run.value);
  std::size_t chosen = 0;
  double chosen_variance = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < starts; ++r) {
    if (!eligible(runs[r]) || runs[r].value > best_value + 1e-12 * std::abs(best_value)) continue;
    const double variance = length_variance(runs[r].lengths);
    if (variance < chosen_variance) {
      chosen = r;
      chosen_variance = variance;
    }
  }

  // The softmax lengths sum to 1 only up to rounding; renormalise exactly once.
  auto lengths = runs[chosen].lengths;
  const double total = std::accumulate(lengths.begin(), lengths.end(), 0.0);
  for (double& v : lengths) v /= total;
  MinimizationReport report;
  report.minimizer = SimplexLengths(std::move(lengths));
  report.value = p_value(lambdas, p, report.minimizer);
  report.iterations = runs[chosen].iterations;
  report.first_order_residual = runs[chosen].residual;
  report.restarts = options.restarts;
  report.converged = runs[chosen].converged;
  return report;
}

LimitEstimate extrapolate_limit(const std::vector<std::pair<double, double>>& values, double p) {
  validate_p(p);
  if (values.size() < 4) throw std::invalid_argument("extrapolation needs at least 4 points");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i].first > 0.0) || !std::isfinite(values[i].second))
      throw std::invalid_argument("extrapolation needs n > 0 and finite values");
    if (i > 0 && !(values[i].first > values[i - 1].first))
      throw std::invalid_argument("extrapolation needs strictly increasing n");
  }

  const auto rows = static_cast<Eigen::Index>(values.size());
  Eigen::VectorXd y(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& [n, value] = values[static_cast<std::size_t>(r)];
    y[r] = value / std::pow(n, p);
  }
  auto fit = [&](int columns, double& stderr_c) {
    Eigen::MatrixXd design(rows, columns);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double inv = 1.0 / values[static_cast<std::size_t>(r)].first;
      double power = 1.0;
      for (int c = 0; c < columns; ++c, power *= inv) design(r, c) = power;
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (!(sv[sv.size() - 1] > 1e-12 * sv[0]))
      throw std::domain_error("extrapolation fit is ill-conditioned (n values too close together)");
    const Eigen::VectorXd coefficients = svd.solve(y);
    const Eigen::VectorXd residual = design * coefficients - y;
    const double dof = static_cast<double>(rows - columns);
    const double variance = residual.squaredNorm() / dof;
    const Eigen::MatrixXd normal_inverse = (design.transpose() * design).inverse();
    stderr_c = std::sqrt(std::max(0.0, variance * normal_inverse(0, 0)));
    return coefficients;
  };

  LimitEstimate estimate;
  double stderr_linear = 0.0;
  const Eigen::VectorXd linear = fit(2, stderr_linear);
  estimate.constant = linear[0];
  estimate.slope = linear[1];
  estimate.uncertainty = stderr_linear;
  estimate.model_used = "c + a/n";
  if (values.size() >= 6) {
    double stderr_quadratic = 0.0;
    const Eigen::VectorXd quadratic = fit(3, stderr_quadratic);
    estimate.alternative_constant = quadratic[0];
    estimate.uncertainty = std::max(estimate.uncertainty, std::abs(quadratic[0] - linear[0]));
  }
  return estimate;
}

double pca2_telescopic_prediction(const std::vector<double>& lambdas) {
  validate_lambdas(lambdas);
  if (!laws::is_pca2(laws::PiecewiseConstantLaw{lambdas}))
    throw std::invalid_argument("coefficients are not constant on dyadic packages");
  double packages = 0.0;
  for (std::size_t k = 1; k <= lambdas.size(); k *= 2) packages += lambdas[k - 1];
  return 2.0 * std::log(2.0) * packages;
}

}  // namespace nlshape::shape
