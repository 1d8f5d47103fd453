#include "nlshape/shape_factor.hpp"

#include <cmath>
#include <stdexcept>

#include "nlshape/laws.hpp"
#include "nlshape/nonlocal.hpp"
#include "nlshape/parallel.hpp"

namespace nlshape::shape {

ShapeFactorResult shape_factor_estimate(const std::vector<double>& lambdas, double p,
                                        const std::vector<std::size_t>& n_schedule,
                                        const ShapeFactorOptions& options) {
  if (n_schedule.size() < 4) throw std::invalid_argument("n schedule needs at least 4 entries");
  for (std::size_t i = 1; i < n_schedule.size(); ++i)
    if (n_schedule[i] <= n_schedule[i - 1]) throw std::invalid_argument("n schedule must be strictly increasing");
  const std::size_t m = effective_order(lambdas);
  if (m == 0) throw std::invalid_argument("coefficients are all zero");
  if (n_schedule.front() <= m) throw std::invalid_argument("every n in the schedule must exceed the law order m");

  ShapeFactorResult result;
  result.rows.resize(n_schedule.size());
  parallel_for(n_schedule.size(), [&](std::size_t i) {
    const std::size_t n = n_schedule[i];
    MinimizeOptions per_n = options.minimize;
    per_n.seed = split_seed(options.minimize.seed, n);
    const auto report = minimize_I(n, lambdas, p, per_n);
    auto& row = result.rows[i];
    row.n = n;
    row.value = report.value;
    row.scaled = report.value / std::pow(static_cast<double>(n), p);
    row.residual = report.first_order_residual;
    row.converged = report.converged;
  });

  std::vector<std::pair<double, double>> points;
  result.all_converged = true;
  for (const auto& row : result.rows) {
    points.emplace_back(static_cast<double>(row.n), row.value);
    result.all_converged = result.all_converged && row.converged;
  }
  result.limit = extrapolate_limit(points, p);
  result.kappa = nonlocal::verify_p_identity(std::max<std::size_t>(2, m + 2), lambdas, p, options.identity_trials,
                                             options.minimize.seed);
  result.geometric = laws::geometric_constant(1, p);
  result.scale = laws::scale_factor(laws::pca_law(lambdas));
  const double normaliser = result.kappa / (result.geometric * result.scale);
  result.estimate = normaliser * result.limit.constant;
  result.uncertainty = normaliser * result.limit.uncertainty;
  result.label = m == 1 ? "shape factor" : "lower-bound constant (conjecturally sharp)";
  return result;
}

SupDemoResult sup_demo(const std::vector<int>& m_schedule, const std::vector<std::size_t>& n_schedule,
                       const ShapeFactorOptions& options) {
  if (m_schedule.empty()) throw std::invalid_argument("m schedule is empty");
  SupDemoResult result;
  for (int m : m_schedule) {
    if (m < 1 || m > 20) throw std::invalid_argument("package count m must lie in 1..20");
    if (!result.rows.empty() && m <= result.rows.back().m) throw std::invalid_argument("m schedule must be strictly increasing");
    const std::size_t order = (std::size_t{1} << m) - 1;
    const std::vector<double> lambdas(order, 1.0);
    const auto estimate = shape_factor_estimate(lambdas, 1.0, n_schedule, options);
    double harmonic = 0.0;
    for (std::size_t k = 1; k <= order; ++k) harmonic += 1.0 / static_cast<double>(k);
    result.rows.push_back({m, estimate.estimate, estimate.uncertainty, m * std::log(2.0) / harmonic,
                           estimate.all_converged});
  }
  result.strictly_increasing = true;
  for (std::size_t i = 1; i < result.rows.size(); ++i)
    if (!(result.rows[i].estimate > result.rows[i - 1].estimate)) result.strictly_increasing = false;
  return result;
}

}  // namespace nlshape::shape
