#pragma once

// Shape-factor estimates: minimum values I_{n,p} along an n-schedule,
// extrapolated and normalised by the pointwise-limit constants.

#include <cstddef>
#include <string>
#include <vector>

#include "nlshape/shape.hpp"

namespace nlshape::shape {

struct ShapeFactorOptions {
  MinimizeOptions minimize;
  int identity_trials = 20;  // random simplex points used to measure kappa_p
};

struct ScheduleRow {
  std::size_t n = 0;
  double value = 0.0;   // I_n
  double scaled = 0.0;  // I_n / n^p
  double residual = 0.0;
  bool converged = false;
};

struct ShapeFactorResult {
  std::vector<ScheduleRow> rows;
  LimitEstimate limit;    // of I_n / n^p
  double kappa = 0.0;     // Lambda_hat / P bookkeeping constant
  double geometric = 0.0; // G_{1,p}
  double scale = 0.0;     // N(phi)
  double estimate = 0.0;  // kappa * c / (G N)
  double uncertainty = 0.0;
  /// "shape factor" for phi_1; otherwise "lower-bound constant (conjecturally sharp)".
  std::string label;
  bool all_converged = false;
};

/// Needs a strictly increasing schedule of at least four n, each above the
/// order of the law.
ShapeFactorResult shape_factor_estimate(const std::vector<double>& lambdas, double p,
                                        const std::vector<std::size_t>& n_schedule,
                                        const ShapeFactorOptions& options = {});

struct SupDemoRow {
  int m = 0;
  double estimate = 0.0;
  double uncertainty = 0.0;
  double prediction = 0.0;  // m log 2 / H_{2^m - 1}
  bool converged = false;
};

struct SupDemoResult {
  std::vector<SupDemoRow> rows;
  bool strictly_increasing = false;
};

/// p = 1 estimates for the laws with 2^m - 1 unit coefficients.
SupDemoResult sup_demo(const std::vector<int>& m_schedule, const std::vector<std::size_t>& n_schedule,
                       const ShapeFactorOptions& options = {});

}  // namespace nlshape::shape
