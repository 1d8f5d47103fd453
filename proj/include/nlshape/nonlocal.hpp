#pragma once

// The non-local functional Lambda_{delta,p}(phi, u, Omega) in dimension one:
// exact evaluation for step functions under piecewise-constant laws,
// iterated quadrature for continuous profiles, and the limit experiments.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "nlshape/funcs1d.hpp"
#include "nlshape/laws.hpp"
#include "nlshape/parallel.hpp"

namespace nlshape::nonlocal {

struct EvaluationOptions {
  double quadrature_tolerance = 1e-8;  // relative
  /// For laws positive near 0, t in [0, band_width_factor * delta / Lip]
  /// is integrated linearly in t instead of in log t.
  double band_width_factor = 1.0;
  int max_subdivisions = 20000;
};

enum class Method { exact, quadrature, montecarlo };

std::string to_string(Method method);

struct FunctionalValue {
  double value = 0.0;  // may be +inf
  Method method = Method::exact;
  double error_estimate = 0.0;  // 0 for exact values
  bool converged = true;
  std::string diagnostic;  // names the adjacent active pair when value is +inf
};

/// Lambda over the domain of u (x and y both in (a,b)).
/// Throws std::invalid_argument for laws that are not piecewise constant.
FunctionalValue lambda_exact(const laws::InteractionLaw& law, const funcs1d::StepFunction1D& u, double delta,
                             double p);

/// Lambda over the whole line, with u extended by its boundary piece values.
FunctionalValue lambda_exact_on_line(const laws::InteractionLaw& law, const funcs1d::StepFunction1D& u,
                                     double delta, double p);

/// x over (a,b), y over the line. Outside (a,b) the staircase is continued
/// by one level: v_1 - delta*s on the left and v_n + delta*s' on the right,
/// where s, s' are the signs of the first and last jumps (0 for constant u).
FunctionalValue lambda_hat_exact(const laws::InteractionLaw& law, const funcs1d::StepFunction1D& u, double delta,
                                 double p);

/// Ratio Lambda_hat * (b-a)^{p-1} / (delta^p P(l)) over `trials` random
/// lengths, deltas and intervals for the unit staircase. Returns the ratio;
/// throws std::runtime_error if it varies by more than 1e-8 (relative).
double verify_p_identity(std::size_t n, const std::vector<double>& lambdas, double p, int trials,
                         std::uint64_t seed = kDefaultSeed);

using Profile = std::variant<funcs1d::PiecewiseAffine1D, funcs1d::SmoothFunction1D>;

/// Lambda over the line by iterated adaptive quadrature in (t, x).
/// Requires p < 2 for laws that are positive near 0, and equal end values.
FunctionalValue lambda_quadrature(const laws::InteractionLaw& law, const Profile& u, double delta, double p,
                                  const EvaluationOptions& options = {});

struct StudyRow {
  double delta = 0.0;
  FunctionalValue value;
  double target = 0.0;
  double ratio = 0.0;  // NaN when degenerate
  bool degenerate = false;
};

/// Lambda_delta / (G_{1,p} N(phi) Lambda_{0,p}(u)) along the schedule.
std::vector<StudyRow> pointwise_limit_study(const laws::InteractionLaw& law, const Profile& u, double p,
                                            const std::vector<double>& deltas,
                                            const EvaluationOptions& options = {});

/// Same ratio for the segmented family S_delta u, evaluated exactly on the line.
std::vector<StudyRow> recovery_study(const laws::InteractionLaw& law, const funcs1d::PiecewiseAffine1D& u, double p,
                                     const std::vector<double>& deltas);

/// "delta,value,error,target,ratio" plus one line per row.
std::string study_csv(const std::vector<StudyRow>& rows);

}  // namespace nlshape::nonlocal
