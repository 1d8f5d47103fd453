#pragma once

// Interaction laws: non-negative, non-decreasing, lower semicontinuous
// weights phi on normalised difference quotients, together with the two
// constants the pointwise limit is built from (the scale factor N(phi) and
// the geometric constant G_{d,p}).

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace nlshape::laws {

class InteractionLaw;

/// phi_k: 0 on [0,k], 1 on (k, inf).
struct StepLaw {
  double k;
};

/// sum_k lambda_k phi_k with jumps at the integers 1..m.
struct PiecewiseConstantLaw {
  std::vector<double> lambdas;
};

/// theta(t) = min{1, max{t - 1, 0}}.
struct RampLaw {};

/// t -> alpha * base(beta * t).
struct RescaledLaw {
  double alpha;
  double beta;
  std::shared_ptr<const InteractionLaw> base;
};

/// Arbitrary law given by an evaluator. Admissibility can only be checked
/// on a sampling grid.
struct GenericLaw {
  std::function<double(double)> evaluator;
  std::string continuity_note;
};

class InteractionLaw {
 public:
  using Variant = std::variant<StepLaw, PiecewiseConstantLaw, RampLaw, RescaledLaw, GenericLaw>;

  // Each constructor validates its alternative and throws
  // std::invalid_argument on a malformed law.
  InteractionLaw(StepLaw law);
  InteractionLaw(PiecewiseConstantLaw law);
  InteractionLaw(RampLaw law);
  InteractionLaw(RescaledLaw law);
  InteractionLaw(GenericLaw law);

  const Variant& variant() const { return law_; }

  template <class T>
  const T* get_if() const {
    return std::get_if<T>(&law_);
  }

 private:
  Variant law_;
};

InteractionLaw step_law(double k);
InteractionLaw pca_law(std::vector<double> lambdas);
InteractionLaw ramp_law();

struct AdmissibilityCertificate {
  double quadratic_bound = 0.0;  // a with phi(t) <= a t^2 on [0,1]
  double uniform_bound = 0.0;    // b with phi(t) <= b
  bool vanishes_on_unit_interval = false;
  bool heuristic = false;  // true when derived from sampling (GenericLaw)
  std::string note;
};

/// phi(t) under the lower-semicontinuous convention. Throws on t < 0.
double evaluate(const InteractionLaw& law, double t);

/// lim_{s -> t+} phi(s); equals evaluate() wherever the law is continuous.
/// GenericLaw falls back to evaluate().
double right_limit(const InteractionLaw& law, double t);

/// Largest t0 with phi = 0 on [0, t0]. Exact for structured laws; for a
/// GenericLaw the largest sampled zero, which is a valid lower bound.
double zero_threshold(const InteractionLaw& law);

/// True when the law is piecewise constant with finitely many jumps
/// (StepLaw, PiecewiseConstantLaw, and rescalings of those).
bool is_piecewise_constant(const InteractionLaw& law);

/// Coefficients lambda of a PiecewiseConstantLaw that equals the law up to a
/// horizontal rescaling (phi_k is phi_1 stretched by k). Empty for ramp and
/// generic laws.
std::optional<std::vector<double>> pca_coefficients(const InteractionLaw& law);

/// Throws std::domain_error when the law fails the class-A checks
/// (negative or decreasing values, unbounded, not O(t^2) at 0, identically 0).
AdmissibilityCertificate certify(const InteractionLaw& law);

struct ScaleFactor {
  double value = 0.0;
  double error_estimate = 0.0;
  bool exact = false;
  std::string diagnostic;  // non-empty when value is not finite
};

/// N(phi) = int_0^inf phi(t)/t^2 dt, with a diagnostic when divergent.
ScaleFactor scale_factor_report(const InteractionLaw& law, double quadrature_tolerance = 1e-10);

/// Convenience wrapper returning only the value (+inf when divergent).
double scale_factor(const InteractionLaw& law, double quadrature_tolerance = 1e-10);

/// G_{d,p} = (1/p) * int_{S^{d-1}} |<v, sigma>|^p d sigma.
/// d = 1 uses counting measure on {-1, +1}.
double geometric_constant(int d, double p, double tolerance = 1e-12);

/// t -> alpha * law(beta * t).
InteractionLaw rescale(const InteractionLaw& law, double alpha, double beta);

/// lambda_2 = lambda_3, lambda_4 = ... = lambda_7, and so on.
bool is_pca2(const PiecewiseConstantLaw& law);

/// Largest law psi <= phi that is constant on each (j w, (j+1) w],
/// j = 0..steps-1, and constant beyond steps*w; returned as a rescaled
/// piecewise-constant law. Throws std::domain_error if psi is identically 0.
InteractionLaw lower_pca_approximation(const InteractionLaw& law, int steps, double step_width);

/// Human-readable one-line description, e.g. "pca:[1,1,1]".
std::string describe(const InteractionLaw& law);

}  // namespace nlshape::laws
