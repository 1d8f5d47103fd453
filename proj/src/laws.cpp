#include "nlshape/laws.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "nlshape/quadrature.hpp"

namespace nlshape::laws {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw std::invalid_argument(std::string(what) + " must be a positive finite real");
}

// Geometric grid of `count` points spanning [lower, upper].
std::vector<double> geometric_grid(double lower, double upper, int count) {
  std::vector<double> grid(count);
  const double ratio = std::log(upper / lower) / (count - 1);
  for (int i = 0; i < count; ++i) grid[i] = lower * std::exp(ratio * i);
  grid.back() = upper;
  return grid;
}

constexpr int kCertificateGridPoints = 10000;

// Scan used to locate where a generic law stops growing.
double last_growth_point(const GenericLaw& law) {
  const auto grid = geometric_grid(1e-6, 1e6, 2001);
  double last = 0.0;
  double previous = law.evaluator(grid.front());
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double value = law.evaluator(grid[i]);
    if (value > previous) last = grid[i];
    previous = value;
  }
  return last;
}

AdmissibilityCertificate certify_generic(const GenericLaw& law) {
  AdmissibilityCertificate cert;
  cert.heuristic = true;
  const double growth = last_growth_point(law);
  if (growth == 0.0) {
    if (law.evaluator(1.0) == 0.0) throw std::domain_error("law is identically zero on the scan grid");
    throw std::domain_error("law is a positive constant: not O(t^2) at 0+");
  }
  const double upper = 10.0 * growth;
  const double lower = std::min(1e-6, upper * 1e-8);
  const auto grid = geometric_grid(lower, upper, kCertificateGridPoints);
  double previous = 0.0;
  bool vanishes = true;
  double ratio_first = 0.0, ratio_second = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    const double value = law.evaluator(t);
    if (!std::isfinite(value) || value < 0.0)
      throw std::domain_error("law takes a negative or non-finite value at t = " + std::to_string(t));
    if (value < previous)
      throw std::domain_error("law decreases near t = " + std::to_string(t));
    previous = value;
    cert.uniform_bound = std::max(cert.uniform_bound, value);
    if (t <= 1.0) {
      cert.quadratic_bound = std::max(cert.quadratic_bound, value / (t * t));
      if (value != 0.0) vanishes = false;
    }
    if (i == 0) ratio_first = value / (t * t);
    if (i == 1) ratio_second = value / (t * t);
  }
  if (ratio_first > 0.0 && ratio_first > ratio_second * (1.0 + 1e-9))
    throw std::domain_error("phi(t)/t^2 still grows as t -> 0+: law is not O(t^2) at the origin");
  cert.vanishes_on_unit_interval = vanishes;
  std::ostringstream note;
  note << "heuristic certificate from " << kCertificateGridPoints << " geometric samples in (0, "
       << upper << "]; finitely many discontinuities not verifiable";
  if (!law.continuity_note.empty()) note << "; " << law.continuity_note;
  cert.note = note.str();
  return cert;
}

double pca_value(const std::vector<double>& lambdas, double t, bool right) {
  // Sum of lambda_k over k < t (left convention) or k <= t (right limit).
  double sum = 0.0;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const double k = static_cast<double>(i + 1);
    if (right ? k <= t : k < t) sum += lambdas[i];
    else break;
  }
  return sum;
}

}  // namespace

InteractionLaw::InteractionLaw(StepLaw law) : law_(law) { require_positive(law.k, "step threshold k"); }

InteractionLaw::InteractionLaw(PiecewiseConstantLaw law) : law_(std::move(law)) {
  const auto& lambdas = std::get<PiecewiseConstantLaw>(law_).lambdas;
  if (lambdas.empty()) throw std::invalid_argument("piecewise-constant law needs at least one coefficient");
  bool any_positive = false;
  for (double lambda : lambdas) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
      throw std::invalid_argument("piecewise-constant coefficients must be non-negative and finite");
    any_positive = any_positive || lambda > 0.0;
  }
  if (!any_positive) throw std::invalid_argument("piecewise-constant coefficients are all zero");
}

InteractionLaw::InteractionLaw(RampLaw law) : law_(law) {}

InteractionLaw::InteractionLaw(RescaledLaw law) : law_(std::move(law)) {
  const auto& rescaled = std::get<RescaledLaw>(law_);
  require_positive(rescaled.alpha, "alpha");
  require_positive(rescaled.beta, "beta");
  if (!rescaled.base) throw std::invalid_argument("rescaled law needs a base law");
}

InteractionLaw::InteractionLaw(GenericLaw law) : law_(std::move(law)) {
  if (!std::get<GenericLaw>(law_).evaluator) throw std::invalid_argument("generic law needs an evaluator");
}

InteractionLaw step_law(double k) { return InteractionLaw(StepLaw{k}); }
InteractionLaw pca_law(std::vector<double> lambdas) {
  return InteractionLaw(PiecewiseConstantLaw{std::move(lambdas)});
}
InteractionLaw ramp_law() { return InteractionLaw(RampLaw{}); }

double evaluate(const InteractionLaw& law, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("interaction laws are defined for t >= 0");
  return std::visit(overloaded{
                        [&](const StepLaw& step) { return t > step.k ? 1.0 : 0.0; },
                        [&](const PiecewiseConstantLaw& pca) { return pca_value(pca.lambdas, t, false); },
                        [&](const RampLaw&) { return std::min(1.0, std::max(t - 1.0, 0.0)); },
                        [&](const RescaledLaw& r) { return r.alpha * evaluate(*r.base, r.beta * t); },
                        [&](const GenericLaw& g) { return g.evaluator(t); },
                    },
                    law.variant());
}

double right_limit(const InteractionLaw& law, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("interaction laws are defined for t >= 0");
  return std::visit(overloaded{
                        [&](const StepLaw& step) { return t >= step.k ? 1.0 : 0.0; },
                        [&](const PiecewiseConstantLaw& pca) { return pca_value(pca.lambdas, t, true); },
                        [&](const RampLaw&) { return std::min(1.0, std::max(t - 1.0, 0.0)); },
                        [&](const RescaledLaw& r) { return r.alpha * right_limit(*r.base, r.beta * t); },
                        [&](const GenericLaw& g) { return g.evaluator(t); },
                    },
                    law.variant());
}

double zero_threshold(const InteractionLaw& law) {
  return std::visit(overloaded{
                        [](const StepLaw& step) { return step.k; },
                        [](const PiecewiseConstantLaw& pca) {
                          const auto first = std::find_if(pca.lambdas.begin(), pca.lambdas.end(),
                                                          [](double l) { return l > 0.0; });
                          return static_cast<double>(first - pca.lambdas.begin() + 1);
                        },
                        [](const RampLaw&) { return 1.0; },
                        [](const RescaledLaw& r) { return zero_threshold(*r.base) / r.beta; },
                        [](const GenericLaw& g) {
                          double threshold = 0.0;
                          for (double t : geometric_grid(1e-8, 1e8, kCertificateGridPoints)) {
                            if (g.evaluator(t) != 0.0) break;
                            threshold = t;
                          }
                          return threshold;
                        },
                    },
                    law.variant());
}

bool is_piecewise_constant(const InteractionLaw& law) {
  return std::visit(overloaded{
                        [](const StepLaw&) { return true; },
                        [](const PiecewiseConstantLaw&) { return true; },
                        [](const RampLaw&) { return false; },
                        [](const RescaledLaw& r) { return is_piecewise_constant(*r.base); },
                        [](const GenericLaw&) { return false; },
                    },
                    law.variant());
}

std::optional<std::vector<double>> pca_coefficients(const InteractionLaw& law) {
  using Result = std::optional<std::vector<double>>;
  return std::visit(overloaded{
                        [](const StepLaw&) -> Result { return std::vector<double>{1.0}; },
                        [](const PiecewiseConstantLaw& pca) -> Result { return pca.lambdas; },
                        [](const RampLaw&) -> Result { return std::nullopt; },
                        [](const RescaledLaw& r) -> Result {
                          auto base = pca_coefficients(*r.base);
                          if (base)
                            for (double& lambda : *base) lambda *= r.alpha;
                          return base;
                        },
                        [](const GenericLaw&) -> Result { return std::nullopt; },
                    },
                    law.variant());
}

AdmissibilityCertificate certify(const InteractionLaw& law) {
  return std::visit(
      overloaded{
          [](const StepLaw& step) {
            AdmissibilityCertificate cert;
            cert.uniform_bound = 1.0;
            cert.vanishes_on_unit_interval = step.k >= 1.0;
            cert.quadratic_bound = step.k >= 1.0 ? 0.0 : 1.0 / (step.k * step.k);
            cert.note = "exact";
            return cert;
          },
          [](const PiecewiseConstantLaw& pca) {
            AdmissibilityCertificate cert;
            cert.uniform_bound = std::accumulate(pca.lambdas.begin(), pca.lambdas.end(), 0.0);
            cert.vanishes_on_unit_interval = true;
            cert.note = "exact";
            return cert;
          },
          [](const RampLaw&) {
            AdmissibilityCertificate cert;
            cert.uniform_bound = 1.0;
            cert.vanishes_on_unit_interval = true;
            cert.note = "exact";
            return cert;
          },
          [](const RescaledLaw& r) {
            auto base = certify(*r.base);
            AdmissibilityCertificate cert;
            cert.heuristic = base.heuristic;
            cert.note = base.note;
            cert.uniform_bound = r.alpha * base.uniform_bound;
            cert.vanishes_on_unit_interval = zero_threshold(*r.base) >= r.beta;
            if (!cert.vanishes_on_unit_interval) {
              // sup_{t<=1} alpha base(beta t)/t^2 = alpha beta^2 sup_{s<=beta} base(s)/s^2
              const double inner = r.beta <= 1.0 ? base.quadratic_bound
                                                 : std::max(base.quadratic_bound, base.uniform_bound);
              cert.quadratic_bound = r.alpha * r.beta * r.beta * inner;
            }
            return cert;
          },
          [](const GenericLaw& g) { return certify_generic(g); },
      },
      law.variant());
}

ScaleFactor scale_factor_report(const InteractionLaw& law, double quadrature_tolerance) {
  require_positive(quadrature_tolerance, "quadrature tolerance");
  ScaleFactor result;
  AdmissibilityCertificate cert;
  try {
    cert = certify(law);
  } catch (const std::domain_error& e) {
    const std::string what = e.what();
    if (what.find("identically zero") != std::string::npos)
      throw std::invalid_argument("scale factor of the zero law is undefined");
    result.value = std::numeric_limits<double>::infinity();
    result.diagnostic = std::string("divergent: ") + what;
    return result;
  }
  if (cert.uniform_bound == 0.0) throw std::invalid_argument("scale factor of the zero law is undefined");

  if (const auto* step = law.get_if<StepLaw>()) {
    result.value = 1.0 / step->k;
    result.exact = true;
  } else if (const auto* pca = law.get_if<PiecewiseConstantLaw>()) {
    for (std::size_t i = 0; i < pca->lambdas.size(); ++i)
      result.value += pca->lambdas[i] / static_cast<double>(i + 1);
    result.exact = true;
  } else if (law.get_if<RampLaw>()) {
    // int_1^2 (t-1)/t^2 dt + int_2^inf t^-2 dt = (log 2 - 1/2) + 1/2
    result.value = std::numbers::ln2;
    result.exact = true;
  } else if (const auto* r = law.get_if<RescaledLaw>()) {
    auto base = scale_factor_report(*r->base, quadrature_tolerance);
    result = base;
    result.value *= r->alpha * r->beta;
    result.error_estimate *= r->alpha * r->beta;
  } else {
    const auto& g = std::get<GenericLaw>(law.variant());
    // Split at t = 1 and substitute s = 1/t on the tail.
    auto head = quadrature::integrate(
        [&](double t) { return t == 0.0 ? 0.0 : g.evaluator(t) / (t * t); }, 0.0, 1.0,
        0.5 * quadrature_tolerance, 0.0, 4000);
    auto tail = quadrature::integrate([&](double s) { return s == 0.0 ? cert.uniform_bound : g.evaluator(1.0 / s); },
                                      0.0, 1.0, 0.5 * quadrature_tolerance, 0.0, 4000);
    result.value = head.value + tail.value;
    result.error_estimate = head.error + tail.error;
    if (!head.converged || !tail.converged || !std::isfinite(result.value)) {
      std::ostringstream msg;
      msg << "divergent or unresolved: quadrature estimate " << result.value << " with error "
          << result.error_estimate << " exceeds tolerance " << quadrature_tolerance;
      result.diagnostic = msg.str();
      result.value = std::numeric_limits<double>::infinity();
    }
  }
  return result;
}

double scale_factor(const InteractionLaw& law, double quadrature_tolerance) {
  return scale_factor_report(law, quadrature_tolerance).value;
}

double geometric_constant(int d, double p, double tolerance) {
  if (d < 1) throw std::invalid_argument("dimension must be a positive integer");
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("exponent p must satisfy p >= 1");
  require_positive(tolerance, "tolerance");
  if (d == 1) return 2.0 / p;
  // In polar angle from v: d sigma = |S^{d-2}| sin^{d-2}(theta) d theta,
  // and the integrand is symmetric about theta = pi/2.
  const double sphere_below =
      2.0 * std::pow(std::numbers::pi, 0.5 * (d - 1)) / std::tgamma(0.5 * (d - 1));
  auto integrand = [&](double theta) {
    return std::pow(std::cos(theta), p) * std::pow(std::sin(theta), d - 2);
  };
  auto half = quadrature::integrate(integrand, 0.0, 0.5 * std::numbers::pi, 0.0, tolerance, 4000);
  return 2.0 * sphere_below * half.value / p;
}

InteractionLaw rescale(const InteractionLaw& law, double alpha, double beta) {
  return InteractionLaw(RescaledLaw{alpha, beta, std::make_shared<const InteractionLaw>(law)});
}

bool is_pca2(const PiecewiseConstantLaw& law) {
  const auto& lambdas = law.lambdas;
  // Package j covers indices 2^j .. 2^{j+1}-1 (1-based).
  for (std::size_t start = 2; start <= lambdas.size(); start *= 2) {
    const std::size_t end = std::min(2 * start - 1, lambdas.size());
    for (std::size_t k = start + 1; k <= end; ++k)
      if (lambdas[k - 1] != lambdas[start - 1]) return false;
  }
  return true;
}

InteractionLaw lower_pca_approximation(const InteractionLaw& law, int steps, double step_width) {
  if (steps < 1) throw std::invalid_argument("steps must be a positive integer");
  require_positive(step_width, "step width");
  const bool generic = law.get_if<GenericLaw>() != nullptr;
  // psi on (j w, (j+1) w] is the infimum of phi there: the right limit at
  // j w. Generic laws use the left-endpoint value (continuity not assumed).
  auto floor_value = [&](int j) {
    if (j == 0) return 0.0;
    const double t = j * step_width;
    return generic ? evaluate(law, t) : right_limit(law, t);
  };
  std::vector<double> lambdas(steps);
  double previous = 0.0;
  for (int j = 1; j <= steps; ++j) {
    const double value = floor_value(j);
    lambdas[j - 1] = std::max(0.0, value - previous);
    previous = std::max(previous, value);
  }
  while (!lambdas.empty() && lambdas.back() == 0.0) lambdas.pop_back();
  if (lambdas.empty())
    throw std::domain_error("lower approximation is identically zero: the law vanishes on [0, " +
                            std::to_string(steps * step_width) + "]");
  auto base = pca_law(std::move(lambdas));
  if (step_width == 1.0) return base;
  return rescale(base, 1.0, 1.0 / step_width);
}

std::string describe(const InteractionLaw& law) {
  return std::visit(overloaded{
                        [](const StepLaw& step) {
                          std::ostringstream out;
                          out << "step:" << step.k;
                          return out.str();
                        },
                        [](const PiecewiseConstantLaw& pca) {
                          std::ostringstream out;
                          out << "pca:[";
                          for (std::size_t i = 0; i < pca.lambdas.size(); ++i)
                            out << (i ? "," : "") << pca.lambdas[i];
                          out << "]";
                          return out.str();
                        },
                        [](const RampLaw&) { return std::string("ramp"); },
                        [](const RescaledLaw& r) {
                          std::ostringstream out;
                          out << "rescaled(" << r.alpha << "," << r.beta << "," << describe(*r.base) << ")";
                          return out.str();
                        },
                        [](const GenericLaw&) { return std::string("generic"); },
                    },
                    law.variant());
}

}  // namespace nlshape::laws
