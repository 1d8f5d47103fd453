#pragma once

// One-dimensional function calculus: step, piecewise-affine and smooth
// functions, vertical delta-segmentation, monotone rearrangement,
// oscillation, the limit energy and mollification.

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace nlshape::funcs1d {

class Interval {
 public:
  /// Throws std::invalid_argument unless lower < upper (both finite).
  Interval(double lower, double upper);

  double lower() const { return lower_; }
  double upper() const { return upper_; }
  double length() const { return upper_ - lower_; }
  bool contains(const Interval& other) const { return lower_ <= other.lower_ && other.upper_ <= upper_; }

  friend bool operator==(const Interval&, const Interval&) = default;

 private:
  double lower_;
  double upper_;
};

/// Finite-image step function on an interval, kept in canonical form:
/// zero-length pieces dropped and adjacent equal values merged.
class StepFunction1D {
 public:
  StepFunction1D(Interval domain, std::vector<double> breakpoints, std::vector<double> values);

  /// Builds a step function from piece lengths (all positive) starting at
  /// `lower`. Breakpoints are cumulative sums.
  static StepFunction1D from_lengths(double lower, const std::vector<double>& lengths,
                                     const std::vector<double>& values);

  const Interval& domain() const { return domain_; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t piece_count() const { return values_.size(); }
  double piece_lower(std::size_t i) const { return i == 0 ? domain_.lower() : breakpoints_[i - 1]; }
  double piece_upper(std::size_t i) const {
    return i + 1 == values_.size() ? domain_.upper() : breakpoints_[i];
  }
  double piece_length(std::size_t i) const { return piece_upper(i) - piece_lower(i); }

  /// Value at x; at a breakpoint the right piece wins. Throws outside the domain.
  double operator()(double x) const;

  friend bool operator==(const StepFunction1D&, const StepFunction1D&) = default;

 private:
  Interval domain_;
  std::vector<double> breakpoints_;
  std::vector<double> values_;
};

class PiecewiseAffine1D {
 public:
  /// With compact_support the end values must be 0 and the function is 0
  /// outside the nodes; otherwise it is constant beyond each end node.
  PiecewiseAffine1D(std::vector<double> nodes, std::vector<double> node_values, bool compact_support);

  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& node_values() const { return values_; }
  bool compact_support() const { return compact_support_; }
  Interval span() const { return Interval(nodes_.front(), nodes_.back()); }

  double operator()(double x) const;
  double max_slope() const;

 private:
  std::vector<double> nodes_;
  std::vector<double> values_;
  bool compact_support_;
};

/// C^1 function given by value and derivative evaluators. Outside `support`
/// the function is constant, equal to its value at the nearest endpoint.
struct SmoothFunction1D {
  std::function<double(double)> evaluator;
  std::function<double(double)> derivative;
  Interval support;

  double operator()(double x) const { return evaluator(x); }
};

/// (1 - x^2)^2 on [-1, 1], zero elsewhere.
SmoothFunction1D bump_function();

/// max(0, 1 - |x|): piecewise affine with total variation 2.
PiecewiseAffine1D tent_function();

/// S_delta u = delta * floor(u / delta). Step inputs keep their domain;
/// affine inputs use the node span, smooth inputs their support.
StepFunction1D segment_vertical(const StepFunction1D& u, double delta);
StepFunction1D segment_vertical(const PiecewiseAffine1D& u, double delta);
/// Level crossings are located on a grid of `samples` cells refined by
/// bisection; assumes finitely many monotonicity intervals.
StepFunction1D segment_vertical(const SmoothFunction1D& u, double delta, int samples = 4096);

/// Nondecreasing step function with the same level-set measures.
StepFunction1D monotone_rearrangement(const StepFunction1D& u);

/// Essential sup minus essential inf over `window` (which must lie in the domain).
double essential_oscillation(const StepFunction1D& u, const Interval& window);
double essential_oscillation(const PiecewiseAffine1D& u, const Interval& window);

/// Lambda_{0,p}: total variation for p = 1, int |u'|^p for p > 1
/// (+infinity for non-constant step functions when p > 1).
double limit_energy(const StepFunction1D& u, double p);
double limit_energy(const PiecewiseAffine1D& u, double p);
double limit_energy(const SmoothFunction1D& u, double p, double tolerance = 1e-12);

/// Standard bump kernel exp(-1/(1-s^2)) on (-1,1), normalised to unit mass.
double bump_kernel(double s);
/// Cumulative mass of the normalised bump kernel on (-1, s].
double bump_kernel_cdf(double s);

/// Convolution of u (extended constantly outside its domain) with the bump
/// kernel of radius epsilon. Requires epsilon < half the shortest piece.
SmoothFunction1D mollify(const StepFunction1D& u, double epsilon);

/// Text record: "step <lower> <upper>\nbreakpoints ...\nvalues ...\n".
/// Numbers use shortest round-trip formatting, so parsing is bit-exact.
std::string to_record(const StepFunction1D& u);
StepFunction1D parse_record(std::string_view text);

}  // namespace nlshape::funcs1d
