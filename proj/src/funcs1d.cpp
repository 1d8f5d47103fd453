#include "nlshape/funcs1d.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "nlshape/quadrature.hpp"

namespace nlshape::funcs1d {

namespace {

void require_delta(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw std::invalid_argument("delta must be a positive finite real");
}

void require_exponent(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("exponent p must satisfy p >= 1");
}

// delta * floor(value / delta), corrected for rounding in the division so
// that lattice values are fixed points.
double segment_level(double value, double delta) {
  double q = std::floor(value / delta);
  if ((q + 1.0) * delta <= value) q += 1.0;
  if (q * delta > value) q -= 1.0;
  return q * delta;
}

// Bisection for the point in [lo, hi] where g changes sign (g(lo), g(hi)
// of opposite sign or zero).
template <class G>
double bisect(G&& g, double lo, double hi) {
  double glo = g(lo);
  for (int it = 0; it < 200 && hi - lo > 4e-16 * std::max(1.0, std::abs(lo) + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gmid = g(mid);
    if ((gmid <= 0.0) == (glo <= 0.0)) {
      lo = mid;
      glo = gmid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Sorted cut points -> step function by evaluating the floor at midpoints.
StepFunction1D step_from_cuts(std::vector<double> cuts, double delta, const std::function<double(double)>& u) {
  std::sort(cuts.begin(), cuts.end());
  const double lower = cuts.front();
  const double upper = cuts.back();
  const double merge_tol = 1e-13 * (upper - lower);
  std::vector<double> unique_cuts{lower};
  for (double cut : cuts)
    if (cut - unique_cuts.back() > merge_tol) unique_cuts.push_back(cut);
  if (unique_cuts.size() == 1) throw std::invalid_argument("degenerate domain");
  unique_cuts.back() = upper;
  std::vector<double> values;
  values.reserve(unique_cuts.size() - 1);
  for (std::size_t i = 0; i + 1 < unique_cuts.size(); ++i)
    values.push_back(segment_level(u(0.5 * (unique_cuts[i] + unique_cuts[i + 1])), delta));
  std::vector<double> breakpoints(unique_cuts.begin() + 1, unique_cuts.end() - 1);
  return StepFunction1D(Interval(lower, upper), std::move(breakpoints), std::move(values));
}

// Crossings of the levels j*delta by a monotone piece from (x0,y0) to (x1,y1).
template <class Solve>
void add_level_crossings(double y0, double y1, double delta, std::vector<double>& cuts, Solve&& solve) {
  if (y0 == y1) return;
  const double lo = std::min(y0, y1);
  const double hi = std::max(y0, y1);
  const auto first = static_cast<long long>(std::floor(lo / delta)) + 1;
  const auto last = static_cast<long long>(std::floor(hi / delta));
  for (long long j = first; j <= last; ++j) cuts.push_back(solve(static_cast<double>(j) * delta));
}

struct KernelTable {
  static constexpr int kCells = 2048;
  double normalisation = 0.0;
  std::array<double, kCells + 1> cdf{};
};

double raw_bump(double s) { return std::abs(s) < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0; }

const KernelTable& kernel_table() {
  static const KernelTable table = [] {
    KernelTable t;
    const double h = 2.0 / KernelTable::kCells;
    double running = 0.0;
    t.cdf[0] = 0.0;
    for (int i = 0; i < KernelTable::kCells; ++i) {
      const double a = -1.0 + i * h;
      running += quadrature::integrate(raw_bump, a, a + h, 1e-18, 1e-15, 50).value;
      t.cdf[i + 1] = running;
    }
    t.normalisation = running;
    for (double& c : t.cdf) c /= running;
    return t;
  }();
  return table;
}

}  // namespace

// ---------------------------------------------------------------- types

Interval::Interval(double lower, double upper) : lower_(lower), upper_(upper) {
  if (!std::isfinite(lower) || !std::isfinite(upper) || !(lower < upper))
    throw std::invalid_argument("interval needs finite lower < upper");
}

StepFunction1D::StepFunction1D(Interval domain, std::vector<double> breakpoints, std::vector<double> values)
    : domain_(domain) {
  if (values.size() != breakpoints.size() + 1)
    throw std::invalid_argument("step function needs exactly one more value than breakpoints");
  double previous = domain.lower();
  for (double b : breakpoints) {
    if (!(b >= previous) || b > domain.upper())
      throw std::invalid_argument("breakpoints must be non-decreasing and inside the domain");
    previous = b;
  }
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("step values must be finite");
  // Canonical form.
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double lo = i == 0 ? domain.lower() : breakpoints[i - 1];
    const double hi = i + 1 == values.size() ? domain.upper() : breakpoints[i];
    if (!(hi > lo)) continue;
    if (!values_.empty() && values_.back() == values[i]) continue;
    if (!values_.empty()) breakpoints_.push_back(lo);
    values_.push_back(values[i]);
  }
}

StepFunction1D StepFunction1D::from_lengths(double lower, const std::vector<double>& lengths,
                                            const std::vector<double>& values) {
  if (lengths.empty() || lengths.size() != values.size())
    throw std::invalid_argument("need one positive length per value");
  std::vector<double> breakpoints;
  double position = lower;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (!(lengths[i] > 0.0)) throw std::invalid_argument("piece lengths must be positive");
    position += lengths[i];
    if (i + 1 < lengths.size()) breakpoints.push_back(position);
  }
  return StepFunction1D(Interval(lower, position), std::move(breakpoints), values);
}

double StepFunction1D::operator()(double x) const {
  if (x < domain_.lower() || x > domain_.upper()) throw std::out_of_range("step function evaluated outside its domain");
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
  return values_[static_cast<std::size_t>(it - breakpoints_.begin())];
}

PiecewiseAffine1D::PiecewiseAffine1D(std::vector<double> nodes, std::vector<double> node_values,
                                     bool compact_support)
    : nodes_(std::move(nodes)), values_(std::move(node_values)), compact_support_(compact_support) {
  if (nodes_.size() < 2 || nodes_.size() != values_.size())
    throw std::invalid_argument("piecewise affine function needs >= 2 nodes with one value each");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!std::isfinite(nodes_[i]) || !std::isfinite(values_[i]))
      throw std::invalid_argument("nodes and values must be finite");
    if (i > 0 && !(nodes_[i] > nodes_[i - 1])) throw std::invalid_argument("nodes must be strictly increasing");
  }
  if (compact_support_ && (values_.front() != 0.0 || values_.back() != 0.0))
    throw std::invalid_argument("compactly supported piecewise affine function must vanish at its end nodes");
}

double PiecewiseAffine1D::operator()(double x) const {
  if (x <= nodes_.front()) return values_.front();
  if (x >= nodes_.back()) return values_.back();
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - nodes_.begin()) - 1;
  const double w = (x - nodes_[i]) / (nodes_[i + 1] - nodes_[i]);
  return values_[i] + w * (values_[i + 1] - values_[i]);
}

double PiecewiseAffine1D::max_slope() const {
  double slope = 0.0;
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i)
    slope = std::max(slope, std::abs(values_[i + 1] - values_[i]) / (nodes_[i + 1] - nodes_[i]));
  return slope;
}

SmoothFunction1D bump_function() {
  return SmoothFunction1D{
      [](double x) { return std::abs(x) < 1.0 ? (1.0 - x * x) * (1.0 - x * x) : 0.0; },
      [](double x) { return std::abs(x) < 1.0 ? -4.0 * x * (1.0 - x * x) : 0.0; },
      Interval(-1.0, 1.0)};
}

PiecewiseAffine1D tent_function() { return PiecewiseAffine1D({-1.0, 0.0, 1.0}, {0.0, 1.0, 0.0}, true); }

// ---------------------------------------------------------- segmentation

StepFunction1D segment_vertical(const StepFunction1D& u, double delta) {
  require_delta(delta);
  std::vector<double> values;
  values.reserve(u.piece_count());
  for (double v : u.values()) values.push_back(segment_level(v, delta));
  return StepFunction1D(u.domain(), u.breakpoints(), std::move(values));
}

StepFunction1D segment_vertical(const PiecewiseAffine1D& u, double delta) {
  require_delta(delta);
  const auto& x = u.nodes();
  const auto& y = u.node_values();
  std::vector<double> cuts(x.begin(), x.end());
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    add_level_crossings(y[i], y[i + 1], delta, cuts, [&](double level) {
      const double w = (level - y[i]) / (y[i + 1] - y[i]);
      return x[i] + w * (x[i + 1] - x[i]);
    });
  }
  return step_from_cuts(std::move(cuts), delta, [&](double t) { return u(t); });
}

StepFunction1D segment_vertical(const SmoothFunction1D& u, double delta, int samples) {
  require_delta(delta);
  if (samples < 2) throw std::invalid_argument("need at least two samples");
  const double lo = u.support.lower();
  const double hi = u.support.upper();
  const double h = (hi - lo) / samples;
  // Monotone pieces: split where the derivative changes sign.
  std::vector<double> turning{lo};
  double previous_slope = u.derivative(lo);
  double previous_x = lo;
  for (int i = 1; i <= samples; ++i) {
    const double xi = i == samples ? hi : lo + i * h;
    const double slope = u.derivative(xi);
    if ((slope > 0.0 && previous_slope < 0.0) || (slope < 0.0 && previous_slope > 0.0))
      turning.push_back(bisect(u.derivative, previous_x, xi));
    if (slope != 0.0) {
      previous_slope = slope;
      previous_x = xi;
    }
  }
  turning.push_back(hi);
  std::vector<double> cuts(turning.begin(), turning.end());
  for (std::size_t i = 0; i + 1 < turning.size(); ++i) {
    const double a = turning[i];
    const double b = turning[i + 1];
    const double ya = u(a);
    const double yb = u(b);
    add_level_crossings(ya, yb, delta, cuts, [&](double level) {
      return bisect([&](double t) { return u(t) - level; }, a, b);
    });
  }
  for (double v : {u(lo), u(hi)})
    if (!std::isfinite(v)) throw std::invalid_argument("function has unbounded image");
  return step_from_cuts(std::move(cuts), delta, [&](double t) { return u(t); });
}

// ---------------------------------------------------------- rearrangement

StepFunction1D monotone_rearrangement(const StepFunction1D& u) {
  std::map<double, double> level_measure;
  for (std::size_t i = 0; i < u.piece_count(); ++i) level_measure[u.values()[i]] += u.piece_length(i);
  std::vector<double> breakpoints;
  std::vector<double> values;
  double position = u.domain().lower();
  for (const auto& [value, measure] : level_measure) {
    if (!values.empty()) breakpoints.push_back(position);
    values.push_back(value);
    position += measure;
  }
  return StepFunction1D(u.domain(), std::move(breakpoints), std::move(values));
}

double essential_oscillation(const StepFunction1D& u, const Interval& window) {
  if (!u.domain().contains(window)) throw std::invalid_argument("window must lie inside the domain");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < u.piece_count(); ++i) {
    if (u.piece_lower(i) < window.upper() && u.piece_upper(i) > window.lower()) {
      lo = std::min(lo, u.values()[i]);
      hi = std::max(hi, u.values()[i]);
    }
  }
  if (lo > hi) throw std::invalid_argument("window meets no piece in positive measure");
  return hi - lo;
}

double essential_oscillation(const PiecewiseAffine1D& u, const Interval& window) {
  double lo = std::min(u(window.lower()), u(window.upper()));
  double hi = std::max(u(window.lower()), u(window.upper()));
  for (std::size_t i = 0; i < u.nodes().size(); ++i) {
    if (u.nodes()[i] > window.lower() && u.nodes()[i] < window.upper()) {
      lo = std::min(lo, u.node_values()[i]);
      hi = std::max(hi, u.node_values()[i]);
    }
  }
  return hi - lo;
}

// ---------------------------------------------------------- limit energy

double limit_energy(const StepFunction1D& u, double p) {
  require_exponent(p);
  if (u.piece_count() == 1) return 0.0;
  if (p > 1.0) return std::numeric_limits<double>::infinity();
  double variation = 0.0;
  for (std::size_t i = 0; i + 1 < u.piece_count(); ++i) variation += std::abs(u.values()[i + 1] - u.values()[i]);
  return variation;
}

double limit_energy(const PiecewiseAffine1D& u, double p) {
  require_exponent(p);
  const auto& x = u.nodes();
  const auto& y = u.node_values();
  double energy = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double rise = std::abs(y[i + 1] - y[i]);
    const double run = x[i + 1] - x[i];
    energy += p == 1.0 ? rise : std::pow(rise / run, p) * run;
  }
  return energy;
}

double limit_energy(const SmoothFunction1D& u, double p, double tolerance) {
  require_exponent(p);
  const double lo = u.support.lower();
  const double hi = u.support.upper();
  constexpr int kInitialCells = 64;
  std::vector<double> cuts;
  for (int i = 0; i <= kInitialCells; ++i) cuts.push_back(lo + (hi - lo) * i / kInitialCells);
  cuts.back() = hi;
  auto result = quadrature::integrate([&](double x) { return std::pow(std::abs(u.derivative(x)), p); },
                                      std::span<const double>(cuts), 0.0, tolerance, 10000);
  return result.value;
}

// ---------------------------------------------------------- mollification

double bump_kernel(double s) { return raw_bump(s) / kernel_table().normalisation; }

double bump_kernel_cdf(double s) {
  if (s <= -1.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const auto& table = kernel_table();
  const double h = 2.0 / KernelTable::kCells;
  const double position = (s + 1.0) / h;
  const int cell = std::min(KernelTable::kCells - 1, static_cast<int>(position));
  const double a = -1.0 + cell * h;
  const double t = (s - a) / h;
  // Cubic Hermite with exact end derivatives.
  const double c0 = table.cdf[cell];
  const double c1 = table.cdf[cell + 1];
  const double d0 = bump_kernel(a) * h;
  const double d1 = bump_kernel(a + h) * h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * c0 + (t3 - 2 * t2 + t) * d0 + (-2 * t3 + 3 * t2) * c1 + (t3 - t2) * d1;
}

SmoothFunction1D mollify(const StepFunction1D& u, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  double shortest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < u.piece_count(); ++i) shortest = std::min(shortest, u.piece_length(i));
  if (!(epsilon < 0.5 * shortest))
    throw std::invalid_argument("epsilon must be smaller than half the shortest piece length");

  const auto breakpoints = u.breakpoints();
  const auto values = u.values();
  // Nearest breakpoint within epsilon (at most one, by the guard above).
  auto locate = [breakpoints, epsilon](double x) -> std::ptrdiff_t {
    const auto it = std::lower_bound(breakpoints.begin(), breakpoints.end(), x - epsilon);
    if (it != breakpoints.end() && *it < x + epsilon) return it - breakpoints.begin();
    return -1;
  };
  auto value = [=](double x) {
    const auto b = locate(x);
    if (b >= 0) {
      const double jump = values[b + 1] - values[b];
      return values[b] + jump * bump_kernel_cdf((x - breakpoints[b]) / epsilon);
    }
    const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
    return values[static_cast<std::size_t>(it - breakpoints.begin())];
  };
  auto slope = [=](double x) {
    const auto b = locate(x);
    if (b < 0) return 0.0;
    const double jump = values[b + 1] - values[b];
    return jump * bump_kernel((x - breakpoints[b]) / epsilon) / epsilon;
  };
  const Interval support = breakpoints.empty()
                               ? u.domain()
                               : Interval(breakpoints.front() - epsilon, breakpoints.back() + epsilon);
  return SmoothFunction1D{value, slope, support};
}

// ---------------------------------------------------------- serialisation

namespace {

void append_number(std::string& out, double value) {
  std::array<char, 32> buffer{};
  const auto [end, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  out.append(buffer.data(), end);
}

double read_number(std::istringstream& in) {
  std::string token;
  if (!(in >> token)) throw std::invalid_argument("step record: truncated");
  double value = 0.0;
  const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || end != token.data() + token.size())
    throw std::invalid_argument("step record: bad number \"" + token + "\"");
  return value;
}

std::vector<double> read_list(std::istringstream& in, const std::string& label) {
  std::string keyword;
  std::size_t count = 0;
  if (!(in >> keyword) || keyword != label || !(in >> count))
    throw std::invalid_argument("step record: expected \"" + label + " <count>\"");
  std::vector<double> list(count);
  for (auto& item : list) item = read_number(in);
  return list;
}

}  // namespace

std::string to_record(const StepFunction1D& u) {
  std::string out = "step ";
  append_number(out, u.domain().lower());
  out += ' ';
  append_number(out, u.domain().upper());
  out += "\nbreakpoints " + std::to_string(u.breakpoints().size());
  for (double b : u.breakpoints()) {
    out += ' ';
    append_number(out, b);
  }
  out += "\nvalues " + std::to_string(u.values().size());
  for (double v : u.values()) {
    out += ' ';
    append_number(out, v);
  }
  out += '\n';
  return out;
}

StepFunction1D parse_record(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string keyword;
  if (!(in >> keyword) || keyword != "step") throw std::invalid_argument("step record: expected \"step\"");
  const double lower = read_number(in);
  const double upper = read_number(in);
  auto breakpoints = read_list(in, "breakpoints");
  auto values = read_list(in, "values");
  return StepFunction1D(Interval(lower, upper), std::move(breakpoints), std::move(values));
}

}  // namespace nlshape::funcs1d
