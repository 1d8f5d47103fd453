#include "nlshape/nonlocal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "nlshape/format.hpp"
#include "nlshape/hostility.hpp"
#include "nlshape/quadrature.hpp"
#include "nlshape/shape.hpp"

namespace nlshape::nonlocal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// phi(t) = sum_j weight_j [t > threshold_j].
struct JumpTable {
  std::vector<std::pair<double, double>> jumps;  // (threshold, weight)

  double operator()(double q) const {
    double total = 0.0;
    for (const auto& [threshold, weight] : jumps)
      if (q > threshold + 1e-9 * std::max(1.0, threshold)) total += weight;
    return total;
  }
};

JumpTable jump_table(const laws::InteractionLaw& law) {
  if (const auto* step = law.get_if<laws::StepLaw>()) return {{{step->k, 1.0}}};
  if (const auto* pca = law.get_if<laws::PiecewiseConstantLaw>()) {
    JumpTable table;
    for (std::size_t k = 0; k < pca->lambdas.size(); ++k)
      if (pca->lambdas[k] != 0.0) table.jumps.emplace_back(static_cast<double>(k + 1), pca->lambdas[k]);
    return table;
  }
  if (const auto* rescaled = law.get_if<laws::RescaledLaw>()) {
    auto table = jump_table(*rescaled->base);
    for (auto& [threshold, weight] : table.jumps) {
      threshold /= rescaled->beta;
      weight *= rescaled->alpha;
    }
    return table;
  }
  throw std::invalid_argument("exact evaluation needs a piecewise-constant law (" + laws::describe(law) +
                              "); use lambda_quadrature");
}

void validate_scalars(double delta, double p) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw std::invalid_argument("delta must be finite and > 0");
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("exponent p must satisfy p >= 1");
}

struct Piece {
  double lower;  // -inf for a left half-line
  double upper;  // +inf for a right half-line
  double value;
};

std::vector<Piece> pieces_of(const funcs1d::StepFunction1D& u) {
  std::vector<Piece> pieces;
  for (std::size_t i = 0; i < u.piece_count(); ++i) pieces.push_back({u.piece_lower(i), u.piece_upper(i), u.values()[i]});
  return pieces;
}

struct PairSum {
  double value = 0.0;
  std::string diagnostic;
};

// delta^p * phi(|v_j - v_i|/delta) * int_{piece i} int_{piece j} |y-x|^{-1-p}, piece i left of piece j.
double pair_term(const JumpTable& phi, const Piece& left, const Piece& right, double delta, double p,
                 double delta_power) {
  const double weight = phi(std::abs(right.value - left.value) / delta);
  if (weight == 0.0) return 0.0;
  const double gap = right.lower - left.upper;
  return weight * delta_power * hostility::power_rectangle(p, gap, left.upper - left.lower, right.upper - right.lower);
}

std::string divergence_note(std::size_t i, std::size_t j, const Piece& a, const Piece& b) {
  return "diverges: active adjacent pair (pieces " + std::to_string(i) + " and " + std::to_string(j) + ", values " +
         format_number(a.value) + " and " + format_number(b.value) + ")";
}

// sum_{i<j} pair_term over all pieces, rows summed in parallel and reduced
// by a fixed pairwise tree.
PairSum ordered_pair_sum(const JumpTable& phi, const std::vector<Piece>& pieces, double delta, double p) {
  const double delta_power = std::pow(delta, p);
  const std::size_t count = pieces.size();
  std::vector<double> rows(count, 0.0);
  auto row = [&](std::size_t i) {
    double sum = 0.0;
    for (std::size_t j = i + 1; j < count; ++j) sum += pair_term(phi, pieces[i], pieces[j], delta, p, delta_power);
    rows[i] = sum;
  };
  if (count >= 64) {
    parallel_for(count, row);
  } else {
    for (std::size_t i = 0; i < count; ++i) row(i);
  }
  PairSum result;
  result.value = pairwise_sum(rows.begin(), rows.end());
  if (std::isinf(result.value)) {
    for (std::size_t i = 0; i + 1 < count && result.diagnostic.empty(); ++i)
      for (std::size_t j = i + 1; j < count; ++j)
        if (std::isinf(pair_term(phi, pieces[i], pieces[j], delta, p, delta_power))) {
          result.diagnostic = divergence_note(i, j, pieces[i], pieces[j]);
          break;
        }
  }
  return result;
}

FunctionalValue exact_value(const PairSum& sum, double factor = 1.0) {
  FunctionalValue result;
  result.method = Method::exact;
  result.value = factor * sum.value;
  result.diagnostic = sum.diagnostic;
  return result;
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::exact:
      return "exact";
    case Method::quadrature:
      return "quadrature";
    case Method::montecarlo:
      return "montecarlo";
  }
  return "unknown";
}

FunctionalValue lambda_exact(const laws::InteractionLaw& law, const funcs1d::StepFunction1D& u, double delta,
                             double p) {
  validate_scalars(delta, p);
  return exact_value(ordered_pair_sum(jump_table(law), pieces_of(u), delta, p), 2.0);
}

FunctionalValue lambda_exact_on_line(const laws::InteractionLaw& law, const funcs1d::StepFunction1D& u,
                                     double delta, double p) {
  validate_scalars(delta, p);
  auto pieces = pieces_of(u);
  pieces.insert(pieces.begin(), Piece{-kInf, u.domain().lower(), u.values().front()});
  pieces.push_back(Piece{u.domain().upper(), kInf, u.values().back()});
  return exact_value(ordered_pair_sum(jump_table(law), pieces, delta, p), 2.0);
}

FunctionalValue lambda_hat_exact(const laws::InteractionLaw& law, const funcs1d::StepFunction1D& u, double delta,
                                 double p) {
  validate_scalars(delta, p);
  const JumpTable phi = jump_table(law);
  const auto pieces = pieces_of(u);
  const auto& v = u.values();
  const std::size_t n = v.size();
  auto sign = [](double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); };
  const double left_step = n > 1 ? sign(v[1] - v[0]) : 0.0;
  const double right_step = n > 1 ? sign(v[n - 1] - v[n - 2]) : 0.0;
  const Piece left{-kInf, u.domain().lower(), v.front() - delta * left_step};
  const Piece right{u.domain().upper(), kInf, v.back() + delta * right_step};

  const PairSum inside = ordered_pair_sum(phi, pieces, delta, p);
  FunctionalValue result = exact_value(inside, 2.0);
  if (std::isinf(result.value)) return result;
  const double delta_power = std::pow(delta, p);
  std::vector<double> outside(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double to_left = pair_term(phi, left, pieces[i], delta, p, delta_power);
    const double to_right = pair_term(phi, pieces[i], right, delta, p, delta_power);
    if (std::isinf(to_left) || std::isinf(to_right)) {
      result.value = kInf;
      result.diagnostic = std::isinf(to_left) ? divergence_note(0, i, left, pieces[i]) + " [left extension]"
                                              : divergence_note(i, n - 1, pieces[i], right) + " [right extension]";
      return result;
    }
    outside[i] = to_left + to_right;
  }
  result.value += pairwise_sum(outside.begin(), outside.end());
  return result;
}

double verify_p_identity(std::size_t n, const std::vector<double>& lambdas, double p, int trials,
                         std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("identity check needs n >= 2");
  if (trials < 1) throw std::invalid_argument("identity check needs at least one trial");
  const laws::InteractionLaw law = laws::pca_law(lambdas);
  std::vector<double> ratios(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 rng(split_seed(seed, static_cast<std::uint64_t>(t)));
    std::uniform_real_distribution<double> unit(1e-3, 1.0);
    std::vector<double> l(n);
    double total = 0.0;
    for (double& x : l) total += (x = -std::log(unit(rng)));
    for (double& x : l) x /= total;
    const double delta = std::uniform_real_distribution<double>(0.05, 2.0)(rng);
    const double a = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
    const double width = std::uniform_real_distribution<double>(0.5, 3.0)(rng);
    std::vector<double> lengths(n), values(n);
    for (std::size_t i = 0; i < n; ++i) {
      lengths[i] = width * l[i];
      values[i] = delta * static_cast<double>(i);
    }
    const auto u = funcs1d::StepFunction1D::from_lengths(a, lengths, values);
    const double hat = lambda_hat_exact(law, u, delta, p).value;
    const double energy = shape::p_value(lambdas, p, std::span<const double>(l));
    ratios[static_cast<std::size_t>(t)] = hat * std::pow(width, p - 1.0) / (std::pow(delta, p) * energy);
  }
  const double reference = ratios.front();
  for (std::size_t t = 0; t < ratios.size(); ++t) {
    if (!std::isfinite(ratios[t]) || std::abs(ratios[t] - reference) > 1e-8 * std::abs(reference)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "structural failure: ratio " << ratios[t] << " at trial " << t << " differs from " << reference;
      throw std::runtime_error(msg.str());
    }
  }
  return pairwise_sum(ratios.begin(), ratios.end()) / static_cast<double>(ratios.size());
}

namespace {

struct ProfileView {
  std::function<double(double)> f;  // defined on the whole line
  double lower;
  double upper;
  double end_value;
  double lipschitz;
  std::vector<double> kinks;
  bool affine;  // affine between kinks
};

ProfileView view_of(const funcs1d::PiecewiseAffine1D& u) {
  const auto& values = u.node_values();
  if (!u.compact_support() && values.front() != values.back())
    throw std::invalid_argument("profile must take the same value at both ends (the energy over the line diverges)");
  return {[&u](double x) { return u(x); }, u.nodes().front(), u.nodes().back(),
          u.compact_support() ? 0.0 : values.front(), u.max_slope(), u.nodes(), true};
}

ProfileView view_of(const funcs1d::SmoothFunction1D& u) {
  const double lower = u.support.lower();
  const double upper = u.support.upper();
  const double left = u.evaluator(lower);
  const double right = u.evaluator(upper);
  if (std::abs(left - right) > 1e-12 * std::max(1.0, std::abs(left)))
    throw std::invalid_argument("profile must take the same value at both ends (the energy over the line diverges)");
  constexpr int kSamples = 8192;
  double slope = 0.0;
  for (int i = 0; i <= kSamples; ++i)
    slope = std::max(slope, std::abs(u.derivative(lower + (upper - lower) * i / kSamples)));
  auto clamped = [&u, lower, upper](double x) { return u.evaluator(std::clamp(x, lower, upper)); };
  // Sampling can miss the true maximum slope; the margin keeps the
  // inactive-band cut conservative.
  return {clamped, lower, upper, left, 2.0 * slope, {lower, upper}, false};
}

// Arguments t where the law has a jump or a kink; the quadrature splits
// where |u(x+t) - u(x)| / delta crosses one of them.
std::vector<double> law_breakpoints(const laws::InteractionLaw& law) {
  struct Visitor {
    std::vector<double> operator()(const laws::StepLaw& s) const { return {s.k}; }
    std::vector<double> operator()(const laws::PiecewiseConstantLaw& s) const {
      std::vector<double> out;
      for (std::size_t k = 0; k < s.lambdas.size(); ++k)
        if (s.lambdas[k] != 0.0) out.push_back(static_cast<double>(k + 1));
      return out;
    }
    std::vector<double> operator()(const laws::RampLaw&) const { return {1.0, 2.0}; }
    std::vector<double> operator()(const laws::RescaledLaw& s) const {
      auto out = law_breakpoints(*s.base);
      for (auto& b : out) b /= s.beta;
      return out;
    }
    std::vector<double> operator()(const laws::GenericLaw&) const { return {}; }
  };
  return std::visit(Visitor{}, law.variant());
}

// Adds to `cuts` the points of (a, b) where g changes sign. Exact for
// affine g; otherwise sign changes on a sampling grid, refined by bisection.
void add_crossings(const std::function<double(double)>& g, double a, double b, bool affine,
                   std::vector<double>& cuts) {
  const int cells = affine ? 1 : 32;
  double x0 = a, g0 = g(a);
  for (int c = 1; c <= cells; ++c) {
    const double x1 = c == cells ? b : a + (b - a) * c / cells;
    const double g1 = g(x1);
    if ((g0 < 0.0 && g1 > 0.0) || (g0 > 0.0 && g1 < 0.0)) {
      if (affine) {
        cuts.push_back(x0 + g0 / (g0 - g1) * (x1 - x0));
      } else {
        double lo = x0, hi = x1, glo = g0;
        for (int it = 0; it < 60 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
          const double mid = 0.5 * (lo + hi);
          const double gm = g(mid);
          if ((gm < 0.0) == (glo < 0.0)) {
            lo = mid;
            glo = gm;
          } else {
            hi = mid;
          }
        }
        cuts.push_back(0.5 * (lo + hi));
      }
    }
    x0 = x1;
    g0 = g1;
  }
}

}  // namespace

FunctionalValue lambda_quadrature(const laws::InteractionLaw& law, const Profile& u, double delta, double p,
                                  const EvaluationOptions& options) {
  validate_scalars(delta, p);
  if (!(options.quadrature_tolerance > 0.0)) throw std::invalid_argument("quadrature tolerance must be > 0");
  if (!(options.band_width_factor > 0.0)) throw std::invalid_argument("band width factor must be > 0");
  if (options.max_subdivisions < 1) throw std::invalid_argument("subdivision cap must be >= 1");
  const double t0 = laws::zero_threshold(law);
  if (t0 == 0.0 && p >= 2.0)
    throw std::invalid_argument("law is positive near 0: the diagonal singularity is integrable only for p < 2 (got p = " +
                                format_number(p) + ")");

  const ProfileView view = std::visit([](const auto& profile) { return view_of(profile); }, u);
  FunctionalValue result;
  result.method = Method::quadrature;
  if (view.lipschitz == 0.0) return result;

  const double tol = options.quadrature_tolerance;
  const double width = view.upper - view.lower;
  const double delta_power = std::pow(delta, p);
  auto phi = [&law, delta](double difference) { return laws::evaluate(law, std::abs(difference) / delta); };
  bool converged = true;
  const std::vector<double> breakpoints = law_breakpoints(law);

  // m(t) = int phi(|u(x+t) - u(x)|/delta) dx over x in [lower - t, upper].
  auto inner = [&](double t) {
    std::vector<double> cuts;
    cuts.reserve(2 * view.kinks.size() + 2);
    for (double k : view.kinks) {
      cuts.push_back(k);
      cuts.push_back(k - t);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    auto difference = [&](double x) { return view.f(x + t) - view.f(x); };
    const std::size_t structural = cuts.size();
    for (std::size_t i = 0; i + 1 < structural; ++i)
      for (double b : breakpoints)
        for (double level : {-b * delta, b * delta})
          add_crossings([&](double x) { return difference(x) - level; }, cuts[i], cuts[i + 1], view.affine, cuts);
    std::sort(cuts.begin(), cuts.end());
    auto integrand = [&](double x) { return phi(difference(x)); };
    const auto r = quadrature::integrate(integrand, std::span<const double>(cuts), 1e-2 * tol * t, 1e-2 * tol,
                                         options.max_subdivisions);
    if (!r.converged) converged = false;
    return r.value;
  };

  double value = 0.0;
  double error = 0.0;
  double start = t0 * delta / view.lipschitz;
  if (t0 == 0.0) {
    start = std::min(width, options.band_width_factor * delta / view.lipschitz);
    auto band = [&](double t) { return t == 0.0 ? 0.0 : 2.0 * delta_power * std::pow(t, -1.0 - p) * inner(t); };
    const auto r = quadrature::integrate(band, 0.0, start, 1e-300, tol, options.max_subdivisions);
    if (!r.converged) converged = false;
    value += r.value;
    error += r.error;
  }
  if (start < width) {
    auto logarithmic = [&](double s) {
      const double t = std::exp(s);
      return 2.0 * delta_power * std::pow(t, -p) * inner(t);
    };
    const auto r = quadrature::integrate(logarithmic, std::log(start), std::log(width), 1e-300, tol,
                                         options.max_subdivisions);
    if (!r.converged) converged = false;
    value += r.value;
    error += r.error;
  }
  // For t >= width the two copies no longer overlap: m(t) = 2 int phi(|u - c|/delta).
  const std::array<double, 2> span_cuts = {view.lower, view.upper};
  std::vector<double> support_cuts(view.kinks.begin(), view.kinks.end());
  support_cuts.insert(support_cuts.end(), span_cuts.begin(), span_cuts.end());
  std::sort(support_cuts.begin(), support_cuts.end());
  support_cuts.erase(std::unique(support_cuts.begin(), support_cuts.end()), support_cuts.end());
  const std::size_t support_pieces = support_cuts.size();
  for (std::size_t i = 0; i + 1 < support_pieces; ++i)
    for (double b : breakpoints)
      for (double level : {-b * delta, b * delta})
        add_crossings([&](double x) { return view.f(x) - view.end_value - level; }, support_cuts[i],
                      support_cuts[i + 1], view.affine, support_cuts);
  std::sort(support_cuts.begin(), support_cuts.end());
  const auto far = quadrature::integrate([&](double x) { return phi(view.f(x) - view.end_value); },
                                         std::span<const double>(support_cuts), 1e-300, 1e-2 * tol,
                                         options.max_subdivisions);
  if (!far.converged) converged = false;
  const double tail_factor = 2.0 * delta_power * std::pow(width, -p) / p;
  value += tail_factor * 2.0 * far.value;
  error += tail_factor * 2.0 * far.error;

  result.value = value;
  result.error_estimate = error + 1e-2 * tol * std::abs(value);
  result.converged = converged;
  if (!converged) result.diagnostic = "subdivision cap reached; value is partial";
  return result;
}

namespace {

double limit_energy_of(const Profile& u, double p) {
  return std::visit([p](const auto& profile) { return funcs1d::limit_energy(profile, p); }, u);
}

void validate_schedule(const std::vector<double>& deltas) {
  if (deltas.empty()) throw std::invalid_argument("delta schedule is empty");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] > 0.0)) throw std::invalid_argument("delta schedule entries must be > 0");
    if (i > 0 && !(deltas[i] < deltas[i - 1])) throw std::invalid_argument("delta schedule must be strictly decreasing");
  }
}

void fill_ratio(StudyRow& row) {
  row.degenerate = !(row.target > 0.0) || !std::isfinite(row.target);
  row.ratio = row.degenerate ? std::numeric_limits<double>::quiet_NaN() : row.value.value / row.target;
}

}  // namespace

std::vector<StudyRow> pointwise_limit_study(const laws::InteractionLaw& law, const Profile& u, double p,
                                            const std::vector<double>& deltas, const EvaluationOptions& options) {
  validate_schedule(deltas);
  const double target = laws::geometric_constant(1, p) * laws::scale_factor(law) * limit_energy_of(u, p);
  std::vector<StudyRow> rows(deltas.size());
  parallel_for(deltas.size(), [&](std::size_t i) {
    rows[i].delta = deltas[i];
    rows[i].value = lambda_quadrature(law, u, deltas[i], p, options);
    rows[i].target = target;
    fill_ratio(rows[i]);
  });
  return rows;
}

std::vector<StudyRow> recovery_study(const laws::InteractionLaw& law, const funcs1d::PiecewiseAffine1D& u, double p,
                                     const std::vector<double>& deltas) {
  validate_schedule(deltas);
  const double target = laws::geometric_constant(1, p) * laws::scale_factor(law) * funcs1d::limit_energy(u, p);
  std::vector<StudyRow> rows(deltas.size());
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    rows[i].delta = deltas[i];
    rows[i].value = lambda_exact_on_line(law, funcs1d::segment_vertical(u, deltas[i]), deltas[i], p);
    rows[i].target = target;
    fill_ratio(rows[i]);
  }
  return rows;
}

std::string study_csv(const std::vector<StudyRow>& rows) {
  std::string out = "delta,value,error,target,ratio\n";
  for (const auto& row : rows) {
    out += format_number(row.delta) + "," + format_number(row.value.value) + "," +
           format_number(row.value.error_estimate) + "," + format_number(row.target) + "," +
           format_number(row.ratio) + "\n";
  }
  return out;
}

}  // namespace nlshape::nonlocal
