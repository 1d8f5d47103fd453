#include "nlshape/hostility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "nlshape/parallel.hpp"

namespace nlshape::hostility {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// s^{1-p} - (s+len)^{1-p} without cancellation when len << s.
double power_difference(double p, double s, double len) {
  if (std::isinf(len)) return std::pow(s, 1.0 - p);
  return -std::pow(s, 1.0 - p) * std::expm1((1.0 - p) * std::log1p(len / s));
}

bool is_active(std::int64_t a, std::int64_t b, int k) { return std::llabs(a - b) > k; }

void require_k(int k) {
  if (k < 1) throw std::invalid_argument("k must be a positive integer");
}

}  // namespace

DiscreteArrangement::DiscreteArrangement(std::vector<std::int64_t> species) : species_(std::move(species)) {
  if (species_.empty()) throw std::invalid_argument("arrangement needs n >= 1");
}

HostilityWeights::HostilityWeights(std::vector<double> weights) : weights_(std::move(weights)) {
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (!std::isfinite(weights_[i])) throw std::invalid_argument("hostility weights must be finite");
    if (i > 0 && weights_[i] > weights_[i - 1]) throw std::invalid_argument("hostility weights must be non-increasing");
  }
}

double power_second_antiderivative(double p, double s) {
  if (p == 1.0) return -std::log(s);
  return std::pow(s, 1.0 - p) / (p * (p - 1.0));
}

double power_rectangle(double p, double gap, double len1, double len2) {
  if (!(p >= 1.0)) throw std::invalid_argument("exponent p must satisfy p >= 1");
  if (!(gap >= 0.0) || !(len1 > 0.0) || !(len2 > 0.0)) throw std::invalid_argument("rectangle needs gap >= 0, lengths > 0");
  if (gap == 0.0) return kInf;
  if (len1 > len2) std::swap(len1, len2);
  if (p == 1.0) {
    if (std::isinf(len1)) return kInf;
    if (std::isinf(len2)) return std::log1p(len1 / gap);
    return std::log1p(len1 / gap * (len2 / (gap + len1 + len2)));
  }
  const double scale = 1.0 / (p * (p - 1.0));
  if (std::isinf(len1)) return scale * std::pow(gap, 1.0 - p);
  if (std::isinf(len2)) return scale * power_difference(p, gap, len1);
  return scale * (power_difference(p, gap, len1) - power_difference(p, gap + len2, len1));
}

double discrete_hostility(const DiscreteArrangement& u, const HostilityWeights& h, int k) {
  require_k(k);
  const auto& s = u.species();
  const std::size_t n = s.size();
  if (h.weights().size() + 1 < n) throw std::invalid_argument("need a weight for every distance 1..n-1");
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (is_active(s[i], s[j], k)) total += h.at_distance(j - i);
  return total;
}

DiscreteArrangement discrete_rearrange(const DiscreteArrangement& u) {
  auto sorted = u.species();
  std::sort(sorted.begin(), sorted.end());
  return DiscreteArrangement(std::move(sorted));
}

HostilityWeights random_weights(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<double> weights(n > 0 ? n - 1 : 0);
  for (double& w : weights) w = uniform(rng);
  std::sort(weights.begin(), weights.end(), std::greater<>());
  return HostilityWeights(std::move(weights));
}

std::string MinimalityReport::to_text() const {
  std::ostringstream out;
  out.precision(17);
  out << "n: " << n << "\n"
      << "species_range: " << species_range << "\n"
      << "k: " << k << "\n"
      << "trials: " << trials << "\n"
      << "seed: " << seed << "\n"
      << "arrangements: " << arrangements << "\n"
      << "comparisons: " << comparisons << "\n"
      << "counterexamples: " << counterexamples << "\n"
      << "min_gap: " << min_gap << "\n"
      << "result: " << (passed ? "pass" : "fail") << "\n";
  return out.str();
}

MinimalityReport verify_rearrangement_minimality(int n, int species_range, int k, int trials, std::uint64_t seed) {
  require_k(k);
  if (n < 1 || species_range < 1 || trials < 1)
    throw std::invalid_argument("n, species range and trials must be positive");
  std::uint64_t states = 1;
  for (int i = 0; i < n; ++i) states *= static_cast<std::uint64_t>(species_range + 1);
  if (n > kMaxExhaustiveLength || species_range > kMaxExhaustiveRange) {
    std::ostringstream msg;
    msg << "state space too large for exhaustive mode: " << states << " arrangements x " << trials
        << " weight tables (guard: n <= " << kMaxExhaustiveLength << ", range <= " << kMaxExhaustiveRange << ")";
    throw std::length_error(msg.str());
  }

  std::vector<HostilityWeights> tables;
  tables.reserve(trials);
  for (int t = 0; t < trials; ++t) tables.push_back(random_weights(n, split_seed(seed, t)));

  struct Partial {
    std::uint64_t arrangements = 0;
    std::uint64_t counterexamples = 0;
    double min_gap = kInf;
  };
  // Partition by the species of the first position.
  const auto partitions = static_cast<std::size_t>(species_range + 1);
  std::vector<Partial> partials(partitions);
  parallel_for(partitions, [&](std::size_t first) {
    Partial& part = partials[first];
    std::vector<std::int64_t> species(n, 0);
    species[0] = static_cast<std::int64_t>(first);
    std::vector<std::int64_t> sorted(n);
    // Active pair counts per distance for u and for Mu.
    std::vector<int> count_u(n, 0), count_m(n, 0);
    while (true) {
      std::fill(count_u.begin(), count_u.end(), 0);
      std::fill(count_m.begin(), count_m.end(), 0);
      sorted = species;
      std::sort(sorted.begin(), sorted.end());
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          if (is_active(species[i], species[j], k)) ++count_u[j - i];
          if (is_active(sorted[i], sorted[j], k)) ++count_m[j - i];
        }
      ++part.arrangements;
      for (const auto& table : tables) {
        double h_u = 0.0, h_m = 0.0, scale = 0.0;
        for (int d = 1; d < n; ++d) {
          h_u += count_u[d] * table.at_distance(d);
          h_m += count_m[d] * table.at_distance(d);
          scale += std::abs(table.at_distance(d));
        }
        const double gap = h_u - h_m;
        part.min_gap = std::min(part.min_gap, gap);
        if (gap < -1e-12 * std::max(1.0, scale)) ++part.counterexamples;
      }
      // Odometer over positions 2..n.
      int position = n - 1;
      while (position >= 1 && species[position] == species_range) species[position--] = 0;
      if (position < 1) break;
      ++species[position];
    }
  });

  MinimalityReport report;
  report.n = n;
  report.species_range = species_range;
  report.k = k;
  report.trials = trials;
  report.seed = seed;
  report.min_gap = kInf;
  for (const auto& part : partials) {
    report.arrangements += part.arrangements;
    report.counterexamples += part.counterexamples;
    report.min_gap = std::min(report.min_gap, part.min_gap);
  }
  report.comparisons = report.arrangements * static_cast<std::uint64_t>(trials);
  report.passed = report.counterexamples == 0;
  return report;
}

HostilityValue semidiscrete_hostility(const funcs1d::StepFunction1D& u, const KernelSpec& kernel, int k) {
  require_k(k);
  std::vector<std::int64_t> levels;
  for (double v : u.values()) {
    if (v != std::round(v) || std::abs(v) > 9e15) throw std::invalid_argument("semi-discrete arrangement must be integer valued");
    levels.push_back(static_cast<std::int64_t>(v));
  }

  std::function<double(double, double, double)> rectangle;
  if (const auto* power = std::get_if<PowerKernel>(&kernel)) {
    if (!(power->p >= 1.0) || !(power->delta > 0.0)) throw std::invalid_argument("power kernel needs p >= 1, delta > 0");
    const double weight = std::pow(power->delta, power->p);
    const double p = power->p;
    rectangle = [weight, p](double gap, double len1, double len2) {
      return weight * power_rectangle(p, gap, len1, len2);
    };
  } else {
    const auto& w = std::get<TabulatedKernel>(kernel).second_antiderivative;
    if (!w) throw std::invalid_argument("tabulated kernel needs a second antiderivative");
    // W'' = c >= 0: W must be finite and convex on (0, length].
    const double length = u.domain().length();
    constexpr int kProbes = 64;
    std::vector<double> probe(kProbes + 1);
    for (int i = 0; i <= kProbes; ++i) {
      probe[i] = w(length * (i + 1) / (kProbes + 1));
      if (!std::isfinite(probe[i])) throw std::invalid_argument("tabulated kernel: second antiderivative is not finite on (0, length]");
    }
    for (int i = 1; i < kProbes; ++i) {
      const double second = probe[i - 1] - 2.0 * probe[i] + probe[i + 1];
      if (second < -1e-9 * (std::abs(probe[i]) + 1.0))
        throw std::invalid_argument("tabulated kernel: second antiderivative is not convex (kernel would be negative)");
    }
    rectangle = [w](double gap, double len1, double len2) {
      if (gap == 0.0 && !std::isfinite(w(0.0))) return kInf;
      return w(gap) - w(gap + len1) - w(gap + len2) + w(gap + len1 + len2);
    };
  }

  HostilityValue result;
  const std::size_t pieces = levels.size();
  for (std::size_t i = 0; i + 1 < pieces; ++i) {
    for (std::size_t j = i + 1; j < pieces; ++j) {
      if (!is_active(levels[i], levels[j], k)) continue;
      const double gap = u.piece_lower(j) - u.piece_upper(i);
      const double contribution = rectangle(gap, u.piece_length(i), u.piece_length(j));
      if (std::isinf(contribution)) {
        result.value = kInf;
        result.divergent_pair = std::make_pair(i, j);
        return result;
      }
      result.value += 2.0 * contribution;
    }
  }
  return result;
}

}  // namespace nlshape::hostility
