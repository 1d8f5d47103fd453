#pragma once

// Aggregation/segregation problems: total k-hostility of discrete and
// semi-discrete arrangements, and the check that monotone rearrangement
// minimises it.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nlshape/funcs1d.hpp"

namespace nlshape::hostility {

/// Species u(1..n) of an arrangement on {1..n}.
class DiscreteArrangement {
 public:
  explicit DiscreteArrangement(std::vector<std::int64_t> species);
  const std::vector<std::int64_t>& species() const { return species_; }
  std::size_t size() const { return species_.size(); }
  friend bool operator==(const DiscreteArrangement&, const DiscreteArrangement&) = default;

 private:
  std::vector<std::int64_t> species_;
};

/// h(1..n-1), non-increasing. weights()[d-1] is h(d).
class HostilityWeights {
 public:
  explicit HostilityWeights(std::vector<double> weights);
  const std::vector<double>& weights() const { return weights_; }
  double at_distance(std::size_t d) const { return weights_[d - 1]; }

 private:
  std::vector<double> weights_;
};

/// c(sigma) = delta^p sigma^{-1-p}.
struct PowerKernel {
  double p;
  double delta;
};

/// A general non-increasing kernel, given through a second antiderivative
/// W (W'' = c) on (0, length of the domain].
struct TabulatedKernel {
  std::function<double(double)> second_antiderivative;
};

using KernelSpec = std::variant<PowerKernel, TabulatedKernel>;

/// int_X int_Y |y-x|^{-1-p} dy dx for intervals X = [a1, a1+len1] and
/// Y = [a1+len1+gap, ...] of length len2. Lengths may be +inf (half-lines);
/// returns +inf when the integral diverges (gap = 0, or p = 1 with two
/// half-lines).
double power_rectangle(double p, double gap, double len1, double len2);

/// Second antiderivative of sigma^{-1-p}: -log s (p = 1), s^{1-p}/(p(p-1)).
double power_second_antiderivative(double p, double s);

/// H_k(u) = sum_{i<j} phi_k(|u(j)-u(i)|) h(j-i).
double discrete_hostility(const DiscreteArrangement& u, const HostilityWeights& h, int k);

/// Nondecreasing rearrangement (sorted species).
DiscreteArrangement discrete_rearrange(const DiscreteArrangement& u);

/// Random non-increasing weight table: sorted uniform [0,1) samples, descending.
HostilityWeights random_weights(std::size_t n, std::uint64_t seed);

struct MinimalityReport {
  int n = 0;
  int species_range = 0;
  int k = 0;
  int trials = 0;
  std::uint64_t seed = 0;
  std::uint64_t arrangements = 0;  // per weight table
  std::uint64_t comparisons = 0;   // arrangements * trials
  std::uint64_t counterexamples = 0;
  double min_gap = 0.0;  // min over all comparisons of H_k(u) - H_k(Mu)
  bool passed = false;

  std::string to_text() const;
};

inline constexpr int kMaxExhaustiveLength = 8;
inline constexpr int kMaxExhaustiveRange = 4;

/// Enumerates every u: {1..n} -> {0..species_range} against `trials`
/// random weight tables. Throws std::length_error above the state-space
/// guard (n <= 8, species_range <= 4).
MinimalityReport verify_rearrangement_minimality(int n, int species_range, int k, int trials,
                                                 std::uint64_t seed);

struct HostilityValue {
  double value = 0.0;
  /// Piece indices of an adjacent active pair when the value is +inf.
  std::optional<std::pair<std::size_t, std::size_t>> divergent_pair;
  bool finite() const { return !divergent_pair.has_value(); }
};

/// F_k(c, u) for an integer-valued step function, exactly per piece pair.
HostilityValue semidiscrete_hostility(const funcs1d::StepFunction1D& u, const KernelSpec& kernel, int k);

}  // namespace nlshape::hostility
