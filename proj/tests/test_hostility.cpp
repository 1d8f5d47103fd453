#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nlshape/hostility.hpp"
#include "oracles.hpp"

using namespace nlshape::hostility;
using nlshape::funcs1d::StepFunction1D;

namespace {

double closed_form_p1(double gap, double a, double b) {
  return std::log((gap + a) * (gap + b) / (gap * (gap + a + b)));
}

oracle::Pieces pieces_of(const StepFunction1D& u) {
  oracle::Pieces out;
  for (std::size_t i = 0; i < u.piece_count(); ++i) {
    out.lower.push_back(u.piece_lower(i));
    out.upper.push_back(u.piece_upper(i));
    out.value.push_back(u.values()[i]);
  }
  return out;
}

}  // namespace

TEST_CASE("discrete hostility examples") {
  const HostilityWeights h({1.0, 0.5});
  CHECK(discrete_hostility(DiscreteArrangement({2, 0, 1}), h, 1) == 1.0);
  CHECK(discrete_hostility(DiscreteArrangement({0, 1, 2}), h, 1) == 0.5);
  CHECK(discrete_hostility(DiscreteArrangement({0, 1, 2}), h, 2) == 0.0);
  CHECK(discrete_rearrange(DiscreteArrangement({2, 0, 1})) == DiscreteArrangement({0, 1, 2}));
  CHECK_THROWS_AS(HostilityWeights({0.5, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(DiscreteArrangement({}), std::invalid_argument);
  CHECK_THROWS_AS(discrete_hostility(DiscreteArrangement({0, 1, 2, 3}), h, 1), std::invalid_argument);
}

TEST_CASE("discrete hostility agrees with the defining sum") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> species(0, 5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + trial % 9;
    std::vector<std::int64_t> u(n);
    for (auto& s : u) s = species(rng);
    const auto h = random_weights(n, 100 + trial);
    // The j = i term never counts because phi_k(0) = 0.
    for (int k : {1, 2, 3}) CHECK(discrete_hostility(DiscreteArrangement(u), h, k) ==
                                  doctest::Approx(oracle::hostility_by_definition(u, h.weights(), k)).epsilon(1e-14));
  }
}

TEST_CASE("random weight tables") {
  const auto h = random_weights(10, 7);
  CHECK(h.weights().size() == 9);
  for (std::size_t i = 1; i < h.weights().size(); ++i) CHECK(h.weights()[i] <= h.weights()[i - 1]);
  for (double w : h.weights()) CHECK((w >= 0.0 && w < 1.0));
  CHECK(random_weights(10, 7).weights() == h.weights());
  CHECK(random_weights(10, 8).weights() != h.weights());
}

TEST_CASE("exhaustive minimality check") {
  const auto report = verify_rearrangement_minimality(5, 3, 1, 20, 42);
  CHECK(report.passed);
  CHECK(report.counterexamples == 0);
  CHECK(report.arrangements == 1024);
  CHECK(report.comparisons == 1024 * 20);
  CHECK(report.min_gap >= 0.0);
  CHECK(report.to_text().find("result: pass") != std::string::npos);
  CHECK_THROWS_AS(verify_rearrangement_minimality(9, 3, 1, 1, 0), std::length_error);
  CHECK_THROWS_AS(verify_rearrangement_minimality(4, 5, 1, 1, 0), std::length_error);
  CHECK_THROWS_AS(verify_rearrangement_minimality(4, 2, 0, 1, 0), std::invalid_argument);
}

TEST_CASE("power rectangles") {
  for (double gap : {0.1, 1.0, 3.0})
    for (double a : {0.2, 1.0})
      for (double b : {0.5, 2.0}) {
        CHECK(power_rectangle(1.0, gap, a, b) == doctest::Approx(closed_form_p1(gap, a, b)).epsilon(1e-13));
        for (double p : {1.0, 1.5, 2.0, 3.0}) {
          const double reference = oracle::integrate_2d(
              [p](double x, double y) { return std::pow(y - x, -1.0 - p); }, 0.0, a, a + gap, a + gap + b);
          CHECK(power_rectangle(p, gap, a, b) == doctest::Approx(reference).epsilon(1e-10));
        }
      }
  // Symmetric in the two lengths, even for tiny ratios.
  CHECK(power_rectangle(2.0, 1e-3, 1e-9, 5.0) == doctest::Approx(power_rectangle(2.0, 1e-3, 5.0, 1e-9)).epsilon(1e-14));
  CHECK(power_rectangle(1.0, 1e-3, 1e-12, 1e-12) == doctest::Approx(1e-18).epsilon(1e-6));
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(std::isinf(power_rectangle(1.5, 0.0, 1.0, 1.0)));
  CHECK(std::isinf(power_rectangle(1.0, 1.0, inf, inf)));
  CHECK(power_rectangle(1.0, 1.0, 1.0, inf) == doctest::Approx(std::log(2.0)));
  // p = 2, two half-lines at distance g: 1/(p(p-1)) g^{1-p}.
  CHECK(power_rectangle(2.0, 0.5, inf, inf) == doctest::Approx(1.0));
  CHECK(power_second_antiderivative(1.0, 2.0) == doctest::Approx(-std::log(2.0)));
  CHECK(power_second_antiderivative(3.0, 2.0) == doctest::Approx(1.0 / 24.0));
}

TEST_CASE("semi-discrete hostility examples") {
  const auto u = StepFunction1D::from_lengths(0, {1, 1, 1}, {0, 1, 2});
  const auto value = semidiscrete_hostility(u, PowerKernel{1.0, 1.0}, 1);
  CHECK(value.finite());
  CHECK(value.value == doctest::Approx(2.0 * std::log(4.0 / 3.0)).epsilon(1e-14));
  CHECK(semidiscrete_hostility(u, PowerKernel{1.0, 1.0}, 2).value == 0.0);

  const auto touching = StepFunction1D::from_lengths(0, {1, 1, 1}, {0, 2, 2});
  const auto divergent = semidiscrete_hostility(touching, PowerKernel{1.0, 1.0}, 1);
  CHECK_FALSE(divergent.finite());
  CHECK(std::isinf(divergent.value));
  CHECK(*divergent.divergent_pair == std::make_pair(std::size_t{0}, std::size_t{1}));

  CHECK_THROWS_AS(semidiscrete_hostility(StepFunction1D::from_lengths(0, {1, 1}, {0, 0.5}), PowerKernel{1, 1}, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(semidiscrete_hostility(u, PowerKernel{0.5, 1}, 1), std::invalid_argument);
}

TEST_CASE("semi-discrete hostility against 2-D quadrature") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> length(0.2, 1.0);
  std::uniform_int_distribution<int> step(-1, 1);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> lengths(6), values(6);
    int level = 0;
    for (int i = 0; i < 6; ++i) {
      lengths[i] = length(rng);
      values[i] = level;
      level += step(rng);  // neighbours differ by at most one
    }
    const auto u = StepFunction1D::from_lengths(0, lengths, values);
    for (double p : {1.0, 2.5}) {
      const double delta = 0.7;
      const auto got = semidiscrete_hostility(u, PowerKernel{p, delta}, 1);
      REQUIRE(got.finite());
      const double reference = oracle::pair_integral(
          pieces_of(u), [](double d) { return d > 1.0 ? 1.0 : 0.0; }, std::pow(delta, p), p);
      CHECK(got.value == doctest::Approx(reference).epsilon(1e-8));
    }
  }
}

TEST_CASE("tabulated kernels") {
  const auto u = StepFunction1D::from_lengths(0, {0.5, 1, 0.3, 0.8}, {0, 1, 2, 3});
  const double p = 1.5, delta = 0.4;
  const double scale = std::pow(delta, p);
  TabulatedKernel power{[=](double s) { return scale * std::pow(s, 1.0 - p) / (p * (p - 1.0)); }};
  CHECK(semidiscrete_hostility(u, power, 1).value ==
        doctest::Approx(semidiscrete_hostility(u, PowerKernel{p, delta}, 1).value).epsilon(1e-12));

  // Constant kernel c = 1: W = s^2/2, rectangle = area.
  TabulatedKernel flat{[](double s) { return 0.5 * s * s; }};
  const auto value = semidiscrete_hostility(u, flat, 1);
  CHECK(value.value == doctest::Approx(2.0 * (0.5 * 0.3 + 0.5 * 0.8 + 1.0 * 0.8)).epsilon(1e-12));

  TabulatedKernel concave{[](double s) { return -s * s; }};
  CHECK_THROWS_AS(semidiscrete_hostility(u, concave, 1), std::invalid_argument);
  TabulatedKernel empty{};
  CHECK_THROWS_AS(semidiscrete_hostility(u, empty, 1), std::invalid_argument);
}
