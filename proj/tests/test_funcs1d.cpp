#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nlshape/funcs1d.hpp"
#include "oracles.hpp"

using namespace nlshape::funcs1d;

TEST_CASE("step functions are canonicalised") {
  const StepFunction1D u(Interval(0, 3), {1, 1, 2}, {4, 5, 4, 6});
  CHECK(u.piece_count() == 2);
  CHECK(u.values() == std::vector<double>{4, 6});
  CHECK(u.breakpoints() == std::vector<double>{2});
  CHECK(u(2.0) == 6.0);
  CHECK(u(1.999) == 4.0);
  CHECK_THROWS_AS(u(3.5), std::out_of_range);
  CHECK_THROWS_AS(Interval(1, 1), std::invalid_argument);
  CHECK_THROWS_AS(StepFunction1D(Interval(0, 1), {0.5}, {1}), std::invalid_argument);
  CHECK_THROWS_AS(StepFunction1D(Interval(0, 1), {1.5}, {1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(StepFunction1D::from_lengths(0, {1, 0}, {1, 2}), std::invalid_argument);
}

TEST_CASE("vertical segmentation of a step function") {
  const auto u = StepFunction1D::from_lengths(0, {1, 1, 1}, {0.05, 0.15, 0.27});
  const auto s = segment_vertical(u, 0.1);
  CHECK(s.values().size() == 3);
  CHECK(s.values()[0] == 0.0);
  CHECK(s.values()[1] == doctest::Approx(0.1));
  CHECK(s.values()[2] == doctest::Approx(0.2));
  // Already on the lattice: unchanged.
  const auto lattice = StepFunction1D::from_lengths(0, {1, 2}, {0.0, 3.0});
  CHECK(segment_vertical(lattice, 1.0) == lattice);
  CHECK_THROWS_AS(segment_vertical(u, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(segment_vertical(u, -1.0), std::invalid_argument);
}

TEST_CASE("segmentation of the tent function") {
  const auto s = segment_vertical(tent_function(), 0.25);
  // Levels 0, .25, .5, .75, 1 with crossings at +-0.75, +-0.5, +-0.25 and a
  // null set at the peak.
  CHECK(s.domain() == Interval(-1, 1));
  const std::vector<double> expected_breaks = {-0.75, -0.5, -0.25, 0.25, 0.5, 0.75};
  REQUIRE(s.breakpoints().size() == expected_breaks.size());
  for (std::size_t i = 0; i < expected_breaks.size(); ++i)
    CHECK(s.breakpoints()[i] == doctest::Approx(expected_breaks[i]).epsilon(1e-14));
  const std::vector<double> expected_values = {0, 0.25, 0.5, 0.75, 0.5, 0.25, 0};
  for (std::size_t i = 0; i < expected_values.size(); ++i) CHECK(s.values()[i] == doctest::Approx(expected_values[i]));
  // Pointwise: 0 <= u - S u < delta.
  for (double x = -1.0; x <= 1.0; x += 1e-3) {
    const double gap = tent_function()(x) - s(x);
    CHECK(gap >= -1e-12);
    CHECK(gap < 0.25 + 1e-12);
  }
}

TEST_CASE("segmentation of the bump") {
  const auto bump = bump_function();
  for (double delta : {0.3, 0.07, 0.013}) {
    const auto s = segment_vertical(bump, delta);
    for (double x = -1.0; x <= 1.0; x += 7.3e-4) {
      const double gap = bump(x) - s(x);
      CHECK(gap >= -1e-9);
      CHECK(gap < delta + 1e-9);
    }
    // Total variation of the segmented bump: twice the highest level reached.
    CHECK(limit_energy(s, 1.0) == doctest::Approx(2.0 * delta * std::floor(1.0 / delta)).epsilon(1e-12));
  }
}

TEST_CASE("monotone rearrangement") {
  const auto u = StepFunction1D::from_lengths(0, {0.2, 0.3, 0.5}, {1, 0, 1});
  const auto r = monotone_rearrangement(u);
  CHECK(r.values() == std::vector<double>{0, 1});
  REQUIRE(r.breakpoints().size() == 1);
  CHECK(r.breakpoints()[0] == doctest::Approx(0.3));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> length(0.1, 1.0);
  std::uniform_int_distribution<int> level(-3, 3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> lengths(8), values(8);
    for (int i = 0; i < 8; ++i) {
      lengths[i] = length(rng);
      values[i] = level(rng);
    }
    const auto v = StepFunction1D::from_lengths(0, lengths, values);
    const auto w = monotone_rearrangement(v);
    for (std::size_t i = 1; i < w.piece_count(); ++i) CHECK(w.values()[i] > w.values()[i - 1]);
    for (int l = -3; l <= 3; ++l) {
      double mv = 0, mw = 0;
      for (std::size_t i = 0; i < v.piece_count(); ++i)
        if (v.values()[i] == l) mv += v.piece_length(i);
      for (std::size_t i = 0; i < w.piece_count(); ++i)
        if (w.values()[i] == l) mw += w.piece_length(i);
      CHECK(mw == doctest::Approx(mv).epsilon(1e-12));
    }
    // Rearrangement never increases the total variation.
    CHECK(limit_energy(w, 1.0) <= limit_energy(v, 1.0) + 1e-12);
  }
}

TEST_CASE("essential oscillation") {
  const auto u = StepFunction1D::from_lengths(0, {1, 1, 1}, {0, 2, -1});
  CHECK(essential_oscillation(u, Interval(0, 1)) == 0.0);
  CHECK(essential_oscillation(u, Interval(0.5, 1.5)) == 2.0);
  CHECK(essential_oscillation(u, Interval(0.5, 2.5)) == 3.0);
  // A window touching a piece only at an endpoint does not see it.
  CHECK(essential_oscillation(u, Interval(1, 2)) == 0.0);
  CHECK_THROWS_AS(essential_oscillation(u, Interval(-1, 1)), std::invalid_argument);
  CHECK(essential_oscillation(tent_function(), Interval(-0.5, 0.25)) == doctest::Approx(0.5));
  CHECK(essential_oscillation(tent_function(), Interval(0.25, 0.5)) == doctest::Approx(0.25));
}

TEST_CASE("limit energy") {
  const auto u = StepFunction1D::from_lengths(0, {1, 1, 1}, {0, 2, -1});
  CHECK(limit_energy(u, 1.0) == 5.0);
  CHECK(std::isinf(limit_energy(u, 2.0)));
  CHECK(limit_energy(StepFunction1D(Interval(0, 1), {}, {3}), 2.0) == 0.0);
  CHECK(limit_energy(tent_function(), 1.0) == doctest::Approx(2.0));
  CHECK(limit_energy(tent_function(), 2.0) == doctest::Approx(2.0));
  const PiecewiseAffine1D steep({0, 0.5, 2}, {0, 1, 1}, false);
  CHECK(limit_energy(steep, 3.0) == doctest::Approx(4.0));  // slope 2 over length 1/2

  // Bump: int |u'|^p against Boost quadrature of 4|x|(1-x^2) raised to p.
  const auto bump = bump_function();
  for (double p : {1.0, 1.5, 2.0, 3.0}) {
    const double reference =
        2.0 * oracle::integrate([p](double x) { return std::pow(4.0 * x * (1.0 - x * x), p); }, 0.0, 1.0);
    CHECK(limit_energy(bump, p) == doctest::Approx(reference).epsilon(1e-10));
  }
  CHECK(limit_energy(bump, 1.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(limit_energy(u, 0.5), std::invalid_argument);
}

TEST_CASE("bump kernel") {
  CHECK(bump_kernel(1.0) == 0.0);
  CHECK(bump_kernel(-1.5) == 0.0);
  const double mass = oracle::integrate([](double s) { return bump_kernel(s); }, -1.0, 1.0);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
  for (double s : {-0.9, -0.3, 0.0, 0.4, 0.99}) {
    const double partial = oracle::integrate([](double r) { return bump_kernel(r); }, -1.0, s);
    CHECK(bump_kernel_cdf(s) == doctest::Approx(partial).epsilon(1e-9));
  }
  CHECK(bump_kernel_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("mollification") {
  const auto u = StepFunction1D::from_lengths(0, {1, 0.5, 1.5}, {0, 2, 1});
  for (double eps : {0.2, 0.05, 0.01}) {
    const auto m = mollify(u, eps);
    // L1 distance bounded by eps times the total variation.
    double distance = 0.0;
    for (std::size_t i = 0; i < u.piece_count(); ++i)
      distance += oracle::integrate([&](double x) { return std::abs(m(x) - u(x)); }, u.piece_lower(i),
                                    u.piece_upper(i), 1e-10);
    CHECK(distance <= eps * limit_energy(u, 1.0) + 1e-10);
    CHECK(m(0.5) == 0.0);
    CHECK(m(1.25) == 2.0);
    CHECK(m(2.5) == 1.0);
    // Total variation is preserved.
    CHECK(limit_energy(m, 1.0) == doctest::Approx(3.0).epsilon(1e-8));
  }
  CHECK_THROWS_AS(mollify(u, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(mollify(u, 0.0), std::invalid_argument);
}

TEST_CASE("step records round-trip bit-exactly") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> lengths, values;
    for (int i = 0; i < 6; ++i) {
      lengths.push_back(uniform(rng) + 1e-3);
      values.push_back(uniform(rng) * 10 - 5);
    }
    const auto u = StepFunction1D::from_lengths(uniform(rng), lengths, values);
    CHECK(parse_record(to_record(u)) == u);
  }
  CHECK_THROWS_AS(parse_record("stop 0 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_record("step 0 1\nbreakpoints 1 0.5\nvalues 2 1\n"), std::invalid_argument);
}
