#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "nlshape/law_io.hpp"
#include "nlshape/laws.hpp"
#include "oracles.hpp"

using namespace nlshape::laws;

namespace {

std::vector<double> grid(double lower, double upper, int count) {
  std::vector<double> points;
  for (int i = 0; i < count; ++i) points.push_back(lower + (upper - lower) * i / (count - 1));
  return points;
}

InteractionLaw smooth_generic() {
  // t^2/(1+t^2) capped form: bounded, O(t^2) at 0, increasing.
  return InteractionLaw(GenericLaw{[](double t) { return t * t / (1.0 + t * t); }, "continuous"});
}

}  // namespace

TEST_CASE("step and piecewise-constant laws use the lower semicontinuous convention") {
  CHECK(evaluate(step_law(1), 1.0) == 0.0);
  CHECK(evaluate(step_law(1), 1.5) == 1.0);
  CHECK(evaluate(step_law(1), 1.0 + 1e-12) == 1.0);
  CHECK(evaluate(pca_law({2, 3}), 2.5) == 5.0);
  CHECK(evaluate(pca_law({2, 3}), 2.0) == 2.0);
  CHECK(evaluate(pca_law({2, 3}), 1.0) == 0.0);
  CHECK(right_limit(pca_law({2, 3}), 2.0) == 5.0);
  CHECK(evaluate(ramp_law(), 1.5) == doctest::Approx(0.5));
  CHECK(evaluate(ramp_law(), 0.7) == 0.0);
  CHECK(evaluate(ramp_law(), 9.0) == 1.0);
  CHECK_THROWS_AS(evaluate(step_law(1), -0.1), std::invalid_argument);
}

TEST_CASE("malformed laws are rejected") {
  CHECK_THROWS_AS(step_law(0), std::invalid_argument);
  CHECK_THROWS_AS(pca_law({}), std::invalid_argument);
  CHECK_THROWS_AS(pca_law({0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(pca_law({1, -1}), std::invalid_argument);
  CHECK_THROWS_AS(rescale(step_law(1), 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(rescale(step_law(1), 1, -2), std::invalid_argument);
}

TEST_CASE("evaluation is non-decreasing for every variant") {
  const std::vector<InteractionLaw> all = {step_law(0.7), pca_law({1, 0, 2, 0.5}), ramp_law(),
                                           rescale(pca_law({1, 1, 1}), 2.0, 0.3), smooth_generic()};
  for (const auto& law : all) {
    double previous = 0.0;
    for (double t : grid(0.0, 20.0, 4001)) {
      const double value = evaluate(law, t);
      CHECK(value >= previous);
      previous = value;
    }
  }
}

TEST_CASE("scale factors match closed forms and an independent quadrature") {
  CHECK(scale_factor(step_law(1)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(scale_factor(pca_law({1, 1, 1})) == doctest::Approx(11.0 / 6.0).epsilon(1e-15));
  CHECK(scale_factor(ramp_law()) == doctest::Approx(std::numbers::ln2).epsilon(1e-15));
  // The ramp integral split at the kinks, by Boost quadrature.
  const double ramp = oracle::integrate([](double t) { return (t - 1.0) / (t * t); }, 1.0, 2.0) +
                      oracle::integrate([](double s) { return 1.0 + 0.0 * s; }, 0.0, 0.5);
  CHECK(scale_factor(ramp_law()) == doctest::Approx(ramp).epsilon(1e-12));
  const auto report = scale_factor_report(step_law(2));
  CHECK(report.exact);
  CHECK(report.value == doctest::Approx(0.5));
}

TEST_CASE("scale factor is linear over piecewise-constant laws") {
  const std::vector<double> lambdas = {0.3, 1.7, 0.0, 2.2, 0.9};
  double combined = 0.0;
  for (std::size_t k = 0; k < lambdas.size(); ++k)
    if (lambdas[k] != 0.0) combined += lambdas[k] * scale_factor(step_law(static_cast<double>(k + 1)));
  CHECK(std::abs(scale_factor(pca_law(lambdas)) - combined) <= 1e-12);
}

TEST_CASE("rescaling multiplies N by alpha*beta") {
  const auto law = rescale(step_law(1), 1, 2);
  CHECK(evaluate(law, 0.6) == 1.0);
  CHECK(scale_factor(rescale(step_law(1), 3, 2)) == doctest::Approx(6.0));
  // Oracle: phi(t) = 3 [2t > 1] so N = 3 * int_{1/2}^inf t^-2 dt, tail substituted s = 1/t.
  const double oracle_value = oracle::integrate([](double) { return 3.0; }, 0.0, 2.0);
  CHECK(scale_factor(rescale(step_law(1), 3, 2)) == doctest::Approx(oracle_value).epsilon(1e-12));

  const auto generic = smooth_generic();
  const double base = scale_factor(generic);
  CHECK(base == doctest::Approx(std::numbers::pi / 2).epsilon(1e-9));  // int 1/(1+t^2)
  CHECK(scale_factor(rescale(generic, 0.5, 4.0)) == doctest::Approx(2.0 * base).epsilon(1e-9));

  const auto identity = rescale(ramp_law(), 1, 1);
  for (double t : grid(0.0, 5.0, 501)) CHECK(evaluate(identity, t) == evaluate(ramp_law(), t));
}

TEST_CASE("divergent and zero laws") {
  const InteractionLaw linear(GenericLaw{[](double t) { return t; }, ""});
  const auto report = scale_factor_report(linear);
  CHECK(std::isinf(report.value));
  CHECK_FALSE(report.diagnostic.empty());

  const InteractionLaw zero(GenericLaw{[](double) { return 0.0; }, ""});
  CHECK_THROWS_AS(scale_factor(zero), std::invalid_argument);
  const InteractionLaw constant(GenericLaw{[](double) { return 1.0; }, ""});
  CHECK(std::isinf(scale_factor(constant)));
}

TEST_CASE("admissibility certificates") {
  auto cert = certify(step_law(1));
  CHECK(cert.vanishes_on_unit_interval);
  CHECK(cert.uniform_bound == 1.0);
  CHECK_FALSE(cert.heuristic);
  cert = certify(step_law(0.5));
  CHECK_FALSE(cert.vanishes_on_unit_interval);
  CHECK(cert.quadratic_bound == doctest::Approx(4.0));

  cert = certify(smooth_generic());
  CHECK(cert.heuristic);
  CHECK(cert.quadratic_bound == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(cert.uniform_bound <= 1.0);
  CHECK(cert.note.find("finitely many discontinuities") != std::string::npos);

  const InteractionLaw decreasing(GenericLaw{[](double t) { return t < 1.0 ? t * t : 1.0 / t; }, ""});
  CHECK_THROWS_AS(certify(decreasing), std::domain_error);
  const InteractionLaw too_steep(GenericLaw{[](double t) { return std::min(1.0, std::sqrt(t)); }, ""});
  CHECK_THROWS_AS(certify(too_steep), std::domain_error);
}

TEST_CASE("geometric constant") {
  CHECK(geometric_constant(1, 1) == 2.0);
  for (double p : {1.0, 1.5, 2.0, 3.0}) CHECK(geometric_constant(1, p) == doctest::Approx(2.0 / p));
  CHECK(geometric_constant(2, 2) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-10));
  for (int d : {2, 3}) {
    for (double p : {1.0, 2.0, 3.0}) {
      const auto mc = oracle::sphere_constant(d, p, 200000, 17 + d);
      CAPTURE(d);
      CAPTURE(p);
      CHECK(std::abs(geometric_constant(d, p) - mc.mean) <= 3.0 * mc.standard_error);
    }
  }
  CHECK_THROWS_AS(geometric_constant(0, 1), std::invalid_argument);
  CHECK_THROWS_AS(geometric_constant(1, 0.5), std::invalid_argument);
}

TEST_CASE("dyadic package test") {
  CHECK(is_pca2({{5, 2, 2}}));
  CHECK_FALSE(is_pca2({{1, 2, 3}}));
  CHECK(is_pca2({{1}}));
  CHECK(is_pca2({{1, 1, 1, 4, 4, 4, 4}}));
  CHECK_FALSE(is_pca2({{1, 1, 1, 4, 4, 4, 3}}));
  CHECK(is_pca2({{1, 1, 1, 4, 4}}));  // truncated final package
}

TEST_CASE("lower piecewise-constant approximation") {
  const auto psi = lower_pca_approximation(ramp_law(), 4, 0.5);
  CHECK(evaluate(psi, 1.6) == doctest::Approx(0.5));
  CHECK(evaluate(psi, 1.6) <= evaluate(ramp_law(), 1.6));
  CHECK_THROWS_AS(lower_pca_approximation(ramp_law(), 2, 0.5), std::domain_error);

  const auto same = lower_pca_approximation(step_law(1), 5, 1.0);
  for (double t : grid(0.0, 10.0, 1001)) CHECK(evaluate(same, t) == evaluate(step_law(1), t));

  const std::vector<InteractionLaw> laws = {ramp_law(), smooth_generic(), pca_law({1, 2, 0.5}), step_law(2.5)};
  for (const auto& law : laws) {
    const auto coarse = lower_pca_approximation(law, 8, 0.5);
    const auto fine = lower_pca_approximation(law, 16, 0.25);
    for (double t : grid(0.0, 6.0, 10000)) {
      CHECK(evaluate(coarse, t) <= evaluate(law, t) + 1e-15);
      CHECK(evaluate(fine, t) >= evaluate(coarse, t) - 1e-15);
    }
  }
}

TEST_CASE("law specification round trip") {
  const std::vector<InteractionLaw> all = {step_law(1.5), pca_law({1, 1, 1}), ramp_law(),
                                           rescale(pca_law({2, 0, 1}), 0.5, 3.0)};
  for (const auto& law : all) {
    const auto again = law_from_json(law_to_json(law));
    CHECK(describe(again) == describe(law));
    for (double t : grid(0.0, 8.0, 161)) CHECK(evaluate(again, t) == evaluate(law, t));
  }
  CHECK(describe(parse_law("pca:[1,1,1]")) == describe(pca_law({1, 1, 1})));
  CHECK(evaluate(parse_law("step:2"), 2.5) == 1.0);
  CHECK(evaluate(parse_law(R"({"type":"ramp"})"), 1.5) == doctest::Approx(0.5));
  CHECK_THROWS_AS(parse_law("{\"type\":\"wave\"}"), std::invalid_argument);
  CHECK_THROWS_AS(parse_law("{\"type\":\"step\"}"), std::invalid_argument);
  CHECK_THROWS_AS(parse_law("{not json"), std::invalid_argument);
  CHECK_THROWS_AS(parse_law("pca:[1,"), std::invalid_argument);

  const std::string path = "test_laws_spec.json";
  {
    std::ofstream file(path);
    file << R"({"type": "rescaled", "alpha": 3, "beta": 2, "base": {"type": "step", "k": 1}})";
  }
  CHECK(scale_factor(load_law(path)) == doctest::Approx(6.0));
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_law("no-such-law-file.json"), std::invalid_argument);
}
