#pragma once

// Globally adaptive Gauss-Kronrod (7/15) integration on a finite interval.
//
// The panel with the largest error estimate is bisected until the summed
// estimate meets max(abs_tol, rel_tol * |I|) or the subdivision cap is hit.
// Integrands with finitely many jump discontinuities are fine: panels that
// straddle a jump keep getting split until their width times the jump is
// below tolerance.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <span>
#include <stdexcept>
#include <vector>

namespace nlshape::quadrature {

struct Result {
  double value = 0.0;
  double error = 0.0;
  int subdivisions = 0;
  bool converged = true;
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double lower;
  double upper;
  double value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

template <class F>
Panel gauss_kronrod_15(F& f, double lower, double upper) {
  const double centre = 0.5 * (lower + upper);
  const double half = 0.5 * (upper - lower);
  const double fc = f(centre);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double sum = f(centre - dx) + f(centre + dx);
    kronrod += kKronrodWeights[j] * sum;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
  }
  kronrod *= half;
  gauss *= half;
  return {lower, upper, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

/// Integrates f over [cuts.front(), cuts.back()]; interior cuts seed the
/// initial partition (kinks, jumps, support edges).
template <class F>
Result integrate(F&& f, std::span<const double> cuts, double abs_tol, double rel_tol,
                 int max_subdivisions) {
  if (cuts.size() < 2) throw std::invalid_argument("integrate: need at least two cut points");
  std::priority_queue<detail::Panel> panels;
  double value = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (!(cuts[i] <= cuts[i + 1])) throw std::invalid_argument("integrate: cuts must be sorted");
    if (cuts[i] == cuts[i + 1]) continue;
    auto panel = detail::gauss_kronrod_15(f, cuts[i], cuts[i + 1]);
    value += panel.value;
    error += panel.error;
    panels.push(panel);
  }
  Result result;
  std::vector<detail::Panel> frozen;
  while (!panels.empty() && error > std::max(abs_tol, rel_tol * std::abs(value))) {
    if (result.subdivisions >= max_subdivisions) {
      result.converged = false;
      break;
    }
    auto worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.lower + worst.upper);
    const double scale = std::max(std::abs(worst.lower), std::abs(worst.upper));
    if (worst.upper - worst.lower <= 64.0 * std::numeric_limits<double>::epsilon() * scale) {
      // Cannot be resolved further in double precision.
      frozen.push_back(worst);
      continue;
    }
    auto left = detail::gauss_kronrod_15(f, worst.lower, mid);
    auto right = detail::gauss_kronrod_15(f, mid, worst.upper);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
    ++result.subdivisions;
  }
  // Re-sum from the panel list to shed accumulated cancellation in the
  // running totals.
  double total = 0.0;
  double total_error = 0.0;
  for (const auto& panel : frozen) {
    total += panel.value;
    total_error += panel.error;
  }
  while (!panels.empty()) {
    total += panels.top().value;
    total_error += panels.top().error;
    panels.pop();
  }
  result.value = total;
  result.error = total_error;
  if (total_error > std::max(abs_tol, rel_tol * std::abs(total))) result.converged = false;
  return result;
}

template <class F>
Result integrate(F&& f, double lower, double upper, double abs_tol, double rel_tol,
                 int max_subdivisions = 2000) {
  const std::array<double, 2> cuts = {lower, upper};
  return integrate(std::forward<F>(f), std::span<const double>(cuts), abs_tol, rel_tol,
                   max_subdivisions);
}

}  // namespace nlshape::quadrature
