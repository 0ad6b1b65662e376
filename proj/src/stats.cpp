#include "aic3/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/normal.hpp>

#include "aic3/errors.hpp"

namespace aic3 {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InputError("normal_quantile: p must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double thurstone_units_per_jnd() {
  static const double value = normal_quantile(0.75);
  return value;
}

double percentile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw InputError("percentile of empty sample");
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double binomial_two_sided_p(std::uint64_t k, std::uint64_t n) {
  if (n == 0) return 1.0;
  if (k > n) throw InputError("binomial test: k > n");
  boost::math::binomial_distribution<double> dist(static_cast<double>(n), 0.5);
  const double kd = static_cast<double>(std::min(k, n - k));
  // Symmetric null: double the smaller tail.
  return std::min(1.0, 2.0 * boost::math::cdf(dist, kd));
}

}  // namespace aic3
