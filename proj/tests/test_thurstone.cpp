#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"

#include "aic3/errors.hpp"
#include "aic3/rng.hpp"
#include "aic3/stats.hpp"
#include "aic3/thurstone.hpp"

using namespace aic3;

namespace {

std::vector<StimulusKey> chain(int n) {
  std::vector<StimulusKey> keys{make_key("s", "source", 0)};
  for (int i = 1; i < n; ++i) keys.push_back(make_key("s", "c", i));
  return keys;
}

// Binomial draws of n comparisons per unordered pair under Case V.
ComparisonCounts simulated_counts(const std::vector<double>& planted, int n, std::uint64_t seed) {
  ComparisonCounts counts(chain(static_cast<int>(planted.size())));
  auto rng = rng_stream(seed, 0);
  for (std::size_t i = 0; i < planted.size(); ++i)
    for (std::size_t k = i + 1; k < planted.size(); ++k) {
      std::binomial_distribution<int> draw(n, normal_cdf(planted[i] - planted[k]));
      const int worse = draw(rng);
      counts.add(i, k, worse);
      counts.add(k, i, n - worse);
    }
  return counts;
}

}  // namespace

TEST_CASE("75/25 counts reconstruct to one JND") {
  ComparisonCounts counts(chain(2));
  counts.add(1, 0, 75);
  counts.add(0, 1, 25);
  const auto fit = reconstruct_scales(counts);

  // Grid search over the binomial likelihood.
  double best = 0.0, best_ll = -1e300;
  for (int i = 0; i <= 200000; ++i) {
    const double d = i * 1e-5;
    const double ll = 75 * std::log(normal_cdf(d)) + 25 * std::log(1.0 - normal_cdf(d));
    if (ll > best_ll) best_ll = ll, best = d;
  }
  CHECK(best == doctest::Approx(0.6745).epsilon(1e-4));
  CHECK(fit.scales[0] == 0.0);
  CHECK(fit.scales[1] == doctest::Approx(best).epsilon(1e-4));
  CHECK(to_jnd(fit.scales[1]) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(fit.log_likelihood == doctest::Approx(best_ll).epsilon(1e-9));
}

TEST_CASE("symmetric counts give a flat scale") {
  ComparisonCounts counts(chain(4));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t k = 0; k < 4; ++k)
      if (i != k) counts.add(i, k, 50);
  const auto fit = reconstruct_scales(counts);
  for (double s : fit.scales) CHECK(std::abs(s) < 1e-9);
}

TEST_CASE("planted chain is recovered") {
  const std::vector<double> planted{0.0, 0.4, 1.1, 1.9};
  const auto fit = reconstruct_scales(simulated_counts(planted, 10000, 17));
  for (std::size_t i = 0; i < planted.size(); ++i) CHECK(std::abs(fit.scales[i] - planted[i]) < 0.03);
}

TEST_CASE("likelihood never decreases and the optimum is independent of the start") {
  const std::vector<double> planted{0.0, 0.3, 0.9, 1.6, 2.8, 3.5};
  const auto counts = simulated_counts(planted, 40, 23);
  const auto fit = reconstruct_scales(counts);
  REQUIRE(fit.likelihood_trace.size() >= 2);
  for (std::size_t i = 1; i < fit.likelihood_trace.size(); ++i)
    CHECK(fit.likelihood_trace[i] >= fit.likelihood_trace[i - 1] - 1e-12 * (1.0 + std::abs(fit.likelihood_trace[i - 1])));
  CHECK(fit.gradient_norm < 1e-7);

  auto rng = rng_stream(5, 0);
  std::uniform_real_distribution<double> u(-3.0, 6.0);
  for (int trial = 0; trial < 10; ++trial) {
    ReconstructionOptions options;
    std::vector<double> start(planted.size());
    for (auto& s : start) s = u(rng);
    start[0] = 0.0;
    options.start = start;
    const auto other = reconstruct_scales(counts, options);
    for (std::size_t i = 0; i < planted.size(); ++i) CHECK(other.scales[i] == doctest::Approx(fit.scales[i]).epsilon(1e-5));
  }
}

TEST_CASE("relabeling stimuli does not change the estimates") {
  const std::vector<double> planted{0.0, 0.5, 1.0, 2.2, 0.7};
  const auto counts = simulated_counts(planted, 25, 31);
  const auto base = reconstruct_scales(counts).as_map(counts);

  auto keys = counts.stimuli();
  std::reverse(keys.begin(), keys.end());
  ComparisonCounts shuffled(keys);
  for (std::size_t i = 0; i < counts.size(); ++i)
    for (std::size_t k = 0; k < counts.size(); ++k)
      if (i != k) shuffled.add(*shuffled.index_of(counts.stimuli()[i]), *shuffled.index_of(counts.stimuli()[k]), counts.count(i, k));
  const auto other = reconstruct_scales(shuffled).as_map(shuffled);
  for (const auto& [key, v] : base) CHECK(other.at(key) == doctest::Approx(v).epsilon(1e-6));
}

TEST_CASE("unanimous comparisons stay finite") {
  ComparisonCounts counts(chain(3));
  counts.add(1, 0, 30);
  counts.add(2, 1, 30);
  counts.add(2, 0, 30);
  const auto fit = reconstruct_scales(counts);
  for (double s : fit.scales) CHECK(std::isfinite(s));
  CHECK(fit.scales[2] > fit.scales[1]);
  CHECK(fit.scales[1] > 0.0);
}

TEST_CASE("standard errors shrink with more data") {
  const std::vector<double> planted{0.0, 0.5, 1.0};
  ReconstructionOptions options;
  options.standard_errors = true;
  const auto small = reconstruct_scales(simulated_counts(planted, 100, 3), options);
  const auto large = reconstruct_scales(simulated_counts(planted, 400, 3), options);
  REQUIRE(small.standard_errors.size() == 3);
  CHECK(small.standard_errors[0] == 0.0);
  CHECK(large.standard_errors[2] / small.standard_errors[2] == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("reconstruction errors") {
  ComparisonCounts no_anchor({make_key("s", "c", 1), make_key("s", "c", 2)});
  no_anchor.add(0, 1, 3);
  CHECK_THROWS_AS(reconstruct_scales(no_anchor), AnalysisError);

  ComparisonCounts split(chain(4));
  split.add(0, 1, 3);
  split.add(2, 3, 3);
  CHECK(comparison_components(split).size() == 2);
  CHECK_THROWS_AS(reconstruct_scales(split), AnalysisError);
}

TEST_CASE("JND conversion") {
  CHECK(to_jnd(0.6745) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(to_jnd(0.0) == 0.0);
  CHECK(to_jnd(1.3490) == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(to_jnd(-0.6745) == doctest::Approx(-1.0).epsilon(1e-3));
}
