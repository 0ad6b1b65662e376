#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace aic3 {

double normal_cdf(double x);
double normal_pdf(double x);
double normal_quantile(double p);

// Phi^-1(0.75): the Thurstone-unit distance that is discriminated 75% of the time,
// i.e. one JND.
double thurstone_units_per_jnd();

// Linear-interpolated percentile (numpy "linear" method). `sorted` must be ascending.
double percentile_sorted(std::span<const double> sorted, double q);

// Exact two-sided binomial test p-value for k successes in n trials under p = 0.5.
double binomial_two_sided_p(std::uint64_t k, std::uint64_t n);

}  // namespace aic3
