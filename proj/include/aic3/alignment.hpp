#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aic3/thurstone.hpp"
#include "aic3/types.hpp"

namespace aic3 {

using ScaleMap = std::map<StimulusKey, double>;

// How many independent boosted-to-plain transforms are fitted.
enum class Granularity { global, per_source, per_codec, per_pair };
inline constexpr std::array<Granularity, 4> kAllGranularities{Granularity::global, Granularity::per_source,
                                                              Granularity::per_codec, Granularity::per_pair};

std::string_view to_string(Granularity g);
Granularity parse_granularity(std::string_view s);

// Group label a stimulus falls into under granularity g.
std::string alignment_group(Granularity g, const StimulusKey& key);

// y = a x + b x^2, no constant term.
struct Quadratic {
  double a = 1.0;
  double b = 0.0;
  double operator()(double x) const { return a * x + b * x * x; }
};

struct AlignmentModel {
  Granularity granularity = Granularity::global;
  std::map<std::string, Quadratic> coefficients;
  double rss = 0.0;
  int points = 0;

  // Set by select_granularity.
  int aic_parameter_count = 0;
  double log_likelihood = std::numeric_limits<double>::quiet_NaN();
  double aic = std::numeric_limits<double>::quiet_NaN();

  int parameter_count() const { return static_cast<int>(coefficients.size()) * 2; }
  double apply(const StimulusKey& key, double boosted_jnd) const;
  ScaleMap apply(const ScaleMap& boosted_jnd) const;
};

// Least squares fit of plain (PTC) JND on boosted (BTC) JND over the stimuli both
// maps share, excluding the source anchor. Optional per-stimulus weights turn it
// into weighted least squares.
AlignmentModel fit_alignment(const ScaleMap& btc_jnd, const ScaleMap& ptc_jnd, Granularity granularity,
                             const ScaleMap* weights = nullptr);

enum class AicMode {
  // lnL of the plain-protocol comparisons under the transformed boosted scales.
  ptc_likelihood,
  // n ln(RSS / n) of the alignment regression.
  regression_residual,
};

struct AicOptions {
  AicMode mode = AicMode::ptc_likelihood;
  // Boosted-scale parameters counted on top of the transform; defaults to the
  // number of non-anchor boosted stimuli.
  std::optional<int> btc_param_count;
  double epsilon = 1e-6;
};

// AIC = 2k - 2 lnL with k = btc_param_count + transform parameters. Scores every
// model in place and returns the index of the minimum.
std::size_t select_granularity(std::vector<AlignmentModel>& models, const ScaleMap& btc_jnd,
                               const std::vector<ComparisonCounts>& ptc_counts, const AicOptions& options = {});

}  // namespace aic3
