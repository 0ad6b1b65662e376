#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "aic3/types.hpp"

namespace aic3 {

// Paired-comparison counts over the stimuli of one source. count(i, k) is the
// (possibly fractional) number of times stimulus i was judged more impaired than k.
class ComparisonCounts {
 public:
  ComparisonCounts() = default;
  explicit ComparisonCounts(std::vector<StimulusKey> stimuli);

  std::size_t size() const { return stimuli_.size(); }
  const std::vector<StimulusKey>& stimuli() const { return stimuli_; }
  std::optional<std::size_t> index_of(const StimulusKey& key) const;
  // Index of the level-0 source stimulus, if present.
  std::optional<std::size_t> anchor() const;

  double count(std::size_t worse, std::size_t better) const { return counts_[worse * stimuli_.size() + better]; }
  void add(std::size_t worse, std::size_t better, double weight);
  void clear();

  // Sum over all ordered pairs.
  double total() const;

 private:
  std::vector<StimulusKey> stimuli_;
  std::map<StimulusKey, std::size_t> index_;
  std::vector<double> counts_;
};

struct ReconstructionOptions {
  // Choice probabilities are clamped to [epsilon, 1 - epsilon].
  double epsilon = 1e-6;
  double gradient_tolerance = 1e-7;
  int max_iterations = 1000;
  // Optional starting point in Thurstone units (index-aligned with the stimuli).
  std::optional<std::vector<double>> start;
  // Also report asymptotic standard errors from the observed information.
  bool standard_errors = false;
};

struct ScaleFit {
  // Thurstone units, index-aligned with ComparisonCounts::stimuli(); anchor is 0.
  std::vector<double> scales;
  double log_likelihood = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;
  // Log-likelihood after each accepted step, starting with the initial point.
  std::vector<double> likelihood_trace;
  // Thurstone units; empty unless requested. The anchor has 0 by construction.
  std::vector<double> standard_errors;

  std::map<StimulusKey, double> as_map(const ComparisonCounts& counts) const;
};

// sum_{i != k} c_ik * ln clamp(Phi(s_i - s_k), eps, 1 - eps)
double log_likelihood(const ComparisonCounts& counts, std::span<const double> scales, double epsilon = 1e-6);

// Connected components of the comparison graph (edge when c_ik + c_ki > 0).
std::vector<std::vector<std::size_t>> comparison_components(const ComparisonCounts& counts);

// Maximum-likelihood Thurstone Case V scales anchored at the source stimulus.
// Throws AnalysisError for a missing anchor or a disconnected comparison graph.
ScaleFit reconstruct_scales(const ComparisonCounts& counts, const ReconstructionOptions& options = {});

double to_jnd(double thurstone_units);
std::map<StimulusKey, double> to_jnd(const std::map<StimulusKey, double>& scales);

}  // namespace aic3
