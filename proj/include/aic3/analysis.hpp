#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aic3/design.hpp"
#include "aic3/records.hpp"
#include "aic3/thurstone.hpp"

namespace aic3 {

inline constexpr double kDefaultReliabilityThreshold = 0.70;

// One worker's pass over one batch.
struct BatchInstance {
  std::string worker_id;
  std::string batch_id;
  Protocol protocol = Protocol::btc;
  int qualifying = 0;
  int correct = 0;
  double accuracy = 0.0;
  bool kept = false;
};

struct FilterReport {
  double threshold = kDefaultReliabilityThreshold;
  std::vector<BatchInstance> instances;
  // Accuracy histogram over [0, 1] in 20 equal bins, per protocol.
  std::map<Protocol, std::vector<int>> histogram;
  std::map<Protocol, int> batches_total, batches_kept, workers_total, workers_kept;
};

struct FilterResult {
  std::vector<ResponseRecord> kept;
  FilterReport report;
};

// Keeps a batch instance iff its accuracy on same-codec level-0 vs level-10
// questions (traps included) reaches `threshold`. "Not sure" counts as wrong.
FilterResult filter_batches(const std::vector<ResponseRecord>& responses, const DesignIndex& design,
                            double threshold = kDefaultReliabilityThreshold);

// Counts for one (source, protocol). "Not sure" adds 0.5 in each direction;
// bias questions are skipped. The source anchor is always included.
ComparisonCounts build_counts(const std::vector<ResponseRecord>& responses, const DesignIndex& design,
                              const std::string& source_id, Protocol protocol);

struct PsychometricPoint {
  int level = 0;
  double proportion = 0.0;
  int cells = 0;
  int responses = 0;
};

struct PsychometricCurve {
  Protocol protocol = Protocol::btc;
  std::vector<PsychometricPoint> points;
  // Fractional level where the curve first reaches 0.75, by linear interpolation
  // (chance level 0.5 is assumed at level 0).
  std::optional<double> jnd_threshold_level;
  // (level, "source/codec") cells without data, excluded from the averages.
  std::vector<std::string> empty_cells;
};

std::optional<double> threshold_crossing(const std::vector<PsychometricPoint>& points, double target = 0.75);

std::map<Protocol, PsychometricCurve> psychometric_curves(const std::vector<ResponseRecord>& responses,
                                                          const DesignIndex& design);

struct BiasTally {
  int left = 0;
  int right = 0;
  int not_sure = 0;
  // Two-sided exact binomial test of left vs right at p = 0.5.
  double p_value = 1.0;
  bool biased(double alpha = 0.05) const { return p_value < alpha; }
};

BiasTally tally_bias(const std::vector<ResponseRecord>& responses, const DesignIndex& design,
                     std::optional<Protocol> protocol = std::nullopt);

struct BiasReport {
  std::map<Protocol, BiasTally> before_filtering;
  std::map<Protocol, BiasTally> after_filtering;
};

BiasReport bias_report(const std::vector<ResponseRecord>& all_responses, const std::vector<ResponseRecord>& kept,
                       const DesignIndex& design);

}  // namespace aic3
