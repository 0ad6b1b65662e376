#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "aic3/alignment.hpp"
#include "aic3/analysis.hpp"
#include "aic3/design.hpp"
#include "aic3/records.hpp"
#include "aic3/thurstone.hpp"

namespace aic3 {

struct ScaleResult {
  StimulusKey stimulus;
  Protocol protocol = Protocol::btc;
  bool aligned = false;
  double scale_jnd = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct AnalysisConfig {
  double reliability_threshold = kDefaultReliabilityThreshold;
  ReconstructionOptions reconstruction;
  // Empty selects the granularity by AIC.
  std::optional<Granularity> granularity;
  AicOptions aic;
  // Weight alignment points by the inverse variance of the plain-scale estimate.
  bool weighted_alignment = false;
  int bootstrap_samples = 10'000;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  // Hard failure if more than this share of replicates cannot be reconstructed.
  double max_failed_fraction = 0.01;
};

// Point estimates for every source of one protocol, in JND units (anchors included).
struct ProtocolScales {
  ScaleMap jnd;
  ScaleMap standard_error_jnd;
};

ProtocolScales reconstruct_protocol(const std::vector<ResponseRecord>& responses, const DesignIndex& design,
                                    Protocol protocol, const ReconstructionOptions& options = {});

struct BootstrapDiagnostics {
  int requested = 0;
  int completed = 0;
  int dropped = 0;
};

struct BootstrapResult {
  std::vector<ScaleResult> results;
  BootstrapDiagnostics diagnostics;
};

// Percentile bootstrap: responses are resampled with replacement within each
// question, then reconstruction (and alignment, when `alignment` is set) is rerun.
// Replicate r uses its own RNG stream derived from config.seed, so the output does
// not depend on thread scheduling. CIs are widened to contain the point estimate.
BootstrapResult bootstrap_cis(const std::vector<ResponseRecord>& kept, const DesignIndex& design,
                              const AnalysisConfig& config, const std::map<Protocol, ProtocolScales>& point,
                              const std::optional<AlignmentModel>& alignment);

struct AnalysisResult {
  FilterResult filter;
  BiasReport bias;
  std::map<Protocol, PsychometricCurve> psychometric;
  std::map<Protocol, ProtocolScales> scales;
  // Fitted candidates with AIC scores, and the chosen one (both protocols present).
  std::vector<AlignmentModel> candidates;
  std::optional<AlignmentModel> alignment;
  std::vector<ScaleResult> results;
  BootstrapDiagnostics bootstrap;
};

// Filtering, reconstruction, alignment, bootstrap, plus the bias and psychometric
// reports. bootstrap_samples == 0 skips the bootstrap (CIs collapse to the estimate).
AnalysisResult analyze(const std::vector<ResponseRecord>& responses, const DesignIndex& design,
                       const AnalysisConfig& config);

}  // namespace aic3
