#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "aic3/design.hpp"
#include "aic3/records.hpp"
#include "aic3/rng.hpp"

namespace aic3 {

// Quadratic boosting gain: boosted = a * plain + b * plain^2 (JND units).
struct BoostGain {
  double a = 1.0;
  double b = 0.0;

  double apply(double plain) const { return a * plain + b * plain * plain; }
};

// Planted latent impairments for simulated observers.
struct GroundTruth {
  // Plain (unboosted) impairment in JND units; the source (level 0) is 0.
  std::map<StimulusKey, double> scale;
  // Keyed by (source_id, codec_id). Missing entries mean identity.
  std::map<std::pair<std::string, std::string>, BoostGain> boost_gain;
  double lapse_rate = 0.0;
  // Half-width, in JND, of the band of perceived differences answered "not sure".
  double not_sure_band = 0.2;

  // Impairment the observer perceives under `protocol` (boosted scale for BTC).
  double latent(const StimulusKey& key, Protocol protocol) const;
  BoostGain gain_for(const std::string& source_id, const std::string& codec_id) const;
  void validate() const;

  // level * jnd_per_level for every (source, codec, level 1..10) plus the anchors.
  static GroundTruth linear(const DesignConfig& config, double jnd_per_level, BoostGain gain = {});

  static GroundTruth load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

struct ObserverProfile {
  double lapse_rate = 0.0;
  double not_sure_band = 0.2;
  // Probability that a lapsed answer is "right"; otherwise lapses are uniform.
  double right_bias = 0.0;
};

Answer simulate_response(const TripletQuestion& question, const GroundTruth& truth, Rng& rng);
Answer simulate_response(const TripletQuestion& question, const GroundTruth& truth, const ObserverProfile& observer,
                         Rng& rng);

struct ReliabilityMix {
  double unreliable_fraction = 0.0;
  ObserverProfile unreliable{0.8, 0.2, 0.0};
};

struct CampaignOptions {
  int n_workers = 100;
  ReliabilityMix mix;
  // Chance a worker takes two batches instead of one.
  double two_batch_probability = 0.5;
  std::int64_t start_ms = 1'700'000'000'000;
  std::uint64_t seed = 0;
};

struct SimulatedCampaign {
  std::vector<ResponseRecord> responses;
  std::vector<std::string> unreliable_workers;
};

// Workers draw one or two batches in a balanced rotation and answer every question
// in a per-worker shuffled order.
SimulatedCampaign simulate_campaign(const DesignIndex& design, const GroundTruth& truth,
                                    const CampaignOptions& options);

}  // namespace aic3
