#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "aic3/rng.hpp"
#include "aic3/types.hpp"

namespace aic3 {

// One triplet (left, source, right). Both test stimuli share the source image.
struct TripletQuestion {
  std::string question_id;
  Protocol protocol = Protocol::btc;
  QuestionKind kind = QuestionKind::same_codec;
  std::string source_id;
  StimulusKey left;
  StimulusKey right;
  // Disambiguates repeated trap questions on the same ordered pair.
  int replicate = 0;
  std::string batch_id;

  // Codec of the question's source-codec cell: the non-source side (left side for
  // cross-codec questions).
  const std::string& codec_group() const;
  bool is_zero_vs(int level) const;
};

struct Batch {
  std::string batch_id;
  Protocol protocol = Protocol::btc;
  std::vector<TripletQuestion> questions;
};

struct DesignConfig {
  std::vector<std::string> sources;
  std::vector<std::string> codecs;
  std::vector<int> btc_levels{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<int> ptc_levels{0, 2, 4, 6, 8, 10};
  double cross_codec_ratio = 0.2;
  // "Similar bitrate" proxy for cross-codec pairs.
  int max_cross_level_gap = 1;
  int n_batches = 10;
  int btc_bias_count = 100;
  int btc_trap_count = 200;
  int ptc_bias_count = 50;
  int ptc_trap_count = 100;
  std::uint64_t rng_seed = 0;

  // Five sources by five codecs, all other fields at their defaults.
  static DesignConfig standard();

  const std::vector<int>& levels(Protocol p) const { return p == Protocol::btc ? btc_levels : ptc_levels; }
  int bias_count(Protocol p) const { return p == Protocol::btc ? btc_bias_count : ptc_bias_count; }
  int trap_count(Protocol p) const { return p == Protocol::btc ? btc_trap_count : ptc_trap_count; }
  void validate() const;
};

// Deterministic id from (protocol, kind, stimuli, order, replicate).
std::string question_id_for(const TripletQuestion& q);

std::vector<TripletQuestion> generate_same_codec(const DesignConfig& config, Protocol protocol);
std::vector<TripletQuestion> generate_cross_codec(const DesignConfig& config, Protocol protocol, Rng& rng);
std::vector<TripletQuestion> generate_bias_and_trap(const DesignConfig& config, Protocol protocol);
std::vector<Batch> split_into_batches(std::vector<TripletQuestion> questions, const DesignConfig& config,
                                      Protocol protocol, Rng& rng);

// Full design for one protocol, seeded from config.rng_seed.
std::vector<Batch> generate_design(const DesignConfig& config, Protocol protocol);

// JSON-lines manifest: one question per line, batch_id included.
void write_manifest(std::ostream& out, const std::vector<Batch>& batches);
std::string manifest_string(const std::vector<Batch>& batches);

// Read-side view of a manifest: questions by id plus batch membership.
class DesignIndex {
 public:
  DesignIndex() = default;
  explicit DesignIndex(std::vector<TripletQuestion> questions);

  static DesignIndex load(const std::filesystem::path& manifest);
  static DesignIndex parse(std::istream& in);
  void merge(const DesignIndex& other);

  const TripletQuestion* find(const std::string& question_id) const;
  const TripletQuestion& at(const std::string& question_id) const;
  const std::vector<TripletQuestion>& questions() const { return questions_; }
  std::vector<std::string> batch_ids() const;
  std::vector<const TripletQuestion*> batch(const std::string& batch_id) const;
  std::vector<std::string> source_ids() const;

 private:
  std::vector<TripletQuestion> questions_;
  std::map<std::string, std::size_t> by_id_;
};

}  // namespace aic3
