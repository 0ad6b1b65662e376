#pragma once

#include <filesystem>
#include <string>

#include "aic3/raster.hpp"
#include "aic3/types.hpp"

namespace aic3 {

struct BoostConfig {
  double amplification_factor = 2.0;
  bool zoom_enabled = true;
  int lanczos_taps = 3;

  void validate() const;
};

struct Stimulus {
  std::string source_id;
  std::string codec_id;
  int level = 0;
  std::filesystem::path image_path;
  bool boosted = false;

  StimulusKey key() const { return make_key(source_id, codec_id, level); }
};

// out = clamp(round(source + factor * (distorted - source)), 0, 255) per channel sample.
RasterImage amplify_artifacts(const RasterImage& source, const RasterImage& distorted, double factor);

// Centered half-size crop upscaled 2x back to the input size.
RasterImage zoom_boost(const RasterImage& image, int taps = 3);

enum class StimulusVariant { plain, boosted, zoomed_src };

// On-disk layout: <root>/<source_id>/<codec_id>/<level>_{plain|boosted|zoomed_src}.png
class StimulusStore {
 public:
  explicit StimulusStore(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path path_for(const StimulusKey& key, StimulusVariant variant) const;
  // Same path relative to the root, with '/' separators (used in stimulus URLs).
  std::string relative_path(const StimulusKey& key, StimulusVariant variant) const;

 private:
  std::filesystem::path root_;
};

// Zooms both images (if enabled), amplifies the zoomed pair and writes the boosted
// image plus the zoomed source into `store` next to the distorted stimulus. The
// returned stimulus points at the boosted image.
Stimulus prepare_boosted_stimulus(const Stimulus& source, const Stimulus& distorted, const BoostConfig& config,
                                  const StimulusStore& store);

}  // namespace aic3

namespace aic3 {

struct PrepSummary {
  int sources = 0;
  int stimuli = 0;
};

// Walks an input store holding only *_plain.png images, copies them to `out`
// and writes the boosted and zoomed-source variants for every stimulus,
// including the source itself.
PrepSummary prepare_store(const StimulusStore& in, const StimulusStore& out, const BoostConfig& config);

}  // namespace aic3
