#include "aic3/stimulus_prep.hpp"

#include <algorithm>
#include <cmath>

#include "aic3/errors.hpp"
#include "aic3/hash.hpp"
#include "aic3/parallel.hpp"
#include "aic3/resample.hpp"

namespace aic3 {

void BoostConfig::validate() const {
  if (!(amplification_factor >= 1.0) || !std::isfinite(amplification_factor))
    throw InputError("amplification factor must be >= 1");
  if (lanczos_taps < 1) throw InputError("lanczos taps must be >= 1");
}

RasterImage amplify_artifacts(const RasterImage& source, const RasterImage& distorted, double factor) {
  if (!source.same_shape(distorted))
    throw InputError("amplify_artifacts: source is " + std::to_string(source.width()) + "x" +
                     std::to_string(source.height()) + " but distorted is " + std::to_string(distorted.width()) +
                     "x" + std::to_string(distorted.height()));
  RasterImage out(source.width(), source.height());
  const auto src = source.samples();
  const auto dis = distorted.samples();
  auto dst = out.samples();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const double s = src[i];
    const double v = s + factor * (static_cast<double>(dis[i]) - s);
    dst[i] = static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
  }
  return out;
}

RasterImage zoom_boost(const RasterImage& image, int taps) {
  const int w = image.width();
  const int h = image.height();
  if (w % 2 != 0 || h % 2 != 0)
    throw InputError("zoom_boost needs even dimensions, got " + std::to_string(w) + "x" + std::to_string(h));
  const int cw = w / 2;
  const int ch = h / 2;
  const auto crop = image.crop((w - cw) / 2, (h - ch) / 2, cw, ch);
  return resize_lanczos(crop, w, h, taps);
}

std::filesystem::path StimulusStore::path_for(const StimulusKey& key, StimulusVariant variant) const {
  return root_ / relative_path(key, variant);
}

std::string StimulusStore::relative_path(const StimulusKey& key, StimulusVariant variant) const {
  std::string suffix;
  switch (variant) {
    case StimulusVariant::plain: suffix = "plain"; break;
    case StimulusVariant::boosted: suffix = "boosted"; break;
    case StimulusVariant::zoomed_src: suffix = "zoomed_src"; break;
  }
  return key.source_id + "/" + key.codec_id + "/" + std::to_string(key.level) + "_" + suffix + ".png";
}

Stimulus prepare_boosted_stimulus(const Stimulus& source, const Stimulus& distorted, const BoostConfig& config,
                                  const StimulusStore& store) {
  config.validate();
  if (source.source_id != distorted.source_id)
    throw InputError("source_id mismatch: '" + source.source_id + "' vs '" + distorted.source_id + "'");
  if (source.level != 0) throw InputError("boosting reference must be the level-0 source");
  const auto key = distorted.key();

  auto src_img = read_png(source.image_path);
  auto dis_img = read_png(distorted.image_path);
  if (config.zoom_enabled) {
    src_img = zoom_boost(src_img, config.lanczos_taps);
    dis_img = zoom_boost(dis_img, config.lanczos_taps);
  }
  const auto boosted = amplify_artifacts(src_img, dis_img, config.amplification_factor);

  Stimulus out = distorted;
  out.codec_id = key.codec_id;
  out.image_path = store.path_for(key, StimulusVariant::boosted);
  out.boosted = true;
  write_png(out.image_path, boosted);
  write_png(store.path_for(key, StimulusVariant::zoomed_src), src_img);
  return out;
}

}  // namespace aic3

namespace aic3 {

PrepSummary prepare_store(const StimulusStore& in, const StimulusStore& out, const BoostConfig& config) {
  config.validate();
  namespace fs = std::filesystem;
  if (!fs::is_directory(in.root())) throw IoError("stimulus directory " + in.root().string() + " does not exist");

  std::vector<StimulusKey> keys;
  PrepSummary summary;
  for (const auto& src_dir : fs::directory_iterator(in.root())) {
    if (!src_dir.is_directory()) continue;
    const auto source_id = src_dir.path().filename().string();
    const auto source_key = make_key(source_id, "", 0);
    if (!fs::exists(in.path_for(source_key, StimulusVariant::plain)))
      throw InputError("source " + source_id + " has no " + in.relative_path(source_key, StimulusVariant::plain));
    ++summary.sources;
    keys.push_back(source_key);
    for (const auto& codec_dir : fs::directory_iterator(src_dir.path())) {
      const auto codec = codec_dir.path().filename().string();
      if (!codec_dir.is_directory() || codec == kSourceCodec) continue;
      for (const auto& file : fs::directory_iterator(codec_dir.path())) {
        const auto name = file.path().filename().string();
        const auto us = name.find("_plain.png");
        if (us == std::string::npos || us + 10 != name.size()) continue;
        int level = -1;
        try {
          level = std::stoi(name.substr(0, us));
        } catch (const std::exception&) {
          throw InputError("cannot parse level from " + file.path().string());
        }
        keys.push_back(make_key(source_id, codec, level));
      }
    }
  }
  std::sort(keys.begin(), keys.end());

  parallel_for(keys.size(), [&](std::size_t i) {
    const auto& key = keys[i];
    const auto plain_in = in.path_for(key, StimulusVariant::plain);
    const auto plain_out = out.path_for(key, StimulusVariant::plain);
    if (fs::absolute(plain_in) != fs::absolute(plain_out)) write_file_atomic(plain_out, read_file(plain_in));
    Stimulus source{key.source_id, std::string(kSourceCodec), 0, in.path_for(make_key(key.source_id, "", 0), StimulusVariant::plain), false};
    Stimulus distorted{key.source_id, key.codec_id, key.level, plain_in, false};
    prepare_boosted_stimulus(source, distorted, config, out);
  });
  summary.stimuli = static_cast<int>(keys.size());
  return summary;
}

}  // namespace aic3
