#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "aic3/design.hpp"
#include "aic3/raster.hpp"

namespace testing {

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "aic3-test-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Direct 2D evaluation of the Lanczos-a resampling sum at every output pixel, with
// pixel centers aligned and edge samples replicated. Upscaling only.
inline aic3::RasterImage lanczos_reference(const aic3::RasterImage& in, int out_w, int out_h, int a = 3) {
  auto kernel = [a](double x) {
    if (x == 0.0) return 1.0;
    if (std::abs(x) >= a) return 0.0;
    const double px = M_PI * x;
    return a * std::sin(px) * std::sin(px / a) / (px * px);
  };
  aic3::RasterImage out(out_w, out_h);
  const double sx = static_cast<double>(in.width()) / out_w;
  const double sy = static_cast<double>(in.height()) / out_h;
  for (int oy = 0; oy < out_h; ++oy) {
    for (int ox = 0; ox < out_w; ++ox) {
      const double cx = (ox + 0.5) * sx - 0.5;
      const double cy = (oy + 0.5) * sy - 0.5;
      for (int c = 0; c < aic3::RasterImage::kChannels; ++c) {
        double num = 0.0, den = 0.0;
        for (int j = static_cast<int>(std::floor(cy)) - a; j <= static_cast<int>(std::floor(cy)) + a + 1; ++j) {
          for (int i = static_cast<int>(std::floor(cx)) - a; i <= static_cast<int>(std::floor(cx)) + a + 1; ++i) {
            const double w = kernel(cx - i) * kernel(cy - j);
            const int xi = std::clamp(i, 0, in.width() - 1);
            const int yj = std::clamp(j, 0, in.height() - 1);
            num += w * in.at(xi, yj, c);
            den += w;
          }
        }
        out.at(ox, oy, c) = static_cast<std::uint8_t>(std::clamp(std::round(num / den), 0.0, 255.0));
      }
    }
  }
  return out;
}

inline int max_abs_difference(const aic3::RasterImage& a, const aic3::RasterImage& b) {
  int worst = 0;
  for (std::size_t i = 0; i < a.samples().size(); ++i)
    worst = std::max(worst, std::abs(int(a.samples()[i]) - int(b.samples()[i])));
  return worst;
}

inline aic3::DesignIndex standard_design(std::initializer_list<aic3::Protocol> protocols, std::uint64_t seed = 0) {
  auto config = aic3::DesignConfig::standard();
  config.rng_seed = seed;
  std::vector<aic3::TripletQuestion> qs;
  for (auto p : protocols)
    for (auto& b : aic3::generate_design(config, p))
      for (auto& q : b.questions) qs.push_back(q);
  return aic3::DesignIndex(std::move(qs));
}

}  // namespace testing
