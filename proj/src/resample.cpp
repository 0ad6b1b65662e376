#include "aic3/resample.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "aic3/errors.hpp"

namespace aic3 {
namespace {

struct Contribution {
  int first = 0;
  std::vector<double> weights;
};

// One weight list per output coordinate along an axis of length in_len -> out_len.
std::vector<Contribution> contributions(int in_len, int out_len, int taps) {
  const double scale = static_cast<double>(in_len) / out_len;
  const double filter_scale = std::max(1.0, scale);
  const double support = taps * filter_scale;
  std::vector<Contribution> out(static_cast<std::size_t>(out_len));
  for (int o = 0; o < out_len; ++o) {
    const double center = (o + 0.5) * scale - 0.5;
    const int lo = static_cast<int>(std::floor(center - support)) + 1;
    const int hi = static_cast<int>(std::floor(center + support));
    auto& c = out[static_cast<std::size_t>(o)];
    c.first = lo;
    double total = 0.0;
    for (int i = lo; i <= hi; ++i) {
      const double w = lanczos_kernel((i - center) / filter_scale, taps);
      c.weights.push_back(w);
      total += w;
    }
    for (auto& w : c.weights) w /= total;
  }
  return out;
}

std::uint8_t to_sample(double v) { return static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0)); }

}  // namespace

double lanczos_kernel(double x, int taps) {
  if (x == 0.0) return 1.0;
  const double a = taps;
  if (std::abs(x) >= a) return 0.0;
  const double px = std::numbers::pi * x;
  return a * std::sin(px) * std::sin(px / a) / (px * px);
}

RasterImage resize_lanczos(const RasterImage& image, int out_width, int out_height, int taps) {
  if (taps < 1) throw InputError("lanczos taps must be >= 1");
  if (out_width <= 0 || out_height <= 0) throw InputError("resize target must be positive");
  constexpr int C = RasterImage::kChannels;
  const int in_w = image.width();
  const int in_h = image.height();
  const auto cols = contributions(in_w, out_width, taps);
  const auto rows = contributions(in_h, out_height, taps);

  // Horizontal pass into a float buffer of in_h x out_width.
  std::vector<double> tmp(static_cast<std::size_t>(in_h) * out_width * C, 0.0);
  for (int y = 0; y < in_h; ++y) {
    for (int x = 0; x < out_width; ++x) {
      const auto& c = cols[static_cast<std::size_t>(x)];
      double acc[C] = {0.0, 0.0, 0.0};
      for (std::size_t k = 0; k < c.weights.size(); ++k) {
        const int sx = std::clamp(c.first + static_cast<int>(k), 0, in_w - 1);
        for (int ch = 0; ch < C; ++ch) acc[ch] += c.weights[k] * image.at(sx, y, ch);
      }
      double* dst = &tmp[(static_cast<std::size_t>(y) * out_width + x) * C];
      for (int ch = 0; ch < C; ++ch) dst[ch] = acc[ch];
    }
  }

  RasterImage out(out_width, out_height);
  for (int y = 0; y < out_height; ++y) {
    const auto& r = rows[static_cast<std::size_t>(y)];
    for (int x = 0; x < out_width; ++x) {
      double acc[C] = {0.0, 0.0, 0.0};
      for (std::size_t k = 0; k < r.weights.size(); ++k) {
        const int sy = std::clamp(r.first + static_cast<int>(k), 0, in_h - 1);
        const double* src = &tmp[(static_cast<std::size_t>(sy) * out_width + x) * C];
        for (int ch = 0; ch < C; ++ch) acc[ch] += r.weights[k] * src[ch];
      }
      for (int ch = 0; ch < C; ++ch) out.at(x, y, ch) = to_sample(acc[ch]);
    }
  }
  return out;
}

}  // namespace aic3
