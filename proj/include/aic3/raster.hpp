#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace aic3 {

// 8-bit interleaved RGB image. Dimensions are always positive.
class RasterImage {
 public:
  static constexpr int kChannels = 3;

  RasterImage(int width, int height, std::uint8_t fill = 0);
  RasterImage(int width, int height, std::vector<std::uint8_t> samples);

  int width() const { return width_; }
  int height() const { return height_; }

  std::uint8_t at(int x, int y, int c) const { return samples_[index(x, y, c)]; }
  std::uint8_t& at(int x, int y, int c) { return samples_[index(x, y, c)]; }

  std::span<const std::uint8_t> samples() const { return samples_; }
  std::span<std::uint8_t> samples() { return samples_; }

  bool same_shape(const RasterImage& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  RasterImage crop(int x0, int y0, int w, int h) const;

  bool operator==(const RasterImage&) const = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) * kChannels +
           static_cast<std::size_t>(c);
  }

  int width_;
  int height_;
  std::vector<std::uint8_t> samples_;
};

// PNG I/O. Any PNG is converted to 8-bit RGB on read; writes are atomic
// (temp file then rename).
RasterImage read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const RasterImage& image);

}  // namespace aic3
