#include "aic3/raster.hpp"

#include <png.h>

#include <memory>
#include <string>

#include "aic3/errors.hpp"
#include "aic3/hash.hpp"

namespace aic3 {
namespace {

void check_dims(int width, int height) {
  if (width <= 0 || height <= 0)
    throw InputError("image dimensions must be positive, got " + std::to_string(width) + "x" + std::to_string(height));
}

std::size_t sample_count(int width, int height) {
  return static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * RasterImage::kChannels;
}

}  // namespace

RasterImage::RasterImage(int width, int height, std::uint8_t fill) : width_(width), height_(height) {
  check_dims(width, height);
  samples_.assign(sample_count(width, height), fill);
}

RasterImage::RasterImage(int width, int height, std::vector<std::uint8_t> samples)
    : width_(width), height_(height), samples_(std::move(samples)) {
  check_dims(width, height);
  if (samples_.size() != sample_count(width, height))
    throw InputError("sample count " + std::to_string(samples_.size()) + " does not match " + std::to_string(width) +
                     "x" + std::to_string(height) + "x3");
}

RasterImage RasterImage::crop(int x0, int y0, int w, int h) const {
  if (x0 < 0 || y0 < 0 || w <= 0 || h <= 0 || x0 + w > width_ || y0 + h > height_)
    throw InputError("crop rectangle outside image");
  RasterImage out(w, h);
  for (int y = 0; y < h; ++y) {
    const auto* src = &samples_[index(x0, y0 + y, 0)];
    std::copy(src, src + static_cast<std::size_t>(w) * kChannels, &out.samples_[out.index(0, y, 0)]);
  }
  return out;
}

RasterImage read_png(const std::filesystem::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str()))
    throw IoError("cannot read PNG " + path.string() + ": " + img.message);
  img.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
    std::string msg = img.message;
    png_image_free(&img);
    throw IoError("cannot decode PNG " + path.string() + ": " + msg);
  }
  return RasterImage(static_cast<int>(img.width), static_cast<int>(img.height), std::move(buf));
}

void write_png(const std::filesystem::path& path, const RasterImage& image) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width());
  img.height = static_cast<png_uint_32>(image.height());
  img.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(img, size, 0, image.samples().data(), 0, nullptr))
    throw IoError("cannot size PNG for " + path.string() + ": " + img.message);
  std::string bytes(size, '\0');
  if (!png_image_write_to_memory(&img, bytes.data(), &size, 0, image.samples().data(), 0, nullptr))
    throw IoError("cannot encode PNG for " + path.string() + ": " + img.message);
  bytes.resize(size);
  write_file_atomic(path, bytes);
}

}  // namespace aic3
