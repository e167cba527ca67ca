#include "vstep/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vstep/errors.hpp"

namespace vstep {

ImageGrid::ImageGrid(std::size_t height, std::size_t width, double fill)
    : height_(height), width_(width) {
  if (height == 0 || width == 0) {
    throw DimensionError("image dimensions must be positive");
  }
  if (!std::isfinite(fill)) {
    throw ValidationError("image fill value must be finite");
  }
  pixels_.assign(height * width, fill);
}

ImageGrid::ImageGrid(std::size_t height, std::size_t width, std::vector<double> pixels)
    : height_(height), width_(width), pixels_(std::move(pixels)) {
  if (height == 0 || width == 0) {
    throw DimensionError("image dimensions must be positive");
  }
  if (pixels_.size() != height * width) {
    throw DimensionError("pixel count " + std::to_string(pixels_.size()) + " does not match " +
                         std::to_string(height) + "x" + std::to_string(width));
  }
  if (!all_finite()) {
    throw ValidationError("image pixels must be finite");
  }
}

bool ImageGrid::all_finite() const noexcept {
  return std::all_of(pixels_.begin(), pixels_.end(), [](double v) { return std::isfinite(v); });
}

double round_level(double value) noexcept { return std::round(value); }

ImageGrid clamp_quantize(const ImageGrid& img, double d_min, double d_max) {
  if (!(d_min < d_max)) {
    throw ValidationError("clamp_quantize requires d_min < d_max");
  }
  ImageGrid out = img;
  for (double& v : out.pixels()) {
    v = round_level(std::clamp(v, d_min, d_max));
  }
  return out;
}

ImageGrid clamp(const ImageGrid& img, double d_min, double d_max) {
  if (!(d_min < d_max)) {
    throw ValidationError("clamp requires d_min < d_max");
  }
  ImageGrid out = img;
  for (double& v : out.pixels()) {
    v = std::clamp(v, d_min, d_max);
  }
  return out;
}

ImageGrid transpose(const ImageGrid& img) {
  ImageGrid out(img.width(), img.height());
  for (std::size_t r = 0; r < img.height(); ++r) {
    for (std::size_t c = 0; c < img.width(); ++c) {
      out(c, r) = img(r, c);
    }
  }
  return out;
}

void require_same_shape(const ImageGrid& a, const ImageGrid& b, const char* context) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(context) + ": dimension mismatch " +
                         std::to_string(a.height()) + "x" + std::to_string(a.width()) + " vs " +
                         std::to_string(b.height()) + "x" + std::to_string(b.width()));
  }
}

}  // namespace vstep
