#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace vstep {

/// Row-major real-valued raster. Values are unconstrained reals during
/// computation; the [0, 255] range is enforced only at the file boundary.
class ImageGrid {
 public:
  ImageGrid(std::size_t height, std::size_t width, double fill = 0.0);
  ImageGrid(std::size_t height, std::size_t width, std::vector<double> pixels);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return pixels_.size(); }

  double operator()(std::size_t row, std::size_t col) const { return pixels_[row * width_ + col]; }
  double& operator()(std::size_t row, std::size_t col) { return pixels_[row * width_ + col]; }

  std::span<const double> pixels() const noexcept { return pixels_; }
  std::span<double> pixels() noexcept { return pixels_; }

  bool same_shape(const ImageGrid& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_;
  }
  bool all_finite() const noexcept;

  bool operator==(const ImageGrid&) const = default;

 private:
  std::size_t height_;
  std::size_t width_;
  std::vector<double> pixels_;
};

/// Round half away from zero.
double round_level(double value) noexcept;

/// Clamp every pixel to [d_min, d_max] and round to the nearest integer level.
ImageGrid clamp_quantize(const ImageGrid& img, double d_min, double d_max);

/// Clamp every pixel to [d_min, d_max] without rounding.
ImageGrid clamp(const ImageGrid& img, double d_min, double d_max);

ImageGrid transpose(const ImageGrid& img);

/// Throws DimensionError naming `context` when shapes differ.
void require_same_shape(const ImageGrid& a, const ImageGrid& b, const char* context);

}  // namespace vstep
