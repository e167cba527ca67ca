#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "vstep/image.hpp"

namespace vstep {

/// Partition of the pixel sites into impulse candidates (flag false) and
/// impulse-free sites (flag true). The flag is the characteristic function
/// of the impulse-free set.
class PixelMask {
 public:
  PixelMask(std::size_t height, std::size_t width, bool clean = true);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return flags_.size(); }

  bool clean(std::size_t row, std::size_t col) const { return flags_[row * width_ + col] != 0; }
  void set_clean(std::size_t row, std::size_t col, bool value) {
    flags_[row * width_ + col] = value ? 1 : 0;
  }
  /// chi at a linear index: 1.0 on impulse-free sites, 0.0 on candidates.
  double chi(std::size_t index) const { return flags_[index] != 0 ? 1.0 : 0.0; }

  std::size_t clean_count() const noexcept;
  std::size_t candidate_count() const noexcept { return size() - clean_count(); }

  bool matches(const ImageGrid& img) const noexcept {
    return img.height() == height_ && img.width() == width_;
  }

  bool operator==(const PixelMask&) const = default;

 private:
  std::size_t height_;
  std::size_t width_;
  std::vector<std::uint8_t> flags_;
};

PixelMask transpose(const PixelMask& mask);

/// Default largest AMF window.
inline constexpr int kDefaultAmfWindow = 39;

/// Which rank-order filter produces z.
struct RofKind {
  enum class Variant { Amf, Acwmf, AmfThenAcwmf };
  Variant variant = Variant::Amf;
  int max_window = kDefaultAmfWindow;  ///< odd, >= 3; used by the AMF stage

  void validate() const;
  std::string name() const;
  static RofKind parse(const std::string& name, int max_window = kDefaultAmfWindow);
};

/// Median over a window x window neighbourhood with symmetric boundary extension.
ImageGrid median_filter(const ImageGrid& img, int window);

/// Adaptive median filter: grows the window from 3 up to max_window until the
/// window median lies strictly between the window extremes. Only pixels that
/// are themselves window extremes are replaced.
ImageGrid amf(const ImageGrid& img, int max_window = kDefaultAmfWindow);

/// ACWMF thresholds, T_k = s * MAD + delta_k.
struct AcwmfParams {
  double s = 0.6;
  double delta[4] = {40.0, 25.0, 10.0, 5.0};
};

/// Adaptive center-weighted median filter on a 3x3 window.
ImageGrid acwmf(const ImageGrid& img, const AcwmfParams& params = {});

ImageGrid apply_rof(const ImageGrid& img, const RofKind& kind);

/// Candidates are exactly the sites where z differs from x_n.
PixelMask detect_impulses(const ImageGrid& x_n, const ImageGrid& z);

}  // namespace vstep
