#include "vstep/rof.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "vstep/errors.hpp"

namespace vstep {
namespace {

// Half-sample symmetric extension: -1 -> 0, n -> n-1, folded for any offset.
std::size_t reflect(std::ptrdiff_t i, std::ptrdiff_t n) {
  if (n == 1) return 0;
  const std::ptrdiff_t period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return static_cast<std::size_t>(i < n ? i : period - 1 - i);
}

void gather(const ImageGrid& img, std::size_t row, std::size_t col, int window,
            std::vector<double>& out) {
  out.clear();
  const int half = window / 2;
  const auto h = static_cast<std::ptrdiff_t>(img.height());
  const auto w = static_cast<std::ptrdiff_t>(img.width());
  for (int dr = -half; dr <= half; ++dr) {
    const std::size_t r = reflect(static_cast<std::ptrdiff_t>(row) + dr, h);
    for (int dc = -half; dc <= half; ++dc) {
      out.push_back(img(r, reflect(static_cast<std::ptrdiff_t>(col) + dc, w)));
    }
  }
}

double median_in_place(std::vector<double>& values) {
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

void require_odd_window(int window, int minimum, const char* what) {
  if (window < minimum || window % 2 == 0) {
    throw ValidationError(std::string(what) + " must be odd and >= " + std::to_string(minimum) +
                          ", got " + std::to_string(window));
  }
}

}  // namespace

PixelMask::PixelMask(std::size_t height, std::size_t width, bool clean)
    : height_(height), width_(width), flags_(height * width, clean ? 1 : 0) {
  if (height == 0 || width == 0) throw DimensionError("mask dimensions must be positive");
}

std::size_t PixelMask::clean_count() const noexcept {
  return static_cast<std::size_t>(std::count(flags_.begin(), flags_.end(), std::uint8_t{1}));
}

PixelMask transpose(const PixelMask& mask) {
  PixelMask out(mask.width(), mask.height());
  for (std::size_t r = 0; r < mask.height(); ++r) {
    for (std::size_t c = 0; c < mask.width(); ++c) out.set_clean(c, r, mask.clean(r, c));
  }
  return out;
}

void RofKind::validate() const { require_odd_window(max_window, 3, "AMF max window"); }

std::string RofKind::name() const {
  switch (variant) {
    case Variant::Amf:
      return "amf";
    case Variant::Acwmf:
      return "acwmf";
    case Variant::AmfThenAcwmf:
      return "amf+acwmf";
  }
  return "amf";
}

RofKind RofKind::parse(const std::string& name, int max_window) {
  RofKind kind;
  kind.max_window = max_window;
  if (name == "amf") {
    kind.variant = Variant::Amf;
  } else if (name == "acwmf") {
    kind.variant = Variant::Acwmf;
  } else if (name == "amf+acwmf") {
    kind.variant = Variant::AmfThenAcwmf;
  } else {
    throw ValidationError("unknown rank-order filter '" + name + "' (amf, acwmf, amf+acwmf)");
  }
  kind.validate();
  return kind;
}

ImageGrid median_filter(const ImageGrid& img, int window) {
  require_odd_window(window, 1, "median window");
  ImageGrid out = img;
  if (window == 1) return out;
  std::vector<double> buf;
  buf.reserve(static_cast<std::size_t>(window) * window);
  for (std::size_t r = 0; r < img.height(); ++r) {
    for (std::size_t c = 0; c < img.width(); ++c) {
      gather(img, r, c, window, buf);
      out(r, c) = median_in_place(buf);
    }
  }
  return out;
}

ImageGrid amf(const ImageGrid& img, int max_window) {
  require_odd_window(max_window, 3, "AMF max window");
  ImageGrid out = img;
  std::vector<double> buf;
  buf.reserve(static_cast<std::size_t>(max_window) * max_window);
  for (std::size_t r = 0; r < img.height(); ++r) {
    for (std::size_t c = 0; c < img.width(); ++c) {
      const double v = img(r, c);
      for (int w = 3; w <= max_window; w += 2) {
        gather(img, r, c, w, buf);
        const auto [lo, hi] = std::minmax_element(buf.begin(), buf.end());
        const double z_min = *lo;
        const double z_max = *hi;
        const double z_med = median_in_place(buf);
        if (z_min < z_med && z_med < z_max) {
          out(r, c) = (z_min < v && v < z_max) ? v : z_med;
          break;
        }
        if (w == max_window) out(r, c) = z_med;
      }
    }
  }
  return out;
}

ImageGrid acwmf(const ImageGrid& img, const AcwmfParams& params) {
  ImageGrid out = img;
  std::vector<double> window;
  std::vector<double> weighted;
  std::vector<double> deviations;
  for (std::size_t r = 0; r < img.height(); ++r) {
    for (std::size_t c = 0; c < img.width(); ++c) {
      const double center = img(r, c);
      gather(img, r, c, 3, window);

      deviations = window;
      const double med = median_in_place(deviations);
      for (std::size_t i = 0; i < window.size(); ++i) deviations[i] = std::abs(window[i] - med);
      const double mad = median_in_place(deviations);

      bool impulsive = false;
      for (int k = 0; k < 4 && !impulsive; ++k) {
        // Center weight 2k+1: the 8 neighbours plus 2k+1 copies of the center.
        weighted.clear();
        for (std::size_t i = 0; i < window.size(); ++i) {
          if (i != 4) weighted.push_back(window[i]);
        }
        weighted.insert(weighted.end(), static_cast<std::size_t>(2 * k + 1), center);
        const double m_k = k == 0 ? med : median_in_place(weighted);
        const double threshold = params.s * mad + params.delta[k];
        impulsive = std::abs(m_k - center) > threshold;
      }
      if (impulsive) out(r, c) = med;
    }
  }
  return out;
}

ImageGrid apply_rof(const ImageGrid& img, const RofKind& kind) {
  kind.validate();
  switch (kind.variant) {
    case RofKind::Variant::Amf:
      return amf(img, kind.max_window);
    case RofKind::Variant::Acwmf:
      return acwmf(img);
    case RofKind::Variant::AmfThenAcwmf:
      return acwmf(amf(img, kind.max_window));
  }
  return amf(img, kind.max_window);
}

PixelMask detect_impulses(const ImageGrid& x_n, const ImageGrid& z) {
  require_same_shape(x_n, z, "detect_impulses");
  PixelMask mask(x_n.height(), x_n.width());
  for (std::size_t r = 0; r < x_n.height(); ++r) {
    for (std::size_t c = 0; c < x_n.width(); ++c) {
      mask.set_clean(r, c, !(std::abs(z(r, c) - x_n(r, c)) > 0.0));
    }
  }
  return mask;
}

}  // namespace vstep
