#include "vstep/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "vstep/errors.hpp"

namespace vstep {
namespace {

constexpr double kSsimSigma = 1.5;
constexpr double kK1 = 0.01;
constexpr double kK2 = 0.03;
constexpr double kRange = 255.0;

std::array<double, kSsimWindow> gaussian_taps() {
  std::array<double, kSsimWindow> taps{};
  const int half = static_cast<int>(kSsimWindow / 2);
  double sum = 0.0;
  for (int i = -half; i <= half; ++i) {
    taps[i + half] = std::exp(-(i * i) / (2.0 * kSsimSigma * kSsimSigma));
    sum += taps[i + half];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

// Separable Gaussian filtering restricted to positions where the whole window
// fits inside the image ("valid" mode).
std::vector<double> filter_valid(const std::vector<double>& src, std::size_t h, std::size_t w,
                                 const std::array<double, kSsimWindow>& taps) {
  const std::size_t oh = h - kSsimWindow + 1;
  const std::size_t ow = w - kSsimWindow + 1;
  std::vector<double> rows(h * ow);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < ow; ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < kSsimWindow; ++k) s += taps[k] * src[r * w + c + k];
      rows[r * ow + c] = s;
    }
  }
  std::vector<double> out(oh * ow);
  for (std::size_t r = 0; r < oh; ++r) {
    for (std::size_t c = 0; c < ow; ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < kSsimWindow; ++k) s += taps[k] * rows[(r + k) * ow + c];
      out[r * ow + c] = s;
    }
  }
  return out;
}

}  // namespace

double psnr(const ImageGrid& reference, const ImageGrid& test, double peak) {
  require_same_shape(reference, test, "psnr");
  if (!(peak > 0.0)) throw ValidationError("psnr peak must be positive");
  const auto a = reference.pixels();
  const auto b = test.pixels();
  double sse = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sse += (a[i] - b[i]) * (a[i] - b[i]);
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sse / static_cast<double>(a.size());
  return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const ImageGrid& reference, const ImageGrid& test) {
  require_same_shape(reference, test, "ssim");
  const std::size_t h = reference.height();
  const std::size_t w = reference.width();
  if (h < kSsimWindow || w < kSsimWindow) {
    throw DimensionError("ssim: image smaller than the 11x11 window");
  }
  const auto taps = gaussian_taps();
  const auto x = reference.pixels();
  const auto y = test.pixels();
  std::vector<double> xv(x.begin(), x.end()), yv(y.begin(), y.end());
  std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto mu_x = filter_valid(xv, h, w, taps);
  const auto mu_y = filter_valid(yv, h, w, taps);
  const auto e_xx = filter_valid(xx, h, w, taps);
  const auto e_yy = filter_valid(yy, h, w, taps);
  const auto e_xy = filter_valid(xy, h, w, taps);

  const double c1 = (kK1 * kRange) * (kK1 * kRange);
  const double c2 = (kK2 * kRange) * (kK2 * kRange);
  double sum = 0.0;
  for (std::size_t i = 0; i < mu_x.size(); ++i) {
    const double mx = mu_x[i];
    const double my = mu_y[i];
    const double vx = e_xx[i] - mx * mx;
    const double vy = e_yy[i] - my * my;
    const double cov = e_xy[i] - mx * my;
    const double num = (2.0 * mx * my + c1) * (2.0 * cov + c2);
    const double den = (mx * mx + my * my + c1) * (vx + vy + c2);
    sum += num / den;
  }
  return sum / static_cast<double>(mu_x.size());
}

ResidualStats residual_stats(const ImageGrid& clean, const ImageGrid& processed,
                             std::size_t bins) {
  require_same_shape(clean, processed, "residual_stats");
  if (bins < 3) throw ValidationError("histogram needs at least 3 bins");

  const auto a = clean.pixels();
  const auto b = processed.pixels();
  const std::size_t n = a.size();
  std::vector<double> res(n);
  for (std::size_t i = 0; i < n; ++i) res[i] = b[i] - a[i];

  ResidualStats stats;
  stats.sample_count = n;
  double mean = 0.0;
  for (double v : res) mean += v;
  mean /= static_cast<double>(n);
  double m2 = 0.0;
  double m4 = 0.0;
  for (double v : res) {
    const double d = (v - mean) * (v - mean);
    m2 += d;
    m4 += d * d;
  }
  stats.mean = mean;
  stats.sigma_hat = n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1)) : 0.0;
  m2 /= static_cast<double>(n);
  m4 /= static_cast<double>(n);
  stats.excess_kurtosis = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;

  std::size_t tail = 0;
  const double limit = 3.0 * stats.sigma_hat;
  for (double v : res) {
    if (std::abs(v - mean) > limit) ++tail;
  }
  stats.tail_mass_3sigma = static_cast<double>(tail) / static_cast<double>(n);

  const auto [lo_it, hi_it] = std::minmax_element(res.begin(), res.end());
  double lo = *lo_it;
  double hi = *hi_it;
  if (hi == lo) {
    // Degenerate residual: centre the single populated bin on the value.
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  stats.bin_edges.resize(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k) stats.bin_edges[k] = lo + width * static_cast<double>(k);
  stats.bin_edges[bins] = hi;
  stats.counts.assign(bins, 0);
  for (double v : res) {
    auto k = static_cast<std::size_t>((v - lo) / width);
    stats.counts[std::min(k, bins - 1)]++;
  }
  return stats;
}

std::string histogram_csv(const ResidualStats& stats) {
  std::ostringstream out;
  out.precision(10);
  out << "bin_center,count,log10_count\n";
  for (std::size_t k = 0; k < stats.counts.size(); ++k) {
    const double center = 0.5 * (stats.bin_edges[k] + stats.bin_edges[k + 1]);
    out << center << ',' << stats.counts[k] << ','
        << std::log10(static_cast<double>(stats.counts[k]) + 1.0) << '\n';
  }
  return out.str();
}

}  // namespace vstep
