#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "vstep/image.hpp"

namespace vstep {

/// 10 log10(peak^2 / MSE); +infinity for identical images.
double psnr(const ImageGrid& reference, const ImageGrid& test, double peak = 255.0);

/// Mean SSIM over valid (unpadded) positions of an 11x11 Gaussian window,
/// std 1.5, K1 = 0.01, K2 = 0.03, dynamic range 255.
double ssim(const ImageGrid& reference, const ImageGrid& test);

inline constexpr std::size_t kSsimWindow = 11;

struct ResidualStats {
  std::vector<double> bin_edges;  ///< bins + 1 edges over [min, max] of the residual
  std::vector<std::size_t> counts;
  double mean = 0.0;
  double sigma_hat = 0.0;  ///< sample standard deviation (n - 1 denominator)
  /// Fraction of samples with |residual - mean| > 3 sigma_hat.
  double tail_mass_3sigma = 0.0;
  /// m4 / m2^2 - 3; reported as 0 when the residual is constant.
  double excess_kurtosis = 0.0;
  std::size_t sample_count = 0;
};

/// Statistics of processed - clean.
ResidualStats residual_stats(const ImageGrid& clean, const ImageGrid& processed,
                             std::size_t bins);

/// CSV with header bin_center,count,log10_count; log10_count = log10(count + 1).
std::string histogram_csv(const ResidualStats& stats);

}  // namespace vstep
