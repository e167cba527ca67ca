#include "vstep/noise.hpp"

#include <algorithm>
#include <cmath>

#include "vstep/errors.hpp"
#include "vstep/philox.hpp"

namespace vstep {

void NoiseSpec::validate() const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ValidationError("sigma must be >= 0");
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("p must lie in [0, 1]");
  if (!(r >= 0.0 && r <= 1.0)) throw ValidationError("r must lie in [0, 1]");
  if (!(d_min < d_max)) throw ValidationError("d_min must be below d_max");
}

ImageGrid add_awgn(const ImageGrid& img, double sigma, Seed seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ValidationError("sigma must be >= 0");
  ImageGrid out = img;
  for (std::size_t row = 0; row < img.height(); ++row) {
    for (std::size_t col = 0; col < img.width(); ++col) {
      const auto draws = site_draws(seed.value, static_cast<std::uint32_t>(row),
                                    static_cast<std::uint32_t>(col));
      out(row, col) = img(row, col) + sigma * draws.gaussian;
    }
  }
  return out;
}

double corrupt_site(double value, const NoiseSpec& spec, Seed seed, std::uint32_t row,
                    std::uint32_t col) {
  const auto draws = site_draws(seed.value, row, col);
  const double u = draws.branch;
  const double half_p = spec.p / 2.0;
  if (u < half_p) return spec.d_min;
  if (u < spec.p) return spec.d_max;
  if (u < spec.p + spec.r * (1.0 - spec.p)) {
    const double level = spec.d_min + draws.level * (spec.d_max - spec.d_min);
    return std::clamp(round_level(level), spec.d_min, spec.d_max);
  }
  const double noisy = value + spec.sigma * draws.gaussian;
  return spec.clamp_gaussian ? std::clamp(noisy, spec.d_min, spec.d_max) : noisy;
}

ImageGrid corrupt_mixed(const ImageGrid& img, const NoiseSpec& spec, Seed seed) {
  spec.validate();
  ImageGrid out = img;
  for (std::size_t row = 0; row < img.height(); ++row) {
    for (std::size_t col = 0; col < img.width(); ++col) {
      out(row, col) = corrupt_site(img(row, col), spec, seed, static_cast<std::uint32_t>(row),
                                   static_cast<std::uint32_t>(col));
    }
  }
  return out;
}

BranchFractions empirical_branch_fractions(const ImageGrid& clean, const ImageGrid& noisy,
                                           const NoiseSpec& spec) {
  require_same_shape(clean, noisy, "empirical_branch_fractions");
  std::size_t at_min = 0;
  std::size_t at_max = 0;
  for (double v : noisy.pixels()) {
    if (v == spec.d_min) {
      ++at_min;
    } else if (v == spec.d_max) {
      ++at_max;
    }
  }
  const auto n = static_cast<double>(noisy.size());
  return {at_min / n, at_max / n, (noisy.size() - at_min - at_max) / n};
}

}  // namespace vstep
