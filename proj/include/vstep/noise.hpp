#pragma once

#include <cstdint>

#include "vstep/image.hpp"

namespace vstep {

struct Seed {
  std::uint64_t value = 0;
};

/// Parameters of the mixed AWGN + salt-and-pepper + random-valued impulse model.
struct NoiseSpec {
  double sigma = 0.0;  ///< AWGN standard deviation, intensity units
  double p = 0.0;      ///< salt-and-pepper probability
  double r = 0.0;      ///< random-valued impulse probability (applied to the 1 - p remainder)
  double d_min = 0.0;
  double d_max = 255.0;
  /// Clamp the Gaussian branch to [d_min, d_max] (saturating 8-bit sensor).
  bool clamp_gaussian = true;

  void validate() const;
};

/// out = img + nu, nu ~ N(0, sigma^2) i.i.d. Not clamped.
ImageGrid add_awgn(const ImageGrid& img, double sigma, Seed seed);

/// Value of a single corrupted site. Depends only on (value, spec, seed, row, col).
double corrupt_site(double value, const NoiseSpec& spec, Seed seed, std::uint32_t row,
                    std::uint32_t col);

/// Per pixel, independently: d_min w.p. p/2, d_max w.p. p/2, a uniform integer
/// level w.p. r(1-p), and x + nu otherwise.
ImageGrid corrupt_mixed(const ImageGrid& img, const NoiseSpec& spec, Seed seed);

struct BranchFractions {
  double at_min = 0.0;
  double at_max = 0.0;
  double other = 0.0;
};

/// Fractions of noisy pixels exactly at d_min, exactly at d_max, and elsewhere.
BranchFractions empirical_branch_fractions(const ImageGrid& clean, const ImageGrid& noisy,
                                           const NoiseSpec& spec);

}  // namespace vstep
