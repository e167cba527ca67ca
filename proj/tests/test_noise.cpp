#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "vstep/errors.hpp"
#include "vstep/noise.hpp"
#include "vstep/philox.hpp"

using namespace vstep;

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using C = Philox4x32::Counter;
  CHECK(Philox4x32::generate({0, 0, 0, 0}, {0, 0}) ==
        C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::generate({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                             {0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::generate({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                             {0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("add_awgn with sigma 0 is the identity") {
  const auto img = vstep::testing::random_image(7, 9, 3);
  CHECK(add_awgn(img, 0.0, Seed{42}) == img);
  CHECK_THROWS_AS(add_awgn(img, -1.0, Seed{1}), ValidationError);
}

TEST_CASE("add_awgn sample moments on 512x512") {
  const ImageGrid flat(512, 512, 128.0);
  const auto noisy = add_awgn(flat, 25.0, Seed{7});
  double sum = 0.0;
  double sq = 0.0;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const double d = noisy.pixels()[i] - 128.0;
    sum += d;
    sq += d * d;
  }
  const double n = static_cast<double>(flat.size());
  const double mean = sum / n;
  const double sd = std::sqrt((sq - n * mean * mean) / (n - 1));
  CHECK(sd >= 24.8);
  CHECK(sd <= 25.2);
  CHECK(std::abs(mean) <= 0.15);
}

TEST_CASE("add_awgn output is not clamped") {
  const ImageGrid dark(64, 64, 0.0);
  const auto noisy = add_awgn(dark, 25.0, Seed{1});
  bool negative = false;
  for (double v : noisy.pixels()) negative = negative || v < 0.0;
  CHECK(negative);
}

TEST_CASE("corrupt_mixed identity and pure salt-and-pepper") {
  const auto img = vstep::testing::random_image(16, 16, 5, 1.0, 254.0);
  CHECK(corrupt_mixed(img, NoiseSpec{}, Seed{3}) == img);

  NoiseSpec spin;
  spin.p = 1.0;
  const auto noisy = corrupt_mixed(ImageGrid(512, 512, 128.0), spin, Seed{11});
  std::size_t low = 0;
  for (double v : noisy.pixels()) {
    REQUIRE((v == 0.0 || v == 255.0));
    if (v == 0.0) ++low;
  }
  const double frac = static_cast<double>(low) / static_cast<double>(noisy.size());
  CHECK(frac >= 0.49);
  CHECK(frac <= 0.51);
}

TEST_CASE("NoiseSpec validation") {
  NoiseSpec s;
  s.p = 1.5;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s = NoiseSpec{};
  s.r = -0.1;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s = NoiseSpec{};
  s.sigma = -1.0;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s = NoiseSpec{};
  s.d_min = 10;
  s.d_max = 10;
  CHECK_THROWS_AS(s.validate(), ValidationError);
}

TEST_CASE("empirical_branch_fractions") {
  const ImageGrid gray(512, 512, 128.0);
  SUBCASE("pure SPIN p = 0.4") {
    NoiseSpec s;
    s.p = 0.4;
    const auto f = empirical_branch_fractions(gray, corrupt_mixed(gray, s, Seed{5}), s);
    CHECK(std::abs(f.at_min - 0.2) <= 0.005);
    CHECK(std::abs(f.at_max - 0.2) <= 0.005);
    CHECK(std::abs(f.other - 0.6) <= 0.01);
  }
  SUBCASE("p = 0 keeps the clean image's own extremes") {
    ImageGrid img(8, 8, 100.0);
    img(0, 0) = 0.0;
    img(3, 3) = 255.0;
    img(4, 4) = 255.0;
    const NoiseSpec s;
    const auto clean_f = empirical_branch_fractions(img, img, s);
    const auto f = empirical_branch_fractions(img, corrupt_mixed(img, s, Seed{1}), s);
    CHECK(f.at_min == clean_f.at_min);
    CHECK(f.at_max == clean_f.at_max);
    CHECK(f.at_max == doctest::Approx(2.0 / 64.0));
  }
  SUBCASE("all-d_max image") {
    const ImageGrid white(4, 4, 255.0);
    const auto f = empirical_branch_fractions(white, corrupt_mixed(white, {}, Seed{2}), {});
    CHECK(f.at_max == 1.0);
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(empirical_branch_fractions(ImageGrid(2, 2), ImageGrid(2, 3), {}),
                    DimensionError);
  }
}

TEST_CASE("random-valued impulses are integer levels inside the range") {
  NoiseSpec s;
  s.r = 1.0;
  const auto noisy = corrupt_mixed(ImageGrid(64, 64, 128.0), s, Seed{8});
  double lo = 255.0;
  double hi = 0.0;
  for (double v : noisy.pixels()) {
    REQUIRE(v == std::round(v));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo >= 0.0);
  CHECK(hi <= 255.0);
  CHECK(hi - lo > 200.0);
}

TEST_CASE("corrupt_mixed with p = r = 0 equals clamped add_awgn bit-exactly") {
  const auto img = vstep::testing::random_image(40, 30, 17);
  NoiseSpec s;
  s.sigma = 30.0;
  CHECK(corrupt_mixed(img, s, Seed{99}) == clamp(add_awgn(img, 30.0, Seed{99}), 0.0, 255.0));
  s.clamp_gaussian = false;
  CHECK(corrupt_mixed(img, s, Seed{99}) == add_awgn(img, 30.0, Seed{99}));
}

TEST_CASE("per-site derivation is independent of scan order") {
  const auto img = vstep::testing::random_image(13, 21, 4);
  NoiseSpec s;
  s.sigma = 20.0;
  s.p = 0.3;
  s.r = 0.2;
  const Seed seed{1234};
  const auto noisy = corrupt_mixed(img, s, seed);

  // Corrupting the transpose with coordinates swapped yields the transposed field.
  const auto t = transpose(img);
  ImageGrid t_noisy(t.height(), t.width());
  for (std::size_t r = t.height(); r-- > 0;) {
    for (std::size_t c = t.width(); c-- > 0;) {
      t_noisy(r, c) = corrupt_site(t(r, c), s, seed, static_cast<std::uint32_t>(c),
                                   static_cast<std::uint32_t>(r));
    }
  }
  CHECK(t_noisy == transpose(noisy));
}

TEST_CASE("different seeds give different fields; equal seeds identical ones") {
  const ImageGrid gray(32, 32, 128.0);
  NoiseSpec s;
  s.sigma = 10.0;
  s.p = 0.2;
  CHECK(corrupt_mixed(gray, s, Seed{1}) == corrupt_mixed(gray, s, Seed{1}));
  CHECK_FALSE(corrupt_mixed(gray, s, Seed{1}) == corrupt_mixed(gray, s, Seed{2}));
}
