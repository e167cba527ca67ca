// Grid search of the reference l1-TV smoother weight on AWGN-only input.
//
//   tune_reftv --image data/rocket.pgm --sigma 25 --seed 1

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <vector>

#include "vstep/metrics.hpp"
#include "vstep/noise.hpp"
#include "vstep/pgm.hpp"
#include "vstep/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app("Grid-search the reference smoother lambda on AWGN-only input");
  std::string image_path;
  double sigma = 25.0;
  std::uint64_t seed = 1;
  double eta = vstep::default_reference_config().eta;
  std::vector<double> grid = {0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.5, 0.6, 0.8, 1.0};
  app.add_option("--image", image_path, "Clean PGM")->required();
  app.add_option("--sigma", sigma, "AWGN standard deviation")->capture_default_str();
  app.add_option("--seed", seed, "Noise seed")->capture_default_str();
  app.add_option("--eta", eta, "Smoothing parameter of the smoother")->capture_default_str();
  app.add_option("--lambda", grid, "Candidate lambdas");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto clean = vstep::read_pgm_file(image_path);
    vstep::NoiseSpec spec;
    spec.sigma = sigma;
    const auto noisy = vstep::corrupt_mixed(clean, spec, vstep::Seed{seed});
    std::printf("noisy psnr %.4f\n", vstep::psnr(clean, noisy));
    std::printf("lambda,psnr_db,ssim,outer_iters\n");
    double best_lambda = 0.0;
    double best_psnr = -1.0;
    for (double lambda : grid) {
      auto cfg = vstep::default_reference_config();
      cfg.eta = eta;
      const auto out = vstep::reference_smoother(noisy, lambda, cfg);
      const double p = vstep::psnr(clean, out.image);
      std::printf("%.4f,%.4f,%.4f,%d\n", lambda, p, vstep::ssim(clean, out.image),
                  out.outer_iterations());
      std::fflush(stdout);
      if (p > best_psnr) {
        best_psnr = p;
        best_lambda = lambda;
      }
    }
    std::printf("best lambda %.4f (psnr %.4f)\n", best_lambda, best_psnr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
