#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "vstep/cg.hpp"
#include "vstep/image.hpp"
#include "vstep/rof.hpp"

namespace vstep {

inline constexpr double kBetaSaltPepper = 0.0002;
inline constexpr double kBetaRandomValued = 0.002;

struct VariationalConfig {
  double beta = kBetaSaltPepper;  ///< regularization weight
  double eta = 1e-4;              ///< smoothing, intensity units squared
  double outer_tol = 1e-3;        ///< relative iterate change
  int max_outer = 100;
  double inner_tol = 1e-6;  ///< CG relative residual
  int max_inner = 500;

  void validate() const;
};

/// One value per directed 4-neighbour pair. Ordering: pixels in raster order;
/// for each pixel p, if a right neighbour q exists emit (p,q) then (q,p), then
/// if a down neighbour q exists emit (p,q) then (q,p).
class EdgeField {
 public:
  EdgeField(std::size_t height, std::size_t width);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  /// 2 * (M (N-1) + (M-1) N)
  static std::size_t directed_count(std::size_t height, std::size_t width) noexcept {
    return 2 * (height * (width - 1) + (height - 1) * width);
  }

 private:
  std::size_t height_;
  std::size_t width_;
  std::vector<double> values_;
};

/// (G x)(p,q) = x(p) - x(q) over in-bounds 4-neighbours; no boundary extension.
EdgeField apply_G(const ImageGrid& img);

/// Adjoint of apply_G.
ImageGrid apply_Gstar(const EdgeField& field);

/// sum chi |x - x_n| + beta * sum_p sum_{q in V(p)} |x(p) - x(q)|.
/// Every undirected edge is counted twice, as in the literal double sum.
double objective(const ImageGrid& x, const ImageGrid& x_n, const PixelMask& mask, double beta);

/// sum sqrt(chi (x - x_n)^2 + eta) + beta * sum sqrt((x(p) - x(q))^2 + eta).
double smoothed_objective(const ImageGrid& x, const ImageGrid& x_n, const PixelMask& mask,
                          const VariationalConfig& config);

/// Analytic gradient of smoothed_objective.
ImageGrid smoothed_gradient(const ImageGrid& x, const ImageGrid& x_n, const PixelMask& mask,
                            const VariationalConfig& config);

/// Lagged-diffusivity linearization at x_prev:
///   A v = D v + beta G*(W G v),  b = D x_n,
///   D = chi / sqrt((x_prev - x_n)^2 + eta),  W = 1 / sqrt((G x_prev)^2 + eta).
/// W is equal on both directions of an edge, so it is stored per undirected edge.
class FixedPointSystem {
 public:
  FixedPointSystem(const ImageGrid& x_prev, const ImageGrid& x_n, const PixelMask& mask,
                   const VariationalConfig& config);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  double beta() const noexcept { return beta_; }

  void apply(std::span<const double> v, std::span<double> out) const;
  std::vector<double> diagonal() const;
  LinearOperator as_operator() const;

  const ImageGrid& rhs() const noexcept { return rhs_; }
  std::span<const double> data_weights() const noexcept { return data_weight_; }
  /// Weight of edge (r,c)-(r,c+1), at index r*(N-1)+c.
  std::span<const double> horizontal_weights() const noexcept { return horizontal_; }
  /// Weight of edge (r,c)-(r+1,c), at index r*N+c.
  std::span<const double> vertical_weights() const noexcept { return vertical_; }

 private:
  std::size_t height_;
  std::size_t width_;
  double beta_;
  std::vector<double> data_weight_;
  std::vector<double> horizontal_;
  std::vector<double> vertical_;
  ImageGrid rhs_;
};

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;   ///< smoothed objective at this iterate
  double rel_change = 0.0;  ///< ||x^p - x^{p-1}|| / ||x^{p-1}||
  int inner_iterations = 0;
  double inner_residual = 0.0;
  bool inner_converged = true;
};

struct VstepResult {
  ImageGrid image;
  std::vector<IterationRecord> trace;  ///< row 0 describes the initial iterate
  bool converged = false;
  std::vector<std::string> warnings;

  int outer_iterations() const noexcept { return static_cast<int>(trace.size()) - 1; }
};

/// Minimizes the smoothed l1 + local-TV objective by fixed-point iterations,
/// each solving the linearized system with warm-started CG. x0 defaults to x_n.
VstepResult vstep(const ImageGrid& x_n, const PixelMask& mask, const VariationalConfig& config,
                  const std::optional<ImageGrid>& x0 = std::nullopt);

/// CSV with header iter,objective,rel_change,inner_iters.
std::string trace_csv(const std::vector<IterationRecord>& trace);

}  // namespace vstep
