#pragma once

#include <functional>
#include <span>
#include <vector>

#include "vstep/image.hpp"

namespace vstep {

/// Matrix-free symmetric positive (semi-)definite operator on image-shaped vectors.
struct LinearOperator {
  std::function<void(std::span<const double> in, std::span<double> out)> apply;
  /// Operator diagonal used as a Jacobi preconditioner; empty means none.
  std::vector<double> diagonal;
};

struct SolveResult {
  ImageGrid x;
  int iterations = 0;
  double relative_residual = 0.0;  ///< ||A x - b|| / ||b||, or / ||r0|| when b = 0
  /// ||M^-1 (A x - b)|| / ||M^-1 b|| with M the Jacobi preconditioner. Rows of
  /// very different scale (data-pinned vs. purely diffusive sites) all count.
  double scaled_residual = 0.0;
  bool converged = false;
};

/// Jacobi-preconditioned conjugate gradient. Stops when both the relative and
/// the diagonally scaled residual drop to inner_tol, or after max_inner
/// iterations (reported, not thrown).
/// Throws NumericalError on breakdown (p'Ap <= 0 or non-finite).
SolveResult solve_linear(const LinearOperator& A, const ImageGrid& b, const ImageGrid& x0,
                         double inner_tol, int max_inner);

double dot(std::span<const double> a, std::span<const double> b) noexcept;
double norm2(std::span<const double> a) noexcept;

}  // namespace vstep
