#include "vstep/cg.hpp"

#include <algorithm>
#include <cmath>

#include "vstep/errors.hpp"

namespace vstep {

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) noexcept { return std::sqrt(dot(a, a)); }

SolveResult solve_linear(const LinearOperator& A, const ImageGrid& b, const ImageGrid& x0,
                         double inner_tol, int max_inner) {
  require_same_shape(b, x0, "solve_linear");
  if (!(inner_tol > 0.0)) throw ValidationError("inner tolerance must be positive");
  if (max_inner < 1) throw ValidationError("max inner iterations must be >= 1");

  constexpr double kTiny = 1e-300;
  const std::size_t n = b.size();
  const bool precondition = A.diagonal.size() == n;
  std::vector<double> inv_diag;
  if (precondition) {
    inv_diag.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      inv_diag[i] = A.diagonal[i] > 0.0 ? 1.0 / A.diagonal[i] : 1.0;
    }
  }

  SolveResult result{x0, 0, 0.0, 0.0, false};
  auto x = result.x.pixels();
  const auto rhs = b.pixels();

  auto precond = [&](std::span<const double> in, std::span<double> out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = precondition ? in[i] * inv_diag[i] : in[i];
  };

  std::vector<double> r(n), z(n), p(n), Ap(n);
  precond(rhs, z);
  double scale = norm2(rhs);
  double scale_pre = norm2(z);

  A.apply(x, Ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - Ap[i];
  precond(r, z);
  // Homogeneous system: measure reduction of the initial residual instead.
  if (scale == 0.0) {
    scale = norm2(r);
    scale_pre = norm2(z);
  }
  scale = std::max(scale, kTiny);
  scale_pre = std::max(scale_pre, kTiny);

  auto converged = [&] {
    result.relative_residual = norm2(r) / scale;
    result.scaled_residual = norm2(z) / scale_pre;
    return result.relative_residual <= inner_tol && result.scaled_residual <= inner_tol;
  };
  if (converged()) {
    result.converged = true;
    return result;
  }

  p = z;
  double rz = dot(r, z);

  for (int k = 1; k <= max_inner; ++k) {
    A.apply(p, Ap);
    const double pAp = dot(p, Ap);
    if (!(pAp > 0.0) || !std::isfinite(pAp)) {
      throw NumericalError("conjugate gradient breakdown: p'Ap = " + std::to_string(pAp), k);
    }
    const double alpha = rz / pAp;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
    }
    precond(r, z);
    result.iterations = k;
    const bool done = converged();
    if (!std::isfinite(result.relative_residual)) {
      throw NumericalError("conjugate gradient produced a non-finite residual", k);
    }
    if (done) {
      result.converged = true;
      break;
    }
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  return result;
}

}  // namespace vstep
