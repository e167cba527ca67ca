#include "vstep/variational.hpp"

#include <cmath>
#include <sstream>

#include "vstep/errors.hpp"

namespace vstep {
namespace {

void require_mask(const ImageGrid& x, const ImageGrid& x_n, const PixelMask& mask,
                  const char* context) {
  require_same_shape(x, x_n, context);
  if (!mask.matches(x)) {
    throw DimensionError(std::string(context) + ": mask dimensions do not match the image");
  }
}

// Visits every undirected 4-neighbour edge as (p, q, edge slot) where the
// slot indexes the horizontal or vertical weight array.
template <typename Horizontal, typename Vertical>
void for_each_edge(std::size_t h, std::size_t w, Horizontal&& horizontal, Vertical&& vertical) {
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c + 1 < w; ++c) horizontal(r * w + c, r * w + c + 1, r * (w - 1) + c);
  }
  for (std::size_t r = 0; r + 1 < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) vertical(r * w + c, (r + 1) * w + c, r * w + c);
  }
}

}  // namespace

void VariationalConfig::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("beta must be positive");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ValidationError("eta must be positive");
  if (!(outer_tol > 0.0)) throw ValidationError("outer tolerance must be positive");
  if (!(inner_tol > 0.0)) throw ValidationError("inner tolerance must be positive");
  if (max_outer < 1) throw ValidationError("max outer iterations must be >= 1");
  if (max_inner < 1) throw ValidationError("max inner iterations must be >= 1");
}

EdgeField::EdgeField(std::size_t height, std::size_t width)
    : height_(height), width_(width), values_(directed_count(height, width), 0.0) {
  if (height == 0 || width == 0) throw DimensionError("edge field dimensions must be positive");
}

EdgeField apply_G(const ImageGrid& img) {
  const std::size_t h = img.height();
  const std::size_t w = img.width();
  EdgeField field(h, w);
  auto out = field.values();
  std::size_t e = 0;
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      if (c + 1 < w) {
        const double d = img(r, c) - img(r, c + 1);
        out[e++] = d;
        out[e++] = -d;
      }
      if (r + 1 < h) {
        const double d = img(r, c) - img(r + 1, c);
        out[e++] = d;
        out[e++] = -d;
      }
    }
  }
  return field;
}

ImageGrid apply_Gstar(const EdgeField& field) {
  const std::size_t h = field.height();
  const std::size_t w = field.width();
  ImageGrid out(h, w);
  const auto y = field.values();
  std::size_t e = 0;
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      if (c + 1 < w) {
        out(r, c) += y[e] - y[e + 1];
        out(r, c + 1) += y[e + 1] - y[e];
        e += 2;
      }
      if (r + 1 < h) {
        out(r, c) += y[e] - y[e + 1];
        out(r + 1, c) += y[e + 1] - y[e];
        e += 2;
      }
    }
  }
  return out;
}

double objective(const ImageGrid& x, const ImageGrid& x_n, const PixelMask& mask, double beta) {
  require_mask(x, x_n, mask, "objective");
  const auto xv = x.pixels();
  const auto nv = x_n.pixels();
  double data = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) data += mask.chi(i) * std::abs(xv[i] - nv[i]);
  double tv = 0.0;
  auto edge = [&](std::size_t p, std::size_t q, std::size_t) { tv += std::abs(xv[p] - xv[q]); };
  for_each_edge(x.height(), x.width(), edge, edge);
  return data + beta * 2.0 * tv;
}

double smoothed_objective(const ImageGrid& x, const ImageGrid& x_n, const PixelMask& mask,
                          const VariationalConfig& config) {
  require_mask(x, x_n, mask, "smoothed_objective");
  const double eta = config.eta;
  const auto xv = x.pixels();
  const auto nv = x_n.pixels();
  double data = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const double d = xv[i] - nv[i];
    data += std::sqrt(mask.chi(i) * d * d + eta);
  }
  double tv = 0.0;
  auto edge = [&](std::size_t p, std::size_t q, std::size_t) {
    const double d = xv[p] - xv[q];
    tv += std::sqrt(d * d + eta);
  };
  for_each_edge(x.height(), x.width(), edge, edge);
  return data + config.beta * 2.0 * tv;
}

ImageGrid smoothed_gradient(const ImageGrid& x, const ImageGrid& x_n, const PixelMask& mask,
                            const VariationalConfig& config) {
  require_mask(x, x_n, mask, "smoothed_gradient");
  const double eta = config.eta;
  const auto xv = x.pixels();
  const auto nv = x_n.pixels();
  ImageGrid grad(x.height(), x.width());
  auto g = grad.pixels();
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const double chi = mask.chi(i);
    const double d = xv[i] - nv[i];
    g[i] = chi * d / std::sqrt(chi * d * d + eta);
  }
  // G* of the antisymmetric field Gx / sqrt((Gx)^2 + eta) doubles each edge term.
  const double k = 2.0 * config.beta;
  auto edge = [&](std::size_t p, std::size_t q, std::size_t) {
    const double d = xv[p] - xv[q];
    const double t = k * d / std::sqrt(d * d + eta);
    g[p] += t;
    g[q] -= t;
  };
  for_each_edge(x.height(), x.width(), edge, edge);
  return grad;
}

FixedPointSystem::FixedPointSystem(const ImageGrid& x_prev, const ImageGrid& x_n,
                                   const PixelMask& mask, const VariationalConfig& config)
    : height_(x_prev.height()),
      width_(x_prev.width()),
      beta_(config.beta),
      data_weight_(x_prev.size()),
      horizontal_(x_prev.height() * (x_prev.width() - 1)),
      vertical_((x_prev.height() - 1) * x_prev.width()),
      rhs_(x_prev.height(), x_prev.width()) {
  require_mask(x_prev, x_n, mask, "fixed_point_system");
  config.validate();
  const double eta = config.eta;
  const auto xv = x_prev.pixels();
  const auto nv = x_n.pixels();
  auto b = rhs_.pixels();
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const double d = xv[i] - nv[i];
    data_weight_[i] = mask.chi(i) / std::sqrt(d * d + eta);
    b[i] = data_weight_[i] * nv[i];
  }
  for_each_edge(
      height_, width_,
      [&](std::size_t p, std::size_t q, std::size_t slot) {
        const double d = xv[p] - xv[q];
        horizontal_[slot] = 1.0 / std::sqrt(d * d + eta);
      },
      [&](std::size_t p, std::size_t q, std::size_t slot) {
        const double d = xv[p] - xv[q];
        vertical_[slot] = 1.0 / std::sqrt(d * d + eta);
      });
}

void FixedPointSystem::apply(std::span<const double> v, std::span<double> out) const {
  const std::size_t h = height_;
  const std::size_t w = width_;
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = data_weight_[i] * v[i];
  const double k = 2.0 * beta_;
  for (std::size_t r = 0; r < h; ++r) {
    const std::size_t row = r * w;
    const double* hw = horizontal_.data() + r * (w - 1);
    for (std::size_t c = 0; c + 1 < w; ++c) {
      const double t = k * hw[c] * (v[row + c] - v[row + c + 1]);
      out[row + c] += t;
      out[row + c + 1] -= t;
    }
  }
  for (std::size_t r = 0; r + 1 < h; ++r) {
    const std::size_t row = r * w;
    const double* vw = vertical_.data() + row;
    for (std::size_t c = 0; c < w; ++c) {
      const double t = k * vw[c] * (v[row + c] - v[row + w + c]);
      out[row + c] += t;
      out[row + w + c] -= t;
    }
  }
}

std::vector<double> FixedPointSystem::diagonal() const {
  std::vector<double> diag = data_weight_;
  const double k = 2.0 * beta_;
  for_each_edge(
      height_, width_,
      [&](std::size_t p, std::size_t q, std::size_t slot) {
        diag[p] += k * horizontal_[slot];
        diag[q] += k * horizontal_[slot];
      },
      [&](std::size_t p, std::size_t q, std::size_t slot) {
        diag[p] += k * vertical_[slot];
        diag[q] += k * vertical_[slot];
      });
  return diag;
}

LinearOperator FixedPointSystem::as_operator() const {
  return {[this](std::span<const double> in, std::span<double> out) { apply(in, out); },
          diagonal()};
}

VstepResult vstep(const ImageGrid& x_n, const PixelMask& mask, const VariationalConfig& config,
                  const std::optional<ImageGrid>& x0) {
  config.validate();
  if (!mask.matches(x_n)) throw DimensionError("vstep: mask dimensions do not match the image");
  if (x0) require_same_shape(x_n, *x0, "vstep initial iterate");

  VstepResult result{x0 ? *x0 : x_n, {}, false, {}};
  if (mask.clean_count() == 0) {
    result.warnings.push_back(
        "no impulse-free sites: the data term vanishes and the system is singular on constants");
  }
  result.trace.push_back({0, smoothed_objective(result.image, x_n, mask, config), 0.0, 0, 0.0, true});

  for (int iter = 1; iter <= config.max_outer; ++iter) {
    const FixedPointSystem system(result.image, x_n, mask, config);
    SolveResult solved = solve_linear(system.as_operator(), system.rhs(), result.image,
                                      config.inner_tol, config.max_inner);
    if (!solved.x.all_finite()) throw NumericalError("vstep produced non-finite pixels", iter);

    const auto prev = result.image.pixels();
    const auto next = solved.x.pixels();
    double diff = 0.0;
    for (std::size_t i = 0; i < prev.size(); ++i) diff += (next[i] - prev[i]) * (next[i] - prev[i]);
    const double prev_norm = norm2(prev);
    // Absolute change when the previous iterate is identically zero.
    const double rel = prev_norm > 0.0 ? std::sqrt(diff) / prev_norm : std::sqrt(diff);

    result.image = std::move(solved.x);
    result.trace.push_back({iter, smoothed_objective(result.image, x_n, mask, config), rel,
                            solved.iterations, solved.relative_residual, solved.converged});
    if (!solved.converged) {
      result.warnings.push_back("inner solver hit max_inner at outer iteration " +
                                std::to_string(iter));
    }
    if (rel < config.outer_tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

std::string trace_csv(const std::vector<IterationRecord>& trace) {
  std::ostringstream out;
  out.precision(17);
  out << "iter,objective,rel_change,inner_iters\n";
  for (const auto& rec : trace) {
    out << rec.iteration << ',' << rec.objective << ',' << rec.rel_change << ','
        << rec.inner_iterations << '\n';
  }
  return out.str();
}

}  // namespace vstep
