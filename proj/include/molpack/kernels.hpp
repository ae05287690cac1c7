#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "molpack/error.hpp"
#include "molpack/matrix.hpp"

namespace molpack {

// out[r] = table[indices[r]].  Every index must address a row of `table`.
template <typename T>
Matrix<T> gather(const Matrix<T>& table, std::span<const std::int32_t> indices) {
  Matrix<T> out(indices.size(), table.cols());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const std::int32_t v = indices[r];
    if (v < 0 || static_cast<std::size_t>(v) >= table.rows()) {
      throw BoundsError("gather: index " + std::to_string(v) + " at position " +
                        std::to_string(r) + " outside table with " +
                        std::to_string(table.rows()) + " rows");
    }
    auto src = table.row(static_cast<std::size_t>(v));
    auto dst = out.row(r);
    for (std::size_t c = 0; c < src.size(); ++c) dst[c] = src[c];
  }
  return out;
}

// out = base; then out[indices[r]] += values[r] for r = 0,1,2,... in order.
// Contributions hitting the same output row are therefore accumulated in
// increasing source-row order, which makes the result deterministic.
template <typename T>
Matrix<T> scatter_add(const Matrix<T>& base, std::span<const std::int32_t> indices,
                      const Matrix<T>& values) {
  if (values.rows() != indices.size()) {
    throw ShapeError("scatter_add: " + std::to_string(indices.size()) + " indices but " +
                     std::to_string(values.rows()) + " value rows");
  }
  if (values.cols() != base.cols()) {
    throw ShapeError("scatter_add: value width " + std::to_string(values.cols()) +
                     " does not match base width " + std::to_string(base.cols()));
  }
  Matrix<T> out = base;
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const std::int32_t m = indices[r];
    if (m < 0 || static_cast<std::size_t>(m) >= base.rows()) {
      throw BoundsError("scatter_add: index " + std::to_string(m) + " at position " +
                        std::to_string(r) + " outside base with " +
                        std::to_string(base.rows()) + " rows");
    }
    auto dst = out.row(static_cast<std::size_t>(m));
    auto src = values.row(r);
    for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
  }
  return out;
}

// Uniform grid of Gaussians used to featurize an interatomic distance.
// Centers sit at k * spacing for k = 0 .. size-1.
struct RbfGrid {
  double spacing = 0.0;
  double gamma = 0.0;
  int size = 0;

  // Grid spanning [0, r_cut) with `size` functions and the conventional
  // width gamma = 1 / (2 * spacing^2).
  static RbfGrid uniform(double r_cut, int size) {
    if (size <= 0 || r_cut <= 0.0) {
      throw ConfigError("RbfGrid: r_cut and size must be positive");
    }
    RbfGrid g;
    g.size = size;
    g.spacing = r_cut / size;
    g.gamma = 1.0 / (2.0 * g.spacing * g.spacing);
    return g;
  }
};

// out[k] = exp(-gamma * (d - k*spacing)^2).  `out` must have grid.size slots.
template <typename T>
void rbf_expand(T distance, const RbfGrid& grid, std::span<T> out) {
  if (out.size() != static_cast<std::size_t>(grid.size)) {
    throw ShapeError("rbf_expand: output has " + std::to_string(out.size()) +
                     " slots, grid has " + std::to_string(grid.size));
  }
  for (int k = 0; k < grid.size; ++k) {
    const T delta = distance - static_cast<T>(k) * static_cast<T>(grid.spacing);
    out[k] = std::exp(static_cast<T>(-grid.gamma) * delta * delta);
  }
}

template <typename T>
std::vector<T> rbf_expand(T distance, const RbfGrid& grid) {
  std::vector<T> out(static_cast<std::size_t>(grid.size));
  rbf_expand(distance, grid, std::span<T>(out));
  return out;
}

// Smooth cutoff: 0.5 * (cos(pi * d / r_cut) + 1) inside the cutoff, 0 outside.
template <typename T>
T cosine_cutoff(T distance, T r_cut) {
  if (distance >= r_cut) return T{0};
  const T pi = static_cast<T>(3.14159265358979323846);
  return static_cast<T>(0.5) * (std::cos(pi * distance / r_cut) + T{1});
}

// Literal thresholded softplus: (1/beta) * log(1 + exp(beta*x)) while
// beta*x <= tau, and the identity beyond the threshold.
inline double softplus_ref(double x, double beta, double tau) {
  const double bx = beta * x;
  if (bx <= tau) return std::log1p(std::exp(bx)) / beta;
  return x;
}

// Overflow-free softplus (beta = 1): log(1 + exp(-|x|)) + max(x, 0).
// Equals softplus exactly in real arithmetic and never evaluates exp on a
// positive argument, so it is finite for every finite input.
template <typename T>
T softplus_opt(T x) {
  return std::log1p(std::exp(-std::abs(x))) + std::max(x, T{0});
}

// Shifted softplus activation: softplus(x) - log(2), zero at the origin.
template <typename T>
T shifted_softplus(T x) {
  return softplus_opt(x) - static_cast<T>(0.6931471805599453094);
}

}  // namespace molpack
