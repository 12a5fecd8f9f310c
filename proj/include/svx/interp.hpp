#pragma once

#include <cmath>
#include <numbers>

#include "svx/sympoly.hpp"
#include "svx/types.hpp"

namespace svx {

/// Tensor-product grid sample: per-axis nodes plus a flat value tensor laid
/// out with the SymPoly convention (axis 0 fastest).
template <typename Scalar = Cplx>
struct GridSample {
  std::vector<std::vector<Scalar>> axes;
  VectorX<Scalar> values;
};

/// count nodes on a circle of the given radius, rotated by a generic phase so
/// the set avoids coordinate axes and real-line degeneracies.
inline std::vector<Cplx> circle_nodes(int count, double radius = 0.83,
                                      double phase = std::numbers::pi / 7.0) {
  if (count < 1) throw config_error("circle_nodes: count must be >= 1");
  std::vector<Cplx> nodes(count);
  for (int k = 0; k < count; ++k) {
    const double th = phase + 2.0 * std::numbers::pi * k / count;
    nodes[k] = std::polar(radius, th);
  }
  return nodes;
}

template <typename Scalar>
MatrixX<Scalar> vandermonde(const std::vector<Scalar>& nodes) {
  const int n = static_cast<int>(nodes.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (nodes[i] == nodes[j])
        throw config_error("vandermonde: duplicate interpolation nodes");
  MatrixX<Scalar> V(n, n);
  for (int i = 0; i < n; ++i) {
    Scalar p(1);
    for (int j = 0; j < n; ++j) {
      V(i, j) = p;
      p *= nodes[i];
    }
  }
  return V;
}

/// 2-norm condition estimate of the interpolation problem on these nodes.
inline double vandermonde_cond(const std::vector<Cplx>& nodes) {
  Eigen::JacobiSVD<CMatrix> svd(vandermonde(nodes));
  const auto& s = svd.singularValues();
  return s(0) / s(s.size() - 1);
}

/**
 * \brief Coefficients of the polynomial tensor interpolant on a full grid.
 *
 * Solves one Vandermonde system per axis; node counts fix the per-axis cap to
 * nodes-1. Round-tripping the nodes reproduces the samples to solver accuracy.
 */
template <typename Scalar>
SymPoly<Scalar> interp_grid(const GridSample<Scalar>& sample) {
  const int nvars = static_cast<int>(sample.axes.size());
  if (nvars < 1) throw config_error("interp_grid: no axes");
  const int count = static_cast<int>(sample.axes[0].size());
  if (count < 1) throw config_error("interp_grid: empty axis");
  for (const auto& ax : sample.axes)
    if (static_cast<int>(ax.size()) != count)
      throw config_error("interp_grid: axes must share one node count");
  const Eigen::Index total = SymPoly<Scalar>::tensor_size(nvars, count - 1);
  if (sample.values.size() != total)
    throw config_error("interp_grid: value tensor has wrong size");

  VectorX<Scalar> work = sample.values;
  Eigen::Index stride = 1;
  for (int v = 0; v < nvars; ++v) {
    const auto lu = vandermonde(sample.axes[v]).partialPivLu();
    const Eigen::Index outer = total / (stride * count);
    VectorX<Scalar> rhs(count);
    for (Eigen::Index o = 0; o < outer; ++o)
      for (Eigen::Index i = 0; i < stride; ++i) {
        const Eigen::Index base = o * stride * count + i;
        for (int e = 0; e < count; ++e) rhs[e] = work[base + e * stride];
        const VectorX<Scalar> sol = lu.solve(rhs);
        for (int e = 0; e < count; ++e) work[base + e * stride] = sol[e];
      }
    stride *= count;
  }
  SymPoly<Scalar> out(nvars, count - 1);
  out.coeffs() = work;
  return out;
}

/// Sample a callable on a tensor grid (axis 0 fastest, SymPoly layout).
template <typename Scalar, typename F>
GridSample<Scalar> sample_grid(const std::vector<std::vector<Scalar>>& axes,
                               F&& fn) {
  GridSample<Scalar> g;
  g.axes = axes;
  const int nvars = static_cast<int>(axes.size());
  const int count = static_cast<int>(axes[0].size());
  const Eigen::Index total = SymPoly<Scalar>::tensor_size(nvars, count - 1);
  g.values.resize(total);
  std::vector<int> idx(nvars, 0);
  std::vector<Scalar> point(nvars);
  for (Eigen::Index flat = 0; flat < total; ++flat) {
    for (int v = 0; v < nvars; ++v) point[v] = axes[v][idx[v]];
    g.values[flat] = fn(point);
    int k = 0;
    while (k < nvars && ++idx[k] == count) idx[k++] = 0;
  }
  return g;
}

/**
 * \brief Matrix-valued univariate interpolation.
 *
 * Given samples F(z_j) of a matrix polynomial of degree nodes-1, returns the
 * coefficient matrices C_k with F(z) = sum_k C_k z^k (entrywise Vandermonde).
 */
template <typename Scalar>
std::vector<MatrixX<Scalar>> univariate_interp(
    const std::vector<Scalar>& nodes,
    const std::vector<MatrixX<Scalar>>& values) {
  const int count = static_cast<int>(nodes.size());
  if (count < 1) throw config_error("univariate_interp: no nodes");
  if (static_cast<int>(values.size()) != count)
    throw config_error("univariate_interp: node/value count mismatch");
  const Eigen::Index rows = values[0].rows(), cols = values[0].cols();
  for (const auto& m : values)
    if (m.rows() != rows || m.cols() != cols)
      throw config_error("univariate_interp: inconsistent matrix shapes");

  MatrixX<Scalar> rhs(count, rows * cols);
  for (int j = 0; j < count; ++j)
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c)
        rhs(j, r * cols + c) = values[j](r, c);
  const MatrixX<Scalar> sol = vandermonde(nodes).partialPivLu().solve(rhs);
  std::vector<MatrixX<Scalar>> out(count, MatrixX<Scalar>(rows, cols));
  for (int k = 0; k < count; ++k)
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c)
        out[k](r, c) = sol(k, r * cols + c);
  return out;
}

}  // namespace svx
