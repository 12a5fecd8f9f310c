#pragma once

#include <algorithm>
#include <cmath>

#include "svx/types.hpp"

namespace svx {

/// Horner evaluation of a dense univariate polynomial, coeffs[k] ~ z^k.
template <typename Scalar>
Scalar polyval(const std::vector<Scalar>& coeffs, Scalar z) {
  Scalar acc(0);
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * z + *it;
  return acc;
}

/// Expand prod_j (z - roots[j]) into dense coefficients (monic).
template <typename Scalar>
std::vector<Scalar> poly_from_roots(const std::vector<Scalar>& roots) {
  std::vector<Scalar> c{Scalar(1)};
  for (const Scalar& r : roots) {
    std::vector<Scalar> next(c.size() + 1, Scalar(0));
    for (std::size_t k = 0; k < c.size(); ++k) {
      next[k + 1] += c[k];
      next[k] -= r * c[k];
    }
    c = std::move(next);
  }
  return c;
}

template <typename Scalar>
std::vector<Scalar> polymul(const std::vector<Scalar>& a,
                            const std::vector<Scalar>& b) {
  std::vector<Scalar> c(a.size() + b.size() - 1, Scalar(0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  return c;
}

/// Drop trailing coefficients below rel_tol * max|coeff|.
template <typename Scalar>
std::vector<Scalar> poly_trim(std::vector<Scalar> c, double rel_tol = 1e-12) {
  double m = 0.0;
  for (const auto& v : c) m = std::max(m, std::abs(v));
  while (c.size() > 1 && std::abs(c.back()) <= rel_tol * m) c.pop_back();
  return c;
}

/**
 * \brief All roots of a dense univariate polynomial via the companion matrix.
 *
 * Leading coefficients below rel_tol * max|coeff| are trimmed first so that
 * over-resolved interpolants do not inject spurious roots near infinity.
 */
inline std::vector<Cplx> polyroots(std::vector<Cplx> coeffs,
                                   double rel_tol = 1e-11) {
  coeffs = poly_trim(std::move(coeffs), rel_tol);
  const int deg = static_cast<int>(coeffs.size()) - 1;
  if (deg < 1) return {};
  CMatrix comp = CMatrix::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) comp(i, i - 1) = Cplx(1);
  for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -coeffs[i] / coeffs[deg];
  Eigen::ComplexEigenSolver<CMatrix> es(comp, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw numeric_error("polyroots: eigensolver failed");
  std::vector<Cplx> roots(es.eigenvalues().data(),
                          es.eigenvalues().data() + deg);
  std::sort(roots.begin(), roots.end(), [](Cplx a, Cplx b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return roots;
}

}  // namespace svx
