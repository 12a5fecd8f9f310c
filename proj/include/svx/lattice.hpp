#pragma once

#include <bit>
#include <cmath>

#include "svx/model.hpp"
#include "svx/types.hpp"

namespace svx {

struct Weights {
  Cplx a, b, c;
};

/// Trigonometric six-vertex weights a = sinh(lambda+gamma), b = sinh(lambda),
/// c = sinh(gamma).
inline Weights weights(const ModelParams& p, Cplx lambda) {
  return {std::sinh(lambda + p.gamma), std::sinh(lambda), std::sinh(p.gamma)};
}

/// Quantum-space dimension 2^L with a hard memory guard.
inline Eigen::Index quantum_dim(int L) {
  if (L < 1) throw config_error("quantum_dim: L must be >= 1");
  if (L > 14) throw config_error("quantum_dim: L > 14 exceeds the memory guard");
  return Eigen::Index(1) << L;
}

/// Auxiliary-space blocks of a monodromy matrix acting on the 2^L chain.
struct MonodromyBlocks {
  CMatrix A, B, C, D;
};

namespace detail {

/// Left-multiply the accumulated blocks by the site-i R-matrix R_{0i}(u).
/// Row pairs (bit clear / bit set at site i) mix; everything else scales.
inline void apply_site(MonodromyBlocks& T, int site, const Weights& w,
                       Eigen::Index dim) {
  const Eigen::Index mask = Eigen::Index(1) << site;
  CRowVector oldAd, oldBd, oldCu, oldDu;
  for (Eigen::Index u = 0; u < dim; ++u) {
    if (u & mask) continue;
    const Eigen::Index d = u | mask;
    oldAd = T.A.row(d);
    oldBd = T.B.row(d);
    oldCu = T.C.row(u);
    oldDu = T.D.row(u);

    T.A.row(u) *= w.a;
    T.B.row(u) *= w.a;
    T.C.row(u) = w.c * oldAd + w.b * oldCu;
    T.D.row(u) = w.c * oldBd + w.b * oldDu;

    T.A.row(d) = w.b * oldAd + w.c * oldCu;
    T.B.row(d) = w.b * oldBd + w.c * oldDu;
    T.C.row(d) *= w.a;
    T.D.row(d) *= w.a;
  }
}

inline MonodromyBlocks identity_blocks(Eigen::Index dim) {
  MonodromyBlocks T;
  T.A = CMatrix::Identity(dim, dim);
  T.B = CMatrix::Zero(dim, dim);
  T.C = CMatrix::Zero(dim, dim);
  T.D = CMatrix::Identity(dim, dim);
  return T;
}

}  // namespace detail

/// T(lambda) = R_{0L}(lambda - mu_L) ... R_{01}(lambda - mu_1).
inline MonodromyBlocks monodromy(const ModelParams& p, Cplx lambda) {
  const Eigen::Index dim = quantum_dim(p.L);
  MonodromyBlocks T = detail::identity_blocks(dim);
  for (int i = 0; i < p.L; ++i)
    detail::apply_site(T, i, weights(p, lambda - p.mu[i]), dim);
  return T;
}

/// That(lambda) = R_{01}(lambda + mu_1) ... R_{0L}(lambda + mu_L); satisfies
/// That(lambda) proportional to T(-lambda)^{-1}, which is what the reflection
/// algebra needs.
inline MonodromyBlocks hat_monodromy(const ModelParams& p, Cplx lambda) {
  const Eigen::Index dim = quantum_dim(p.L);
  MonodromyBlocks T = detail::identity_blocks(dim);
  for (int i = p.L - 1; i >= 0; --i)
    detail::apply_site(T, i, weights(p, lambda + p.mu[i]), dim);
  return T;
}

/// t(lambda) = phi1 A(lambda) + phi2 D(lambda).
inline CMatrix twisted_transfer(const ModelParams& p, Cplx lambda) {
  const MonodromyBlocks T = monodromy(p, lambda);
  return p.phi1 * T.A + p.phi2 * T.D;
}

struct KPair {
  Cplx up, dn;
};

/// Diagonal reflection matrix at the zero end, parameterized by h.
inline KPair k_minus(const ModelParams& p, Cplx lambda) {
  return {std::sinh(p.h + lambda), std::sinh(p.h - lambda)};
}

/// Diagonal reflection matrix at the far end, parameterized by hbar. The
/// crossing shift is fixed by the Bethe-consistency calibration tests.
inline KPair k_plus(const ModelParams& p, Cplx lambda) {
  return {std::sinh(p.hbar - lambda - p.gamma),
          std::sinh(p.hbar + lambda + p.gamma)};
}

/// Double-row monodromy U(lambda) = T(lambda) K^-(lambda) That(lambda).
inline MonodromyBlocks double_row(const ModelParams& p, Cplx lambda) {
  const MonodromyBlocks T = monodromy(p, lambda);
  const MonodromyBlocks H = hat_monodromy(p, lambda);
  const KPair k = k_minus(p, lambda);
  MonodromyBlocks U;
  U.A = k.up * T.A * H.A + k.dn * T.B * H.C;
  U.B = k.up * T.A * H.B + k.dn * T.B * H.D;
  U.C = k.up * T.C * H.A + k.dn * T.D * H.C;
  U.D = k.up * T.C * H.B + k.dn * T.D * H.D;
  return U;
}

/// tau(lambda) = tr_0 [ K^+(lambda) U(lambda) ].
inline CMatrix double_row_transfer(const ModelParams& p, Cplx lambda) {
  const MonodromyBlocks U = double_row(p, lambda);
  const KPair k = k_plus(p, lambda);
  return k.up * U.A + k.dn * U.D;
}

/// Transfer matrix for either boundary at the same call site.
inline CMatrix transfer_matrix(const ModelParams& p, Cplx lambda) {
  return p.boundary == Boundary::Twisted ? twisted_transfer(p, lambda)
                                         : double_row_transfer(p, lambda);
}

/// Creation block for either boundary: B(lambda) or the double-row B.
inline CMatrix creation_block(const ModelParams& p, Cplx lambda) {
  if (p.boundary == Boundary::Twisted) return monodromy(p, lambda).B;
  return double_row(p, lambda).B;
}

inline CMatrix annihilation_block(const ModelParams& p, Cplx lambda) {
  if (p.boundary == Boundary::Twisted) return monodromy(p, lambda).C;
  return double_row(p, lambda).C;
}

inline int magnon_number(Eigen::Index basis_state) {
  return std::popcount(static_cast<std::uint64_t>(basis_state));
}

}  // namespace svx
