#pragma once

#include "svx/interp.hpp"
#include "svx/lattice.hpp"

namespace svx {

/// Multiplicative <-> additive spectral variables, x = e^{2 lambda}.
inline Cplx lambda_of_x(Cplx x) { return 0.5 * std::log(x); }
inline Cplx x_of_lambda(Cplx lambda) { return std::exp(2.0 * lambda); }

struct StateVector {
  CVector amp;
  int magnons = 0;
};

/// prod_j B(x_j) |0>; the creation blocks commute, so the order of the
/// x-variables is immaterial (tested).
inline StateVector bethe_vector(const ModelParams& p,
                                const std::vector<Cplx>& xs) {
  const Eigen::Index dim = quantum_dim(p.L);
  StateVector v;
  v.amp = CVector::Zero(dim);
  v.amp[0] = Cplx(1);
  for (const Cplx x : xs) v.amp = creation_block(p, lambda_of_x(x)) * v.amp;
  v.magnons = static_cast<int>(xs.size());
  return v;
}

/// <0| prod_i C(x_i): a bilinear covector, no complex conjugation anywhere.
inline CRowVector dual_covector(const ModelParams& p,
                                const std::vector<Cplx>& xs) {
  const Eigen::Index dim = quantum_dim(p.L);
  CRowVector w = CRowVector::Zero(dim);
  w[0] = Cplx(1);
  for (const Cplx x : xs) w = w * annihilation_block(p, lambda_of_x(x));
  return w;
}

/**
 * \brief Scalar product <0| prod C(root_i) prod B(free_j) |0>.
 *
 * The root side is held fixed (on shell in every downstream use); the free
 * side is the argument of the resulting function. Sectors must match.
 */
inline Cplx oracle_scalar(const ModelParams& p, const std::vector<Cplx>& roots,
                          const std::vector<Cplx>& free) {
  if (roots.size() != free.size())
    throw config_error("oracle_scalar: root and free sectors differ");
  if (static_cast<int>(roots.size()) > p.L)
    throw config_error("oracle_scalar: more magnons than sites");
  const StateVector ket = bethe_vector(p, free);
  const CRowVector bra = dual_covector(p, roots);
  return (bra * ket.amp)(0);
}

/// Monomial prefactor that turns the scalar product into a polynomial:
/// e^{lambda (L-1)} per variable (twisted) or x^L per variable (open).
inline Cplx polynomial_prefactor(const ModelParams& p, Cplx x) {
  if (p.boundary == Boundary::Twisted)
    return std::exp(lambda_of_x(x) * Cplx(p.L - 1));
  return std::pow(x, p.L);
}

/// Scalar product times the prefactor, evaluated at one free point.
inline Cplx oracle_value(const ModelParams& p, const std::vector<Cplx>& roots,
                         const std::vector<Cplx>& free) {
  Cplx pref(1);
  for (const Cplx x : free) pref *= polynomial_prefactor(p, x);
  return pref * oracle_scalar(p, roots, free);
}

/// Per-variable degree cap of the polynomial form: L-1 (twisted) or 2L (open).
inline int polynomial_cap(const ModelParams& p) {
  return p.boundary == Boundary::Twisted ? p.L - 1 : 2 * p.L;
}

struct OraclePoly {
  SymPoly<Cplx> poly;   // truncated to the nominal cap
  double tail_rel = 0;  // largest beyond-cap coefficient, relative
};

/**
 * \brief Interpolate the polynomial form of the on-shell scalar product.
 *
 * Samples on an over-resolved tensor grid (cap+1+extra nodes per axis) so the
 * beyond-cap coefficients double as a degree-saturation diagnostic.
 */
inline OraclePoly oracle_polynomial(const ModelParams& p,
                                    const std::vector<Cplx>& roots, int extra = 1,
                                    double radius = 0.83) {
  const int n = static_cast<int>(roots.size());
  if (n < 1) throw config_error("oracle_polynomial: need at least one magnon");
  const int cap = polynomial_cap(p);
  const auto nodes = circle_nodes(cap + 1 + extra, radius);
  std::vector<std::vector<Cplx>> axes(n, nodes);
  const auto grid = sample_grid<Cplx>(
      axes, [&](const std::vector<Cplx>& pt) { return oracle_value(p, roots, pt); });
  SymPoly<Cplx> full = interp_grid(grid);
  OraclePoly out;
  const double scale = full.max_abs_coeff();
  out.tail_rel = scale > 0 ? full.tail_norm(cap) / scale : 0.0;
  out.poly = full.truncated(cap);
  return out;
}

/**
 * \brief Transfer-matrix eigenvector residual of a candidate Bethe state.
 *
 * Builds prod B(x_i^B)|0>, applies the (twisted or double-row) transfer
 * matrix at a fixed generic spectral point, and measures the relative
 * off-direction norm with the Rayleigh-optimal eigenvalue.
 */
inline double eigencheck(const ModelParams& p, const std::vector<Cplx>& roots,
                         Cplx lambda_probe = Cplx(0.2931, 0.4127)) {
  const StateVector v = bethe_vector(p, roots);
  const double vn = v.amp.norm();
  if (!(vn > 0)) return 1.0;  // null state: not an eigenvector candidate
  const CMatrix M = transfer_matrix(p, lambda_probe);
  const CVector Mv = M * v.amp;
  const Cplx theta = (v.amp.adjoint() * Mv)(0) / Cplx(vn * vn);
  const double denom = Mv.norm();
  if (!(denom > 0)) return 1.0;
  return (Mv - theta * v.amp).norm() / denom;
}

}  // namespace svx
