#pragma once

#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "svx/funeq.hpp"
#include "svx/interp.hpp"
#include "svx/model.hpp"
#include "svx/oracle.hpp"
#include "svx/rng.hpp"
#include "svx/sympoly.hpp"
#include "svx/types.hpp"

namespace svx {

namespace detail {

inline Cplx ipow(Cplx z, int e) {
  if (e < 0) return Cplx(1) / ipow(z, -e);
  Cplx r(1);
  while (e) {
    if (e & 1) r *= z;
    z *= z;
    e >>= 1;
  }
  return r;
}

inline double factorial(int k) {
  double r = 1;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

inline double falling_factorial(int e, int d) {
  double r = 1;
  for (int i = 0; i < d; ++i) r *= e - i;
  return r;
}

/// Denominator clearing that turns the probe dependence into a polynomial.
inline Cplx clearing_twisted(const ModelParams& p, Cplx x0,
                             const std::vector<Cplx>& bethe) {
  Cplx c = Cplx(1) / ((p.q - Cplx(1) / p.q) * x0);
  for (const Cplx b : bethe) c *= x0 - b;
  return c;
}

inline Cplx clearing_open(const ModelParams& p, Cplx x0,
                          const std::vector<Cplx>& xs,
                          const std::vector<Cplx>& bethe) {
  const Cplx q = p.q;
  Cplx c = Cplx(1) / (q - Cplx(1) / q);
  for (const Cplx x : xs) c *= x0 * q - Cplx(1) / (x * q);
  for (const Cplx b : bethe) c *= (x0 * q - Cplx(1) / (b * q)) * (x0 - b);
  return c;
}

}  // namespace detail

/// Top power of the probe variable after clearing.
inline int hierarchy_degree(const ModelParams& p, int n) {
  return p.boundary == Boundary::Twisted ? p.L + n - 2 : 2 * p.L + 3 * n;
}

/// Row vector of all monomials of ℂ_cap[x_0..x_{nvars-1}] at one point,
/// ordered by the SymPoly flat index (variable 0 fastest).
inline CRowVector monomial_row(int nvars, int cap,
                               const std::vector<Cplx>& at) {
  const int m = cap + 1;
  const Eigen::Index cols = SymPoly<Cplx>::tensor_size(nvars, cap);
  std::vector<std::vector<Cplx>> pw(nvars, std::vector<Cplx>(m));
  for (int v = 0; v < nvars; ++v) {
    pw[v][0] = Cplx(1);
    for (int e = 1; e < m; ++e) pw[v][e] = pw[v][e - 1] * at[v];
  }
  CRowVector row(cols);
  for (Eigen::Index f = 0; f < cols; ++f) {
    Cplx val(1);
    Eigen::Index r = f;
    for (int v = 0; v < nvars; ++v) {
      val *= pw[v][r % m];
      r /= m;
    }
    row(f) = val;
  }
  return row;
}

/// Substitution x_var -> x0 realized through the Taylor expansion in the
/// derivative operators; equals poly.eval with the coordinate replaced.
inline Cplx taylor_substitution(const SymPoly<Cplx>& poly, int var, Cplx x0,
                                const std::vector<Cplx>& at) {
  Cplx acc(0);
  Cplx shift(1);
  for (int k = 0; k <= poly.cap(); ++k) {
    acc += shift / Cplx(detail::factorial(k)) * poly.partial(var, k).eval(at);
    shift *= x0 - at[var];
  }
  return acc;
}

/**
 * \brief Generic sample configurations for operator extraction.
 *
 * Coordinates are drawn from an annulus and rejected near every pole locus
 * of the coefficient functions: coinciding coordinates, the probe nodes,
 * the inhomogeneities, and for open boundaries the points +-1/q and the
 * reflected images 1/(q^2 x).
 */
inline std::vector<std::vector<Cplx>> generic_samples(
    const ModelParams& p, int n, int count, const std::vector<Cplx>& avoid,
    Rng& rng, double margin = 5e-2) {
  const bool open = p.boundary == Boundary::Open;
  const Cplx q = p.q;
  std::vector<std::vector<Cplx>> out;
  out.reserve(count);
  for (int s = 0; s < count; ++s) {
    std::vector<Cplx> cfg;
    cfg.reserve(n);
    for (int i = 0; i < n; ++i) {
      bool placed = false;
      for (int attempt = 0; attempt < 500 && !placed; ++attempt) {
        const Cplx z = std::polar(rng.uniform(0.55, 1.45),
                                  rng.uniform(0.0, 2 * std::numbers::pi));
        bool ok = true;
        for (const Cplx a : avoid) ok = ok && std::abs(z - a) > margin;
        for (const Cplx yv : p.y) ok = ok && std::abs(z - yv) > margin;
        for (const Cplx u : cfg) ok = ok && std::abs(z - u) > margin;
        if (open) {
          ok = ok && std::abs(z - Cplx(1) / q) > margin;
          ok = ok && std::abs(z + Cplx(1) / q) > margin;
          for (const Cplx a : avoid)
            ok = ok && std::abs(z - Cplx(1) / (q * q * a)) > margin;
          for (const Cplx u : cfg) {
            ok = ok && std::abs(z - Cplx(1) / (q * q * u)) > margin;
            ok = ok && std::abs(u - Cplx(1) / (q * q * z)) > margin;
          }
        }
        if (ok) {
          cfg.push_back(z);
          placed = true;
        }
      }
      if (!placed)
        throw numeric_error("generic_samples: rejection sampling exhausted");
    }
    out.push_back(std::move(cfg));
  }
  return out;
}

/// One probe point for the functional equation, kept off every pole locus.
inline Cplx draw_probe(const ModelParams& p, const std::vector<Cplx>& xs,
                       const std::vector<Cplx>& bethe, Rng& rng,
                       double margin = 2e-2) {
  const Cplx q = p.q;
  for (int attempt = 0; attempt < 300; ++attempt) {
    const Cplx z = std::polar(rng.uniform(0.6, 1.4),
                              rng.uniform(0.0, 2 * std::numbers::pi));
    bool ok = true;
    for (const Cplx x : xs) ok = ok && std::abs(z - x) > margin;
    for (const Cplx b : bethe) ok = ok && std::abs(z - b) > margin;
    if (p.boundary == Boundary::Open) {
      ok = ok && std::abs(z - Cplx(1) / q) > margin;
      ok = ok && std::abs(z + Cplx(1) / q) > margin;
      for (const Cplx x : xs)
        ok = ok && std::abs(z - Cplx(1) / (q * q * x)) > margin;
      for (const Cplx b : bethe)
        ok = ok && std::abs(z - Cplx(1) / (q * q * b)) > margin;
    }
    if (ok) return z;
  }
  throw numeric_error("draw_probe: rejection sampling exhausted");
}

struct HierarchyOptions {
  int oversample = 2;
  double node_radius = 0.83;
  double node_phase = std::numbers::pi / 7;
  double vand_cond_max = 1e8;
  double locus_margin = 5e-2;
  unsigned long long seed = 0x5eed;
};

/**
 * \brief The commuting family extracted from the functional equation.
 *
 * ops[k] is the k-th probe-power coefficient as a sampled linear map:
 * rows are sample configurations, columns the monomial basis of the
 * polynomial domain. saturation records the interpolated coefficient one
 * past the predicted top degree, relative to the largest coefficient.
 */
struct Hierarchy {
  ModelParams params;
  int n = 0;
  int cap = 0;
  int degree = 0;
  std::vector<Cplx> bethe;
  std::vector<Cplx> nodes;
  std::vector<std::vector<Cplx>> samples;
  CMatrix eval_basis;
  std::vector<CMatrix> ops;
  double saturation = 0.0;
};

inline Hierarchy extract_hierarchy(const ModelParams& p,
                                   const std::vector<Cplx>& bethe,
                                   HierarchyOptions opt = {}) {
  const int n = static_cast<int>(bethe.size());
  if (n < 1) throw config_error("extract_hierarchy: empty Bethe set");
  const int cap = polynomial_cap(p);
  const int degree = hierarchy_degree(p, n);
  const Eigen::Index cols = SymPoly<Cplx>::tensor_size(n, cap);
  const Eigen::Index rows = opt.oversample * cols;

  std::vector<Cplx> nodes;
  double phase = opt.node_phase;
  for (int attempt = 0;; ++attempt) {
    nodes = circle_nodes(degree + 2, opt.node_radius, phase);
    if (vandermonde_cond(nodes) < opt.vand_cond_max) break;
    if (attempt >= 8)
      throw numeric_error("extract_hierarchy: ill-conditioned probe nodes");
    phase += 0.05 * (attempt + 1);
  }

  Rng rng(opt.seed);
  Hierarchy h;
  h.params = p;
  h.n = n;
  h.cap = cap;
  h.degree = degree;
  h.bethe = bethe;
  h.nodes = nodes;
  h.samples = generic_samples(p, n, static_cast<int>(rows), nodes, rng,
                              opt.locus_margin);

  h.eval_basis.resize(rows, cols);
  for (Eigen::Index s = 0; s < rows; ++s)
    h.eval_basis.row(s) = monomial_row(n, cap, h.samples[s]);

  std::vector<CMatrix> at_node(nodes.size());
  for (std::size_t t = 0; t < nodes.size(); ++t) {
    const Cplx x0 = nodes[t];
    CMatrix A(rows, cols);
    for (Eigen::Index s = 0; s < rows; ++s) {
      const auto& X = h.samples[s];
      const CoeffBundle cb = coeffs(p, x0, X, bethe);
      const Cplx clear = p.boundary == Boundary::Twisted
                             ? detail::clearing_twisted(p, x0, bethe)
                             : detail::clearing_open(p, x0, X, bethe);
      CRowVector acc = cb.k0 * h.eval_basis.row(s);
      std::vector<Cplx> sub = X;
      for (int i = 0; i < n; ++i) {
        sub[i] = x0;
        acc += cb.kx[i] * monomial_row(n, cap, sub);
        sub[i] = X[i];
      }
      A.row(s) = clear * acc;
    }
    at_node[t] = std::move(A);
  }

  std::vector<CMatrix> coeff_mats = univariate_interp(nodes, at_node);
  double top = coeff_mats.back().norm();
  double peak = 0.0;
  for (int k = 0; k <= degree; ++k)
    peak = std::max(peak, coeff_mats[k].norm());
  h.saturation = top / std::max(peak, 1e-300);
  coeff_mats.pop_back();
  h.ops = std::move(coeff_mats);
  return h;
}

struct KernelResult {
  CVector coeffs;                   // monomial coefficients, largest entry 1
  Eigen::VectorXd singular_values;  // of the norm-balanced stack, descending
  double sigma_ratio = 0.0;         // sigma_min / sigma_max
  int dim = 0;                      // count below rel_tol * sigma_max
};

/// Nullspace of vertically stacked sampled operators; each block is
/// norm-balanced first so no single power dominates the spectrum.
inline KernelResult stacked_kernel(const std::vector<CMatrix>& blocks,
                                   double rel_tol = 1e-6) {
  if (blocks.empty()) throw config_error("stacked_kernel: no blocks");
  const Eigen::Index cols = blocks.front().cols();
  Eigen::Index rows = 0;
  for (const CMatrix& b : blocks) {
    if (b.cols() != cols) throw config_error("stacked_kernel: column mismatch");
    rows += b.rows();
  }
  CMatrix stack(rows, cols);
  Eigen::Index at = 0;
  for (const CMatrix& b : blocks) {
    stack.middleRows(at, b.rows()) = b / std::max(b.norm(), 1e-300);
    at += b.rows();
  }
  Eigen::JacobiSVD<CMatrix> svd(stack, Eigen::ComputeThinV);
  KernelResult out;
  out.singular_values = svd.singularValues();
  const double smax = out.singular_values(0);
  out.sigma_ratio = out.singular_values(out.singular_values.size() - 1) /
                    std::max(smax, 1e-300);
  out.dim = 0;
  for (Eigen::Index i = 0; i < out.singular_values.size(); ++i)
    if (out.singular_values(i) < rel_tol * smax) ++out.dim;
  out.coeffs = svd.matrixV().col(cols - 1);
  Eigen::Index lead;
  out.coeffs.cwiseAbs().maxCoeff(&lead);
  if (std::abs(out.coeffs(lead)) > 0) out.coeffs /= out.coeffs(lead);
  return out;
}

inline KernelResult hierarchy_kernel(const Hierarchy& h,
                                     double rel_tol = 1e-6) {
  return stacked_kernel(h.ops, rel_tol);
}

inline SymPoly<Cplx> kernel_poly(const Hierarchy& h, const KernelResult& k) {
  SymPoly<Cplx> poly(h.n, h.cap);
  if (k.coeffs.size() != poly.size())
    throw config_error("kernel_poly: coefficient size mismatch");
  poly.coeffs() = k.coeffs;
  return poly;
}

inline double normalized_overlap(const CVector& a, const CVector& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::abs(a.dot(b)) / (na * nb);
}

/// Worst per-operator cancellation residual of poly against the family:
/// |sum| over sum of |terms|, maximized over samples and operators.
inline double annihilation_residual(const Hierarchy& h,
                                    const SymPoly<Cplx>& poly) {
  if (poly.nvars() != h.n || poly.cap() != h.cap)
    throw config_error("annihilation_residual: domain mismatch");
  const CVector c = poly.coeffs();
  double worst = 0.0;
  for (const CMatrix& op : h.ops) {
    const CVector num = op * c;
    const Eigen::VectorXd den = op.cwiseAbs() * c.cwiseAbs();
    for (Eigen::Index s = 0; s < num.size(); ++s)
      worst = std::max(worst, std::abs(num(s)) / std::max(den(s), 1e-300));
  }
  return worst;
}

/// Closed form of the top-power operator, sampled on the same grid.
inline CMatrix leading_closed_form(const ModelParams& p,
                                   const std::vector<Cplx>& bethe,
                                   const std::vector<std::vector<Cplx>>& samples,
                                   int cap) {
  const int n = static_cast<int>(bethe.size());
  const Cplx q = p.q;
  const Eigen::Index cols = SymPoly<Cplx>::tensor_size(n, cap);
  CMatrix M(static_cast<Eigen::Index>(samples.size()), cols);

  const int ord = p.boundary == Boundary::Twisted ? p.L - 1 : 2 * p.L;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const auto& X = samples[s];
    Cplx scal;
    std::vector<Cplx> w(n);
    if (p.boundary == Boundary::Twisted) {
      Cplx sums(0);
      for (const Cplx b : bethe) sums += b;
      for (const Cplx x : X) sums -= x;
      scal = (p.phi1 * detail::ipow(q, p.L + 1 - n) -
              p.phi2 * detail::ipow(q, n - 1)) *
             sums;
      for (int i = 0; i < n; ++i)
        w[i] = y_factor(p, X, i) / detail::factorial(ord);
    } else {
      Cplx sums(0);
      for (const Cplx b : bethe) sums += b * q + Cplx(1) / (b * q);
      for (const Cplx x : X) sums -= x * q + Cplx(1) / (x * q);
      scal = (p.t / p.tbar * detail::ipow(q, 2 * p.L + 1) -
              p.tbar / p.t * detail::ipow(q, 4 * n - 1)) *
             sums;
      for (int i = 0; i < n; ++i) {
        const Cplx x = X[i];
        w[i] = detail::ipow(q, 2 * n + 1) / detail::factorial(ord) *
               (x - Cplx(1) / x) / (x * q - Cplx(1) / (x * q)) *
               z_factor(p, X, i);
      }
    }

    const int m = cap + 1;
    for (Eigen::Index f = 0; f < cols; ++f) {
      std::vector<int> e(n);
      Eigen::Index r = f;
      for (int v = 0; v < n; ++v) {
        e[v] = static_cast<int>(r % m);
        r /= m;
      }
      Cplx mono(1);
      for (int v = 0; v < n; ++v) mono *= detail::ipow(X[v], e[v]);
      Cplx acc = scal * mono;
      for (int i = 0; i < n; ++i) {
        if (e[i] < ord) continue;
        Cplx dmono = Cplx(detail::falling_factorial(e[i], ord)) *
                     detail::ipow(X[i], e[i] - ord);
        for (int v = 0; v < n; ++v)
          if (v != i) dmono *= detail::ipow(X[v], e[v]);
        acc += w[i] * dmono;
      }
      M(static_cast<Eigen::Index>(s), f) = acc;
    }
  }
  return M;
}

inline double leading_match_residual(const Hierarchy& h) {
  const CMatrix closed =
      leading_closed_form(h.params, h.bethe, h.samples, h.cap);
  return (h.ops.back() - closed).norm() / std::max(closed.norm(), 1e-300);
}

struct CommutatorReport {
  double fit_residual = 0.0;    // basis fit quality; large means the
                                // operators leave the sampled domain
  double commutator_rel = 0.0;  // reported, never asserted
};

/// Least-squares square maps on the monomial basis, then a scaled
/// commutator norm. Diagnostic only.
inline CommutatorReport commutator_norm(const Hierarchy& h, int j, int k) {
  const int nops = static_cast<int>(h.ops.size());
  if (j < 0 || k < 0 || j >= nops || k >= nops)
    throw config_error("commutator_norm: operator index out of range");
  Eigen::ColPivHouseholderQR<CMatrix> qr(h.eval_basis);
  const CMatrix Oj = qr.solve(h.ops[j]);
  const CMatrix Ok = qr.solve(h.ops[k]);
  const double fj = (h.eval_basis * Oj - h.ops[j]).norm() /
                    std::max(h.ops[j].norm(), 1e-300);
  const double fk = (h.eval_basis * Ok - h.ops[k]).norm() /
                    std::max(h.ops[k].norm(), 1e-300);
  CommutatorReport out;
  out.fit_residual = std::max(fj, fk);
  out.commutator_rel = (Oj * Ok - Ok * Oj).norm() /
                       std::max(Oj.norm() * Ok.norm(), 1e-300);
  return out;
}

}  // namespace svx
