#pragma once

#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "svx/funeq.hpp"
#include "svx/hierarchy.hpp"
#include "svx/interp.hpp"
#include "svx/model.hpp"
#include "svx/polyroots.hpp"
#include "svx/rng.hpp"
#include "svx/sympoly.hpp"
#include "svx/types.hpp"

namespace svx {

namespace detail {

/// Synthetic division by (x - r); c becomes the quotient, returns the
/// remainder. Coefficients ascending.
inline Cplx deflate(std::vector<Cplx>& c, Cplx r) {
  const int deg = static_cast<int>(c.size()) - 1;
  std::vector<Cplx> qc(deg);
  qc[deg - 1] = c[deg];
  for (int k = deg - 2; k >= 0; --k) qc[k] = c[k + 1] + r * qc[k + 1];
  const Cplx rem = c[0] + r * qc[0];
  c = std::move(qc);
  return rem;
}

}  // namespace detail

/// The pair invariant fixing a two-magnon closed form: the plain root sum
/// for twisted chains, the reflected power sum for open ones.
inline Cplx pair_invariant(const ModelParams& p,
                           const std::vector<Cplx>& roots) {
  Cplx acc(0);
  for (const Cplx r : roots)
    acc += p.boundary == Boundary::Twisted ? r : r * p.q + Cplx(1) / (r * p.q);
  return acc;
}

// ---------------------------------------------------------------------------
// One free magnon
// ---------------------------------------------------------------------------

struct OneMagnonForm {
  SymPoly<Cplx> poly;  // the closed-form scalar product in one variable
  Cplx remainder;      // numerator value at the root; zero exactly on shell
  double scale;        // max |numerator coefficient|
};

inline OneMagnonForm one_magnon_twisted_form(const ModelParams& p, Cplx root) {
  if (p.boundary != Boundary::Twisted)
    throw config_error("one_magnon_twisted_form: params are not twisted");
  const Cplx q = p.q;
  std::vector<Cplx> f1{p.phi1}, f2{p.phi2};
  for (const Cplx yv : p.y) {
    f1 = polymul(f1, {-yv / q, q});
    f2 = polymul(f2, {-yv, Cplx(1)});
  }
  std::vector<Cplx> num(p.L + 1);
  double scale = 0.0;
  for (int k = 0; k <= p.L; ++k) {
    num[k] = f1[k] - f2[k];
    scale = std::max(scale, std::abs(num[k]));
  }
  const Cplx rem = detail::deflate(num, root);
  OneMagnonForm out{SymPoly<Cplx>(1, p.L - 1), rem, scale};
  for (int k = 0; k < p.L; ++k) out.poly.coeffs()(k) = num[k];
  return out;
}

struct OpenOneMagnonForm {
  SymPoly<Cplx> poly;     // degree-2L closed form
  Cplx rem_gauge_plus;    // numerator at +1/q, vanishes identically
  Cplx rem_gauge_minus;   // at -1/q, vanishes identically
  Cplx rem_root;          // at the Bethe root; zero exactly on shell
  Cplx rem_reflected;     // at the reflected root 1/(q^2 root)
  double scale;
};

inline OpenOneMagnonForm one_magnon_open_form(const ModelParams& p,
                                              Cplx root) {
  if (p.boundary != Boundary::Open)
    throw config_error("one_magnon_open_form: params are not open");
  const Cplx q = p.q;
  detail::guard_apart(root, Cplx(0), "the origin");
  detail::guard_apart(root, Cplx(1) / q, "+1/q");
  detail::guard_apart(root, -Cplx(1) / q, "-1/q");

  std::vector<Cplx> f1{Cplx(1)}, f2{Cplx(1)};
  f1 = polymul(f1, {-Cplx(1) / p.t, p.t});
  f1 = polymul(f1, {-p.tbar, Cplx(1) / p.tbar});
  f2 = polymul(f2, {-p.t / q, q / p.t});
  f2 = polymul(f2, {-Cplx(1) / (q * p.tbar), q * p.tbar});
  for (const Cplx yv : p.y) {
    f1 = polymul(f1, {-yv / q, q});
    f1 = polymul(f1, {-Cplx(1) / (yv * q), q});
    f2 = polymul(f2, {-yv, Cplx(1)});
    f2 = polymul(f2, {-Cplx(1) / yv, Cplx(1)});
  }
  std::vector<Cplx> xz(2 * p.L + 3);
  for (std::size_t k = 0; k < xz.size(); ++k) xz[k] = f1[k] - f2[k];
  std::vector<Cplx> num = polymul(xz, {-q, Cplx(0), q});

  double scale = 0.0;
  for (const Cplx c : num) scale = std::max(scale, std::abs(c));

  OpenOneMagnonForm out{SymPoly<Cplx>(1, 2 * p.L), {}, {}, {}, {}, scale};
  out.rem_gauge_plus = detail::deflate(num, Cplx(1) / q);
  out.rem_gauge_minus = detail::deflate(num, -Cplx(1) / q);
  out.rem_root = detail::deflate(num, root);
  out.rem_reflected = detail::deflate(num, Cplx(1) / (root * q * q));
  for (int k = 0; k <= 2 * p.L; ++k) out.poly.coeffs()(k) = num[k];
  return out;
}

// ---------------------------------------------------------------------------
// Exponential representation of the two-site one-magnon form
// ---------------------------------------------------------------------------

namespace detail {

inline void require_two_site_twisted(const ModelParams& p) {
  if (p.boundary != Boundary::Twisted || p.L != 2)
    throw config_error("exp_rep: requires the twisted two-site chain");
}

}  // namespace detail

inline Cplx exp_rep_kappa_sq(const ModelParams& p) {
  detail::require_two_site_twisted(p);
  const Cplx q = p.q, y1 = p.y[0], y2 = p.y[1];
  const Cplx q2 = q * q, q4 = q2 * q2;
  return 2.0 * p.phi1 * p.phi2 *
             (q2 * (y1 + y2) * (y1 + y2) - 2.0 * y1 * y2 * (1.0 + q4)) -
         q2 * (p.phi1 * p.phi1 + p.phi2 * p.phi2) * (y1 - y2) * (y1 - y2);
}

inline Cplx exp_rep_omega(const ModelParams& p, Cplx x) {
  detail::require_two_site_twisted(p);
  const Cplx q = p.q;
  return Cplx(0, 1) * q *
         (2.0 * x * (p.phi2 - p.phi1 * q * q) +
          (p.phi1 - p.phi2) * (p.y[0] + p.y[1]));
}

inline Cplx exp_rep_log_argument(const ModelParams& p, Cplx x) {
  detail::require_two_site_twisted(p);
  const Cplx q2 = p.q * p.q;
  return p.phi1 * (q2 * x - p.y[0]) * (q2 * x - p.y[1]) -
         p.phi2 * q2 * (x - p.y[0]) * (x - p.y[1]);
}

/// (omega(root)/kappa)^2 - 1; vanishes exactly when root is on shell.
inline Cplx exp_rep_shell_defect(const ModelParams& p, Cplx root) {
  const Cplx k2 = exp_rep_kappa_sq(p);
  const Cplx w = exp_rep_omega(p, root);
  return (w * w - k2) / k2;
}

inline Cplx exp_rep_exponent(const ModelParams& p, Cplx root, Cplx x) {
  const Cplx kappa = std::sqrt(exp_rep_kappa_sq(p));
  return 0.5 * std::log(exp_rep_log_argument(p, x)) +
         exp_rep_omega(p, root) / kappa * std::atanh(exp_rep_omega(p, x) / kappa);
}

inline Cplx exp_rep_value(const ModelParams& p, Cplx root, Cplx x) {
  return std::exp(exp_rep_exponent(p, root, x));
}

/// The on-shell collapse of the exponential representation to a linear
/// polynomial, up to normalization.
inline Cplx exp_rep_collapsed(const ModelParams& p, Cplx root, Cplx x) {
  const Cplx kappa = std::sqrt(exp_rep_kappa_sq(p));
  return kappa + exp_rep_omega(p, root) / kappa * exp_rep_omega(p, x);
}

// ---------------------------------------------------------------------------
// Two-magnon pair constraints
// ---------------------------------------------------------------------------

/// Kernel of the two-magnon twisted closed form; linear in x1.
inline Cplx pair_kernel_twisted(const ModelParams& p, Cplx x1, Cplx x2) {
  const Cplx q = p.q;
  Cplx f1 = p.phi1 * (x1 * q - x2 / q);
  Cplx f2 = p.phi2 * (x2 * q - x1 / q);
  for (const Cplx yv : p.y) {
    f1 *= x2 * q - yv / q;
    f2 *= x2 - yv;
  }
  return f1 + f2;
}

/// Kernel of the two-magnon open closed form.
inline Cplx pair_kernel_open(const ModelParams& p, Cplx x1, Cplx x2) {
  const Cplx q = p.q;
  Cplx f1 = (x2 * p.t - Cplx(1) / p.t) * (x2 / p.tbar - p.tbar) *
            (x1 * q - x2 / q) * (x1 * x2 - 1.0);
  Cplx f2 = (x2 * q / p.t - p.t / q) * (x2 * q * p.tbar - Cplx(1) / (q * p.tbar)) *
            (x2 * q - x1 / q) * (x1 * x2 * q * q - Cplx(1) / (q * q));
  for (const Cplx yv : p.y) {
    f1 *= (x2 * q - yv / q) * (x2 * q - Cplx(1) / (yv * q));
    f2 *= (x2 - yv) * (x2 - Cplx(1) / yv);
  }
  return x1 * (x2 * x2 - 1.0) / (x2 * x2 * q - Cplx(1) / q) * (f1 + f2);
}

/// Two-magnon closed form away from the constraint surface. h holds the
/// ascending coefficients of the reduced one-variable profile.
inline Cplx two_magnon_raw(const ModelParams& p, Cplx pair_inv,
                           const std::vector<Cplx>& h, Cplx x1, Cplx x2) {
  const Cplx q = p.q;
  if (p.boundary == Boundary::Twisted) {
    const Cplx theta = Cplx(detail::factorial(p.L - 1)) *
                       (p.phi1 * detail::ipow(q, p.L - 1) - p.phi2 * q);
    return (pair_kernel_twisted(p, x1, x2) * polyval(h, x1) -
            pair_kernel_twisted(p, x2, x1) * polyval(h, x2)) /
           ((x1 - x2) * (x1 + x2 - pair_inv)) / theta;
  }
  const Cplx theta = Cplx(detail::factorial(2 * p.L)) *
                     (p.t / p.tbar * detail::ipow(q, 2 * p.L - 4) -
                      p.tbar / p.t * q * q);
  return (pair_kernel_open(p, x1, x2) * polyval(h, x1) -
          pair_kernel_open(p, x2, x1) * polyval(h, x2)) /
         ((x1 - x2) * (x1 * x2 * q - Cplx(1) / q)) /
         ((x1 + x2) * (x1 * x2 * q + Cplx(1) / q) - x1 * x2 * pair_inv) /
         theta;
}

/// Row of the twisted pair constraint at sample x: the profile must satisfy
/// K(b-x,x)H(b-x) = K(x,b-x)H(x) identically.
inline CRowVector pair_row_twisted(const ModelParams& p, Cplx b, Cplx x) {
  const Cplx xr = b - x;
  const Cplx ka = pair_kernel_twisted(p, xr, x);
  const Cplx kb = pair_kernel_twisted(p, x, xr);
  CRowVector row(p.L);
  Cplx pa(1), pb(1);
  for (int i = 0; i < p.L; ++i) {
    row(i) = ka * pa - kb * pb;
    pa *= xr;
    pb *= x;
  }
  return row;
}

/**
 * \brief Row of the open pair constraint at symmetric coordinates.
 *
 * u = x1 + x2 and v = x1 x2; dividing the antisymmetric bracket by
 * (x1 - x2) makes the entries independent of the quadratic-root branch.
 * Near the double-root locus the entries switch to a centered difference.
 */
inline CRowVector pair_row_open(const ModelParams& p, Cplx u, Cplx v) {
  const Cplx q = p.q;
  const int cols = 2 * p.L + 1;
  CRowVector row(cols);
  const auto den = [&](Cplx a, Cplx b) {
    return (a * a * q - Cplx(1) / q) * (b * b * q - Cplx(1) / q);
  };
  const Cplx s = std::sqrt(u * u - 4.0 * v);
  if (std::abs(s) > 1e-5 * (1.0 + std::abs(u))) {
    const Cplx x1 = 0.5 * (u + s), x2 = 0.5 * (u - s);
    const Cplx pre = den(x1, x2) / s;
    const Cplx k12 = pair_kernel_open(p, x1, x2);
    const Cplx k21 = pair_kernel_open(p, x2, x1);
    Cplx p1(1), p2(1);
    for (int i = 0; i < cols; ++i) {
      row(i) = pre * (k12 * p1 - k21 * p2);
      p1 *= x1;
      p2 *= x2;
    }
    return row;
  }
  const double hstep = 1e-6 * (1.0 + std::abs(u));
  const auto bracket = [&](Cplx x, int i) {
    const Cplx xc = u - x;
    return den(x, xc) * (pair_kernel_open(p, x, xc) * detail::ipow(x, i) -
                         pair_kernel_open(p, xc, x) * detail::ipow(xc, i));
  };
  for (int i = 0; i < cols; ++i)
    row(i) = (bracket(0.5 * u + hstep, i) - bracket(0.5 * u - hstep, i)) /
             (4.0 * hstep);
  return row;
}

struct PairConstraintOptions {
  int oversample = 3;
  double node_radius = 1.0;
  double max_radius = 25.0;  // search disk; the sampled rows degenerate at
                             // infinity, so far candidates are meaningless
  double margin = 3e-2;
  double trim_rel = 1e-10;
  double sigma_accept = 1e-6;  // rank-ratio threshold for genuine roots
  double dedup_tol = 1e-6;
  int polish_iters = 60;
  unsigned long long seed = 0xfacade;
};

struct PairConstraintResult {
  std::vector<Cplx> roots;       // polished, deduped, rank-certified
  std::vector<double> sigma;     // rank ratio at each root
  std::vector<Cplx> trivial;     // subset on the factored loci
  std::vector<Cplx> nontrivial;  // the remainder
  int det_degree = 0;            // trimmed interpolant degree
};

/// Loci of the factored linear pieces of the pair constraints.
inline std::vector<Cplx> pair_trivial_loci(const ModelParams& p) {
  std::vector<Cplx> out;
  out.reserve(p.L);
  const Cplx q = p.q;
  for (const Cplx yv : p.y)
    out.push_back(p.boundary == Boundary::Twisted
                      ? yv * (1.0 + q * q) / (q * q)
                      : (q + Cplx(1) / q) * (yv + Cplx(1) / yv));
  return out;
}

namespace detail {

inline std::vector<Cplx> pair_samples(const ModelParams& p,
                                      const std::vector<Cplx>& invs, int count,
                                      double margin, Rng& rng) {
  const bool tw = p.boundary == Boundary::Twisted;
  const Cplx q = p.q;
  std::vector<Cplx> out;
  out.reserve(count);
  for (int r = 0; r < count; ++r) {
    bool placed = false;
    for (int attempt = 0; attempt < 500 && !placed; ++attempt) {
      const Cplx z = std::polar(rng.uniform(0.6, 1.4),
                                rng.uniform(0.0, 2 * std::numbers::pi));
      bool ok = true;
      for (const Cplx u : out) ok = ok && std::abs(z - u) > 1e-3;
      if (tw) {
        for (const Cplx b : invs) ok = ok && std::abs(2.0 * z - b) > margin;
      } else {
        ok = ok && std::abs(z + Cplx(1) / (q * q)) > margin;
        for (const Cplx c : invs) {
          const Cplx u = z * c / (z * q + Cplx(1) / q);
          ok = ok && std::abs(u * u - 4.0 * z) > margin;
        }
      }
      if (ok) {
        out.push_back(z);
        placed = true;
      }
    }
    if (!placed)
      throw numeric_error("pair_samples: rejection sampling exhausted");
  }
  return out;
}

inline CMatrix pair_matrix(const ModelParams& p, Cplx inv,
                           const std::vector<Cplx>& samples) {
  const bool tw = p.boundary == Boundary::Twisted;
  const Eigen::Index cols = tw ? p.L : 2 * p.L + 1;
  CMatrix M(static_cast<Eigen::Index>(samples.size()), cols);
  for (std::size_t r = 0; r < samples.size(); ++r) {
    if (tw) {
      M.row(r) = pair_row_twisted(p, inv, samples[r]);
    } else {
      const Cplx v = samples[r];
      const Cplx u = v * inv / (v * p.q + Cplx(1) / p.q);
      M.row(r) = pair_row_open(p, u, v);
    }
  }
  return M;
}

}  // namespace detail

/**
 * \brief All pair invariants admitting a two-magnon closed form.
 *
 * The rectangular constraint matrix is compressed to a square one by a
 * fixed random map; its determinant is interpolated in the invariant and
 * rooted. Every candidate is Newton-polished on a square minor and kept
 * only if the full matrix is genuinely rank-deficient there.
 */
inline PairConstraintResult pair_constraint_roots(const ModelParams& p,
                                                  PairConstraintOptions opt = {}) {
  if (p.L < 2) throw config_error("pair_constraint_roots: needs L >= 2");
  const bool tw = p.boundary == Boundary::Twisted;
  const Eigen::Index cols = tw ? p.L : 2 * p.L + 1;
  const Eigen::Index rows = opt.oversample * cols;
  const int degree_bound = tw ? p.L * (p.L + 1)
                              : (2 * p.L + 1) * (2 * p.L + 6);

  Rng rng(opt.seed);
  // A degree-d determinant's modulus falls off like (r/R)^d inside a node
  // circle, so one circle only resolves roots in a thin annulus around
  // itself. Roots are peeled annulus by annulus over a geometric ladder of
  // circles whose keep windows tile the disk: each circle interpolates the
  // determinant with all inner roots divided out of the node values and
  // keeps only the roots of its own annulus.
  const double cap = opt.max_radius * opt.node_radius;
  std::vector<std::vector<Cplx>> node_sets;
  std::vector<double> node_radii, keep_inner, keep_outer;
  std::vector<Cplx> avoid;
  {
    std::vector<double> radii;
    for (double r = 0.6 * opt.node_radius; r < cap / 1.05; r *= 1.4)
      radii.push_back(r);
    radii.push_back(cap);
    double prev_keep = 0.0;
    for (const double r : radii) {
      node_sets.push_back(
          circle_nodes(degree_bound + 4, r, rng.uniform(0.0, 0.3)));
      node_radii.push_back(r);
      keep_inner.push_back(prev_keep);
      prev_keep = 1.05 * r;
      keep_outer.push_back(prev_keep);
      avoid.insert(avoid.end(), node_sets.back().begin(),
                   node_sets.back().end());
    }
    keep_outer.back() = cap;
  }
  const std::vector<Cplx> samples =
      detail::pair_samples(p, avoid, static_cast<int>(rows), opt.margin, rng);

  CMatrix G(cols, rows);
  for (Eigen::Index i = 0; i < cols; ++i)
    for (Eigen::Index j = 0; j < rows; ++j)
      G(i, j) = Cplx(rng.uniform() - 0.5, rng.uniform() - 0.5);

  // Unit-size product samples lose rank as the invariant grows: one
  // reconstructed pair root blows up and every row collapses toward a common
  // direction. Rescaling the samples so the pair stays balanced keeps the
  // matrix honestly full rank away from the variety; the rank drop at a
  // genuine root happens for any sample set, so nothing physical is lost.
  // A scale held constant over a node circle also preserves polynomiality
  // of the determinant there.
  const double qn = std::norm(p.q);
  const auto sample_scale = [&](Cplx z) {
    return tw ? 1.0 : std::max(1.0, 0.25 * std::norm(z) / qn);
  };
  const auto scaled = [&](const std::vector<Cplx>& base, Cplx z) {
    std::vector<Cplx> vs = base;
    const double s = sample_scale(z);
    for (Cplx& v : vs) v *= s;
    return vs;
  };

  PairConstraintResult out;
  std::vector<Cplx> candidates;
  // The factored loci divide the determinant once per site, exactly. Peeling
  // them up front keeps repeated loci (uniform chains) from smearing every
  // circle that contains them into a ring of spurious near-roots.
  std::vector<Cplx> peeled = pair_trivial_loci(p);

  const auto push_candidate = [&](Cplx z) {
    bool seen = false;
    for (const Cplx c : candidates)
      seen = seen || std::abs(c - z) < opt.dedup_tol * (1.0 + std::abs(z));
    if (!seen) candidates.push_back(z);
  };

  // Spurious determinant roots move with the sample set, so peeling across
  // circles needs one fixed set. No single scale is balanced over the whole
  // disk; staggering the per-row scales across the radius range keeps a few
  // rows well conditioned near every circle while the determinant stays one
  // polynomial.
  std::vector<Cplx> hsamples = samples;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double fr = rows == 1 ? 0.0 : double(r) / double(rows - 1);
    const double rr = std::exp(fr * std::log(cap));
    hsamples[static_cast<std::size_t>(r)] *= sample_scale(Cplx(rr, 0));
  }
  CVector weights = CVector::Ones(rows);
  {
    Eigen::VectorXd norms = Eigen::VectorXd::Zero(rows);
    for (const auto& nodes : node_sets)
      for (const Cplx node : {nodes.front(), nodes[nodes.size() / 2]}) {
        const CMatrix M = detail::pair_matrix(p, node, hsamples);
        for (Eigen::Index r = 0; r < rows; ++r)
          norms(r) = std::max(norms(r), M.row(r).norm());
      }
    for (Eigen::Index r = 0; r < rows; ++r)
      weights(r) = Cplx(1) / std::max(norms(r), 1e-300);
  }
  // det_quotient divides out everything peeled so far, so each circle sees a
  // polynomial whose remaining roots it can resolve at its own scale.
  const auto det_quotient = [&](Cplx z) {
    Cplx val =
        (G * (weights.asDiagonal() * detail::pair_matrix(p, z, hsamples)))
            .determinant();
    for (const Cplx rho : peeled) val /= z - rho;
    return val;
  };
  // The determinant values carry roughly single-precision noise, so the
  // finite-difference window must stay wide enough to see slope over noise;
  // it tracks the step size and a ladder of initial windows covers roots
  // with very different local slopes.
  const auto newton_from = [&](Cplx z0, double h0) {
    Cplx z = z0;
    double hscale = h0;
    const double leash = 0.3 * (1.0 + std::abs(z0));
    for (int it = 0; it < 40; ++it) {
      const double hstep = hscale * (1.0 + std::abs(z));
      const Cplx g = det_quotient(z);
      const Cplx dg =
          (det_quotient(z + hstep) - det_quotient(z - hstep)) / (2.0 * hstep);
      if (std::abs(dg) < 1e-300) break;
      const Cplx step = g / dg;
      z -= step;
      hscale = std::clamp(0.3 * std::abs(step) / (1.0 + std::abs(z)), 1e-9,
                          1e-3);
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) ||
          std::abs(z - z0) > leash)
        return z0;
      if (std::abs(step) < 1e-11 * (1.0 + std::abs(z))) break;
    }
    return z;
  };
  const auto quotient_polish = [&](Cplx z0) {
    Cplx best = z0;
    double bq = std::numeric_limits<double>::infinity();
    for (const double h0 : {1e-4, 1e-3, 1e-6}) {
      const Cplx w = newton_from(z0, h0);
      const double wq = std::abs(det_quotient(w));
      if (wq < bq) {
        best = w;
        bq = wq;
      }
    }
    return best;
  };

  const auto harvest = [&](const std::vector<Cplx>& nodes, double kin,
                           double kout) {
    std::vector<CMatrix> dets(nodes.size());
    double det_scale = 0.0;
    for (std::size_t t = 0; t < nodes.size(); ++t) {
      CMatrix d(1, 1);
      d(0, 0) = det_quotient(nodes[t]);
      det_scale = std::max(det_scale, std::abs(d(0, 0)));
      dets[t] = d;
    }
    if (det_scale == 0.0)
      throw numeric_error(
          "pair_constraint_roots: determinant vanished everywhere");
    for (CMatrix& d : dets) d /= det_scale;

    const std::vector<CMatrix> cf = univariate_interp(nodes, dets);
    std::vector<Cplx> dcoeffs(cf.size());
    for (std::size_t k = 0; k < cf.size(); ++k) dcoeffs[k] = cf[k](0, 0);
    dcoeffs = poly_trim(std::move(dcoeffs), opt.trim_rel);
    const int degree = static_cast<int>(dcoeffs.size()) - 1;

    std::vector<Cplx> next_peel;
    for (const Cplx z0 : polyroots(dcoeffs)) {
      const double az = std::abs(z0);
      if (az < kin || az >= kout) continue;
      // Inaccurate peel factors poison every later circle, so each kept
      // root is re-polished on the live quotient and must prove a genuine
      // dip there before joining the list.
      const Cplx z = quotient_polish(z0);
      push_candidate(z);
      const double dip =
          std::abs(det_quotient(z)) /
          std::max(std::abs(det_quotient(z + Cplx(0.04, 0.03) *
                                                 (1.0 + std::abs(z)))),
                   1e-300);
      bool dup = dip > 1e-4;
      for (const Cplx rho : peeled)
        dup = dup || std::abs(rho - z) < opt.dedup_tol * (1.0 + std::abs(z));
      for (const Cplx rho : next_peel)
        dup = dup || std::abs(rho - z) < opt.dedup_tol * (1.0 + std::abs(z));
      if (!dup) next_peel.push_back(z);
    }
    peeled.insert(peeled.end(), next_peel.begin(), next_peel.end());
    return degree;
  };
  out.det_degree =
      harvest(node_sets.front(), keep_inner.front(), keep_outer.front());
  for (std::size_t s = 1; s < node_sets.size(); ++s)
    harvest(node_sets[s], keep_inner[s], keep_outer[s]);

  const std::vector<Cplx> head(samples.begin(), samples.begin() + cols);
  const auto minor_det = [&](Cplx z, const std::vector<Cplx>& hs) {
    CMatrix S = detail::pair_matrix(p, z, hs);
    for (Eigen::Index r = 0; r < cols; ++r)
      S.row(r) /= std::max(S.row(r).norm(), 1e-300);
    return S.determinant();
  };
  const auto certify = [&](Cplx z) {
    CMatrix Mz = detail::pair_matrix(p, z, scaled(samples, z));
    for (Eigen::Index r = 0; r < Mz.rows(); ++r)
      Mz.row(r) /= std::max(Mz.row(r).norm(), 1e-300);
    Eigen::JacobiSVD<CMatrix> svd(Mz);
    const auto& sv = svd.singularValues();
    return sv(sv.size() - 1) / std::max(sv(0), 1e-300);
  };
  // A repeated locus flattens the rank ratio like distance^multiplicity, so
  // junk nearby can slip under the acceptance threshold. Genuine variety
  // points sit orders of magnitude below their own neighbourhood; points
  // that merely inherit locus flatness do not.
  const auto sigma_dip = [&](Cplx z, double ratio) {
    const double rad = 1e-2 * (1.0 + std::abs(z));
    double worst = 0.0;
    for (const Cplx dir : {Cplx(1, 0), Cplx(-0.5, 0.866), Cplx(-0.5, -0.866)})
      worst = std::max(worst, certify(z + rad * dir));
    return ratio < 1e-4 * worst;
  };
  const auto admit = [&](Cplx z, double ratio) {
    if (ratio > opt.sigma_accept || !sigma_dip(z, ratio)) return;
    for (const Cplx seen : out.roots)
      if (std::abs(seen - z) < opt.dedup_tol * (1.0 + std::abs(z))) return;
    out.roots.push_back(z);
    out.sigma.push_back(ratio);
  };

  const std::vector<Cplx> loci = pair_trivial_loci(p);

  // Candidates from the interpolated determinant carry coefficient noise, so
  // each one is re-polished on a square minor built from samples frozen at
  // the candidate's own scale (freezing keeps the minor holomorphic for the
  // finite differences). A leash rejects runs that wander off; a shrinking
  // compass descent on the rank ratio rescues candidates the polish loses.
  const auto leashed_newton = [&](Cplx z0) {
    Cplx z = z0;
    double hscale = 1e-6;
    const double leash = 1.0 + std::abs(z0);
    const std::vector<Cplx> hs = scaled(head, z0);
    for (int it = 0; it < opt.polish_iters; ++it) {
      const double hstep = hscale * (1.0 + std::abs(z));
      const Cplx g = minor_det(z, hs);
      const Cplx dg = (minor_det(z + hstep, hs) - minor_det(z - hstep, hs)) /
                      (2.0 * hstep);
      if (std::abs(dg) < 1e-300) break;
      const Cplx step = g / dg;
      const double norm = std::abs(step);
      z -= step;
      hscale = std::clamp(0.25 * norm / (1.0 + std::abs(z)), 1e-12, 1e-6);
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) ||
          std::abs(z - z0) > leash)
        return z0;
      if (norm < 1e-13 * (1.0 + std::abs(z))) break;
    }
    return z;
  };
  const auto compass = [&](Cplx z) {
    double step = 5e-2 * (1.0 + std::abs(z));
    double best = certify(z);
    for (int it = 0; it < 90 && step > 1e-10 * (1.0 + std::abs(z)); ++it) {
      bool moved = false;
      for (const Cplx dir : {Cplx(1, 0), Cplx(-1, 0), Cplx(0, 1), Cplx(0, -1),
                             Cplx(0.7, 0.7), Cplx(-0.7, 0.7), Cplx(0.7, -0.7),
                             Cplx(-0.7, -0.7)}) {
        const Cplx trial = z + step * dir;
        const double r = certify(trial);
        if (r < best) {
          best = r;
          z = trial;
          moved = true;
          break;
        }
      }
      if (!moved) step *= 0.5;
    }
    return z;
  };

  for (const Cplx z0 : candidates) {
    if (std::abs(z0) > cap) continue;
    Cplx z = leashed_newton(z0);
    // Smeared multiple roots of the factored loci stall short of full
    // precision; snap them onto the exact locus.
    for (const Cplx l : loci)
      if (std::abs(z - l) < 1e-3 * (1.0 + std::abs(l))) z = l;
    double ratio = certify(z);
    if (ratio > opt.sigma_accept) {
      Cplx w = compass(certify(z0) < ratio ? z0 : z);
      w = leashed_newton(w);
      for (const Cplx l : loci)
        if (std::abs(w - l) < 1e-3 * (1.0 + std::abs(l))) w = l;
      const double rw = certify(w);
      if (rw < ratio) {
        z = w;
        ratio = rw;
      }
    }
    admit(z, ratio);
  }
  // The factored loci lie on the variety by construction; no polish needed.
  for (const Cplx l : loci) admit(l, certify(l));

  const auto order = [](Cplx a, Cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  };
  std::vector<std::size_t> perm(out.roots.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
    return order(out.roots[a], out.roots[b]);
  });
  PairConstraintResult sorted;
  sorted.det_degree = out.det_degree;
  for (const std::size_t i : perm) {
    sorted.roots.push_back(out.roots[i]);
    sorted.sigma.push_back(out.sigma[i]);
  }
  for (const Cplx z : sorted.roots) {
    bool triv = false;
    for (const Cplx l : loci)
      triv = triv || std::abs(z - l) < 1e-3 * (1.0 + std::abs(l));
    (triv ? sorted.trivial : sorted.nontrivial).push_back(z);
  }
  return sorted;
}

// ---------------------------------------------------------------------------
// Two-magnon assembly
// ---------------------------------------------------------------------------

struct TwoMagnonForm {
  Cplx pair_inv{};
  std::vector<Cplx> h;        // profile coefficients from the kernel
  double kernel_sigma = 0.0;  // rank ratio of the constraint matrix
  SymPoly<Cplx> poly;         // the interpolated two-variable closed form
  double offgrid_residual = 0.0;  // certifies that the form is polynomial
};

/**
 * \brief Assemble and certify a two-magnon closed form at one invariant.
 *
 * The profile is the constraint-matrix nullvector; the rational closed form
 * is then interpolated on a tensor grid and re-checked at random off-grid
 * points, which certifies removability of all its apparent poles.
 */
inline TwoMagnonForm two_magnon_closed_form(const ModelParams& p,
                                            Cplx pair_inv,
                                            PairConstraintOptions opt = {}) {
  if (p.L < 2) throw config_error("two_magnon_closed_form: needs L >= 2");
  const bool tw = p.boundary == Boundary::Twisted;
  const Cplx q = p.q;
  const Eigen::Index cols = tw ? p.L : 2 * p.L + 1;

  Rng rng(opt.seed);
  const std::vector<Cplx> samples = detail::pair_samples(
      p, {pair_inv}, static_cast<int>(opt.oversample * cols), opt.margin, rng);
  const CMatrix M = detail::pair_matrix(p, pair_inv, samples);
  Eigen::JacobiSVD<CMatrix> svd(M, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();

  TwoMagnonForm out;
  out.pair_inv = pair_inv;
  out.kernel_sigma = sv(sv.size() - 1) / std::max(sv(0), 1e-300);
  CVector hv = svd.matrixV().col(cols - 1);
  Eigen::Index lead;
  hv.cwiseAbs().maxCoeff(&lead);
  hv /= hv(lead);
  out.h.assign(hv.data(), hv.data() + hv.size());

  const int cap = tw ? p.L - 1 : 2 * p.L;
  const auto raw = [&](const std::vector<Cplx>& x) {
    return two_magnon_raw(p, pair_inv, out.h, x[0], x[1]);
  };
  const auto pole_free = [&](Cplx x1, Cplx x2) {
    bool ok = std::abs(x1 - x2) > opt.margin;
    if (tw) {
      ok = ok && std::abs(x1 + x2 - pair_inv) > opt.margin;
    } else {
      ok = ok && std::abs(x1 * x2 - Cplx(1) / (q * q)) > opt.margin;
      ok = ok && std::abs((x1 + x2) * (x1 * x2 * q + Cplx(1) / q) -
                          x1 * x2 * pair_inv) > opt.margin;
      for (const Cplx x : {x1, x2}) {
        ok = ok && std::abs(x - Cplx(1) / q) > opt.margin;
        ok = ok && std::abs(x + Cplx(1) / q) > opt.margin;
      }
    }
    return ok;
  };

  std::vector<std::vector<Cplx>> axes;
  for (int attempt = 0;; ++attempt) {
    if (attempt >= 32)
      throw numeric_error("two_magnon_closed_form: no pole-free grid found");
    const double r1 = 0.9 + 0.013 * attempt, r2 = 1.12 + 0.017 * attempt;
    axes = {circle_nodes(cap + 1, r1, 0.31), circle_nodes(cap + 1, r2, 1.07)};
    bool ok = true;
    for (const Cplx x1 : axes[0])
      for (const Cplx x2 : axes[1]) ok = ok && pole_free(x1, x2);
    if (ok) break;
  }

  GridSample<Cplx> grid = sample_grid<Cplx>(axes, raw);
  double scale = 0.0;
  for (Eigen::Index i = 0; i < grid.values.size(); ++i)
    scale = std::max(scale, std::abs(grid.values(i)));
  out.poly = interp_grid(grid);

  double worst = 0.0;
  int checked = 0;
  for (int attempt = 0; checked < 24 && attempt < 2000; ++attempt) {
    const Cplx x1 = std::polar(rng.uniform(0.7, 1.3),
                               rng.uniform(0.0, 2 * std::numbers::pi));
    const Cplx x2 = std::polar(rng.uniform(0.7, 1.3),
                               rng.uniform(0.0, 2 * std::numbers::pi));
    if (!pole_free(x1, x2)) continue;
    const Cplx a = raw({x1, x2});
    const Cplx b = out.poly.eval({x1, x2});
    worst = std::max(worst, std::abs(a - b));
    ++checked;
  }
  if (checked < 24)
    throw numeric_error("two_magnon_closed_form: off-grid checks starved");
  out.offgrid_residual = worst / std::max(scale, 1e-300);
  return out;
}

// ---------------------------------------------------------------------------
// Printed constraint fixtures
// ---------------------------------------------------------------------------

/// Nontrivial root of the two-site twisted pair-sum constraint.
inline Cplx pair_fixture_twisted_two_site(const ModelParams& p) {
  if (p.boundary != Boundary::Twisted || p.L != 2)
    throw config_error("pair_fixture_twisted_two_site: wrong model");
  const Cplx q2 = p.q * p.q;
  return (p.y[0] + p.y[1]) * (p.phi1 - p.phi2 * q2) /
         (q2 * (p.phi1 - p.phi2));
}

/// Ascending coefficients of the cubic factor of the three-site twisted
/// pair-sum constraint.
inline std::array<Cplx, 4> pair_fixture_twisted_three_site(
    const ModelParams& p) {
  if (p.boundary != Boundary::Twisted || p.L != 3)
    throw config_error("pair_fixture_twisted_three_site: wrong model");
  const Cplx q = p.q, f1 = p.phi1, f2 = p.phi2;
  const Cplx y1 = p.y[0], y2 = p.y[1], y3 = p.y[2];
  const Cplx e1 = y1 + y2 + y3;
  const Cplx e2 = y1 * y2 + y1 * y3 + y2 * y3;
  const Cplx sum_sq = y1 * y1 + y2 * y2 + y3 * y3;
  const Cplx mixed = y1 * y1 * (y2 + y3) + y2 * y2 * (y1 + y3) +
                     y3 * y3 * (y1 + y2);
  const Cplx q2 = q * q, q4 = q2 * q2;

  const Cplx c3 = q * q2 * (f2 - f1 * q) * (f2 - f1 * q) * (f2 - f1 * q);
  const Cplx c2 =
      2.0 * q2 * (f2 - f1 * q) * (f2 - f1 * q) * (f1 - f2 * q) * e1;
  const Cplx W = q * (f1 * f1 + q2 * f2 * f2) * (sum_sq + 3.0 * e2) -
                 f1 * f2 * ((1.0 + q4) * e2 + 2.0 * q2 * e1 * e1);
  const Cplx c1 = (f2 - f1 * q) * W;
  const Cplx W0 =
      (f1 - f2 * q * q2) *
      (f1 * f2 * (q + Cplx(1) / q) *
           ((q2 - 4.0 + Cplx(1) / q2) * y1 * y2 * y3 - mixed) +
       (f1 * f1 + f2 * f2) * (y1 + y2) * (y1 + y3) * (y2 + y3));
  return {W0, c1, c2, c3};
}

/// Nontrivial root of the two-site open pair constraint.
inline Cplx pair_fixture_open_two_site(const ModelParams& p) {
  if (p.boundary != Boundary::Open || p.L != 2)
    throw config_error("pair_fixture_open_two_site: wrong model");
  const Cplx q = p.q, q2 = q * q;
  const Cplx t2 = p.t * p.t, b2 = p.tbar * p.tbar;
  const Cplx y1 = p.y[0], y2 = p.y[1];
  const Cplx num = (q2 - Cplx(1) / q2) * (1.0 + t2 * b2) * y1 * y2 -
                   (q2 * b2 - t2 / q2) * (y1 + y2) * (1.0 + y1 * y2);
  const Cplx den = (t2 / q - q * b2) * y1 * y2;
  return num / den;
}

/// Ascending coefficients of the cubic factor of the three-site open pair
/// constraint on the uniform chain (all inhomogeneities at 1).
inline std::array<Cplx, 4> pair_fixture_open_three_site_uniform(
    const ModelParams& p) {
  if (p.boundary != Boundary::Open || p.L != 3)
    throw config_error("pair_fixture_open_three_site_uniform: wrong model");
  for (const Cplx yv : p.y)
    if (std::abs(yv - Cplx(1)) > 1e-9)
      throw config_error(
          "pair_fixture_open_three_site_uniform: chain is not uniform");
  const Cplx q = p.q, qi = Cplx(1) / q;
  const Cplx q2 = q * q, q3 = q2 * q, q4 = q2 * q2, q5 = q4 * q, q6 = q4 * q2;
  const Cplx qi2 = qi * qi, qi3 = qi2 * qi, qi4 = qi2 * qi2, qi5 = qi4 * qi,
             qi6 = qi4 * qi2;
  const Cplx T = p.t * p.t, B = p.tbar * p.tbar;

  const Cplx w2 = (q - qi) * (qi2 + 4.0 + q2) * (1.0 + T * B) +
                  12.0 * (T * qi - q * B);
  const Cplx w1 =
      (q - qi) * (q - qi) * (2.0 + q2) * (2.0 + qi2) * (1.0 + T * T * B * B) +
      6.0 * (q - qi) *
          ((2.0 + q2) * (2.0 + qi2) * (T * qi - q * B) - (T * qi3 - q3 * B)) *
          (1.0 + T * B) -
      (q3 - 51.0 * qi + 2.0 * qi3) * qi * T * T -
      (2.0 * q3 - 51.0 * q + qi3) * q * B * B +
      (q6 + 4.0 * q4 - 13.0 * q2 - 80.0 - 13.0 * qi2 + 4.0 * qi4 + qi6) * T * B;
  const Cplx w0 =
      (q - qi) * (q2 - qi2) * (q2 - qi2) * (1.0 + T * T * T * B * B * B) +
      6.0 * (q - qi) * (q2 - qi2) * ((2.0 + qi2) * T - (2.0 + q2) * B) *
          (1.0 + T * T * B * B) -
      (q2 - qi2) * (q3 - 37.0 * q - 13.0 * qi + qi3) * qi2 * T * T *
          (1.0 + T * B) -
      (q2 - qi2) * (q3 - 13.0 * q - 37.0 * qi + qi3) * q2 * B * B *
          (1.0 + T * B) +
      (q2 - qi2) * (q + qi) * (q4 + q2 - 52.0 + qi2 + qi4) * T * B *
          (1.0 + T * B) +
      2.0 * (3.0 + qi2) * (q2 - 12.0 + 3.0 * qi2) * q3 * B * B * B -
      2.0 * (3.0 + q2) * (3.0 * q2 - 12.0 + qi2) * qi3 * T * T * T +
      2.0 * (3.0 * q5 + 9.0 * q3 - 31.0 * q - 57.0 * qi - 36.0 * qi3 +
             16.0 * qi5) *
          T * T * B -
      2.0 * (16.0 * q5 - 36.0 * q3 - 57.0 * q - 31.0 * qi + 9.0 * qi3 +
             3.0 * qi5) *
          T * B * B;

  const Cplx d = T - B;
  return {-w0, d * w1, -d * d * w2, d * d * d};
}

}  // namespace svx
