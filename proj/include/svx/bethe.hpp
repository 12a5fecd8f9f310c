#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "svx/model.hpp"
#include "svx/oracle.hpp"
#include "svx/polyroots.hpp"
#include "svx/rng.hpp"
#include "svx/types.hpp"

namespace svx {

struct BetheRootSet {
  Boundary boundary = Boundary::Twisted;
  int n = 0;
  std::vector<Cplx> roots;  // multiplicative variables x_i = e^{2 lambda_i}
  double residual = 0.0;
  Cplx aggregate{};
};

/// Twisted aggregate sum x_i; open aggregate sum (x_i q + 1/(x_i q)).
inline Cplx aggregate(Boundary boundary, Cplx q,
                      const std::vector<Cplx>& roots) {
  Cplx acc(0);
  for (const Cplx x : roots)
    acc += boundary == Boundary::Twisted ? x : x * q + Cplx(1) / (x * q);
  return acc;
}

namespace detail {

/// Boundary factor of the open Bethe equations in multiplicative form.
inline Cplx open_boundary_factor(const ModelParams& p, Cplx x) {
  const Cplx t = p.t, tb = p.tbar, q = p.q;
  const Cplx num = (x * t - Cplx(1) / t) * (x / tb - tb);
  const Cplx den = (x * q / t - t / q) * (x * q * tb - Cplx(1) / (tb * q));
  return num / den;
}

/// Ratio LHS/RHS of Bethe equation k; a solution makes every ratio 1.
inline Cplx bethe_ratio(const ModelParams& p, const std::vector<Cplx>& x,
                        std::size_t k) {
  const Cplx q = p.q, xk = x[k];
  Cplx lhs(1), rhs(1);
  if (p.boundary == Boundary::Twisted) {
    for (const Cplx yv : p.y) lhs *= (xk * q - yv / q) / (xk - yv);
    rhs = p.phi2 / p.phi1;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (j == k) continue;
      rhs *= (xk * q - x[j] / q) / (xk / q - x[j] * q);
    }
  } else {
    lhs = open_boundary_factor(p, xk);
    for (const Cplx yv : p.y)
      lhs *= (xk * q - yv / q) * (xk * q - Cplx(1) / (yv * q)) /
             ((xk - yv) * (xk - Cplx(1) / yv));
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (j == k) continue;
      rhs *= (xk * q - x[j] / q) * (xk * q * q - Cplx(1) / (x[j] * q * q)) /
             ((xk / q - x[j] * q) * (xk - Cplx(1) / x[j]));
    }
  }
  return lhs / rhs;
}

/// Log-form residual vector with the interaction side damped by strength s
/// (s = 1 is the physical system; s = 0 decouples the equations).
inline CVector bethe_logform(const ModelParams& p, const std::vector<Cplx>& x,
                             double s) {
  CVector g(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const Cplx xk = x[k];
    const Cplx q = p.q;
    Cplx lhs(1), rhs(1);
    if (p.boundary == Boundary::Twisted) {
      for (const Cplx yv : p.y) lhs *= (xk * q - yv / q) / (xk - yv);
      rhs = p.phi2 / p.phi1;
      for (std::size_t j = 0; j < x.size(); ++j) {
        if (j == k) continue;
        rhs *= (xk * q - x[j] / q) / (xk / q - x[j] * q);
      }
    } else {
      lhs = open_boundary_factor(p, xk);
      for (const Cplx yv : p.y)
        lhs *= (xk * q - yv / q) * (xk * q - Cplx(1) / (yv * q)) /
               ((xk - yv) * (xk - Cplx(1) / yv));
      for (std::size_t j = 0; j < x.size(); ++j) {
        if (j == k) continue;
        rhs *= (xk * q - x[j] / q) * (xk * q * q - Cplx(1) / (x[j] * q * q)) /
               ((xk / q - x[j] * q) * (xk - Cplx(1) / x[j]));
      }
    }
    if (!(std::abs(lhs) > 0) || !(std::abs(rhs) > 0) || !std::isfinite(std::abs(lhs)) ||
        !std::isfinite(std::abs(rhs))) {
      g[k] = Cplx(1e6, 0);
      continue;
    }
    // s scales only the interaction part; the twist ratio always stays.
    Cplx gk;
    if (p.boundary == Boundary::Twisted) {
      const Cplx twist = p.phi2 / p.phi1;
      gk = std::log(lhs) - std::log(twist) - s * std::log(rhs / twist);
    } else {
      gk = std::log(lhs) - s * std::log(rhs);
    }
    // principal-branch fold: zeros of the system are ratio == 1, so reduce
    // the imaginary part modulo 2*pi to the centered interval
    const double twopi = 6.283185307179586476925287;
    g[k] = Cplx(gk.real(), std::remainder(gk.imag(), twopi));
  }
  return g;
}

}  // namespace detail

/// Per-equation deviations |LHS/RHS - 1| of the twisted Bethe system.
inline Eigen::VectorXd residual_twisted(const ModelParams& p,
                                        const std::vector<Cplx>& roots) {
  if (p.boundary != Boundary::Twisted)
    throw config_error("residual_twisted: params are not twisted");
  Eigen::VectorXd r(roots.size());
  for (std::size_t k = 0; k < roots.size(); ++k)
    r[k] = std::abs(detail::bethe_ratio(p, roots, k) - Cplx(1));
  return r;
}

/// Per-equation deviations |LHS/RHS - 1| of the open-boundary Bethe system.
inline Eigen::VectorXd residual_open(const ModelParams& p,
                                     const std::vector<Cplx>& roots) {
  if (p.boundary != Boundary::Open)
    throw config_error("residual_open: params are not open");
  Eigen::VectorXd r(roots.size());
  for (std::size_t k = 0; k < roots.size(); ++k)
    r[k] = std::abs(detail::bethe_ratio(p, roots, k) - Cplx(1));
  return r;
}

inline Eigen::VectorXd bethe_residual(const ModelParams& p,
                                      const std::vector<Cplx>& roots) {
  return p.boundary == Boundary::Twisted ? residual_twisted(p, roots)
                                         : residual_open(p, roots);
}

struct SolveOptions {
  double tol = 1e-12;          // Newton stop on the log-form norm
  double accept = 1e-9;        // admission threshold on |ratio - 1|
  int max_iter = 90;
  int random_starts = 96;
  int homotopy_steps = 10;
  bool use_homotopy = true;
  bool eigencheck_filter = true;
  double eigencheck_tol = 1e-8;
  bool reject_gauge = true;  // drop open sets containing x = +-1/q
  double dedup_tol = 1e-7;
  std::uint64_t seed = 0x5eed;
};

namespace detail {

/// Damped Newton on the log-form system at interaction strength s.
inline std::optional<std::vector<Cplx>> newton_bethe(const ModelParams& p,
                                                     std::vector<Cplx> x,
                                                     double s,
                                                     const SolveOptions& opt) {
  const int n = static_cast<int>(x.size());
  CVector g = bethe_logform(p, x, s);
  double gn = g.norm();
  for (int it = 0; it < opt.max_iter; ++it) {
    if (gn < opt.tol) return x;
    CMatrix J(n, n);
    for (int j = 0; j < n; ++j) {
      const double step = 1e-7 * std::max(1.0, std::abs(x[j]));
      auto xp = x, xm = x;
      xp[j] += step;
      xm[j] -= step;
      const CVector gp = bethe_logform(p, xp, s);
      const CVector gm = bethe_logform(p, xm, s);
      J.col(j) = (gp - gm) / (2.0 * step);
    }
    const CVector dx = J.partialPivLu().solve(g);
    if (!dx.allFinite()) return std::nullopt;
    bool accepted = false;
    double damp = 1.0;
    for (int half = 0; half < 8; ++half, damp *= 0.5) {
      auto trial = x;
      for (int j = 0; j < n; ++j) trial[j] = x[j] - damp * dx[j];
      const CVector gt = bethe_logform(p, trial, s);
      const double gtn = gt.norm();
      if (std::isfinite(gtn) && gtn < gn * (1.0 - 0.25 * damp)) {
        x = trial;
        g = gt;
        gn = gtn;
        accepted = true;
        break;
      }
    }
    if (!accepted) return std::nullopt;
  }
  return gn < opt.tol * 100 ? std::optional(x) : std::nullopt;
}

/// Reflection-canonical representative of one open-chain root.
inline Cplx open_canonical(Cplx x, Cplx q) {
  const Cplx mirror = Cplx(1) / (x * q * q);
  const double ax = std::abs(x), am = std::abs(mirror);
  if (std::abs(ax - am) > 1e-9 * std::max(ax, am)) return ax > am ? x : mirror;
  if (std::abs(x.real() - mirror.real()) > 1e-12)
    return x.real() > mirror.real() ? x : mirror;
  return x.imag() >= mirror.imag() ? x : mirror;
}

inline std::vector<Cplx> canonical_roots(const ModelParams& p,
                                         std::vector<Cplx> roots) {
  if (p.boundary == Boundary::Open)
    for (auto& x : roots) x = open_canonical(x, p.q);
  std::sort(roots.begin(), roots.end(), [](Cplx a, Cplx b) {
    if (std::abs(a.real() - b.real()) > 1e-12) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return roots;
}

inline bool roots_coincide(const std::vector<Cplx>& roots, double tol) {
  for (std::size_t i = 0; i < roots.size(); ++i)
    for (std::size_t j = i + 1; j < roots.size(); ++j)
      if (std::abs(roots[i] - roots[j]) <
          tol * std::max(1.0, std::abs(roots[i])))
        return true;
  return false;
}

inline double set_distance(const std::vector<Cplx>& a,
                           const std::vector<Cplx>& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

/// Dense coefficients of the one-magnon Bethe polynomial.
inline std::vector<Cplx> one_magnon_polynomial(const ModelParams& p) {
  const Cplx q = p.q;
  if (p.boundary == Boundary::Twisted) {
    std::vector<Cplx> za, zb;
    for (const Cplx yv : p.y) {
      za.push_back(yv / (q * q));
      zb.push_back(yv);
    }
    auto pa = poly_from_roots(za);  // prod (x - y/q^2)
    auto pb = poly_from_roots(zb);  // prod (x - y)
    std::vector<Cplx> c(p.L + 1);
    const Cplx lead = p.phi1 * std::pow(q, p.L);
    for (int k = 0; k <= p.L; ++k) c[k] = lead * pa[k] - p.phi2 * pb[k];
    return c;
  }
  const Cplx t = p.t, tb = p.tbar;
  std::vector<Cplx> plus{-Cplx(1) / t, t};    // x t - 1/t
  plus = polymul(plus, {-tb, Cplx(1) / tb});  // (x/tbar - tbar)
  std::vector<Cplx> minus{-t / q, q / t};     // x q/t - t/q
  minus = polymul(minus, {-Cplx(1) / (tb * q), q * tb});
  for (const Cplx yv : p.y) {
    plus = polymul(plus, {-yv / q, q});
    plus = polymul(plus, {-Cplx(1) / (yv * q), q});
    minus = polymul(minus, {-yv, Cplx(1)});
    minus = polymul(minus, {-Cplx(1) / yv, Cplx(1)});
  }
  std::vector<Cplx> c(std::max(plus.size(), minus.size()), Cplx(0));
  for (std::size_t k = 0; k < plus.size(); ++k) c[k] += plus[k];
  for (std::size_t k = 0; k < minus.size(); ++k) c[k] -= minus[k];
  return c;
}

}  // namespace detail

/**
 * \brief Enumerate admissible Bethe root sets for either boundary.
 *
 * Seeds come from the decoupled-interaction homotopy (n = 1 subproblems are
 * solved exactly by companion matrices) plus random multi-starts; converged
 * sets are polished by damped Newton, canonicalized (open roots modulo the
 * x -> 1/(x q^2) reflection), deduplicated, and optionally filtered by the
 * transfer-matrix eigencheck.
 */
inline std::vector<BetheRootSet> solve_bethe(const ModelParams& p, int n,
                                             SolveOptions opt = {}) {
  if (n < 0 || n > p.L)
    throw config_error("solve_bethe: need 0 <= n <= L");
  if (n == 0) {
    BetheRootSet vac;
    vac.boundary = p.boundary;
    vac.n = 0;
    vac.residual = 0.0;
    vac.aggregate = Cplx(0);
    return {vac};
  }
  Rng rng(opt.seed);

  // one-magnon classes, used directly for n = 1 and as homotopy anchors
  std::vector<Cplx> anchors;
  for (const Cplx r : polyroots(detail::one_magnon_polynomial(p)))
    if (std::abs(r) > 1e-8) anchors.push_back(r);

  std::vector<std::vector<Cplx>> seeds;
  if (opt.use_homotopy) {
    const int m = static_cast<int>(anchors.size());
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    // all n-subsets of the anchor list
    while (m >= n) {
      std::vector<Cplx> s(n);
      for (int i = 0; i < n; ++i) s[i] = anchors[idx[i]];
      seeds.push_back(s);
      int k = n - 1;
      while (k >= 0 && idx[k] == m - n + k) --k;
      if (k < 0) break;
      ++idx[k];
      for (int i = k + 1; i < n; ++i) idx[i] = idx[i - 1] + 1;
    }
  }
  const std::size_t homotopy_seed_count = seeds.size();
  for (int s = 0; s < opt.random_starts; ++s) {
    std::vector<Cplx> seed(n);
    for (int i = 0; i < n; ++i) {
      if (!anchors.empty() && rng.uniform() < 0.6) {
        const Cplx base = anchors[static_cast<std::size_t>(
            rng.uniform(0.0, static_cast<double>(anchors.size())))];
        seed[i] = base * (Cplx(1) + 0.3 * rng.on_circle(1.0));
      } else {
        seed[i] = rng.on_circle(std::abs(p.y.empty() ? Cplx(1) : p.y[0]), 0.9);
      }
    }
    seeds.push_back(seed);
  }

  std::vector<BetheRootSet> out;
  auto admit = [&](std::vector<Cplx> roots) {
    if (detail::roots_coincide(roots, opt.dedup_tol)) return;
    for (const Cplx r : roots)
      if (std::abs(r) < 1e-8) return;
    if (p.boundary == Boundary::Open && opt.reject_gauge) {
      // x = +-1/q are fixed points of the reflection and solve the open
      // equations identically; sets containing them are gauge artifacts.
      const double guard = 1e-6 * (1.0 + std::abs(Cplx(1) / p.q));
      for (const Cplx r : roots)
        if (std::abs(r - Cplx(1) / p.q) < guard ||
            std::abs(r + Cplx(1) / p.q) < guard)
          return;
    }
    if (p.boundary == Boundary::Open &&
        detail::roots_coincide(detail::canonical_roots(p, roots),
                               opt.dedup_tol))
      return;
    const auto canon = detail::canonical_roots(p, roots);
    const Eigen::VectorXd res = bethe_residual(p, canon);
    if (res.maxCoeff() > opt.accept) return;
    for (const auto& known : out)
      if (detail::set_distance(known.roots, canon) <
          opt.dedup_tol * std::max(1.0, std::abs(canon[0])))
        return;
    if (opt.eigencheck_filter && p.L <= 10 &&
        eigencheck(p, canon) > opt.eigencheck_tol)
      return;
    BetheRootSet b;
    b.boundary = p.boundary;
    b.n = n;
    b.roots = canon;
    b.residual = res.maxCoeff();
    b.aggregate = aggregate(p.boundary, p.q, canon);
    out.push_back(b);
  };

  for (std::size_t si = 0; si < seeds.size(); ++si) {
    std::vector<Cplx> x = seeds[si];
    bool ok = true;
    if (opt.use_homotopy && si < homotopy_seed_count && n > 1) {
      for (int step = 1; step <= opt.homotopy_steps && ok; ++step) {
        const double s =
            static_cast<double>(step) / static_cast<double>(opt.homotopy_steps);
        auto next = detail::newton_bethe(p, x, s, opt);
        if (next)
          x = *next;
        else
          ok = false;
      }
    } else {
      auto sol = detail::newton_bethe(p, x, 1.0, opt);
      if (sol)
        x = *sol;
      else
        ok = false;
    }
    if (ok) admit(x);
  }

  std::sort(out.begin(), out.end(), [](const BetheRootSet& a,
                                       const BetheRootSet& b) {
    if (std::abs(a.aggregate.real() - b.aggregate.real()) > 1e-10)
      return a.aggregate.real() < b.aggregate.real();
    return a.aggregate.imag() < b.aggregate.imag();
  });
  return out;
}

inline std::vector<BetheRootSet> solve_twisted(const ModelParams& p, int n,
                                               SolveOptions opt = {}) {
  if (p.boundary != Boundary::Twisted)
    throw config_error("solve_twisted: params are not twisted");
  return solve_bethe(p, n, opt);
}

inline std::vector<BetheRootSet> solve_open(const ModelParams& p, int n,
                                            SolveOptions opt = {}) {
  if (p.boundary != Boundary::Open)
    throw config_error("solve_open: params are not open");
  return solve_bethe(p, n, opt);
}

}  // namespace svx
