#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "svx/model.hpp"
#include "svx/sympoly.hpp"
#include "svx/types.hpp"

namespace svx {

/// Coefficients of the substitution form of the scalar-product functional
/// equation at one probe point x0: k0 + sum_i kx[i] (x_i -> x0).
struct CoeffBundle {
  Cplx k0{};
  std::vector<Cplx> kx;
  Cplx x0{};
  std::vector<Cplx> X;
};

enum class PoleKind { FreeVariable, BetheRoot, ReflectedBetheRoot };

namespace detail {

inline constexpr double kPoleGuard = 1e-9;

inline void guard_apart(Cplx a, Cplx b, const char* what) {
  if (std::abs(a - b) < kPoleGuard)
    throw numeric_error(std::string("funeq: probe within guard distance of ") +
                        what);
}

/// (x^{1/2} t - x^{-1/2}/t)(x^{1/2}/tbar - x^{-1/2} tbar) expanded to integer
/// powers of x, so no square root is ever taken.
inline Cplx pair_minus(const ModelParams& p, Cplx x) {
  return (x * p.t - Cplx(1) / p.t) * (x / p.tbar - p.tbar) / x;
}

/// (x^{1/2} q/t - x^{-1/2} t/q)(x^{1/2} q tbar - x^{-1/2}/(q tbar)).
inline Cplx pair_plus(const ModelParams& p, Cplx x) {
  return (x * p.q / p.t - p.t / p.q) *
         (x * p.q * p.tbar - Cplx(1) / (p.tbar * p.q)) / x;
}

/// Two-argument product kernels of the open-boundary coefficients.
inline Cplx open_F(Cplx q, Cplx x, Cplx x0) {
  return (x * q - x0 / q) / (x - x0) * (x - Cplx(1) / x0) /
         (x * q - Cplx(1) / (x0 * q));
}

inline Cplx open_G(Cplx q, Cplx x0, Cplx x) {
  return (x0 * q - x / q) / (x0 - x) * (x0 * q * q - Cplx(1) / (x * q * q)) /
         (x0 * q - Cplx(1) / (x * q));
}

}  // namespace detail

/// Weight multiplying the (L-1)-th derivative in the leading twisted
/// hierarchy operator; also the bracket of the twisted substitution
/// coefficient. xs must be pairwise distinct.
inline Cplx y_factor(const ModelParams& p, const std::vector<Cplx>& xs,
                     std::size_t i) {
  const Cplx q = p.q, x = xs[i];
  Cplx f1 = p.phi1, f2 = p.phi2;
  for (const Cplx yv : p.y) {
    f1 *= x * q - yv / q;
    f2 *= x - yv;
  }
  for (std::size_t j = 0; j < xs.size(); ++j) {
    if (j == i) continue;
    const Cplx xt = xs[j];
    f1 *= (xt * q - x / q) / (xt - x);
    f2 *= (x * q - xt / q) / (x - xt);
  }
  return f1 - f2;
}

/// Open-boundary analogue of y_factor; multiplies the 2L-th derivative in
/// the leading operator. xs must avoid coinciding and reflected pairs.
inline Cplx z_factor(const ModelParams& p, const std::vector<Cplx>& xs,
                     std::size_t i) {
  const Cplx q = p.q, x = xs[i];
  Cplx f1 = detail::pair_minus(p, x);
  Cplx f2 = detail::pair_plus(p, x);
  for (const Cplx yv : p.y) {
    f1 *= (x * q - yv / q) * (x * q - Cplx(1) / (yv * q));
    f2 *= (x - yv) * (x - Cplx(1) / yv);
  }
  for (std::size_t j = 0; j < xs.size(); ++j) {
    if (j == i) continue;
    const Cplx xt = xs[j];
    f1 *= detail::open_F(q, xt, x);
    f2 *= detail::open_G(q, x, xt);
  }
  return f1 - f2;
}

/**
 * \brief Twisted functional-equation coefficients at probe x0.
 *
 * xs are the free variables, bethe the (candidate) Bethe set. Throws on pole
 * proximity rather than returning amplified garbage.
 */
inline CoeffBundle coeffs_twisted(const ModelParams& p, Cplx x0,
                                  const std::vector<Cplx>& xs,
                                  const std::vector<Cplx>& bethe) {
  if (p.boundary != Boundary::Twisted)
    throw config_error("coeffs_twisted: params are not twisted");
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = i + 1; j < xs.size(); ++j)
      detail::guard_apart(xs[i], xs[j], "coinciding free variables");
  for (const Cplx x : xs) detail::guard_apart(x0, x, "a free variable");
  for (const Cplx x : bethe) detail::guard_apart(x0, x, "a Bethe root");

  const Cplx q = p.q;
  Cplx pa = p.phi1, pb = p.phi2;
  for (const Cplx yv : p.y) {
    pa *= x0 * q - yv / q;
    pb *= x0 - yv;
  }
  Cplx fa(1), fb(1), ga(1), gb(1);
  for (const Cplx x : xs) {
    fa *= (x * q - x0 / q) / (x - x0);
    ga *= (x0 * q - x / q) / (x0 - x);
  }
  for (const Cplx x : bethe) {
    fb *= (x * q - x0 / q) / (x - x0);
    gb *= (x0 * q - x / q) / (x0 - x);
  }

  CoeffBundle out;
  out.k0 = pa * (fa - fb) + pb * (ga - gb);
  out.kx.resize(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    out.kx[i] = (q - Cplx(1) / q) * x0 / (x0 - xs[i]) * y_factor(p, xs, i);
  out.x0 = x0;
  out.X = xs;
  return out;
}

/// Open-boundary coefficients at probe x0; additional pole loci sit at the
/// reflected points 1/(q^2 x) and at x0 = +-1/q.
inline CoeffBundle coeffs_open(const ModelParams& p, Cplx x0,
                               const std::vector<Cplx>& xs,
                               const std::vector<Cplx>& bethe) {
  if (p.boundary != Boundary::Open)
    throw config_error("coeffs_open: params are not open");
  const Cplx q = p.q;
  const Cplx refl_q = Cplx(1) / (q * q);
  detail::guard_apart(x0, Cplx(0), "the origin");
  detail::guard_apart(x0, Cplx(1) / q, "+1/q");
  detail::guard_apart(x0, -Cplx(1) / q, "-1/q");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    detail::guard_apart(xs[i], Cplx(0), "the origin");
    detail::guard_apart(xs[i], Cplx(1) / q, "+1/q");
    detail::guard_apart(xs[i], -Cplx(1) / q, "-1/q");
    for (std::size_t j = i + 1; j < xs.size(); ++j)
      detail::guard_apart(xs[i], xs[j], "coinciding free variables");
    for (std::size_t j = 0; j < xs.size(); ++j)
      if (j != i)
        detail::guard_apart(xs[i], refl_q / xs[j],
                            "a reflected free variable");
  }
  for (const Cplx x : xs) {
    detail::guard_apart(x0, x, "a free variable");
    detail::guard_apart(x0, refl_q / x, "a reflected free variable");
  }
  for (const Cplx x : bethe) {
    detail::guard_apart(x0, x, "a Bethe root");
    detail::guard_apart(x0, refl_q / x, "a reflected Bethe root");
  }

  Cplx pa = detail::pair_minus(p, x0) * (x0 * q * q - Cplx(1) / (x0 * q * q)) /
            (x0 * q - Cplx(1) / (x0 * q));
  Cplx pb = detail::pair_plus(p, x0) * (x0 - Cplx(1) / x0) /
            (x0 * q - Cplx(1) / (x0 * q));
  for (const Cplx yv : p.y) {
    pa *= (x0 * q - yv / q) * (x0 * q - Cplx(1) / (yv * q));
    pb *= (x0 - yv) * (x0 - Cplx(1) / yv);
  }
  Cplx fa(1), fb(1), ga(1), gb(1);
  for (const Cplx x : xs) {
    fa *= detail::open_F(q, x, x0);
    ga *= detail::open_G(q, x0, x);
  }
  for (const Cplx x : bethe) {
    fb *= detail::open_F(q, x, x0);
    gb *= detail::open_G(q, x0, x);
  }

  CoeffBundle out;
  out.k0 = pa * (fa - fb) + pb * (ga - gb);
  out.kx.resize(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Cplx x = xs[i];
    out.kx[i] = x0 * (q - Cplx(1) / q) / (x0 - x) *
                (x0 * q * q - Cplx(1) / (x0 * q * q)) /
                (x0 * q - Cplx(1) / (x * q)) * (x - Cplx(1) / x) /
                (x * q - Cplx(1) / (x * q)) * z_factor(p, xs, i);
  }
  out.x0 = x0;
  out.X = xs;
  return out;
}

inline CoeffBundle coeffs(const ModelParams& p, Cplx x0,
                          const std::vector<Cplx>& xs,
                          const std::vector<Cplx>& bethe) {
  return p.boundary == Boundary::Twisted ? coeffs_twisted(p, x0, xs, bethe)
                                         : coeffs_open(p, x0, xs, bethe);
}

/// Additive-variable (trigonometric) form of the twisted coefficients; an
/// independent transcription used to cross-check coeffs_twisted through
/// x = e^{2 lambda}.
inline CoeffBundle coeffs_twisted_trig(const ModelParams& p, Cplx l0,
                                       const std::vector<Cplx>& ls,
                                       const std::vector<Cplx>& bethe) {
  if (p.boundary != Boundary::Twisted)
    throw config_error("coeffs_twisted_trig: params are not twisted");
  const auto A = [&](Cplx u) { return std::sinh(u + p.gamma); };
  const auto B = [](Cplx u) { return std::sinh(u); };
  const Cplx C = std::sinh(p.gamma);

  Cplx pa = p.phi1, pb = p.phi2;
  for (const Cplx m : p.mu) {
    pa *= A(l0 - m);
    pb *= B(l0 - m);
  }
  Cplx fa(1), fb(1), ga(1), gb(1);
  for (const Cplx l : ls) {
    fa *= A(l - l0) / B(l - l0);
    ga *= A(l0 - l) / B(l0 - l);
  }
  for (const Cplx l : bethe) {
    fb *= A(l - l0) / B(l - l0);
    gb *= A(l0 - l) / B(l0 - l);
  }

  CoeffBundle out;
  out.k0 = pa * (fa - fb) + pb * (ga - gb);
  out.kx.resize(ls.size());
  for (std::size_t i = 0; i < ls.size(); ++i) {
    const Cplx l = ls[i];
    Cplx f1 = p.phi1 * C / B(l0 - l);
    Cplx f2 = p.phi2 * C / B(l - l0);
    for (const Cplx m : p.mu) {
      f1 *= A(l - m);
      f2 *= B(l - m);
    }
    for (std::size_t j = 0; j < ls.size(); ++j) {
      if (j == i) continue;
      f1 *= A(ls[j] - l) / B(ls[j] - l);
      f2 *= A(l - ls[j]) / B(l - ls[j]);
    }
    out.kx[i] = f1 + f2;
  }
  out.x0 = l0;
  out.X = ls;
  return out;
}

/// Additive-variable form of the open coefficients (independent
/// transcription for cross-checks).
inline CoeffBundle coeffs_open_trig(const ModelParams& p, Cplx l0,
                                    const std::vector<Cplx>& ls,
                                    const std::vector<Cplx>& bethe) {
  if (p.boundary != Boundary::Open)
    throw config_error("coeffs_open_trig: params are not open");
  const auto A = [&](Cplx u) { return std::sinh(u + p.gamma); };
  const auto B = [](Cplx u) { return std::sinh(u); };
  const Cplx C = std::sinh(p.gamma);
  const Cplx g = p.gamma;

  Cplx pa = B(l0 + p.h) * B(l0 - p.hbar) * A(2.0 * l0 + g) / B(2.0 * l0 + g);
  Cplx pb = A(l0 - p.h) * A(l0 + p.hbar) * B(2.0 * l0) / A(2.0 * l0);
  for (const Cplx m : p.mu) {
    pa *= A(l0 - m) * A(l0 + m);
    pb *= B(l0 - m) * B(l0 + m);
  }
  const auto F = [&](Cplx l) {
    return A(l - l0) / B(l - l0) * B(l + l0) / A(l + l0);
  };
  const auto G = [&](Cplx l) {
    return A(l0 - l) / B(l0 - l) * A(l0 + l + g) / B(l0 + l + g);
  };
  Cplx fa(1), fb(1), ga(1), gb(1);
  for (const Cplx l : ls) {
    fa *= F(l);
    ga *= G(l);
  }
  for (const Cplx l : bethe) {
    fb *= F(l);
    gb *= G(l);
  }

  CoeffBundle out;
  out.k0 = pa * (fa - fb) + pb * (ga - gb);
  out.kx.resize(ls.size());
  for (std::size_t i = 0; i < ls.size(); ++i) {
    const Cplx l = ls[i];
    const Cplx pre =
        A(2.0 * l0 + g) / A(l0 + l) * C / B(l0 - l) * B(2.0 * l) / A(2.0 * l);
    Cplx f1 = B(l + p.h) * B(l - p.hbar);
    Cplx f2 = A(l - p.h) * A(l + p.hbar);
    for (const Cplx m : p.mu) {
      f1 *= A(l - m) * A(l + m);
      f2 *= B(l - m) * B(l + m);
    }
    for (std::size_t j = 0; j < ls.size(); ++j) {
      if (j == i) continue;
      const Cplx lt = ls[j];
      f1 *= A(lt - l) / B(lt - l) * B(lt + l) / A(lt + l);
      f2 *= A(l - lt) / B(l - lt) * A(l + lt + g) / B(l + lt + g);
    }
    out.kx[i] = pre * (f1 - f2);
  }
  out.x0 = l0;
  out.X = ls;
  return out;
}

struct FuneqValue {
  Cplx value;    // k0 P(X) + sum_i kx[i] P(X with x_i -> x0)
  double scale;  // max |summand|, the normalization of residual bounds
};

/// Apply the functional-equation operator to a polynomial at one probe.
inline FuneqValue funeq_apply(const ModelParams& p, const SymPoly<Cplx>& poly,
                              Cplx x0, const std::vector<Cplx>& xs,
                              const std::vector<Cplx>& bethe) {
  if (poly.nvars() != static_cast<int>(xs.size()))
    throw config_error("funeq_apply: polynomial arity mismatch");
  const CoeffBundle cb = coeffs(p, x0, xs, bethe);
  Cplx acc = cb.k0 * poly.eval(xs);
  double scale = std::abs(acc);
  std::vector<Cplx> sub = xs;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sub[i] = x0;
    const Cplx term = cb.kx[i] * poly.eval(sub);
    sub[i] = xs[i];
    scale = std::max(scale, std::abs(term));
    acc += term;
  }
  return {acc, scale};
}

inline Cplx functional_residual(const ModelParams& p, const SymPoly<Cplx>& poly,
                                Cplx x0, const std::vector<Cplx>& xs,
                                const std::vector<Cplx>& bethe) {
  return funeq_apply(p, poly, x0, xs, bethe).value;
}

struct ResidueOptions {
  double radius = 1e-3;
  int nodes = 16;
  int max_halvings = 3;
  double agree_rel = 1e-7;
};

struct ResidueEstimate {
  Cplx residue;
  double scale;  // size of the individually diverging terms near the pole
};

/**
 * \brief Residue of x0 -> funeq value at a declared pole, by circle average.
 *
 * The trapezoid rule on a circle converges geometrically in the node count
 * for meromorphic integrands, so two radii agreeing certifies the estimate;
 * disagreement (another singularity inside the contour) triggers halving.
 */
inline ResidueEstimate pole_residue(const ModelParams& p,
                                    const SymPoly<Cplx>& poly,
                                    const std::vector<Cplx>& xs,
                                    const std::vector<Cplx>& bethe, Cplx pole,
                                    PoleKind kind, ResidueOptions opt = {}) {
  const double member_tol = 1e-6;
  const auto near_any = [&](const std::vector<Cplx>& set) {
    for (const Cplx v : set)
      if (std::abs(pole - v) < member_tol) return true;
    return false;
  };
  switch (kind) {
    case PoleKind::FreeVariable:
      if (!near_any(xs))
        throw config_error("pole_residue: pole is not a free variable");
      break;
    case PoleKind::BetheRoot:
      if (!near_any(bethe))
        throw config_error("pole_residue: pole is not a Bethe root");
      break;
    case PoleKind::ReflectedBetheRoot: {
      if (p.boundary != Boundary::Open)
        throw config_error(
            "pole_residue: reflected poles exist only for open boundaries");
      std::vector<Cplx> refl;
      refl.reserve(bethe.size());
      for (const Cplx x : bethe) refl.push_back(Cplx(1) / (x * p.q * p.q));
      if (!near_any(refl))
        throw config_error("pole_residue: pole is not a reflected Bethe root");
      break;
    }
  }

  const auto estimate = [&](double r, double& scale) {
    Cplx acc(0);
    scale = 0.0;
    for (int k = 0; k < opt.nodes; ++k) {
      const double th =
          2.0 * std::numbers::pi * (k + 0.5) / static_cast<double>(opt.nodes);
      const Cplx z = pole + std::polar(r, th);
      const FuneqValue f = funeq_apply(p, poly, z, xs, bethe);
      acc += f.value * (z - pole);
      scale = std::max(scale, f.scale * std::abs(z - pole));
    }
    return acc / Cplx(static_cast<double>(opt.nodes));
  };

  double r = opt.radius;
  for (int h = 0; h <= opt.max_halvings; ++h, r *= 0.5) {
    double s1 = 0, s2 = 0;
    const Cplx e1 = estimate(r, s1);
    const Cplx e2 = estimate(0.5 * r, s2);
    const double scale = std::max(s1, s2);
    if (std::abs(e1 - e2) <= opt.agree_rel * scale) return {e2, scale};
  }
  throw numeric_error("pole_residue: estimate did not stabilize under halving");
}

}  // namespace svx
