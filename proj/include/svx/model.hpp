#pragma once

#include <cmath>

#include "svx/rng.hpp"
#include "svx/types.hpp"

namespace svx {

enum class Boundary { Twisted, Open };

inline const char* boundary_name(Boundary b) {
  return b == Boundary::Twisted ? "twisted" : "open";
}

/**
 * \brief Six-vertex model data: chain length, anisotropy, inhomogeneities,
 * and either diagonal twist angles or diagonal reflection parameters.
 *
 * Additive variables (gamma, mu_i, h, hbar) are primary; the multiplicative
 * ones (q = e^gamma, y_i = e^{2 mu_i}, t = e^h, tbar = e^hbar) are derived
 * and kept in sync by the constructors.
 */
struct ModelParams {
  Boundary boundary = Boundary::Twisted;
  int L = 1;
  Cplx gamma{};
  std::vector<Cplx> mu;

  // twisted boundary
  Cplx phi1{1.0, 0.0};
  Cplx phi2{1.0, 0.0};

  // open boundary
  Cplx h{};
  Cplx hbar{};

  // derived multiplicative variables
  Cplx q{};
  std::vector<Cplx> y;
  Cplx t{};
  Cplx tbar{};

  static ModelParams twisted(int L, Cplx gamma, std::vector<Cplx> mu,
                             Cplx phi1, Cplx phi2) {
    ModelParams p;
    p.boundary = Boundary::Twisted;
    p.L = L;
    p.gamma = gamma;
    p.mu = std::move(mu);
    p.phi1 = phi1;
    p.phi2 = phi2;
    p.sync_derived();
    return p;
  }

  static ModelParams open(int L, Cplx gamma, std::vector<Cplx> mu, Cplx h,
                          Cplx hbar) {
    ModelParams p;
    p.boundary = Boundary::Open;
    p.L = L;
    p.gamma = gamma;
    p.mu = std::move(mu);
    p.h = h;
    p.hbar = hbar;
    p.sync_derived();
    return p;
  }

  void sync_derived() {
    q = std::exp(gamma);
    y.resize(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) y[i] = std::exp(2.0 * mu[i]);
    t = std::exp(h);
    tbar = std::exp(hbar);
  }

  /**
   * Genericity guards. strict additionally rejects near-degenerate
   * inhomogeneities (pairwise y ratios close to 1, q^{+-2}, q^{+-4}); explicit
   * parameter sets (e.g. homogeneous chains) may disable that part.
   */
  void validate(bool strict = true) const {
    if (L < 1) throw config_error("ModelParams: L must be >= 1");
    if (static_cast<int>(mu.size()) != L)
      throw config_error("ModelParams: need one inhomogeneity per site");
    const double aq = std::abs(q);
    if (aq < 1e-12 || std::abs(q - Cplx(1)) < 1e-9 ||
        std::abs(q + Cplx(1)) < 1e-9)
      throw config_error("ModelParams: q must avoid {0, +1, -1}");
    if (boundary == Boundary::Twisted) {
      if (std::abs(phi1) < 1e-12 || std::abs(phi2) < 1e-12)
        throw config_error("ModelParams: twist entries must be nonzero");
    } else {
      if (std::abs(t) < 1e-12 || std::abs(tbar) < 1e-12)
        throw config_error("ModelParams: boundary factors must be nonzero");
    }
    if (!strict) return;
    const Cplx q2 = q * q, q4 = q2 * q2;
    for (std::size_t i = 0; i < y.size(); ++i)
      for (std::size_t j = 0; j < y.size(); ++j) {
        if (i == j) continue;
        const Cplx rat = y[i] / y[j];
        for (const Cplx bad : {Cplx(1), q2, Cplx(1) / q2, q4, Cplx(1) / q4})
          if (std::abs(rat - bad) < 1e-6)
            throw config_error(
                "ModelParams: inhomogeneities hit a degenerate ratio");
      }
  }

  /// |q| in [0.5, 0.9] keeps q off the unit circle; y_i sit on a lightly
  /// jittered unit circle so products stay O(1).
  static ModelParams random_twisted(int L, Rng& rng) {
    for (int attempt = 0;; ++attempt) {
      ModelParams p;
      p.boundary = Boundary::Twisted;
      p.L = L;
      p.gamma = draw_gamma(rng);
      p.mu = draw_mu(L, rng);
      p.phi1 = rng.on_circle(1.0, 0.3);
      p.phi2 = rng.on_circle(1.0, 0.3);
      p.sync_derived();
      try {
        p.validate(true);
        return p;
      } catch (const config_error&) {
        if (attempt > 64) throw;
      }
    }
  }

  static ModelParams random_open(int L, Rng& rng) {
    for (int attempt = 0;; ++attempt) {
      ModelParams p;
      p.boundary = Boundary::Open;
      p.L = L;
      p.gamma = draw_gamma(rng);
      p.mu = draw_mu(L, rng);
      p.h = Cplx(rng.uniform(0.2, 0.8), rng.uniform(-0.6, 0.6));
      p.hbar = Cplx(rng.uniform(0.2, 0.8), rng.uniform(-0.6, 0.6));
      p.sync_derived();
      try {
        p.validate(true);
        return p;
      } catch (const config_error&) {
        if (attempt > 64) throw;
      }
    }
  }

 private:
  static Cplx draw_gamma(Rng& rng) {
    const double mod = rng.uniform(0.5, 0.9);
    const double arg = rng.uniform(0.15, 1.2);
    return std::log(Cplx(std::polar(mod, arg)));
  }

  static std::vector<Cplx> draw_mu(int L, Rng& rng) {
    std::vector<Cplx> mu(L);
    for (int i = 0; i < L; ++i) mu[i] = 0.5 * std::log(rng.on_circle(1.0, 0.15));
    return mu;
  }
};

}  // namespace svx
