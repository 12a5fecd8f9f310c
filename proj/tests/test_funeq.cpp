#include <numbers>

#include "doctest.h"
#include "svx/bethe.hpp"
#include "svx/funeq.hpp"
#include "svx/hierarchy.hpp"
#include "svx/oracle.hpp"

using namespace svx;

namespace {

std::vector<Cplx> lambdas_of(const std::vector<Cplx>& xs) {
  std::vector<Cplx> out;
  for (const Cplx x : xs) out.push_back(lambda_of_x(x));
  return out;
}

SymPoly<Cplx> random_poly(int nvars, int cap, Rng& rng) {
  SymPoly<Cplx> p(nvars, cap);
  for (Eigen::Index i = 0; i < p.size(); ++i)
    p.coeffs()(i) = Cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
  return p;
}

}  // namespace

TEST_CASE("twisted coefficients agree with the trigonometric transcription") {
  Rng rng(51);
  const ModelParams p = ModelParams::random_twisted(3, rng);
  const auto bethe = generic_samples(p, 2, 1, {}, rng)[0];
  const auto xs = generic_samples(p, 2, 1, bethe, rng)[0];
  const Cplx x0 = Cplx(1.21, 0.37);
  const CoeffBundle cx = coeffs_twisted(p, x0, xs, bethe);
  const Cplx l0 = lambda_of_x(x0);
  const CoeffBundle cl =
      coeffs_twisted_trig(p, l0, lambdas_of(xs), lambdas_of(bethe));
  Cplx exp_mu(0);
  for (const Cplx m : p.mu) exp_mu += m;
  const Cplx common = std::pow(Cplx(2), p.L) * std::exp(exp_mu);
  const Cplx f0 = common * std::exp(Cplx(double(p.L)) * l0);
  CHECK(std::abs(cx.k0 - f0 * cl.k0) < 1e-10 * std::abs(cx.k0));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Cplx fi = common * std::exp(l0) *
                    std::exp(Cplx(double(p.L - 1)) * lambda_of_x(xs[i]));
    CHECK(std::abs(cx.kx[i] - fi * cl.kx[i]) < 1e-10 * std::abs(cx.kx[i]));
  }
}

TEST_CASE("open coefficients agree with the trigonometric transcription") {
  Rng rng(52);
  const ModelParams p = ModelParams::random_open(2, rng);
  const auto bethe = generic_samples(p, 2, 1, {}, rng)[0];
  const auto xs = generic_samples(p, 2, 1, bethe, rng)[0];
  const Cplx x0 = Cplx(0.93, 0.55);
  const CoeffBundle cx = coeffs_open(p, x0, xs, bethe);
  const CoeffBundle cl = coeffs_open_trig(p, lambda_of_x(x0), lambdas_of(xs),
                                          lambdas_of(bethe));
  // normalization-free: the lambda-plane and x-plane forms differ per term
  // only by a gauge that cancels in this combination
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Cplx lhs = (cx.k0 / cl.k0) * (cl.kx[i] / cx.kx[i]);
    const Cplx rhs = std::pow(x0 / xs[i], p.L);
    CHECK(std::abs(lhs - rhs) < 1e-9 * std::abs(rhs));
  }
}

TEST_CASE("bracket cancels when the free set sits on the dual set") {
  Rng rng(53);
  for (const bool open : {false, true}) {
    const ModelParams p = open ? ModelParams::random_open(2, rng)
                               : ModelParams::random_twisted(2, rng);
    const auto bethe = generic_samples(p, 2, 1, {}, rng)[0];
    const Cplx x0(1.13, 0.29);
    const Cplx k0_same = coeffs(p, x0, bethe, bethe).k0;
    auto moved = bethe;
    moved[0] *= 1.05;
    const Cplx k0_off = coeffs(p, x0, moved, bethe).k0;
    CHECK(std::abs(k0_same) < 1e-10 * std::abs(k0_off));
  }
}

TEST_CASE("free-variable poles are removable for any polynomial") {
  Rng rng(54);
  for (const bool open : {false, true}) {
    const ModelParams p = open ? ModelParams::random_open(2, rng)
                               : ModelParams::random_twisted(2, rng);
    const auto bethe = generic_samples(p, 2, 1, {}, rng)[0];
    const auto xs = generic_samples(p, 2, 1, bethe, rng)[0];
    const SymPoly<Cplx> f = random_poly(2, polynomial_cap(p), rng);
    for (int i = 0; i < 2; ++i) {
      const ResidueEstimate r =
          pole_residue(p, f, xs, bethe, xs[i], PoleKind::FreeVariable);
      CHECK(std::abs(r.residue) < 1e-9 * r.scale);
    }
  }
}

TEST_CASE("dual poles are removable exactly on shell") {
  Rng rng(55);
  for (const bool open : {false, true}) {
    const ModelParams p = open ? ModelParams::random_open(2, rng)
                               : ModelParams::random_twisted(2, rng);
    const auto branches = solve_bethe(p, 2);
    REQUIRE(!branches.empty());
    const auto& bethe = branches.front().roots;
    const auto xs = generic_samples(p, 2, 1, bethe, rng)[0];
    const OraclePoly op = oracle_polynomial(p, bethe);
    for (const Cplx b : bethe) {
      const ResidueEstimate r =
          pole_residue(p, op.poly, xs, bethe, b, PoleKind::BetheRoot);
      CHECK(std::abs(r.residue) < 1e-8 * r.scale);
    }
    if (open) {
      for (const Cplx b : bethe) {
        const Cplx refl = Cplx(1) / (p.q * p.q * b);
        const ResidueEstimate r = pole_residue(p, op.poly, xs, bethe, refl,
                                               PoleKind::ReflectedBetheRoot);
        CHECK(std::abs(r.residue) < 1e-8 * r.scale);
      }
    }

    std::vector<Cplx> off = bethe;
    for (std::size_t k = 0; k < off.size(); ++k)
      off[k] *= 1.0 + std::polar(1e-2, 2.0 + 0.7 * double(k));
    const OraclePoly opOff = oracle_polynomial(p, off);
    const auto xs2 = generic_samples(p, 2, 1, off, rng)[0];
    double best = 0;
    for (const Cplx b : off) {
      const ResidueEstimate r =
          pole_residue(p, opOff.poly, xs2, off, b, PoleKind::BetheRoot);
      best = std::max(best, std::abs(r.residue) / r.scale);
    }
    CHECK(best > 1e-4);
  }
}

TEST_CASE("functional operator annihilates on-shell oracle polynomials") {
  Rng rng(56);
  for (const bool open : {false, true}) {
    const ModelParams p = open ? ModelParams::random_open(2, rng)
                               : ModelParams::random_twisted(2, rng);
    const auto branches = solve_bethe(p, 1);
    REQUIRE(!branches.empty());
    for (const auto& b : branches) {
      const OraclePoly op = oracle_polynomial(p, b.roots);
      for (int probe = 0; probe < 6; ++probe) {
        const auto X = generic_samples(p, 1, 1, b.roots, rng)[0];
        const Cplx x0 = draw_probe(p, X, b.roots, rng);
        const FuneqValue fv = funeq_apply(p, op.poly, x0, X, b.roots);
        CHECK(std::abs(fv.value) < 1e-9 * fv.scale);
      }
    }
  }
}

TEST_CASE("guards reject malformed residue queries") {
  Rng rng(57);
  const ModelParams p = ModelParams::random_twisted(2, rng);
  const auto bethe = generic_samples(p, 2, 1, {}, rng)[0];
  const auto xs = generic_samples(p, 2, 1, bethe, rng)[0];
  const SymPoly<Cplx> f = random_poly(2, p.L - 1, rng);
  CHECK_THROWS_AS(
      pole_residue(p, f, xs, bethe, Cplx(7.7, 7.7), PoleKind::BetheRoot),
      config_error);
  CHECK_THROWS_AS(pole_residue(p, f, xs, bethe, bethe[0],
                               PoleKind::ReflectedBetheRoot),
                  config_error);
  const SymPoly<Cplx> wrong_arity = random_poly(3, p.L - 1, rng);
  CHECK_THROWS_AS(funeq_apply(p, wrong_arity, Cplx(1.1), xs, bethe),
                  config_error);
}
