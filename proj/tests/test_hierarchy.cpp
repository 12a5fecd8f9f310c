#include "doctest.h"
#include "svx/bethe.hpp"
#include "svx/hierarchy.hpp"
#include "svx/oracle.hpp"

using namespace svx;

namespace {

SymPoly<Cplx> random_poly(int nvars, int cap, Rng& rng) {
  SymPoly<Cplx> p(nvars, cap);
  for (Eigen::Index i = 0; i < p.size(); ++i)
    p.coeffs()(i) = Cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
  return p;
}

}  // namespace

TEST_CASE("taylor substitution equals direct substitution") {
  Rng rng(61);
  for (int nvars = 1; nvars <= 3; ++nvars) {
    for (int cap : {2, 5, 8}) {
      const SymPoly<Cplx> f = random_poly(nvars, cap, rng);
      std::vector<Cplx> at(nvars);
      for (auto& z : at) z = Cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
      const int var = static_cast<int>(rng.uniform(0, nvars));
      const Cplx x0(rng.uniform(-1, 1), rng.uniform(-1, 1));
      std::vector<Cplx> subst = at;
      subst[var] = x0;
      const Cplx direct = f.eval(subst);
      const Cplx viaD = taylor_substitution(f, var, x0, at);
      CHECK(std::abs(viaD - direct) < 1e-12 * (1 + std::abs(direct)));
    }
  }
}

TEST_CASE("monomial row reproduces polynomial evaluation") {
  Rng rng(62);
  const SymPoly<Cplx> f = random_poly(2, 4, rng);
  const std::vector<Cplx> at{Cplx(0.4, 0.8), Cplx(-0.3, 0.2)};
  const CRowVector row = monomial_row(2, 4, at);
  CHECK(std::abs((row * f.coeffs())(0) - f.eval(at)) < 1e-12);
}

TEST_CASE("hierarchy degree counts") {
  Rng rng(63);
  const ModelParams tw = ModelParams::random_twisted(3, rng);
  CHECK(hierarchy_degree(tw, 2) == 3);  // L + n - 2
  const ModelParams op = ModelParams::random_open(2, rng);
  CHECK(hierarchy_degree(op, 1) == 7);  // 2L + 3n
}

TEST_CASE("generic samples respect the exclusion margins") {
  Rng rng(64);
  const ModelParams p = ModelParams::random_open(2, rng);
  const std::vector<Cplx> avoid{Cplx(0.9, 0.1)};
  const auto cfgs = generic_samples(p, 2, 40, avoid, rng, 5e-2);
  for (const auto& cfg : cfgs) {
    for (const Cplx z : cfg) {
      CHECK(std::abs(z - avoid[0]) > 5e-2);
      CHECK(std::abs(z - Cplx(1) / p.q) > 5e-2);
      CHECK(std::abs(z + Cplx(1) / p.q) > 5e-2);
      for (const Cplx y : p.y) CHECK(std::abs(z - y) > 5e-2);
    }
    CHECK(std::abs(cfg[0] - cfg[1]) > 5e-2);
  }
}

TEST_CASE("extracted hierarchy annihilates and saturates") {
  Rng rng(65);
  for (const bool open : {false, true}) {
    const ModelParams p = open ? ModelParams::random_open(2, rng)
                               : ModelParams::random_twisted(3, rng);
    const int n = open ? 1 : 2;
    const auto branches = solve_bethe(p, n);
    REQUIRE(!branches.empty());
    const auto& bethe = branches.front().roots;
    const Hierarchy h = extract_hierarchy(p, bethe);
    CHECK(static_cast<int>(h.ops.size()) == h.degree + 1);
    CHECK(h.saturation < 1e-9);
    const OraclePoly op = oracle_polynomial(p, bethe);
    CHECK(annihilation_residual(h, op.poly) < 1e-8);
    CHECK(leading_match_residual(h) < 1e-10);
  }
}

TEST_CASE("hierarchy interpolation matches the operator at fresh probes") {
  Rng rng(66);
  const ModelParams p = ModelParams::random_twisted(2, rng);
  const auto branches = solve_twisted(p, 1);
  REQUIRE(!branches.empty());
  const auto& bethe = branches.front().roots;
  const Hierarchy h = extract_hierarchy(p, bethe);
  const SymPoly<Cplx> f = random_poly(1, h.cap, rng);

  for (int rep = 0; rep < 4; ++rep) {
    const Cplx x0 = draw_probe(p, h.samples[rep], bethe, rng, 5e-2);
    // sum_k x0^k (O_k f) at sample row rep
    Cplx viaOps(0), pw(1);
    for (const auto& op : h.ops) {
      viaOps += pw * (op.row(rep) * f.coeffs())(0);
      pw *= x0;
    }
    const FuneqValue direct = funeq_apply(p, f, x0, h.samples[rep], bethe);
    const Cplx cleared =
        direct.value * detail::clearing_twisted(p, x0, bethe);
    CHECK(std::abs(viaOps - cleared) < 1e-8 * (1 + std::abs(cleared)));
  }
}

TEST_CASE("joint kernel is one dimensional exactly on shell") {
  Rng rng(67);
  for (const bool open : {false, true}) {
    const ModelParams p = open ? ModelParams::random_open(2, rng)
                               : ModelParams::random_twisted(3, rng);
    const int n = open ? 1 : 2;
    const auto branches = solve_bethe(p, n);
    REQUIRE(!branches.empty());
    const auto& bethe = branches.front().roots;
    const Hierarchy h = extract_hierarchy(p, bethe);
    const KernelResult k = hierarchy_kernel(h);
    CHECK(k.dim == 1);
    const OraclePoly op = oracle_polynomial(p, bethe);
    CHECK(normalized_overlap(k.coeffs, op.poly.coeffs()) > 1.0 - 1e-7);

    std::vector<Cplx> off = bethe;
    for (std::size_t i = 0; i < off.size(); ++i)
      off[i] *= 1.0 + std::polar(1e-2, 1.1 + double(i));
    const Hierarchy hOff = extract_hierarchy(p, off);
    const KernelResult kOff = hierarchy_kernel(hOff);
    CHECK(kOff.dim == 0);
    CHECK(kOff.sigma_ratio > 1e-4);
  }
}

TEST_CASE("stacked kernel finds a planted null direction") {
  Rng rng(68);
  CVector null = CVector::Random(5);
  null.normalize();
  std::vector<CMatrix> blocks;
  for (int k = 0; k < 3; ++k) {
    CMatrix m = CMatrix::Random(7, 5);
    m -= (m * null) * null.adjoint();  // project the direction out
    blocks.push_back(m);
  }
  const KernelResult k = stacked_kernel(blocks, 1e-8);
  CHECK(k.dim == 1);
  CHECK(normalized_overlap(k.coeffs, null) > 1.0 - 1e-10);
}

TEST_CASE("operator commutators are small in the common frame") {
  Rng rng(69);
  const ModelParams p = ModelParams::random_twisted(3, rng);
  const auto branches = solve_twisted(p, 2);
  REQUIRE(!branches.empty());
  const Hierarchy h = extract_hierarchy(p, branches.front().roots);
  // measured, not asserted: the commutation of the hierarchy family is an
  // open conjecture; we report the figure so regressions are visible
  const CommutatorReport rep = commutator_norm(h, 0, 1);
  MESSAGE("hierarchy commutator (0,1): fit ", rep.fit_residual, ", rel ",
          rep.commutator_rel);
  CHECK(std::isfinite(rep.commutator_rel));
}
