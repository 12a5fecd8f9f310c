#include <algorithm>

#include "doctest.h"
#include "svx/oracle.hpp"
#include "svx/rng.hpp"

using namespace svx;

TEST_CASE("spectral variable maps invert each other") {
  const Cplx l(0.31, 0.57);
  CHECK(std::abs(lambda_of_x(x_of_lambda(l)) - l) < 1e-14);
  const Cplx x(1.2, -0.4);
  CHECK(std::abs(x_of_lambda(lambda_of_x(x)) - x) < 1e-14);
}

TEST_CASE("single-site scalar product is c squared") {
  Rng rng(41);
  const ModelParams p = ModelParams::random_twisted(1, rng);
  const Cplx c = std::sinh(p.gamma);
  for (int rep = 0; rep < 4; ++rep) {
    const Cplx xr = rng.on_circle(1.0, 0.4), xf = rng.on_circle(1.0, 0.4);
    CHECK(std::abs(oracle_scalar(p, {xr}, {xf}) - c * c) <
          1e-12 * std::abs(c * c));
  }
}

TEST_CASE("two-site one-magnon scalar product matches the hand formula") {
  Rng rng(42);
  const ModelParams p = ModelParams::random_twisted(2, rng);
  const Cplx c = std::sinh(p.gamma);
  for (int rep = 0; rep < 4; ++rep) {
    const Cplx xr = rng.on_circle(1.1, 0.3), xf = rng.on_circle(0.9, 0.3);
    const Cplx lr = lambda_of_x(xr), lf = lambda_of_x(xf);
    const Cplx expected =
        c * c *
        (std::sinh(lr - p.mu[0] + p.gamma) * std::sinh(lf - p.mu[0]) +
         std::sinh(lr - p.mu[1]) * std::sinh(lf - p.mu[1] + p.gamma));
    CHECK(std::abs(oracle_scalar(p, {xr}, {xf}) - expected) <
          1e-11 * std::abs(expected));
  }
}

TEST_CASE("empty sector gives the vacuum overlap") {
  Rng rng(43);
  const ModelParams p = ModelParams::random_twisted(2, rng);
  CHECK(std::abs(oracle_scalar(p, {}, {}) - Cplx(1)) < 1e-15);
}

TEST_CASE("sector mismatch is rejected") {
  Rng rng(44);
  const ModelParams p = ModelParams::random_twisted(2, rng);
  CHECK_THROWS_AS(oracle_scalar(p, {Cplx(1.1)}, {}), config_error);
  CHECK_THROWS_AS(
      oracle_scalar(p, {Cplx(1.1), Cplx(0.9), Cplx(1.3)},
                    {Cplx(1.2), Cplx(0.8), Cplx(0.7)}),
      config_error);
}

TEST_CASE("bethe vector is order independent") {
  Rng rng(45);
  for (const bool open : {false, true}) {
    const ModelParams p = open ? ModelParams::random_open(3, rng)
                               : ModelParams::random_twisted(3, rng);
    const std::vector<Cplx> xs{Cplx(1.1, 0.2), Cplx(0.8, -0.5), Cplx(0.6, 0.9)};
    std::vector<Cplx> perm{xs[2], xs[0], xs[1]};
    const CVector a = bethe_vector(p, xs).amp;
    const CVector b = bethe_vector(p, perm).amp;
    CHECK((a - b).norm() < 1e-12 * a.norm());
  }
}

TEST_CASE("oracle polynomials respect caps and symmetry") {
  Rng rng(46);
  for (const bool open : {false, true}) {
    const ModelParams p = open ? ModelParams::random_open(3, rng)
                               : ModelParams::random_twisted(3, rng);
    const std::vector<Cplx> roots{Cplx(1.05, 0.31), Cplx(0.77, -0.42)};
    const OraclePoly op = oracle_polynomial(p, roots);
    CHECK(op.tail_rel < 1e-9);
    CHECK(op.poly.cap() == polynomial_cap(p));
    const double scale = op.poly.max_abs_coeff();
    for (Eigen::Index flat = 0; flat < op.poly.size(); ++flat) {
      std::vector<int> e = op.poly.exponents_of(flat);
      std::swap(e[0], e[1]);
      CHECK(std::abs(op.poly.coeffs()(flat) - op.poly.at(e)) < 1e-9 * scale);
    }
  }
}

TEST_CASE("eigencheck separates on-shell from generic configurations") {
  Rng rng(47);
  const ModelParams p = ModelParams::random_twisted(2, rng);
  CHECK(eigencheck(p, {}) < 1e-13);  // vacuum
  const std::vector<Cplx> generic{Cplx(1.07, 0.21)};
  CHECK(eigencheck(p, generic) > 1e-4);
}
