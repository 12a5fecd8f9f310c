#include "doctest.h"
#include "svx/report.hpp"

using namespace svx;

TEST_CASE("headers compile and basic objects construct") {
  SymPoly<Cplx> p(2, 3);
  p.at({1, 2}) = Cplx(2.0, -1.0);
  CHECK(std::abs(p.eval({Cplx(2, 0), Cplx(3, 0)}) - Cplx(36, -18)) < 1e-12);

  Rng rng(11);
  const ModelParams tw = ModelParams::random_twisted(2, rng);
  CHECK(tw.L == 2);
  const ModelParams op = ModelParams::random_open(2, rng);
  CHECK(op.boundary == Boundary::Open);

  JobConfig cfg = parse_config_text("boundary=twisted\nL=2\nn=1\nseed=3\n");
  CHECK(cfg.L == 2);
  CHECK(cfg.random_params);
}
