#include <cmath>

#include "cmrf/errors.hpp"
#include "cmrf/exact.hpp"
#include "cmrf/meanfield.hpp"
#include "cmrf/model.hpp"
#include "doctest.h"
#include "test_models.hpp"

using namespace cmrf;
using namespace cmrf::testing;

TEST_CASE("free energy of a single variable") {
  PairwiseModel m = PairwiseModel::binary(1);
  FactorizedMarginals q;
  q.mu = {{0.5, 0.5}};
  CHECK(mf_free_energy(m, q) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  q.mu = {{1.0, 0.0}};
  CHECK(mf_free_energy(m, q) == doctest::Approx(0.0));
}

TEST_CASE("free energy term-by-term on a coupled pair") {
  auto m = PairwiseModel::from_binary({0, 0}, {{{0, 1}, 2.0}});
  FactorizedMarginals q = FactorizedMarginals::uniform(m);
  // Field: sum_ab theta(a,b)/4 = (W/2)*2/4 = W/4; entropy: 2 log 2.
  double byhand = 2.0 / 4.0 + 2.0 * std::log(2.0);
  CHECK(mf_free_energy(m, q) == doctest::Approx(byhand).epsilon(1e-14));
}

TEST_CASE("free energy rejects shape mismatches") {
  PairwiseModel m = PairwiseModel::binary(2);
  FactorizedMarginals q;
  q.mu = {{0.5, 0.5}};
  CHECK_THROWS_AS(mf_free_energy(m, q), InputError);
}

TEST_CASE("site update is the exact marginal for isolated variables") {
  auto m = PairwiseModel::from_binary({1.0, 0.0}, {});
  FactorizedMarginals q = FactorizedMarginals::uniform(m);
  auto out = mf_update(m, q, 0);
  CHECK(out.mu[0][1] == doctest::Approx(std::exp(1.0) / (1.0 + std::exp(1.0))).epsilon(1e-14));
  CHECK(out.mu[1][0] == 0.5);  // untouched
}

TEST_CASE("site update with a pinned neighbor") {
  auto m = PairwiseModel::from_binary({0, 0}, {{{0, 1}, 6.0}});
  FactorizedMarginals q;
  q.mu = {{0.5, 0.5}, {1.0, 0.0}};
  auto out = mf_update(m, q, 0);
  double expect = std::exp(3.0) / (std::exp(3.0) + 1.0);
  CHECK(out.mu[0][0] == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("update is a fixed point at convergence") {
  auto m = random_binary(6, 0.5, -2.0, 2.0, -1.0, 1.0, 11);
  MfConfig cfg;
  cfg.seed = 3;
  auto res = mf_optimize(m, cfg);
  REQUIRE(res.converged);
  const auto& q = std::get<FactorizedMarginals>(res.marginals);
  for (int i = 0; i < m.num_vars(); ++i) {
    auto next = mf_update(m, q, i);
    for (int x = 0; x < 2; ++x)
      CHECK(std::abs(next.mu[i][x] - q.mu[i][x]) <= 10 * cfg.tol);
  }
}

TEST_CASE("coordinate ascent is monotone") {
  auto m = random_multilabel(7, 0.5, 1.5, 23);
  FactorizedMarginals q = FactorizedMarginals::uniform(m);
  double f = mf_free_energy(m, q);
  for (int sweep = 0; sweep < 20; ++sweep)
    for (int i = 0; i < m.num_vars(); ++i) {
      q = mf_update(m, q, i);
      double f2 = mf_free_energy(m, q);
      CHECK(f2 >= f - 1e-12);
      f = f2;
    }
}

TEST_CASE("lower bound against the exact oracle") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    auto m = random_multilabel(6 + seed % 5, 0.5, 1.8, 400 + seed);
    auto res = mf_optimize(m, {});
    CHECK(res.log_z <= brute_logz(m) + 1e-9);
    CHECK(res.bound == Bound::Lower);
  }
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    auto m = random_binary(9, 0.5, 0.0, 5.0, -2.0, 2.0, 8800 + seed);  // attractive
    auto res = mf_optimize(m, {});
    CHECK(res.log_z <= brute_logz(m) + 1e-9);
  }
}

TEST_CASE("exact on fully factorized truth") {
  auto m = PairwiseModel::from_binary({0.7, -0.3, 1.1}, {});
  auto res = mf_optimize(m, {});
  CHECK(res.log_z == doctest::Approx(brute_logz(m)).epsilon(1e-9));
}

TEST_CASE("strong symmetric K5 loses exactly the two-state entropy") {
  auto k5 = symmetric_complete(5, 12.0);
  MfConfig cfg;
  cfg.seed = 7;
  auto res = mf_optimize(k5, cfg);
  double gap = brute_logz(k5) - res.log_z;
  CHECK(std::abs(gap - std::log(2.0)) < 0.02);
}

TEST_CASE("trees are bounded below with equality only when factorized") {
  auto path = PairwiseModel::from_binary({0.2, -0.1, 0.4},
                                         {{{0, 1}, 1.5}, {{1, 2}, -0.5}});
  auto res = mf_optimize(path, {});
  double exact = brute_logz(path);
  CHECK(res.log_z <= exact + 1e-9);
  CHECK(res.log_z < exact - 1e-3);  // coupling means strict slack
}

TEST_CASE("same seed and config reproduce the trajectory bitwise") {
  auto m = random_binary(8, 0.5, -4.0, 4.0, -2.0, 2.0, 314);
  MfConfig cfg;
  cfg.seed = 2718;
  cfg.init = MfConfig::Init::Random;
  auto a = mf_optimize(m, cfg);
  auto b = mf_optimize(m, cfg);
  CHECK(a.log_z == b.log_z);
  CHECK(a.iters == b.iters);
  const auto& qa = std::get<FactorizedMarginals>(a.marginals);
  const auto& qb = std::get<FactorizedMarginals>(b.marginals);
  for (int i = 0; i < m.num_vars(); ++i)
    for (int x = 0; x < 2; ++x) CHECK(qa.mu[i][x] == qb.mu[i][x]);
}

TEST_CASE("warm start restricts cleanly and empty models are legal") {
  PairwiseModel empty;
  auto res = mf_optimize(empty, {});
  CHECK(res.log_z == 0.0);
  CHECK(res.converged);

  auto m = random_binary(5, 0.6, -2.0, 2.0, -1.0, 1.0, 21);
  auto parent = mf_optimize(m, {});
  MfConfig warm;
  warm.init = MfConfig::Init::Warm;
  warm.warm = std::get<FactorizedMarginals>(parent.marginals);
  auto res2 = mf_optimize(m, warm);
  CHECK(res2.log_z >= parent.log_z - 1e-12);
}
