#include <cmath>

#include "cmrf/bethe.hpp"
#include "cmrf/errors.hpp"
#include "cmrf/exact.hpp"
#include "cmrf/meanfield.hpp"
#include "cmrf/model.hpp"
#include "cmrf/rng.hpp"
#include "cmrf/trw.hpp"
#include "doctest.h"
#include "test_models.hpp"

using namespace cmrf;
using namespace cmrf::testing;

namespace {

double rho_sum(const EdgeAppearance& rho) {
  double s = 0.0;
  for (double r : rho.rho) s += r;
  return s;
}

// Random point of the local polytope: mixture of product distributions.
PseudoMarginals random_polytope_point(const PairwiseModel& m, std::uint64_t seed) {
  SplitMix64 rng(seed);
  PseudoMarginals mu;
  mu.node.resize(m.num_vars());
  mu.edge.resize(m.num_edges());
  for (int i = 0; i < m.num_vars(); ++i) mu.node[i].assign(m.label_count(i), 0.0);
  for (int e = 0; e < m.num_edges(); ++e) {
    const Edge& ed = m.edges()[e];
    mu.edge[e].assign(m.label_count(ed.i) * m.label_count(ed.j), 0.0);
  }
  const int mixture = 4;
  for (int k = 0; k < mixture; ++k) {
    std::vector<std::vector<double>> q(m.num_vars());
    for (int i = 0; i < m.num_vars(); ++i) q[i] = dirichlet_uniform(rng, m.label_count(i));
    for (int i = 0; i < m.num_vars(); ++i)
      for (int x = 0; x < m.label_count(i); ++x) mu.node[i][x] += q[i][x] / mixture;
    for (int e = 0; e < m.num_edges(); ++e) {
      const Edge& ed = m.edges()[e];
      int Lj = m.label_count(ed.j);
      for (int a = 0; a < m.label_count(ed.i); ++a)
        for (int b = 0; b < Lj; ++b) mu.edge[e][a * Lj + b] += q[ed.i][a] * q[ed.j][b] / mixture;
    }
  }
  return mu;
}

}  // namespace

TEST_CASE("exact tree weights on cycles, trees, and K4") {
  for (int n : {3, 4, 6}) {
    auto cn = symmetric_cycle(n, 1.0);
    auto rho = exact_tree_weights(cn);
    for (double r : rho.rho) CHECK(r == doctest::Approx((n - 1.0) / n).epsilon(1e-9));
    CHECK(rho_sum(rho) == doctest::Approx(n - 1.0).epsilon(1e-9));
  }

  auto tree = PairwiseModel::from_binary({0, 0, 0, 0},
                                         {{{0, 1}, 1.0}, {{1, 2}, 1.0}, {{1, 3}, 1.0}});
  for (double r : exact_tree_weights(tree).rho) CHECK(r == doctest::Approx(1.0).epsilon(1e-9));

  auto k4 = symmetric_complete(4, 1.0);
  for (double r : exact_tree_weights(k4).rho) CHECK(r == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("sampled tree weights agree within binomial 3-sigma bands") {
  const int ntrees = 1000;
  auto c5 = symmetric_cycle(5, 1.0);
  auto rho = sample_tree_weights(c5, ntrees, 99);
  CHECK(rho_sum(rho) == doctest::Approx(4.0).epsilon(1e-12));
  double p = 4.0 / 5.0, sigma = std::sqrt(p * (1 - p) / ntrees);
  for (double r : rho.rho) CHECK(std::abs(r - p) <= 3 * sigma);

  auto k4 = symmetric_complete(4, 1.0);
  auto rho4 = sample_tree_weights(k4, ntrees, 7);
  double s4 = std::sqrt(0.25 / ntrees);
  for (double r : rho4.rho) CHECK(std::abs(r - 0.5) <= 3 * s4);

  auto tree = PairwiseModel::from_binary({0, 0, 0}, {{{0, 1}, 1.0}, {{1, 2}, 1.0}});
  for (double r : sample_tree_weights(tree, 50, 3).rho) CHECK(r == 1.0);
}

TEST_CASE("disconnected graphs decompose into spanning forests") {
  // Two triangles, no bridge.
  std::vector<EdgeWeight> edges;
  for (auto [a, b] : std::vector<std::pair<int, int>>{{0, 1}, {1, 2}, {0, 2},
                                                      {3, 4}, {4, 5}, {3, 5}})
    edges.push_back({{a, b}, 1.0});
  auto m = PairwiseModel::from_binary(std::vector<double>(6, 0.0), edges);
  CHECK(rho_sum(exact_tree_weights(m)) == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(rho_sum(sample_tree_weights(m, 400, 11)) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("trw free energy coincides with bethe at unit rho") {
  auto m = random_multilabel(6, 0.6, 1.5, 50);
  EdgeAppearance ones;
  ones.rho.assign(m.num_edges(), 1.0);
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto mu = random_polytope_point(m, 123 + s);
    CHECK(trw_free_energy(m, mu, ones) == doctest::Approx(bethe_free_energy(m, mu)).epsilon(1e-12));
  }
}

TEST_CASE("trw free energy at independent and uniform points") {
  auto m = random_binary(5, 0.8, -2.0, 2.0, -1.0, 1.0, 4);
  auto rho = exact_tree_weights(m);
  FactorizedMarginals q = FactorizedMarginals::uniform(m);
  PseudoMarginals mu;
  mu.node = q.mu;
  mu.edge.resize(m.num_edges());
  for (int e = 0; e < m.num_edges(); ++e) {
    const Edge& ed = m.edges()[e];
    mu.edge[e].resize(4);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) mu.edge[e][a * 2 + b] = q.mu[ed.i][a] * q.mu[ed.j][b];
  }
  CHECK(trw_free_energy(m, mu, rho) == doctest::Approx(mf_free_energy(m, q)).epsilon(1e-12));

  auto c3 = symmetric_cycle(3, 4.0);
  EdgeAppearance r3;
  r3.rho.assign(3, 2.0 / 3.0);
  PseudoMarginals u3;
  u3.node.assign(3, {0.5, 0.5});
  u3.edge.assign(3, {0.25, 0.25, 0.25, 0.25});
  CHECK(trw_free_energy(c3, u3, r3) == doctest::Approx(3.0 + 3.0 * std::log(2.0)).epsilon(1e-13));
}

TEST_CASE("trw is exact on trees with unit rho") {
  auto tree = PairwiseModel::from_binary(
      {0.2, -0.4, 0.6, 0.1}, {{{0, 1}, 1.5}, {{1, 2}, -2.5}, {{1, 3}, 0.7}});
  auto rho = exact_tree_weights(tree);
  auto res = trw_optimize(tree, rho);
  CHECK(res.converged);
  CHECK(res.log_z == doctest::Approx(brute_logz(tree)).epsilon(1e-8));
  CHECK(res.bound == Bound::Upper);
}

TEST_CASE("strong attractive K5 approaches the true value") {
  auto k5 = symmetric_complete(5, 12.0);
  auto res = trw_optimize(k5, exact_tree_weights(k5));
  CHECK(std::abs(res.log_z - brute_logz(k5)) <= 0.05);
}

TEST_CASE("upper bound above brute force and bethe on mixed models") {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    auto m = random_binary(8, 0.5, -4.0, 4.0, -1.5, 1.5, 8800 + seed);
    auto rho = exact_tree_weights(m);
    auto up = trw_optimize(m, rho);
    CHECK(up.log_z >= brute_logz(m) - 1e-6);
    BpConfig bp;
    bp.seed = seed;
    auto mid = bethe_optimize(m, bp);
    if (mid.converged) CHECK(up.log_z >= mid.log_z - 1e-6);
  }
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    auto m = random_multilabel(7, 0.5, 1.8, 9900 + seed);
    auto up = trw_optimize(m, exact_tree_weights(m));
    CHECK(up.log_z >= brute_logz(m) - 1e-6);
  }
}

TEST_CASE("sampled appearances still produce valid upper bounds") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto m = random_binary(8, 0.5, -4.0, 4.0, -1.5, 1.5, 55000 + seed);
    auto rho = sample_tree_weights(m, 1000, seed);
    auto res = trw_optimize(m, rho);
    CHECK(res.log_z >= brute_logz(m) - 1e-6);
  }
}

TEST_CASE("converged value is seed-independent for fixed rho") {
  auto m = random_binary(7, 0.6, -3.0, 3.0, -1.0, 1.0, 321);
  auto rho = exact_tree_weights(m);
  BpConfig a = BpConfig::trw_defaults();
  a.init = BpConfig::Init::Random;
  a.seed = 1;
  BpConfig b = a;
  b.seed = 2;
  auto ra = trw_optimize(m, rho, a);
  auto rb = trw_optimize(m, rho, b);
  REQUIRE(ra.converged);
  REQUIRE(rb.converged);
  CHECK(std::abs(ra.log_z - rb.log_z) <= 1e-7);
}

TEST_CASE("rho restriction to clamped children keeps parent entries") {
  auto m = random_binary(6, 0.8, -2.0, 2.0, -1.0, 1.0, 17);
  auto rho = exact_tree_weights(m);
  ClampedModel c = clamp(m, 2, 1);
  EdgeAppearance child = rho.restricted_to(m, c.map, c.model);
  REQUIRE(static_cast<int>(child.rho.size()) == c.model.num_edges());
  for (int e = 0; e < c.model.num_edges(); ++e) {
    const Edge& ed = c.model.edges()[e];
    int pe = m.edge_index(c.map.index_map[ed.i], c.map.index_map[ed.j]);
    CHECK(child.rho[e] == rho.rho[pe]);
  }
}

TEST_CASE("invalid rho is rejected") {
  auto m = PairwiseModel::from_binary({0, 0}, {{{0, 1}, 1.0}});
  EdgeAppearance bad;
  bad.rho = {0.0};
  CHECK_THROWS_AS(trw_optimize(m, bad), InputError);
  bad.rho = {0.5, 0.5};
  CHECK_THROWS_AS(trw_optimize(m, bad), InputError);
}
