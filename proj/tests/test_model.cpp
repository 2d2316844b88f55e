#include <cmath>
#include <sstream>

#include "cmrf/errors.hpp"
#include "cmrf/exact.hpp"
#include "cmrf/io.hpp"
#include "cmrf/model.hpp"
#include "cmrf/numeric.hpp"
#include "doctest.h"
#include "test_models.hpp"

using namespace cmrf;
using namespace cmrf::testing;

TEST_CASE("energy reads tables directly") {
  PairwiseModel m = PairwiseModel::binary(1);
  m.set_theta(0, {0.0, 0.7});
  CHECK(m.energy(std::vector<int>{1}) == doctest::Approx(-0.7).epsilon(1e-15));
  CHECK(m.energy(std::vector<int>{0}) == 0.0);
}

TEST_CASE("energy of zero potentials is zero") {
  PairwiseModel m = PairwiseModel::binary(3);
  CHECK(m.energy(std::vector<int>{1, 0, 1}) == 0.0);
}

TEST_CASE("binary energy matches the (theta, W) convention") {
  auto m = PairwiseModel::from_binary({0.0, 0.0}, {{{0, 1}, 2.0}});
  CHECK(m.energy(std::vector<int>{0, 0}) == doctest::Approx(-1.0));
  CHECK(m.energy(std::vector<int>{0, 1}) == doctest::Approx(0.0));
  CHECK(m.energy(std::vector<int>{1, 1}) == doctest::Approx(-1.0));
}

TEST_CASE("pairwise access is orientation free") {
  PairwiseModel m({2, 3});
  m.add_edge(1, 0, {1, 2, 3, 4, 5, 6});  // given as 3x2, stored canonically
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 3; ++b) CHECK(m.pairwise(0, 1, a, b) == m.pairwise(1, 0, b, a));
  CHECK(m.pairwise(1, 0, 2, 1) == 6.0);
}

TEST_CASE("energy rejects out-of-range labels") {
  PairwiseModel m = PairwiseModel::binary(2);
  CHECK_THROWS_AS(m.energy(std::vector<int>{0, 2}), InputError);
  CHECK_THROWS_AS(m.energy(std::vector<int>{0}), InputError);
}

TEST_CASE("from_binary partition values") {
  auto single = PairwiseModel::from_binary({0.0}, {});
  CHECK(brute_logz(single) == doctest::Approx(std::log(2.0)).epsilon(1e-14));

  auto pair = PairwiseModel::from_binary({1.0, -1.0}, {{{0, 1}, 0.0}});
  double expect = std::log(1.0 + std::exp(1.0)) + std::log(1.0 + std::exp(-1.0));
  CHECK(brute_logz(pair) == doctest::Approx(expect).epsilon(1e-14));

  auto c3 = symmetric_cycle(3, 4.0);
  CHECK(brute_logz(c3) == doctest::Approx(oracle_logz(c3)).epsilon(1e-13));
}

TEST_CASE("from_binary rejects duplicate and self-loop edges") {
  CHECK_THROWS_AS(PairwiseModel::from_binary({0, 0}, {{{0, 0}, 1.0}}), InputError);
  CHECK_THROWS_AS(PairwiseModel::from_binary({0, 0}, {{{0, 1}, 1.0}, {{1, 0}, 2.0}}), InputError);
}

TEST_CASE("binary view round-trips the energy up to its constant") {
  auto m = random_binary(6, 0.6, -3.0, 3.0, -1.5, 1.5, 99);
  // Shift a table so the view constant is exercised.
  PairwiseModel shifted = m;
  shifted.set_theta(0, {m.theta(0, 0) + 2.5, m.theta(0, 1) + 2.5});
  BinaryView v = shifted.binary_view();
  auto rebuilt = [&] {
    std::vector<EdgeWeight> ew;
    for (int e = 0; e < shifted.num_edges(); ++e)
      ew.push_back({{shifted.edges()[e].i, shifted.edges()[e].j}, v.w[e]});
    return PairwiseModel::from_binary(v.theta, ew);
  }();
  std::vector<int> config{1, 0, 1, 1, 0, 1};
  CHECK(shifted.energy(config) ==
        doctest::Approx(rebuilt.energy(config) - v.log_const).epsilon(1e-12));
  CHECK(brute_logz(shifted) ==
        doctest::Approx(brute_logz(rebuilt) + v.log_const).epsilon(1e-12));
}

TEST_CASE("clamping a single-variable model leaves the constant") {
  PairwiseModel m = PairwiseModel::binary(1);
  ClampedModel c = clamp(m, 0, 0);
  CHECK(c.model.num_vars() == 0);
  CHECK(c.map.log_const == 0.0);
  // Sum over both clamped labels reproduces Z = 2.
  double z = std::exp(clamp(m, 0, 0).map.log_const) + std::exp(clamp(m, 0, 1).map.log_const);
  CHECK(z == doctest::Approx(2.0));
}

TEST_CASE("clamp absorbs edges into neighbor singletons") {
  auto m = PairwiseModel::from_binary({0.0, 0.0}, {{{0, 1}, 2.0}});
  ClampedModel c = clamp(m, 0, 0);
  CHECK(c.model.num_vars() == 1);
  CHECK(c.model.theta(0, 0) == doctest::Approx(1.0));
  CHECK(c.model.theta(0, 1) == doctest::Approx(0.0));
  CHECK(c.map.index_map == std::vector<int>{1});

  // Z(x_0 = 0) from the child equals the parent's restricted sum.
  double child = brute_logz(c.model) + c.map.log_const;
  double direct = log_add_exp(-m.energy(std::vector<int>{0, 0}), -m.energy(std::vector<int>{0, 1}));
  CHECK(child == doctest::Approx(direct).epsilon(1e-14));
}

TEST_CASE("clamp exactness over every variable and label") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto m = random_multilabel(7, 0.5, 2.0, seed);
    double parent = brute_logz(m);
    for (int i = 0; i < m.num_vars(); ++i) {
      std::vector<double> parts;
      for (int x = 0; x < m.label_count(i); ++x) {
        ClampedModel c = clamp(m, i, x);
        parts.push_back(brute_logz(c.model) + c.map.log_const);
      }
      CHECK(log_sum_exp(parts) == doctest::Approx(parent).epsilon(1e-10));
    }
  }
}

TEST_CASE("sequential clamping of all variables enumerates exactly") {
  auto m = random_binary(5, 0.7, -2.0, 2.0, -1.0, 1.0, 17);
  double parent = brute_logz(m);
  // Depth-first over the full branch tree; leaves carry full constants.
  std::vector<double> leaves;
  std::vector<ClampedModel> stack{clamp(m, 0, 0), clamp(m, 0, 1)};
  while (!stack.empty()) {
    ClampedModel c = std::move(stack.back());
    stack.pop_back();
    if (c.model.num_vars() == 0) {
      leaves.push_back(c.map.log_const);
      continue;
    }
    for (int x = 0; x < c.model.label_count(0); ++x) stack.push_back(c.clamp(0, x));
  }
  CHECK(leaves.size() == 32);
  CHECK(log_sum_exp(leaves) == doctest::Approx(parent).epsilon(1e-12));
}

TEST_CASE("flip is an involution that preserves the partition function") {
  auto m = PairwiseModel::from_binary({0.3, -0.4}, {{{0, 1}, -3.0}});
  PairwiseModel same = flip(m, {});
  CHECK(same.energy(std::vector<int>{1, 0}) == m.energy(std::vector<int>{1, 0}));

  PairwiseModel f = flip(m, {1});
  CHECK(f.binary_view().w[0] == doctest::Approx(3.0));
  CHECK(brute_logz(f) == doctest::Approx(brute_logz(m)).epsilon(1e-14));

  PairwiseModel ff = flip(f, {1});
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      std::vector<int> cfg{a, b};
      CHECK(ff.energy(cfg) == m.energy(cfg));
    }
}

TEST_CASE("flip preserves marginals under relabeling") {
  auto m = random_binary(6, 0.5, -2.0, 2.0, -1.0, 1.0, 5);
  PairwiseModel f = flip(m, {0, 2, 3});
  CHECK(brute_logz(f) == doctest::Approx(brute_logz(m)).epsilon(1e-12));
  auto orig = brute_summary(m).marginals;
  auto flipped = brute_summary(f).marginals;
  for (int i : {0, 2, 3}) CHECK(flipped[i][0] == doctest::Approx(orig[i][1]).epsilon(1e-12));
  for (int i : {1, 4, 5}) CHECK(flipped[i][0] == doctest::Approx(orig[i][0]).epsilon(1e-12));
}

TEST_CASE("flip rejects non-binary models") {
  PairwiseModel m({2, 3});
  CHECK_THROWS_AS(flip(m, {0}), UnsupportedError);
}

TEST_CASE("balance certificate: even cycles, odd cycles, trees") {
  auto c4 = symmetric_cycle(4, -2.0);
  auto cert4 = balance_certificate(c4);
  CHECK(cert4.balanced);
  // Flipping the certificate set makes all edges attractive.
  auto fixed = flip(c4, cert4.flip_set);
  for (double w : fixed.binary_view().w) CHECK(w >= 0.0);

  auto c3 = symmetric_cycle(3, -2.0);
  auto cert3 = balance_certificate(c3);
  CHECK_FALSE(cert3.balanced);
  CHECK(cert3.witness_cycle.size() == 3);

  auto tree = PairwiseModel::from_binary({0, 0, 0, 0},
                                         {{{0, 1}, -1.0}, {{1, 2}, 2.0}, {{1, 3}, -5.0}});
  CHECK(balance_certificate(tree).balanced);
}

TEST_CASE("balance certificate soundness on random sign patterns") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto m = random_binary(8, 0.4, -2.0, 2.0, 0.0, 0.0, 1000 + seed);
    auto cert = balance_certificate(m);
    if (cert.balanced) {
      for (double w : flip(m, cert.flip_set).binary_view().w) CHECK(w >= 0.0);
    } else {
      // Witness cycle exists in the graph and has an odd repulsive count.
      auto view = m.binary_view();
      int repulsive = 0;
      int k = static_cast<int>(cert.witness_cycle.size());
      CHECK(k >= 3);
      for (int t = 0; t < k; ++t) {
        int u = cert.witness_cycle[t], v = cert.witness_cycle[(t + 1) % k];
        int e = m.edge_index(u, v);
        REQUIRE(e >= 0);
        if (view.w[e] < 0) ++repulsive;
      }
      CHECK(repulsive % 2 == 1);
    }
  }
}

TEST_CASE("balance certificate honors the weight floor") {
  // Frustration only through a near-zero edge: floored analysis calls it balanced.
  auto m = PairwiseModel::from_binary(
      {0, 0, 0}, {{{0, 1}, 4.0}, {{1, 2}, 4.0}, {{0, 2}, -1e-9}});
  CHECK_FALSE(balance_certificate(m, 0.0).balanced);
  CHECK(balance_certificate(m, 1e-6).balanced);
}

TEST_CASE("uai round trip preserves the model") {
  auto m = random_multilabel(5, 0.6, 1.5, 42);
  std::stringstream ss;
  write_uai(ss, m);
  PairwiseModel back = read_uai(ss);
  REQUIRE(back.num_vars() == m.num_vars());
  REQUIRE(back.num_edges() == m.num_edges());
  CHECK(brute_logz(back) == doctest::Approx(brute_logz(m)).epsilon(1e-12));
}

TEST_CASE("uai rejects zero table entries") {
  std::stringstream ss("MARKOV\n1\n2\n1\n1 0\n\n2\n1.0 0.0\n");
  CHECK_THROWS_AS(read_uai(ss), InputError);
}

TEST_CASE("native round trip is exact") {
  auto m = random_multilabel(6, 0.5, 2.0, 7);
  std::stringstream ss;
  write_native(ss, m);
  PairwiseModel back = read_native(ss);
  REQUIRE(back.num_vars() == m.num_vars());
  REQUIRE(back.num_edges() == m.num_edges());
  for (int i = 0; i < m.num_vars(); ++i)
    for (int x = 0; x < m.label_count(i); ++x) CHECK(back.theta(i, x) == m.theta(i, x));
  for (int e = 0; e < m.num_edges(); ++e)
    for (std::size_t k = 0; k < m.edge_table(e).size(); ++k)
      CHECK(back.edge_table(e)[k] == m.edge_table(e)[k]);
}

TEST_CASE("degenerate empty model is legal") {
  PairwiseModel empty;
  CHECK(empty.num_vars() == 0);
  CHECK(brute_logz(empty) == 0.0);
}
