#pragma once

// Small model builders and independent oracles shared across test binaries.

#include <cmath>
#include <utility>
#include <vector>

#include "cmrf/model.hpp"
#include "cmrf/rng.hpp"

namespace cmrf::testing {

using EdgeWeight = std::pair<std::pair<int, int>, double>;

inline PairwiseModel symmetric_cycle(int n, double w) {
  std::vector<EdgeWeight> edges;
  for (int i = 0; i < n; ++i) edges.push_back({{i, (i + 1) % n}, w});
  return PairwiseModel::from_binary(std::vector<double>(n, 0.0), edges);
}

inline PairwiseModel symmetric_complete(int n, double w) {
  std::vector<EdgeWeight> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.push_back({{i, j}, w});
  return PairwiseModel::from_binary(std::vector<double>(n, 0.0), edges);
}

// Lamp topology: K4 core {0,1,2,3}, pendant path 3-4-5, star 5-{6,7,8,9}.
inline PairwiseModel lamp_model(double w = 1.0) {
  std::vector<EdgeWeight> edges;
  for (auto [a, b] : std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3},
                                                      {2, 3}, {3, 4}, {4, 5}, {5, 6}, {5, 7},
                                                      {5, 8}, {5, 9}})
    edges.push_back({{a, b}, w});
  return PairwiseModel::from_binary(std::vector<double>(10, 0.0), edges);
}

// Strong K5 {0..4} plus a frustrated triangle {5,6,7} hung off vertex 0.
inline PairwiseModel barbell_model(double w = 6.0) {
  std::vector<EdgeWeight> edges;
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j) edges.push_back({{i, j}, w});
  edges.push_back({{0, 5}, w});
  edges.push_back({{5, 6}, w});
  edges.push_back({{5, 7}, w});
  edges.push_back({{6, 7}, -w});
  return PairwiseModel::from_binary(std::vector<double>(8, 0.0), edges);
}

// Random binary model on a G(n, p) topology, keyed off `seed`.
inline PairwiseModel random_binary(int n, double p, double w_lo, double w_hi, double th_lo,
                                   double th_hi, std::uint64_t seed) {
  std::vector<double> theta(n);
  for (int i = 0; i < n; ++i)
    theta[i] = SplitMix64(stream_key(seed, 1, i)).uniform(th_lo, th_hi);
  std::vector<EdgeWeight> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      SplitMix64 g(stream_key(seed, 2, i, j));
      if (g.next_double() < p) edges.push_back({{i, j}, g.uniform(w_lo, w_hi)});
    }
  return PairwiseModel::from_binary(theta, edges);
}

// Random mixed-label model (labels drawn from {2,3}), uniform table entries.
inline PairwiseModel random_multilabel(int n, double p, double scale, std::uint64_t seed) {
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) labels[i] = 2 + static_cast<int>(SplitMix64(stream_key(seed, 3, i)).next_below(2));
  PairwiseModel m(labels);
  for (int i = 0; i < n; ++i) {
    SplitMix64 g(stream_key(seed, 4, i));
    std::vector<double> t(labels[i]);
    for (double& v : t) v = g.uniform(-2.0, 2.0);
    m.set_theta(i, t);
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      SplitMix64 g(stream_key(seed, 5, i, j));
      if (g.next_double() >= p) continue;
      std::vector<double> t(labels[i] * labels[j]);
      for (double& v : t) v = g.uniform(-scale, scale);
      m.add_edge(i, j, t);
    }
  return m;
}

// Independent Mpower oracle: truncated closed-walk series
// sum_k [M^k]_ii minus the backtracking geometric series sum_m ([M^2]_ii)^m.
inline std::vector<double> mpower_series_oracle(const PairwiseModel& m, int kmax) {
  int n = m.num_vars();
  BinaryView v = m.binary_view();
  std::vector<std::vector<double>> M(n, std::vector<double>(n, 0.0));
  for (int e = 0; e < m.num_edges(); ++e) {
    double val = std::tanh(std::abs(v.w[e] / 4.0)) / std::max(n - 1, 1);
    M[m.edges()[e].i][m.edges()[e].j] = val;
    M[m.edges()[e].j][m.edges()[e].i] = val;
  }
  auto multiply = [n](const std::vector<std::vector<double>>& a,
                      const std::vector<std::vector<double>>& b) {
    std::vector<std::vector<double>> c(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
    return c;
  };
  std::vector<double> total(n, 0.0), s2(n, 0.0);
  auto power = M;
  for (int k = 1; k <= kmax; ++k) {
    for (int i = 0; i < n; ++i) total[i] += power[i][i];
    if (k == 2)
      for (int i = 0; i < n; ++i) s2[i] = power[i][i];
    power = multiply(power, M);
  }
  for (int i = 0; i < n; ++i) {
    double geo = 0.0, term = s2[i];
    for (int k = 1; k <= kmax; ++k) {
      geo += term;
      term *= s2[i];
    }
    total[i] -= geo;
  }
  return total;
}

// Independent enumeration oracle: direct probability-domain sum in extended
// precision (deliberately not sharing the library's shifted accumulation).
inline double oracle_logz(const PairwiseModel& m) {
  int n = m.num_vars();
  std::vector<int> config(n, 0);
  long double z = 0.0L;
  while (true) {
    z += std::exp(static_cast<long double>(-m.energy(config)));
    int k = 0;
    while (k < n && ++config[k] == m.label_count(k)) config[k++] = 0;
    if (k == n) break;
  }
  return static_cast<double>(std::log(z));
}

}  // namespace cmrf::testing
