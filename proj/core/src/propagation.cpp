#include "propagation.hpp"

#include <algorithm>
#include <cmath>

#include "cmrf/errors.hpp"
#include "cmrf/numeric.hpp"
#include "cmrf/rng.hpp"

namespace cmrf::detail {

namespace {

constexpr std::uint64_t kBpTag = 0x6270;  // "bp"
constexpr double kLogFloor = -700.0;      // keeps exp() nonzero

void normalize_log(std::vector<double>& lv) {
  double lse = log_sum_exp(lv);
  for (double& v : lv) v = std::max(v - lse, kLogFloor);
}

}  // namespace

PropagationResult propagate(const PairwiseModel& m, const std::vector<double>& rho,
                            const BpConfig& cfg, BpConfig::Init init, int restart) {
  if (cfg.damping < 0.0 || cfg.damping >= 1.0 || cfg.tol <= 0.0 || cfg.max_iters < 1)
    throw InputError("bp: invalid config");

  const int n = m.num_vars();
  const int ne = m.num_edges();
  const bool unit_rho = rho.empty();

  // Strong potentials switch damping to the log domain.
  double strongest = 0.0;
  for (int e = 0; e < ne; ++e) {
    double scale = unit_rho ? 1.0 : rho[e];
    for (double v : m.edge_table(e)) strongest = std::max(strongest, std::abs(v) / scale);
  }
  const bool log_domain = strongest > 10.0;

  // Directed message id: 2e (i->j) and 2e+1 (j->i), canonical i<j.
  std::vector<std::vector<double>> msg(2 * ne);
  SplitMix64 rng(stream_key(cfg.seed, kBpTag, static_cast<std::uint64_t>(restart)));
  for (int e = 0; e < ne; ++e) {
    const Edge& ed = m.edges()[e];
    for (int dir = 0; dir < 2; ++dir) {
      int target = dir == 0 ? ed.j : ed.i;
      int L = m.label_count(target);
      auto& lv = msg[2 * e + dir];
      lv.assign(L, 0.0);
      if (init == BpConfig::Init::Random) {
        for (double& v : lv) v = rng.uniform(-1.0, 1.0);
      } else if (init == BpConfig::Init::Warm && cfg.warm_messages &&
                 2 * e + dir < static_cast<int>(cfg.warm_messages->size()) &&
                 static_cast<int>((*cfg.warm_messages)[2 * e + dir].size()) == L) {
        for (int x = 0; x < L; ++x)
          lv[x] = std::log(std::max((*cfg.warm_messages)[2 * e + dir][x], 1e-300));
      } else if (init == BpConfig::Init::Warm && cfg.warm_beliefs &&
                 target < static_cast<int>(cfg.warm_beliefs->mu.size()) &&
                 static_cast<int>(cfg.warm_beliefs->mu[target].size()) == L) {
        for (int x = 0; x < L; ++x)
          lv[x] = std::log(std::max(cfg.warm_beliefs->mu[target][x], 1e-300));
      }
      normalize_log(lv);
    }
  }

  // Sweep order over (source, neighbor slot) pairs.
  struct Directed {
    int source, target, edge, id;
  };
  std::vector<Directed> order;
  order.reserve(2 * ne);
  for (int u = 0; u < n; ++u)
    for (const auto& [v, e] : m.neighbors(u)) {
      int dir = m.edges()[e].i == u ? 0 : 1;
      order.push_back({u, v, e, 2 * e + dir});
    }

  auto rho_of = [&](int e) { return unit_rho ? 1.0 : rho[e]; };

  // sum_{k in N(u)} rho_ku * lm_{k->u}; maintained incrementally per sweep.
  auto aggregate = [&](int u, std::vector<double>& out) {
    out.assign(m.label_count(u), 0.0);
    for (const auto& [k, e] : m.neighbors(u)) {
      int dir_to_u = m.edges()[e].i == k ? 0 : 1;
      const auto& lm = msg[2 * e + dir_to_u];
      double r = rho_of(e);
      for (int x = 0; x < m.label_count(u); ++x) out[x] += r * lm[x];
    }
  };

  std::vector<double> agg, fresh, incoming;
  bool converged = ne == 0;
  int sweeps = 0;
  while (sweeps < cfg.max_iters && !converged) {
    if (cfg.schedule == BpConfig::Schedule::RandomSequential) {
      for (std::size_t k = order.size(); k > 1; --k)
        std::swap(order[k - 1], order[rng.next_below(k)]);
    }
    double change = 0.0;
    for (const Directed& d : order) {
      int Lu = m.label_count(d.source), Lv = m.label_count(d.target);
      double r = rho_of(d.edge);
      aggregate(d.source, agg);
      const auto& back = msg[2 * d.edge + (m.edges()[d.edge].i == d.target ? 0 : 1)];
      incoming.assign(Lu, 0.0);
      for (int x = 0; x < Lu; ++x)
        incoming[x] = m.theta(d.source, x) + agg[x] - back[x];

      auto table = m.edge_table(d.edge);
      bool source_is_row = m.edges()[d.edge].i == d.source;
      fresh.assign(Lv, 0.0);
      std::vector<double> col(Lu);
      for (int y = 0; y < Lv; ++y) {
        for (int x = 0; x < Lu; ++x) {
          double pot = source_is_row ? table[x * Lv + y] : table[y * Lu + x];
          col[x] = incoming[x] + pot / r;
        }
        fresh[y] = log_sum_exp(col);
      }
      normalize_log(fresh);

      auto& cur = msg[d.id];
      if (cfg.damping == 0.0) {
        for (int y = 0; y < Lv; ++y) {
          change = std::max(change, std::abs(std::exp(fresh[y]) - std::exp(cur[y])));
          cur[y] = fresh[y];
        }
      } else if (log_domain) {
        for (int y = 0; y < Lv; ++y)
          fresh[y] = (1.0 - cfg.damping) * fresh[y] + cfg.damping * cur[y];
        normalize_log(fresh);
        for (int y = 0; y < Lv; ++y) {
          change = std::max(change, std::abs(std::exp(fresh[y]) - std::exp(cur[y])));
          cur[y] = fresh[y];
        }
      } else {
        for (int y = 0; y < Lv; ++y) {
          double damped =
              (1.0 - cfg.damping) * std::exp(fresh[y]) + cfg.damping * std::exp(cur[y]);
          change = std::max(change, std::abs(damped - std::exp(cur[y])));
          fresh[y] = std::log(std::max(damped, 1e-300));
        }
        normalize_log(fresh);
        cur = fresh;
      }
    }
    ++sweeps;
    converged = change < cfg.tol;
  }

  // Beliefs.
  PropagationResult out;
  out.converged = converged;
  out.iters = sweeps;
  out.messages.resize(2 * ne);
  for (int d = 0; d < 2 * ne; ++d) {
    out.messages[d].resize(msg[d].size());
    for (std::size_t x = 0; x < msg[d].size(); ++x) out.messages[d][x] = std::exp(msg[d][x]);
  }
  out.beliefs.node.resize(n);
  out.beliefs.edge.resize(ne);
  std::vector<std::vector<double>> node_log(n);
  for (int u = 0; u < n; ++u) {
    aggregate(u, agg);
    std::vector<double> lv(m.label_count(u));
    for (int x = 0; x < m.label_count(u); ++x) lv[x] = m.theta(u, x) + agg[x];
    normalize_log(lv);
    node_log[u] = lv;
    out.beliefs.node[u].resize(lv.size());
    for (std::size_t x = 0; x < lv.size(); ++x) out.beliefs.node[u][x] = std::exp(lv[x]);
  }
  for (int e = 0; e < ne; ++e) {
    const Edge& ed = m.edges()[e];
    int Li = m.label_count(ed.i), Lj = m.label_count(ed.j);
    double r = rho_of(e);
    // Cavity terms: node log-belief minus the incoming message on this edge.
    std::vector<double> cav_i(Li), cav_j(Lj);
    const auto& mj_to_i = msg[2 * e + 1];
    const auto& mi_to_j = msg[2 * e + 0];
    aggregate(ed.i, agg);
    for (int a = 0; a < Li; ++a) cav_i[a] = m.theta(ed.i, a) + agg[a] - mj_to_i[a];
    aggregate(ed.j, agg);
    for (int b = 0; b < Lj; ++b) cav_j[b] = m.theta(ed.j, b) + agg[b] - mi_to_j[b];

    std::vector<double> lv(Li * Lj);
    auto table = m.edge_table(e);
    for (int a = 0; a < Li; ++a)
      for (int b = 0; b < Lj; ++b)
        lv[a * Lj + b] = table[a * Lj + b] / r + cav_i[a] + cav_j[b];
    normalize_log(lv);
    out.beliefs.edge[e].resize(lv.size());
    for (std::size_t k = 0; k < lv.size(); ++k) out.beliefs.edge[e][k] = std::exp(lv[k]);
  }
  return out;
}

}  // namespace cmrf::detail
