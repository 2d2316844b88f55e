#include "cmrf/trw.hpp"

#include <Eigen/Dense>
#include <chrono>
#include <cmath>

#include "cmrf/errors.hpp"
#include "cmrf/numeric.hpp"
#include "cmrf/rng.hpp"
#include "propagation.hpp"

namespace cmrf {

namespace {

constexpr std::uint64_t kTreeTag = 0x75737431;  // "ust1"

std::vector<std::vector<int>> connected_components(const PairwiseModel& m) {
  std::vector<int> comp(m.num_vars(), -1);
  std::vector<std::vector<int>> out;
  for (int root = 0; root < m.num_vars(); ++root) {
    if (comp[root] >= 0) continue;
    int id = static_cast<int>(out.size());
    out.emplace_back();
    std::vector<int> stack{root};
    comp[root] = id;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      out[id].push_back(u);
      for (const auto& [v, e] : m.neighbors(u))
        if (comp[v] < 0) {
          comp[v] = id;
          stack.push_back(v);
        }
    }
  }
  return out;
}

void check_rho(const PairwiseModel& m, const EdgeAppearance& rho, const char* who) {
  if (static_cast<int>(rho.rho.size()) != m.num_edges())
    throw InputError(std::string(who) + ": rho size does not match edge count");
  for (double r : rho.rho)
    if (!(r > 0.0) || r > 1.0 + 1e-12)
      throw InputError(std::string(who) + ": rho entries must lie in (0, 1]");
}

}  // namespace

EdgeAppearance EdgeAppearance::restricted_to(const PairwiseModel& parent, const ClampMap& map,
                                             const PairwiseModel& child) const {
  EdgeAppearance out;
  out.source = source;
  out.rho.resize(child.num_edges());
  for (int e = 0; e < child.num_edges(); ++e) {
    const Edge& ed = child.edges()[e];
    int pe = parent.edge_index(map.index_map[ed.i], map.index_map[ed.j]);
    if (pe < 0) throw InputError("EdgeAppearance::restricted_to: child edge missing in parent");
    out.rho[e] = rho[pe];
  }
  return out;
}

EdgeAppearance sample_tree_weights(const PairwiseModel& m, int ntrees, std::uint64_t seed) {
  if (ntrees < 1) throw InputError("sample_tree_weights: ntrees must be >= 1");
  EdgeAppearance out;
  out.source = EdgeAppearance::Source::Sampled;
  out.rho.assign(m.num_edges(), 0.0);
  if (m.num_edges() == 0) return out;

  std::vector<long> count(m.num_edges(), 0);
  std::vector<char> in_tree(m.num_vars());
  std::vector<int> next_edge(m.num_vars(), -1);
  auto components = connected_components(m);

  for (int t = 0; t < ntrees; ++t) {
    SplitMix64 rng(stream_key(seed, kTreeTag, static_cast<std::uint64_t>(t)));
    std::fill(in_tree.begin(), in_tree.end(), 0);
    for (const auto& comp : components) {
      in_tree[comp.front()] = 1;
      for (int v : comp) {
        if (in_tree[v]) continue;
        // Random walk from v until the tree is hit, remembering exits.
        int u = v;
        while (!in_tree[u]) {
          const auto& nbrs = m.neighbors(u);
          const auto& [w, e] = nbrs[rng.next_below(nbrs.size())];
          next_edge[u] = e;
          u = w;
        }
        // Retrace: the loop-erased path joins the tree.
        u = v;
        while (!in_tree[u]) {
          in_tree[u] = 1;
          int e = next_edge[u];
          ++count[e];
          const Edge& ed = m.edges()[e];
          u = ed.i == u ? ed.j : ed.i;
        }
      }
    }
  }
  double floor = 1.0 / (2.0 * ntrees);
  for (int e = 0; e < m.num_edges(); ++e)
    out.rho[e] = std::max(static_cast<double>(count[e]) / ntrees, floor);
  return out;
}

EdgeAppearance exact_tree_weights(const PairwiseModel& m) {
  if (m.num_vars() > 2000) throw CapacityError("exact_tree_weights: n exceeds 2000");
  EdgeAppearance out;
  out.source = EdgeAppearance::Source::Exact;
  out.rho.assign(m.num_edges(), 0.0);

  for (const auto& comp : connected_components(m)) {
    int k = static_cast<int>(comp.size());
    if (k == 1) continue;
    std::vector<int> local(m.num_vars(), -1);
    for (int idx = 0; idx < k; ++idx) local[comp[idx]] = idx;

    // Grounded Laplacian (drop the first vertex), inverted once; the UST edge
    // probability is the effective resistance across the edge.
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(k - 1, k - 1);
    for (int u : comp)
      for (const auto& [v, e] : m.neighbors(u)) {
        if (v < u) continue;
        int a = local[u] - 1, b = local[v] - 1;
        if (a >= 0) lap(a, a) += 1.0;
        if (b >= 0) lap(b, b) += 1.0;
        if (a >= 0 && b >= 0) {
          lap(a, b) -= 1.0;
          lap(b, a) -= 1.0;
        }
      }
    Eigen::MatrixXd inv = lap.ldlt().solve(Eigen::MatrixXd::Identity(k - 1, k - 1));
    auto kij = [&](int a, int b) { return a < 0 || b < 0 ? 0.0 : inv(a, b); };
    for (int u : comp)
      for (const auto& [v, e] : m.neighbors(u)) {
        if (v < u) continue;
        int a = local[u] - 1, b = local[v] - 1;
        out.rho[e] = std::min(1.0, kij(a, a) + kij(b, b) - 2.0 * kij(a, b));
      }
  }
  return out;
}

EdgeAppearance uniform_tree_weights(const PairwiseModel& m) {
  EdgeAppearance out;
  out.source = EdgeAppearance::Source::Uniform;
  out.rho.assign(m.num_edges(), 0.0);
  for (const auto& comp : connected_components(m)) {
    long edges_in = 0;
    for (int u : comp)
      for (const auto& [v, e] : m.neighbors(u))
        if (v > u) ++edges_in;
    if (edges_in == 0) continue;
    double r = std::min(1.0, static_cast<double>(comp.size() - 1) / edges_in);
    for (int u : comp)
      for (const auto& [v, e] : m.neighbors(u))
        if (v > u) out.rho[e] = r;
  }
  return out;
}

EdgeAppearance default_tree_weights(const PairwiseModel& m, std::uint64_t seed) {
  return m.num_vars() <= 200 ? exact_tree_weights(m) : sample_tree_weights(m, 1000, seed);
}

double trw_free_energy(const PairwiseModel& m, const PseudoMarginals& mu,
                       const EdgeAppearance& rho, double polytope_tol) {
  check_rho(m, rho, "trw_free_energy");
  // Bethe with rho = 1 shares its evaluation; here counting numbers scale the
  // mutual information terms.
  if (static_cast<int>(mu.node.size()) != m.num_vars() ||
      static_cast<int>(mu.edge.size()) != m.num_edges())
    throw InputError("trw_free_energy: pseudomarginal shape mismatch");
  if (mu.polytope_gap(m) > polytope_tol)
    throw InputError("trw_free_energy: pseudomarginals violate the local polytope");

  double f = 0.0;
  for (int i = 0; i < m.num_vars(); ++i) {
    for (int x = 0; x < m.label_count(i); ++x) f += m.theta(i, x) * mu.node[i][x];
    f += entropy(mu.node[i]);
  }
  for (int e = 0; e < m.num_edges(); ++e) {
    const Edge& ed = m.edges()[e];
    auto t = m.edge_table(e);
    for (std::size_t k = 0; k < t.size(); ++k) f += t[k] * mu.edge[e][k];
    f -= rho.rho[e] * mutual_information(mu.edge[e], m.label_count(ed.i), m.label_count(ed.j));
  }
  return f;
}

InferenceResult trw_optimize(const PairwiseModel& m, const EdgeAppearance& rho,
                             const BpConfig& cfg) {
  check_rho(m, rho, "trw_optimize");
  auto t0 = std::chrono::steady_clock::now();

  InferenceResult best;
  best.method = Method::TRW;
  best.bound = Bound::Upper;

  double best_converged = kNegInf;
  double best_any = kNegInf;
  PseudoMarginals any_beliefs;
  int any_iters = 0;
  bool have_converged = false;

  for (int r = 0; r < cfg.restarts; ++r) {
    BpConfig::Init init = r == 0 ? cfg.init : BpConfig::Init::Random;
    detail::PropagationResult run = detail::propagate(m, rho.rho, cfg, init, r);
    double value = trw_free_energy(m, run.beliefs, rho, 1e6);
    if (run.converged && value > best_converged) {
      best_converged = value;
      best.log_z = value;
      best.marginals = std::move(run.beliefs);
      best.iters = run.iters;
      have_converged = true;
    } else if (!have_converged && value > best_any) {
      best_any = value;
      any_beliefs = std::move(run.beliefs);
      any_iters = run.iters;
    }
  }
  if (!have_converged) {
    best.log_z = best_any;
    best.marginals = std::move(any_beliefs);
    best.iters = any_iters;
    best.converged = false;
  } else {
    best.converged = true;
  }
  best.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return best;
}

}  // namespace cmrf
