#include "cmrf/select.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "cmrf/errors.hpp"
#include "cmrf/numeric.hpp"
#include "cmrf/trw.hpp"

namespace cmrf {

Subgraph induce(const PairwiseModel& m, const std::vector<int>& keep) {
  std::vector<int> to_local(m.num_vars(), -1);
  Subgraph out;
  out.to_orig = keep;
  std::vector<int> labels;
  for (std::size_t k = 0; k < keep.size(); ++k) {
    int v = keep[k];
    if (v < 0 || v >= m.num_vars() || to_local[v] >= 0)
      throw InputError("induce: subset must be distinct valid variables");
    to_local[v] = static_cast<int>(k);
    labels.push_back(m.label_count(v));
  }
  out.model = PairwiseModel(labels);
  for (std::size_t k = 0; k < keep.size(); ++k) {
    std::vector<double> t(m.theta(keep[k]).begin(), m.theta(keep[k]).end());
    out.model.set_theta(static_cast<int>(k), std::move(t));
  }
  for (int e = 0; e < m.num_edges(); ++e) {
    const Edge& ed = m.edges()[e];
    if (to_local[ed.i] < 0 || to_local[ed.j] < 0) continue;
    std::vector<double> t(m.edge_table(e).begin(), m.edge_table(e).end());
    out.model.add_edge(to_local[ed.i], to_local[ed.j], std::move(t));
  }
  if (!m.var_names().empty()) {
    std::vector<std::string> names;
    for (int v : keep) names.push_back(m.var_names()[v]);
    out.model.set_var_names(std::move(names));
  }
  return out;
}

Subgraph strip_to_core(const PairwiseModel& m) {
  std::vector<int> degree(m.num_vars());
  std::vector<char> removed(m.num_vars(), 0);
  std::vector<int> stack;
  for (int i = 0; i < m.num_vars(); ++i) {
    degree[i] = m.degree(i);
    if (degree[i] <= 1) stack.push_back(i);
  }
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    if (removed[v]) continue;
    removed[v] = 1;
    for (const auto& [u, e] : m.neighbors(v))
      if (!removed[u] && --degree[u] <= 1) stack.push_back(u);
  }
  std::vector<int> keep;
  for (int i = 0; i < m.num_vars(); ++i)
    if (!removed[i]) keep.push_back(i);
  return induce(m, keep);
}

namespace {

void require_binary(const PairwiseModel& m, const char* who) {
  if (!m.is_binary()) throw UnsupportedError(std::string(who) + ": binary models only");
}

// Scores a stripped core via `fn`, falling back to the unstripped graph when
// stripping leaves nothing.
template <typename Fn>
SelectionScore with_core(const PairwiseModel& m, const char* name, Fn fn) {
  SelectionScore s;
  s.heuristic = name;
  s.score.assign(m.num_vars(), kNegInf);
  Subgraph core = strip_to_core(m);
  if (core.model.num_vars() == 0) {
    s.fallback = SelectionScore::Fallback::Unstripped;
    std::vector<double> raw = fn(m);
    s.score = std::move(raw);
    s.core_map.resize(m.num_vars());
    std::iota(s.core_map.begin(), s.core_map.end(), 0);
    return s;
  }
  std::vector<double> raw = fn(core.model);
  for (std::size_t k = 0; k < core.to_orig.size(); ++k) s.score[core.to_orig[k]] = raw[k];
  s.core_map = std::move(core.to_orig);
  return s;
}

std::vector<double> maxw_raw(const PairwiseModel& m) {
  BinaryView v = m.binary_view();
  std::vector<double> s(m.num_vars(), 0.0);
  for (int e = 0; e < m.num_edges(); ++e) {
    s[m.edges()[e].i] += std::abs(v.w[e]);
    s[m.edges()[e].j] += std::abs(v.w[e]);
  }
  return s;
}

std::vector<double> mpower_raw(const PairwiseModel& m) {
  int n = m.num_vars();
  if (n == 0) return {};
  BinaryView v = m.binary_view();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (int e = 0; e < m.num_edges(); ++e) {
    double val = std::tanh(std::abs(v.w[e] / 4.0)) / std::max(n - 1, 1);
    M(m.edges()[e].i, m.edges()[e].j) = val;
    M(m.edges()[e].j, m.edges()[e].i) = val;
  }
  Eigen::MatrixXd inv =
      (Eigen::MatrixXd::Identity(n, n) - M).partialPivLu().solve(Eigen::MatrixXd::Identity(n, n));
  Eigen::MatrixXd M2 = M * M;
  std::vector<double> s(n);
  for (int i = 0; i < n; ++i) {
    double si = M2(i, i);
    s[i] = inv(i, i) - 1.0 - si / (1.0 - si);
  }
  return s;
}

struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};

std::vector<double> cycles_raw(const PairwiseModel& m, CycleMode mode) {
  int n = m.num_vars();
  std::vector<double> s(n, 0.0);
  if (m.num_edges() == 0) return s;
  BinaryView v = m.binary_view();

  // Kruskal maximum-weight spanning forest on tanh|W/4|, deterministic
  // tie-break on edge index.
  std::vector<int> order(m.num_edges());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> weight(m.num_edges());
  for (int e = 0; e < m.num_edges(); ++e) weight[e] = std::tanh(std::abs(v.w[e] / 4.0));
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return weight[a] > weight[b]; });

  DisjointSet dsu(n);
  std::vector<std::vector<std::pair<int, int>>> tree(n);  // (neighbor, edge)
  std::vector<int> off_tree;
  for (int e : order) {
    const Edge& ed = m.edges()[e];
    if (dsu.unite(ed.i, ed.j)) {
      tree[ed.i].push_back({ed.j, e});
      tree[ed.j].push_back({ed.i, e});
    } else {
      off_tree.push_back(e);
    }
  }
  std::sort(off_tree.begin(), off_tree.end());

  for (int e : off_tree) {
    const Edge& ed = m.edges()[e];
    // Tree path ed.i -> ed.j by BFS.
    std::vector<int> prev_vertex(n, -1), prev_edge(n, -1);
    std::vector<int> queue{ed.i};
    prev_vertex[ed.i] = ed.i;
    for (std::size_t h = 0; h < queue.size() && prev_vertex[ed.j] < 0; ++h)
      for (const auto& [u, te] : tree[queue[h]])
        if (prev_vertex[u] < 0) {
          prev_vertex[u] = queue[h];
          prev_edge[u] = te;
          queue.push_back(u);
        }
    std::vector<int> cycle_vertices{ed.j};
    double prod = std::tanh(v.w[e] / 4.0);
    for (int u = ed.j; u != ed.i; u = prev_vertex[u]) {
      prod *= std::tanh(v.w[prev_edge[u]] / 4.0);
      cycle_vertices.push_back(prev_vertex[u]);
    }
    double cyc_score = std::log(1.0 + prod);
    if (mode == CycleMode::Strong || cyc_score < 0.0)
      for (int u : cycle_vertices) s[u] += cyc_score;
  }
  for (double& x : s) x = std::abs(x);
  return s;
}

}  // namespace

SelectionScore score_maxw(const PairwiseModel& m, bool strip) {
  require_binary(m, "score_maxw");
  if (!strip) {
    SelectionScore s;
    s.heuristic = "maxW0";
    s.score = maxw_raw(m);
    s.core_map.resize(m.num_vars());
    std::iota(s.core_map.begin(), s.core_map.end(), 0);
    return s;
  }
  return with_core(m, "maxW", [](const PairwiseModel& g) { return maxw_raw(g); });
}

SelectionScore score_mpower(const PairwiseModel& m) {
  require_binary(m, "score_mpower");
  return with_core(m, "Mpower", [](const PairwiseModel& g) { return mpower_raw(g); });
}

SelectionScore score_cycles(const PairwiseModel& m, CycleMode mode) {
  require_binary(m, "score_cycles");
  const char* name = mode == CycleMode::Frustrated ? "frustCycles" : "strongCycles";
  return with_core(m, name,
                   [mode](const PairwiseModel& g) { return cycles_raw(g, mode); });
}

SelectionScore tre_adjust(const SelectionScore& s, const PairwiseModel& m,
                          const InferenceResult& trw_result) {
  if (static_cast<int>(s.score.size()) != m.num_vars())
    throw InputError("tre_adjust: score table does not match the model");
  if (!trw_result.has_marginals())
    throw InputError("tre_adjust: TRW result carries no marginals");
  SelectionScore out = s;
  out.heuristic = "TRE-" + s.heuristic;
  for (int i = 0; i < static_cast<int>(out.score.size()); ++i) {
    if (out.score[i] == kNegInf) continue;
    auto mu = trw_result.singleton(i);
    if (mu.empty()) throw InputError("tre_adjust: missing marginal for variable");
    out.score[i] *= entropy(mu);
  }
  return out;
}

const std::vector<std::string>& heuristic_basket() {
  static const std::vector<std::string> basket = {
      "maxW",     "maxW0",     "Mpower",     "frustCycles",     "strongCycles",
      "TRE-maxW", "TRE-maxW0", "TRE-Mpower", "TRE-frustCycles", "TRE-strongCycles"};
  return basket;
}

namespace {

std::string lower(const std::string& s) {
  std::string t;
  for (char c : s) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return t;
}

SelectionScore base_score(const PairwiseModel& m, const std::string& base) {
  std::string b = lower(base);
  if (b == "maxw") return score_maxw(m, true);
  if (b == "maxw0") return score_maxw(m, false);
  if (b == "mpower") return score_mpower(m);
  if (b == "frustcycles") return score_cycles(m, CycleMode::Frustrated);
  if (b == "strongcycles") return score_cycles(m, CycleMode::Strong);
  throw InputError("unknown heuristic: " + base);
}

}  // namespace

Selection select_variable(const PairwiseModel& m, const std::string& heuristic,
                          const SelectContext& ctx) {
  std::vector<int> candidates;
  for (int i = 0; i < m.num_vars(); ++i)
    if (ctx.excluded.empty() || !ctx.excluded[i]) candidates.push_back(i);
  if (candidates.empty()) throw ExhaustionError("select_variable: no candidate variables left");

  Subgraph residual = induce(m, candidates);

  std::string name = heuristic;
  bool tre = false;
  if (lower(name).rfind("tre-", 0) == 0) {
    tre = true;
    name = name.substr(4);
  }
  SelectionScore s = base_score(residual.model, name);

  // Cycle heuristics with nothing scored fall back to maxW without stripping.
  bool all_zero = true;
  for (double v : s.score)
    if (v != kNegInf && v != 0.0) all_zero = false;
  bool cycles = lower(name) == "frustcycles" || lower(name) == "strongcycles";
  if (cycles && all_zero) {
    s = score_maxw(residual.model, false);
    s.fallback = SelectionScore::Fallback::MaxW0;
  }

  if (tre) {
    std::vector<double> ent(residual.model.num_vars());
    if (ctx.trw_entropy) {
      for (int k = 0; k < residual.model.num_vars(); ++k)
        ent[k] = (*ctx.trw_entropy)[residual.to_orig[k]];
    } else {
      InferenceResult trw =
          trw_optimize(residual.model, default_tree_weights(residual.model));
      for (int k = 0; k < residual.model.num_vars(); ++k)
        ent[k] = entropy(trw.singleton(k));
    }
    for (int k = 0; k < residual.model.num_vars(); ++k)
      if (s.score[k] != kNegInf) s.score[k] *= ent[k];
  }

  int best = -1;
  for (int k = 0; k < residual.model.num_vars(); ++k) {
    if (s.score[k] == kNegInf) continue;
    if (best < 0 || s.score[k] > s.score[best]) best = k;
  }
  if (best < 0) best = 0;  // unreachable given the fallback chain
  return {residual.to_orig[best], s.fallback};
}

void write_scores_csv(std::ostream& out, std::span<const SelectionScore> scores) {
  out << "heuristic,var,score\n";
  char buf[40];
  for (const SelectionScore& s : scores)
    for (std::size_t i = 0; i < s.score.size(); ++i) {
      if (s.score[i] == kNegInf) continue;
      std::snprintf(buf, sizeof buf, "%.12g", s.score[i]);
      out << s.heuristic << "," << i << "," << buf << "\n";
    }
}

}  // namespace cmrf
