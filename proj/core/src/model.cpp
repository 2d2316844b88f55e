#include "cmrf/model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "cmrf/errors.hpp"

namespace cmrf {

PairwiseModel::PairwiseModel(std::vector<int> labels)
    : labels_(std::move(labels)) {
  for (int L : labels_)
    if (L < 2) throw InputError("variable label count must be >= 2, got " + std::to_string(L));
  theta_.resize(labels_.size());
  adj_.resize(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i)
    theta_[i].assign(labels_[i], 0.0);
}

PairwiseModel PairwiseModel::binary(int n) {
  return PairwiseModel(std::vector<int>(n, 2));
}

PairwiseModel PairwiseModel::from_binary(
    const std::vector<double>& theta,
    const std::vector<std::pair<std::pair<int, int>, double>>& w) {
  PairwiseModel m = binary(static_cast<int>(theta.size()));
  for (std::size_t i = 0; i < theta.size(); ++i)
    m.set_theta(static_cast<int>(i), {0.0, theta[i]});
  for (const auto& [pair, wij] : w) {
    // (W/2) on the agreement diagonal reproduces the binary energy exactly.
    m.add_edge(pair.first, pair.second, {wij / 2.0, 0.0, 0.0, wij / 2.0});
  }
  return m;
}

int PairwiseModel::edge_index(int i, int j) const {
  if (i < 0 || j < 0 || i >= num_vars() || j >= num_vars()) return -1;
  const auto& nbrs = adj_[i];
  for (const auto& [k, e] : nbrs)
    if (k == j) return e;
  return -1;
}

void PairwiseModel::set_theta(int i, std::vector<double> table) {
  if (i < 0 || i >= num_vars()) throw InputError("set_theta: variable out of range");
  if (static_cast<int>(table.size()) != labels_[i])
    throw InputError("set_theta: table size does not match label count");
  for (double v : table)
    if (!std::isfinite(v)) throw InputError("set_theta: non-finite entry");
  theta_[i] = std::move(table);
}

void PairwiseModel::add_edge(int i, int j, std::vector<double> table) {
  if (i < 0 || j < 0 || i >= num_vars() || j >= num_vars())
    throw InputError("add_edge: variable out of range");
  if (i == j) throw InputError("add_edge: self loop");
  if (edge_index(i, j) >= 0) throw InputError("add_edge: duplicate edge");
  if (static_cast<int>(table.size()) != labels_[i] * labels_[j])
    throw InputError("add_edge: table shape mismatch");
  for (double v : table)
    if (!std::isfinite(v)) throw InputError("add_edge: non-finite entry");

  if (i > j) {
    // Canonicalize to i<j by transposing the table.
    std::vector<double> t(table.size());
    int Li = labels_[i], Lj = labels_[j];
    for (int a = 0; a < Li; ++a)
      for (int b = 0; b < Lj; ++b)
        t[b * Li + a] = table[a * Lj + b];
    std::swap(i, j);
    table = std::move(t);
  }
  int e = num_edges();
  edges_.push_back({i, j});
  tables_.push_back(std::move(table));
  adj_[i].push_back({j, e});
  adj_[j].push_back({i, e});
}

double PairwiseModel::pairwise(int i, int j, int xi, int xj) const {
  int e = edge_index(i, j);
  if (e < 0) throw InputError("pairwise: no such edge");
  if (xi < 0 || xi >= labels_[i] || xj < 0 || xj >= labels_[j])
    throw InputError("pairwise: label out of range");
  const Edge& ed = edges_[e];
  if (ed.i == i) return tables_[e][xi * labels_[j] + xj];
  return tables_[e][xj * labels_[i] + xi];
}

double PairwiseModel::energy(std::span<const int> config) const {
  if (static_cast<int>(config.size()) != num_vars())
    throw InputError("energy: config length mismatch");
  double neg_e = 0.0;
  for (int i = 0; i < num_vars(); ++i) {
    int x = config[i];
    if (x < 0 || x >= labels_[i]) throw InputError("energy: label out of range");
    neg_e += theta_[i][x];
  }
  for (int e = 0; e < num_edges(); ++e) {
    const Edge& ed = edges_[e];
    neg_e += tables_[e][config[ed.i] * labels_[ed.j] + config[ed.j]];
  }
  return -neg_e;
}

bool PairwiseModel::is_binary() const {
  return std::all_of(labels_.begin(), labels_.end(), [](int L) { return L == 2; });
}

BinaryView PairwiseModel::binary_view() const {
  if (!is_binary()) throw UnsupportedError("binary_view: model is not binary");
  BinaryView v;
  v.theta.assign(num_vars(), 0.0);
  v.w.resize(num_edges());
  // Per-variable singleton accumulation: base table plus residues folded out
  // of the edge tables.
  std::vector<double> base0(num_vars(), 0.0);  // accumulated theta'(0)
  for (int i = 0; i < num_vars(); ++i) {
    base0[i] = theta_[i][0];
    v.theta[i] = theta_[i][1] - theta_[i][0];
  }
  for (int e = 0; e < num_edges(); ++e) {
    const auto& t = tables_[e];
    double wij = t[0] + t[3] - t[1] - t[2];
    v.w[e] = wij;
    // Residue r(a,b) = t(a,b) - (w/2)[a==b] decomposes as f(a) + g(b).
    double r00 = t[0] - wij / 2.0, r01 = t[1], r10 = t[2];
    double g0 = r00, g1 = r01, f1 = r10 - r00;  // f(0) = 0
    int i = edges_[e].i, j = edges_[e].j;
    base0[i] += 0.0;
    v.theta[i] += f1;
    base0[j] += g0;
    v.theta[j] += g1 - g0;
  }
  v.log_const = 0.0;
  for (int i = 0; i < num_vars(); ++i) v.log_const += base0[i];
  return v;
}

void PairwiseModel::set_var_names(std::vector<std::string> names) {
  if (!names.empty() && static_cast<int>(names.size()) != num_vars())
    throw InputError("set_var_names: size mismatch");
  names_ = std::move(names);
}

double PairwiseModel::config_count() const {
  double c = 1.0;
  for (int L : labels_) c *= L;
  return c;
}

ClampedModel clamp(const PairwiseModel& m, int var, int label) {
  if (var < 0 || var >= m.num_vars()) throw InputError("clamp: variable out of range");
  if (label < 0 || label >= m.label_count(var)) throw InputError("clamp: label out of range");

  std::vector<int> child_labels;
  std::vector<int> index_map;  // child index -> parent index
  std::vector<int> parent_to_child(m.num_vars(), -1);
  child_labels.reserve(m.num_vars() - 1);
  for (int i = 0; i < m.num_vars(); ++i) {
    if (i == var) continue;
    parent_to_child[i] = static_cast<int>(child_labels.size());
    index_map.push_back(i);
    child_labels.push_back(m.label_count(i));
  }

  PairwiseModel child(child_labels);
  for (int i = 0; i < m.num_vars(); ++i) {
    if (i == var) continue;
    std::vector<double> t(m.theta(i).begin(), m.theta(i).end());
    child.set_theta(parent_to_child[i], std::move(t));
  }
  for (int e = 0; e < m.num_edges(); ++e) {
    const Edge& ed = m.edges()[e];
    if (ed.i == var || ed.j == var) {
      // Absorb into the surviving endpoint's singleton table.
      int other = ed.i == var ? ed.j : ed.i;
      int c = parent_to_child[other];
      for (int x = 0; x < m.label_count(other); ++x)
        child.add_to_theta(c, x, m.pairwise(var, other, label, x));
    } else {
      std::vector<double> t(m.edge_table(e).begin(), m.edge_table(e).end());
      child.add_edge(parent_to_child[ed.i], parent_to_child[ed.j], std::move(t));
    }
  }
  if (!m.var_names().empty()) {
    std::vector<std::string> names;
    names.reserve(index_map.size());
    for (int orig : index_map) names.push_back(m.var_names()[orig]);
    child.set_var_names(std::move(names));
  }

  ClampedModel out;
  out.model = std::move(child);
  out.map.assignments = {{var, label}};
  out.map.index_map = std::move(index_map);
  out.map.log_const = m.theta(var, label);
  return out;
}

ClampedModel ClampedModel::clamp(int var, int label) const {
  ClampedModel next = cmrf::clamp(model, var, label);
  // Rewrite child bookkeeping in terms of the original model's indices.
  ClampMap composed;
  composed.assignments = map.assignments;
  composed.assignments.emplace_back(map.index_map[var], label);
  composed.index_map.reserve(next.map.index_map.size());
  for (int mid : next.map.index_map) composed.index_map.push_back(map.index_map[mid]);
  composed.log_const = map.log_const + next.map.log_const;
  next.map = std::move(composed);
  return next;
}

int child_index_of(const ClampMap& map, int original_var) {
  for (std::size_t c = 0; c < map.index_map.size(); ++c)
    if (map.index_map[c] == original_var) return static_cast<int>(c);
  return -1;
}

PairwiseModel flip(const PairwiseModel& m, const std::vector<int>& subset) {
  if (!m.is_binary()) throw UnsupportedError("flip: model is not binary");
  std::vector<char> in(m.num_vars(), 0);
  for (int v : subset) {
    if (v < 0 || v >= m.num_vars()) throw InputError("flip: variable out of range");
    in[v] = 1;
  }
  PairwiseModel out = PairwiseModel::binary(m.num_vars());
  for (int i = 0; i < m.num_vars(); ++i) {
    if (in[i])
      out.set_theta(i, {m.theta(i, 1), m.theta(i, 0)});
    else
      out.set_theta(i, {m.theta(i, 0), m.theta(i, 1)});
  }
  for (int e = 0; e < m.num_edges(); ++e) {
    const Edge& ed = m.edges()[e];
    std::vector<double> t(4);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        t[a * 2 + b] = m.edge_table(e)[(in[ed.i] ? 1 - a : a) * 2 + (in[ed.j] ? 1 - b : b)];
    out.add_edge(ed.i, ed.j, std::move(t));
  }
  if (!m.var_names().empty()) out.set_var_names(m.var_names());
  return out;
}

BalanceCertificate balance_certificate(const PairwiseModel& m, double weight_floor) {
  if (!m.is_binary()) throw UnsupportedError("balance_certificate: model is not binary");
  BinaryView view = m.binary_view();

  // BFS 2-coloring of the retained sign graph; color 1 = flip.
  std::vector<int> color(m.num_vars(), -1);
  std::vector<int> parent(m.num_vars(), -1);
  BalanceCertificate cert;
  for (int root = 0; root < m.num_vars(); ++root) {
    if (color[root] >= 0) continue;
    color[root] = 0;
    std::deque<int> queue{root};
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      for (const auto& [v, e] : m.neighbors(u)) {
        if (std::abs(view.w[e]) <= weight_floor) continue;
        int want = view.w[e] >= 0.0 ? color[u] : 1 - color[u];
        if (color[v] < 0) {
          color[v] = want;
          parent[v] = u;
          queue.push_back(v);
        } else if (color[v] != want) {
          // Conflict edge (u,v): tree paths to their common ancestor plus the
          // edge itself form a frustrated cycle.
          std::vector<int> pu{u}, pv{v};
          std::vector<char> on_u(m.num_vars(), 0);
          for (int x = u; x >= 0; x = parent[x]) on_u[x] = 1;
          int meet = v;
          while (!on_u[meet]) {
            meet = parent[meet];
            pv.push_back(meet);
          }
          while (pu.back() != meet) pu.push_back(parent[pu.back()]);
          // Cycle: u .. meet .. v, closed by (v,u).
          cert.balanced = false;
          cert.witness_cycle = pu;
          for (auto it = pv.rbegin(); it != pv.rend(); ++it)
            if (*it != meet) cert.witness_cycle.push_back(*it);
          return cert;
        }
      }
    }
  }
  cert.balanced = true;
  for (int i = 0; i < m.num_vars(); ++i)
    if (color[i] == 1) cert.flip_set.push_back(i);
  return cert;
}

}  // namespace cmrf
