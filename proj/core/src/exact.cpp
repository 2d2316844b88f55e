#include "cmrf/exact.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "cmrf/errors.hpp"
#include "cmrf/numeric.hpp"

namespace cmrf {

namespace {

constexpr double kBruteCap = double(1 << 25);
constexpr double kTableCap = double(1 << 26);

// Streaming log-sum-exp accumulator (single pass, running max shift).
struct LseAccumulator {
  double max = kNegInf;
  double sum = 0.0;

  void add(double v) {
    if (v == kNegInf) return;
    if (v <= max) {
      sum += std::exp(v - max);
    } else {
      sum = sum * std::exp(max - v) + 1.0;
      max = v;
    }
  }

  double value() const { return max == kNegInf ? kNegInf : max + std::log(sum); }
};

// Odometer over all configurations; returns false when exhausted.
bool advance(std::vector<int>& config, const std::vector<int>& labels) {
  for (std::size_t i = 0; i < config.size(); ++i) {
    if (++config[i] < labels[i]) return true;
    config[i] = 0;
  }
  return false;
}

}  // namespace

double brute_logz(const PairwiseModel& m) {
  if (m.config_count() > kBruteCap)
    throw CapacityError("brute_logz: state space exceeds 2^25 configurations");
  if (m.num_vars() == 0) return 0.0;
  std::vector<int> config(m.num_vars(), 0);
  LseAccumulator acc;
  do {
    acc.add(-m.energy(config));
  } while (advance(config, m.label_counts()));
  return acc.value();
}

BruteSummary brute_summary(const PairwiseModel& m) {
  if (m.config_count() > kBruteCap)
    throw CapacityError("brute_summary: state space exceeds 2^25 configurations");
  BruteSummary out;
  out.marginals.resize(m.num_vars());
  for (int i = 0; i < m.num_vars(); ++i) out.marginals[i].assign(m.label_count(i), 0.0);
  if (m.num_vars() == 0) return out;

  // First pass finds the shift, second accumulates label masses.
  std::vector<int> config(m.num_vars(), 0);
  double shift = kNegInf;
  do {
    shift = std::max(shift, -m.energy(config));
  } while (advance(config, m.label_counts()));

  std::fill(config.begin(), config.end(), 0);
  double total = 0.0;
  do {
    double w = std::exp(-m.energy(config) - shift);
    total += w;
    for (int i = 0; i < m.num_vars(); ++i) out.marginals[i][config[i]] += w;
  } while (advance(config, m.label_counts()));

  out.log_z = shift + std::log(total);
  for (auto& mu : out.marginals)
    for (double& v : mu) v /= total;
  return out;
}

EliminationOrder min_fill_order(const PairwiseModel& m) {
  int n = m.num_vars();
  std::vector<std::set<int>> adj(n);
  for (const Edge& e : m.edges()) {
    adj[e.i].insert(e.j);
    adj[e.j].insert(e.i);
  }
  std::vector<char> eliminated(n, 0);
  EliminationOrder out;
  out.order.reserve(n);
  for (int step = 0; step < n; ++step) {
    int best = -1;
    long best_fill = -1;
    for (int v = 0; v < n; ++v) {
      if (eliminated[v]) continue;
      long fill = 0;
      for (auto it = adj[v].begin(); it != adj[v].end(); ++it)
        for (auto jt = std::next(it); jt != adj[v].end(); ++jt)
          if (!adj[*it].count(*jt)) ++fill;
      if (best < 0 || fill < best_fill) {
        best = v;
        best_fill = fill;
      }
    }
    out.order.push_back(best);
    out.induced_width = std::max(out.induced_width, static_cast<int>(adj[best].size()));
    for (int u : adj[best])
      for (int w : adj[best])
        if (u < w) {
          adj[u].insert(w);
          adj[w].insert(u);
        }
    for (int u : adj[best]) adj[u].erase(best);
    adj[best].clear();
    eliminated[best] = 1;
  }
  return out;
}

namespace {

// Log-domain factor over a sorted scope.
struct LogFactor {
  std::vector<int> scope;  // ascending variable ids
  std::vector<int> card;
  std::vector<double> logv;
};

// Log-domain product of `fs` over the union scope with `var` summed out.
LogFactor multiply_and_eliminate(const std::vector<const LogFactor*>& fs, int var,
                                 const std::vector<int>& labels) {
  std::set<int> scope_set;
  for (const LogFactor* f : fs)
    for (int v : f->scope) scope_set.insert(v);
  scope_set.insert(var);
  std::vector<int> joint(scope_set.begin(), scope_set.end());
  std::vector<int> card(joint.size());
  double total = 1.0;
  for (std::size_t k = 0; k < joint.size(); ++k) {
    card[k] = labels[joint[k]];
    total *= card[k];
  }
  if (total > kTableCap) throw CapacityError("eliminate_logz: intermediate table exceeds 2^26");

  // Per-factor strides aligned with the joint scope.
  std::vector<std::vector<long>> stride(fs.size(), std::vector<long>(joint.size(), 0));
  for (std::size_t fi = 0; fi < fs.size(); ++fi) {
    const LogFactor& f = *fs[fi];
    long s = 1;
    for (int k = static_cast<int>(f.scope.size()) - 1; k >= 0; --k) {
      auto pos = std::lower_bound(joint.begin(), joint.end(), f.scope[k]) - joint.begin();
      stride[fi][pos] = s;
      s *= f.card[k];
    }
  }
  int var_pos =
      static_cast<int>(std::lower_bound(joint.begin(), joint.end(), var) - joint.begin());

  LogFactor out;
  std::vector<int> out_pos;  // joint positions that survive
  for (std::size_t k = 0; k < joint.size(); ++k) {
    if (static_cast<int>(k) == var_pos) continue;
    out.scope.push_back(joint[k]);
    out.card.push_back(card[k]);
    out_pos.push_back(static_cast<int>(k));
  }
  long out_size = 1;
  for (int c : out.card) out_size *= c;
  out.logv.assign(out_size, kNegInf);

  std::vector<int> a(out_pos.size(), 0);          // assignment of surviving scope
  std::vector<long> base(fs.size(), 0);           // per-factor offset of that assignment
  for (long idx = 0; idx < out_size; ++idx) {
    LseAccumulator acc;
    for (int x = 0; x < card[var_pos]; ++x) {
      double v = 0.0;
      for (std::size_t fi = 0; fi < fs.size(); ++fi)
        v += fs[fi]->logv[base[fi] + stride[fi][var_pos] * x];
      acc.add(v);
    }
    out.logv[idx] = acc.value();

    // Advance the surviving-scope odometer (last position fastest).
    for (int k = static_cast<int>(out_pos.size()) - 1; k >= 0; --k) {
      ++a[k];
      for (std::size_t fi = 0; fi < fs.size(); ++fi) base[fi] += stride[fi][out_pos[k]];
      if (a[k] < out.card[k]) break;
      a[k] = 0;
      for (std::size_t fi = 0; fi < fs.size(); ++fi)
        base[fi] -= stride[fi][out_pos[k]] * out.card[k];
    }
  }
  return out;
}

}  // namespace

double eliminate_logz(const PairwiseModel& m, const std::optional<EliminationOrder>& order) {
  int n = m.num_vars();
  if (n == 0) return 0.0;
  EliminationOrder ord = order ? *order : min_fill_order(m);
  if (static_cast<int>(ord.order.size()) != n)
    throw InputError("eliminate_logz: order length mismatch");
  std::vector<char> seen(n, 0);
  for (int v : ord.order) {
    if (v < 0 || v >= n || seen[v]) throw InputError("eliminate_logz: order is not a permutation");
    seen[v] = 1;
  }

  std::vector<LogFactor> pool;
  pool.reserve(n + m.num_edges());
  for (int i = 0; i < n; ++i) {
    LogFactor f;
    f.scope = {i};
    f.card = {m.label_count(i)};
    f.logv.assign(m.theta(i).begin(), m.theta(i).end());
    pool.push_back(std::move(f));
  }
  for (int e = 0; e < m.num_edges(); ++e) {
    const Edge& ed = m.edges()[e];
    LogFactor f;
    f.scope = {ed.i, ed.j};
    f.card = {m.label_count(ed.i), m.label_count(ed.j)};
    f.logv.assign(m.edge_table(e).begin(), m.edge_table(e).end());
    pool.push_back(std::move(f));
  }

  std::vector<char> alive(pool.size(), 1);
  double scalar = 0.0;
  for (int v : ord.order) {
    std::vector<const LogFactor*> bucket;
    for (std::size_t f = 0; f < pool.size(); ++f) {
      if (!alive[f]) continue;
      if (std::binary_search(pool[f].scope.begin(), pool[f].scope.end(), v)) {
        bucket.push_back(&pool[f]);
        alive[f] = 0;
      }
    }
    LogFactor next = multiply_and_eliminate(bucket, v, m.label_counts());
    if (next.scope.empty()) {
      scalar += next.logv[0];
    } else {
      pool.push_back(std::move(next));
      alive.push_back(1);
    }
  }
  return scalar;
}

std::vector<double> exact_marginal(const PairwiseModel& m, int var) {
  if (var < 0 || var >= m.num_vars()) throw InputError("exact_marginal: variable out of range");
  std::vector<double> log_child(m.label_count(var));
  for (int x = 0; x < m.label_count(var); ++x) {
    ClampedModel c = clamp(m, var, x);
    log_child[x] = eliminate_logz(c.model) + c.map.log_const;
  }
  double lse = log_sum_exp(log_child);
  std::vector<double> p(m.label_count(var));
  for (int x = 0; x < m.label_count(var); ++x) p[x] = std::exp(log_child[x] - lse);
  return p;
}

}  // namespace cmrf
