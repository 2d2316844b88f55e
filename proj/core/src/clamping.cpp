#include "cmrf/clamping.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "cmrf/errors.hpp"
#include "cmrf/exact.hpp"
#include "cmrf/numeric.hpp"
#include "cmrf/select.hpp"
#include "parallel.hpp"

namespace cmrf {

namespace {

constexpr double kBruteMarginalCap = double(1 << 20);

FactorizedMarginals restrict_to_child(const InferenceResult& parent, const ClampMap& step) {
  FactorizedMarginals out;
  out.mu.resize(step.index_map.size());
  for (std::size_t c = 0; c < step.index_map.size(); ++c) {
    auto mu = parent.singleton(step.index_map[c]);
    out.mu[c].assign(mu.begin(), mu.end());
  }
  return out;
}

InferenceResult run_exact(const PairwiseModel& m) {
  auto t0 = std::chrono::steady_clock::now();
  InferenceResult res;
  res.method = Method::Exact;
  res.bound = Bound::None;
  res.converged = true;
  if (m.config_count() <= kBruteMarginalCap) {
    BruteSummary s = brute_summary(m);
    res.log_z = s.log_z;
    res.marginals = FactorizedMarginals{std::move(s.marginals)};
  } else {
    res.log_z = eliminate_logz(m);
  }
  res.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

EdgeAppearance root_rho(const PairwiseModel& m, const ClampConfig& cfg,
                        const EdgeAppearance* rho) {
  if (rho) return *rho;
  if (cfg.rho && static_cast<int>(cfg.rho->rho.size()) == m.num_edges()) return *cfg.rho;
  return default_tree_weights(m);
}

bool certified_balanced(const PairwiseModel& m) {
  return m.is_binary() && balance_certificate(m).balanced;
}

}  // namespace

InferenceResult run_inference(const PairwiseModel& m, Method method, const ClampConfig& cfg,
                              const EdgeAppearance* rho) {
  switch (method) {
    case Method::MF:
      return mf_optimize(m, cfg.mf);
    case Method::Bethe:
      return bethe_optimize(m, cfg.bethe);
    case Method::TRW: {
      EdgeAppearance r = root_rho(m, cfg, rho);
      return trw_optimize(m, r, cfg.trw);
    }
    case Method::Exact:
      return run_exact(m);
  }
  throw InputError("run_inference: unknown method");
}

namespace {

// One clamped child: inference with the method's warm-start policy.
InferenceResult run_child(const PairwiseModel& child, Method method, const ClampConfig& cfg,
                          const ClampMap& step, const InferenceResult* parent,
                          const EdgeAppearance* child_rho) {
  switch (method) {
    case Method::MF: {
      MfConfig mc = cfg.mf;
      if (cfg.mf_warm_start && parent && parent->has_marginals()) {
        mc.init = MfConfig::Init::Warm;
        mc.warm = restrict_to_child(*parent, step);
      }
      return mf_optimize(child, mc);
    }
    case Method::Bethe: {
      BpConfig bc = cfg.bethe;
      if (cfg.bethe_warm_start && parent && parent->has_marginals()) {
        bc.init = BpConfig::Init::Warm;
        bc.warm_beliefs = restrict_to_child(*parent, step);
      }
      return bethe_optimize(child, bc);
    }
    case Method::TRW:
      return trw_optimize(child, *child_rho, cfg.trw);
    case Method::Exact:
      return run_exact(child);
  }
  throw InputError("run_child: unknown method");
}

}  // namespace

ClampSum clamp_sum(const PairwiseModel& m, Method method, int var, const ClampConfig& cfg,
                   const InferenceResult* parent, const EdgeAppearance* rho) {
  if (var < 0 || var >= m.num_vars()) throw InputError("clamp_sum: variable out of range");

  EdgeAppearance parent_rho;
  if (method == Method::TRW) parent_rho = root_rho(m, cfg, rho);

  InferenceResult computed_parent;
  bool needs_parent = (method == Method::MF && cfg.mf_warm_start) ||
                      (method == Method::Bethe && cfg.bethe_warm_start);
  if (needs_parent && !parent) {
    computed_parent = run_inference(m, method, cfg, nullptr);
    parent = &computed_parent;
  }

  int labels = m.label_count(var);
  ClampSum out;
  out.children.resize(labels);
  out.child_logz.resize(labels);
  detail::parallel_for(labels, cfg.jobs, [&](int x) {
    ClampedModel c = clamp(m, var, x);
    EdgeAppearance child_rho;
    if (method == Method::TRW)
      child_rho = cfg.recompute_rho_per_child ? default_tree_weights(c.model)
                                              : parent_rho.restricted_to(m, c.map, c.model);
    out.children[x] = run_child(c.model, method, cfg, c.map, parent, &child_rho);
    out.child_logz[x] = out.children[x].log_z + c.map.log_const;
  });

  out.aggregate = log_sum_exp(out.child_logz);
  out.p_tilde.resize(labels);
  for (int x = 0; x < labels; ++x) out.p_tilde[x] = std::exp(out.child_logz[x] - out.aggregate);
  return out;
}

namespace {

struct Branch {
  PairwiseModel model;
  ClampMap map;  // composed, original indexing; identity at the root
  InferenceResult res;
  EdgeAppearance rho;  // TRW only
  std::string label_path;
};

double branch_aggregate(const std::vector<Branch>& branches) {
  std::vector<double> vals;
  vals.reserve(branches.size());
  for (const Branch& b : branches) vals.push_back(b.res.log_z + b.map.log_const);
  return log_sum_exp(vals);
}

// p-tilde-weighted average TRW singleton entropies by original variable.
std::vector<double> averaged_trw_entropy(const PairwiseModel& original,
                                         const std::vector<Branch>& branches, Method method,
                                         const ClampConfig& cfg) {
  double agg = branch_aggregate(branches);
  std::vector<double> ent(original.num_vars(), 0.0);
  for (const Branch& b : branches) {
    double w = std::exp(b.res.log_z + b.map.log_const - agg);
    const InferenceResult* trw = &b.res;
    InferenceResult local;
    if (method != Method::TRW || !b.res.has_marginals()) {
      EdgeAppearance r = b.rho.rho.empty() ? default_tree_weights(b.model) : b.rho;
      local = trw_optimize(b.model, r, cfg.trw);
      trw = &local;
    }
    for (std::size_t c = 0; c < b.map.index_map.size(); ++c)
      ent[b.map.index_map[c]] += w * entropy(trw->singleton(static_cast<int>(c)));
  }
  return ent;
}

// Clamps every live branch at `var`; children ordered branch-major,
// label-ascending (depth-first order of the branch tree).
std::vector<Branch> clamp_branches(const std::vector<Branch>& branches, int var, Method method,
                                   const ClampConfig& cfg) {
  int total = 0;
  std::vector<int> offsets;
  for (const Branch& b : branches) {
    offsets.push_back(total);
    int child = child_index_of(b.map, var);
    if (child < 0) throw InputError("clamp_branches: variable already clamped");
    total += b.model.label_count(child);
  }
  std::vector<Branch> next(total);
  struct Task {
    int branch, label, slot;
  };
  std::vector<Task> tasks;
  for (std::size_t bi = 0; bi < branches.size(); ++bi) {
    int child = child_index_of(branches[bi].map, var);
    for (int x = 0; x < branches[bi].model.label_count(child); ++x)
      tasks.push_back({static_cast<int>(bi), x, offsets[bi] + x});
  }
  detail::parallel_for(static_cast<int>(tasks.size()), cfg.jobs, [&](int t) {
    const Task& task = tasks[t];
    const Branch& parent = branches[task.branch];
    int child_var = child_index_of(parent.map, var);
    ClampedModel step = clamp(parent.model, child_var, task.label);

    Branch b;
    b.model = std::move(step.model);
    // Compose bookkeeping in original-model terms.
    b.map.assignments = parent.map.assignments;
    b.map.assignments.emplace_back(var, task.label);
    b.map.index_map.reserve(step.map.index_map.size());
    for (int mid : step.map.index_map) b.map.index_map.push_back(parent.map.index_map[mid]);
    b.map.log_const = parent.map.log_const + step.map.log_const;
    b.label_path = parent.label_path.empty() ? std::to_string(task.label)
                                             : parent.label_path + "." + std::to_string(task.label);
    EdgeAppearance child_rho;
    if (method == Method::TRW) {
      child_rho = cfg.recompute_rho_per_child
                      ? default_tree_weights(b.model)
                      : parent.rho.restricted_to(parent.model, step.map, b.model);
      b.rho = child_rho;
    }
    b.res = run_child(b.model, method, cfg, step.map, &parent.res, &child_rho);
    next[task.slot] = std::move(b);
  });
  return next;
}

enum class Direction { Maximize, Minimize };

Direction bound_direction(const PairwiseModel& m, Method method) {
  if (method == Method::TRW) return Direction::Minimize;
  if (method == Method::Bethe && !certified_balanced(m)) return Direction::Minimize;  // TRW proxy
  return Direction::Maximize;
}

bool uses_trw_proxy(const PairwiseModel& m, Method method) {
  return method == Method::Bethe && !certified_balanced(m);
}

}  // namespace

ClampReport clamp_sequence(const PairwiseModel& m, Method method, const std::string& selector,
                           int k, const ClampConfig& cfg) {
  if (k < 1 || k > m.num_vars()) throw InputError("clamp_sequence: rounds must be in [1, n]");

  ClampReport report;
  EdgeAppearance rho0;
  if (method == Method::TRW) rho0 = root_rho(m, cfg, nullptr);
  report.root = run_inference(m, method, cfg, method == Method::TRW ? &rho0 : nullptr);
  report.root_estimate = report.root.log_z;

  std::vector<Branch> branches(1);
  branches[0].model = m;
  branches[0].map.index_map.resize(m.num_vars());
  for (int i = 0; i < m.num_vars(); ++i) branches[0].map.index_map[i] = i;
  branches[0].res = report.root;
  branches[0].rho = rho0;

  // Shadow TRW branches drive selection for Bethe on non-balanced models.
  const bool meta = selector == "greedy" || selector == "pseudogreedy";
  if (!meta) {
    const auto& basket = heuristic_basket();
    if (std::find(basket.begin(), basket.end(), selector) == basket.end())
      throw InputError("clamp_sequence: unknown selector " + selector);
  }
  const bool trw_proxy = uses_trw_proxy(m, method) && meta;
  std::vector<Branch> shadow;
  if (trw_proxy) {
    shadow.resize(1);
    shadow[0].model = m;
    shadow[0].map = branches[0].map;
    shadow[0].rho = root_rho(m, cfg, nullptr);
    shadow[0].res = trw_optimize(m, shadow[0].rho, cfg.trw);
  }

  std::vector<char> excluded(m.num_vars(), 0);
  bool tre_in_selector = selector.rfind("TRE-", 0) == 0;

  for (int round = 1; round <= k; ++round) {
    auto t0 = std::chrono::steady_clock::now();
    ClampRound rec;

    SelectContext ctx;
    ctx.excluded = excluded;
    if (tre_in_selector || selector == "pseudogreedy")
      ctx.trw_entropy = averaged_trw_entropy(m, trw_proxy ? shadow : branches,
                                             trw_proxy ? Method::TRW : method, cfg);

    int var = -1;
    if (meta) {
      std::vector<int> candidates;
      if (selector == "greedy") {
        for (int v = 0; v < m.num_vars(); ++v)
          if (!excluded[v]) candidates.push_back(v);
      } else {
        for (const std::string& h : heuristic_basket()) {
          Selection pick = select_variable(m, h, ctx);
          if (std::find(candidates.begin(), candidates.end(), pick.var) == candidates.end())
            candidates.push_back(pick.var);
        }
        std::sort(candidates.begin(), candidates.end());
      }
      Direction dir = bound_direction(m, method);
      const std::vector<Branch>& eval_branches = trw_proxy ? shadow : branches;
      Method eval_method = trw_proxy ? Method::TRW : method;
      double best_val = 0.0;
      for (int v : candidates) {
        std::vector<Branch> trial = clamp_branches(eval_branches, v, eval_method, cfg);
        double agg = branch_aggregate(trial);
        bool better = var < 0 || (dir == Direction::Maximize ? agg > best_val : agg < best_val);
        if (better) {
          var = v;
          best_val = agg;
        }
      }
    } else {
      try {
        Selection pick = select_variable(m, selector, ctx);
        var = pick.var;
        rec.selector_fallback = pick.fallback != SelectionScore::Fallback::None;
      } catch (const ExhaustionError&) {
        throw;
      } catch (const UnsupportedError&) {
        throw;  // non-binary models have no heuristic fallback
      } catch (const std::exception&) {
        // Selector failure: fall back to maxW without stripping.
        Selection pick = select_variable(m, "maxW0", ctx);
        var = pick.var;
        rec.selector_fallback = true;
      }
    }

    branches = clamp_branches(branches, var, method, cfg);
    if (trw_proxy) shadow = clamp_branches(shadow, var, Method::TRW, cfg);
    excluded[var] = 1;

    rec.var = var;
    rec.child_logz.reserve(branches.size());
    rec.label_path.reserve(branches.size());
    for (const Branch& b : branches) {
      rec.child_logz.push_back(b.res.log_z + b.map.log_const);
      rec.label_path.push_back(b.label_path);
    }
    rec.aggregate = log_sum_exp(rec.child_logz);
    rec.p_tilde.assign(m.label_count(var), 0.0);
    std::vector<double> by_label(m.label_count(var), kNegInf);
    for (const Branch& b : branches) {
      int label = b.map.assignments.back().second;
      by_label[label] = log_add_exp(by_label[label], b.res.log_z + b.map.log_const);
    }
    for (int x = 0; x < m.label_count(var); ++x)
      rec.p_tilde[x] = std::exp(by_label[x] - rec.aggregate);
    rec.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.rounds.push_back(std::move(rec));
  }

  report.leaves.reserve(branches.size());
  for (const Branch& b : branches) report.leaves.push_back(b.map);
  return report;
}

GreedyPick greedy_select(const PairwiseModel& m, Method method, const ClampConfig& cfg) {
  EdgeAppearance rho;
  const EdgeAppearance* rho_ptr = nullptr;
  if (method == Method::TRW || uses_trw_proxy(m, method)) {
    rho = root_rho(m, cfg, nullptr);
    rho_ptr = &rho;
  }
  InferenceResult parent = run_inference(m, method, cfg, method == Method::TRW ? rho_ptr : nullptr);
  InferenceResult trw_parent;
  bool proxy = uses_trw_proxy(m, method);
  if (proxy) trw_parent = trw_optimize(m, rho, cfg.trw);

  Direction dir = bound_direction(m, method);
  GreedyPick best;
  double best_rank = 0.0;
  for (int v = 0; v < m.num_vars(); ++v) {
    double rank;
    if (proxy) {
      rank = clamp_sum(m, Method::TRW, v, cfg, &trw_parent, &rho).aggregate;
    } else {
      rank = clamp_sum(m, method, v, cfg, &parent, rho_ptr).aggregate;
    }
    bool better =
        best.var < 0 || (dir == Direction::Maximize ? rank > best_rank : rank < best_rank);
    if (better) {
      best.var = v;
      best_rank = rank;
    }
  }
  best.aggregate =
      proxy ? clamp_sum(m, method, best.var, cfg, &parent, nullptr).aggregate : best_rank;
  return best;
}

PseudoGreedyPick pseudo_greedy_select(const PairwiseModel& m, Method method,
                                      const std::vector<std::string>& heuristics,
                                      const ClampConfig& cfg) {
  const std::vector<std::string>& basket = heuristics.empty() ? heuristic_basket() : heuristics;

  EdgeAppearance rho;
  const EdgeAppearance* rho_ptr = nullptr;
  bool proxy = uses_trw_proxy(m, method);
  if (method == Method::TRW || proxy) {
    rho = root_rho(m, cfg, nullptr);
    rho_ptr = &rho;
  }
  InferenceResult parent = run_inference(m, method, cfg, method == Method::TRW ? rho_ptr : nullptr);
  InferenceResult trw_parent;
  if (proxy) trw_parent = trw_optimize(m, rho, cfg.trw);

  // One shared TRW run provides entropies for the TRE members.
  SelectContext ctx;
  bool any_tre = false;
  for (const std::string& h : basket)
    if (h.rfind("TRE-", 0) == 0 || h.rfind("tre-", 0) == 0) any_tre = true;
  if (any_tre) {
    const InferenceResult* trw_for_entropy = nullptr;
    InferenceResult local;
    if (method == Method::TRW) {
      trw_for_entropy = &parent;
    } else if (proxy) {
      trw_for_entropy = &trw_parent;
    } else {
      EdgeAppearance r = root_rho(m, cfg, nullptr);
      local = trw_optimize(m, r, cfg.trw);
      trw_for_entropy = &local;
    }
    std::vector<double> ent(m.num_vars());
    for (int i = 0; i < m.num_vars(); ++i) ent[i] = entropy(trw_for_entropy->singleton(i));
    ctx.trw_entropy = std::move(ent);
  }

  PseudoGreedyPick out;
  Direction dir = bound_direction(m, method);
  std::vector<std::pair<int, double>> evaluated;  // var -> ranking aggregate
  auto rank_of = [&](int v) {
    for (const auto& [var, rank] : evaluated)
      if (var == v) return rank;
    double rank = proxy ? clamp_sum(m, Method::TRW, v, cfg, &trw_parent, &rho).aggregate
                        : clamp_sum(m, method, v, cfg, &parent, rho_ptr).aggregate;
    evaluated.push_back({v, rank});
    return rank;
  };

  double best_rank = 0.0;
  for (const std::string& h : basket) {
    Selection pick = select_variable(m, h, ctx);
    double rank = rank_of(pick.var);
    out.table.push_back({h, pick.var, rank});
    bool better =
        out.var < 0 || (dir == Direction::Maximize ? rank > best_rank : rank < best_rank);
    if (better) {
      out.var = pick.var;
      best_rank = rank;
    }
  }
  out.aggregate =
      proxy ? clamp_sum(m, method, out.var, cfg, &parent, nullptr).aggregate : best_rank;
  return out;
}

void write_clamp_report_csv(std::ostream& out, const ClampReport& report,
                            std::optional<double> exact_logz) {
  char buf[40];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::string(buf);
  };
  std::string exact = exact_logz ? num(*exact_logz) : "";
  out << "round,var,label_path,child_logz,aggregate_logz,exact_logz,wall_time_ms\n";
  out << "0,-1,," << num(report.root_estimate) << "," << num(report.root_estimate) << "," << exact
      << "," << num(report.root.wall_time_s * 1000.0) << "\n";
  for (std::size_t r = 0; r < report.rounds.size(); ++r) {
    const ClampRound& round = report.rounds[r];
    for (std::size_t b = 0; b < round.child_logz.size(); ++b)
      out << r + 1 << "," << round.var << "," << round.label_path[b] << ","
          << num(round.child_logz[b]) << "," << num(round.aggregate) << "," << exact << ","
          << num(round.wall_time_s * 1000.0) << "\n";
  }
}

}  // namespace cmrf
