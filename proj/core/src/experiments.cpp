#include "cmrf/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

#include "cmrf/errors.hpp"
#include "cmrf/exact.hpp"
#include "cmrf/io.hpp"
#include "cmrf/numeric.hpp"
#include "cmrf/select.hpp"
#include "parallel.hpp"

namespace cmrf {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

PairwiseModel spec_model(const ExperimentSpec& spec, int run) {
  if (spec.model_file) return load_model(*spec.model_file);
  GenSpec g = spec.gen;
  g.seed = spec.seed + static_cast<std::uint64_t>(run);
  return generate(g);
}

const std::vector<std::string>& spec_selectors(const ExperimentSpec& spec) {
  return spec.selectors.empty() ? heuristic_basket() : spec.selectors;
}

}  // namespace

void print_infer(std::ostream& out, std::ostream& timing, const InferenceResult& result) {
  out << "method=" << to_string(result.method) << " logz=" << num(result.log_z)
      << " bound=" << to_string(result.bound) << " converged=" << (result.converged ? 1 : 0)
      << " iters=" << result.iters << "\n";
  timing << "time_ms=" << num(result.wall_time_s * 1000.0) << "\n";
}

void cmd_sweep(std::ostream& csv, const SweepSpec& spec, const ClampConfig& cfg) {
  if (spec.n > 12) throw CapacityError("sweep: n must be <= 12 for brute-force exactness");
  if (spec.w_step <= 0.0 || spec.w_lo > spec.w_hi) throw InputError("sweep: bad weight grid");
  const char* topology = spec.cycle ? "cycle" : "complete";

  csv << "topology,n,w,method,err,err_after_1_clamp\n";
  for (double w = spec.w_lo; w <= spec.w_hi + 1e-12; w += spec.w_step) {
    GenSpec g;
    g.family = spec.cycle ? GenSpec::Family::SymmetricCycle : GenSpec::Family::SymmetricComplete;
    g.n = spec.n;
    g.symmetric_w = w;
    PairwiseModel m = generate(g);
    double exact = brute_logz(m);
    for (Method method : spec.methods) {
      InferenceResult root = run_inference(m, method, cfg);
      ClampSum one = clamp_sum(m, method, 0, cfg, &root);
      csv << topology << "," << spec.n << "," << num(w) << "," << to_string(method) << ","
          << num(root.log_z - exact) << "," << num(one.aggregate - exact) << "\n";
    }
  }
}

namespace {

struct CurvePoint {
  double err = 0.0;
  double time_s = 0.0;
};

// One run of one method/selector: per-round errors (round 0 = no clamping).
std::vector<CurvePoint> run_curve(const PairwiseModel& m, double exact, Method method,
                                  const std::string& selector, int rounds,
                                  const ClampConfig& cfg) {
  std::vector<CurvePoint> curve;
  if (rounds == 0) {
    InferenceResult root = run_inference(m, method, cfg);
    curve.push_back({root.log_z - exact, root.wall_time_s});
    return curve;
  }
  ClampReport report = clamp_sequence(m, method, selector, rounds, cfg);
  curve.push_back({report.root_estimate - exact, report.root.wall_time_s});
  for (const ClampRound& round : report.rounds)
    curve.push_back({round.aggregate - exact, round.wall_time_s});
  return curve;
}

}  // namespace

void cmd_clamp_experiment(std::ostream& main_csv, std::ostream& mean_csv,
                          std::ostream& timing_csv, const ExperimentSpec& spec,
                          const ClampConfig& cfg) {
  if (spec.runs < 0 || spec.rounds < 0) throw InputError("clamp experiment: bad spec");
  if (spec.methods.empty()) throw InputError("clamp experiment: at least one method");
  const auto& selectors = spec_selectors(spec);

  std::string provenance =
      "# " + (spec.model_file ? "model " + *spec.model_file : describe(spec.gen)) +
      " runs=" + std::to_string(spec.runs) + " rounds=" + std::to_string(spec.rounds);
  main_csv << provenance << "\n";
  timing_csv << provenance << "\n";

  // curves[run][method][selector] -> per-round points
  using SelectorCurves = std::map<std::string, std::vector<CurvePoint>>;
  std::vector<std::vector<SelectorCurves>> curves(
      spec.runs, std::vector<SelectorCurves>(spec.methods.size()));

  detail::parallel_for(spec.runs, spec.jobs, [&](int run) {
    PairwiseModel m = spec_model(spec, run);
    double exact = eliminate_logz(m);
    int rounds = std::min(spec.rounds, m.num_vars());
    for (std::size_t mi = 0; mi < spec.methods.size(); ++mi)
      for (const std::string& sel : selectors)
        curves[run][mi][sel] = run_curve(m, exact, spec.methods[mi], sel, rounds, cfg);
  });

  main_csv << "run,method,selector,round,err,abs_err,time_ms\n";
  timing_csv << "run,method,selector,round,err,abs_err,cum_time_ms\n";
  // mean over runs: (method, selector, round) -> sum err / sum abs
  std::map<std::string, std::map<std::string, std::vector<std::pair<double, double>>>> sums;

  for (int run = 0; run < spec.runs; ++run)
    for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
      const char* method = to_string(spec.methods[mi]);
      const SelectorCurves& by_sel = curves[run][mi];
      std::size_t max_rounds = 0;
      for (const auto& [sel, curve] : by_sel) max_rounds = std::max(max_rounds, curve.size());

      for (const auto& [sel, curve] : by_sel) {
        double cum = 0.0;
        for (std::size_t r = 0; r < curve.size(); ++r) {
          double err = curve[r].err;
          cum += curve[r].time_s;
          main_csv << run << "," << method << "," << sel << "," << r << "," << num(err) << ","
                   << num(std::abs(err)) << "," << num(curve[r].time_s * 1000.0) << "\n";
          timing_csv << run << "," << method << "," << sel << "," << r << "," << num(err) << ","
                     << num(std::abs(err)) << "," << num(cum * 1000.0) << "\n";
          auto& cell = sums[method][sel];
          if (cell.size() <= r) cell.resize(r + 1, {0.0, 0.0});
          cell[r].first += err;
          cell[r].second += std::abs(err);
        }
      }
      // best / worst across the selector basket, by absolute error.
      for (std::size_t r = 0; r < max_rounds; ++r) {
        double best = 0.0, worst = 0.0, best_abs = 0.0, worst_abs = 0.0;
        bool first = true;
        for (const auto& [sel, curve] : by_sel) {
          if (r >= curve.size()) continue;
          double err = curve[r].err, abs_err = std::abs(err);
          if (first || abs_err < best_abs) {
            best = err;
            best_abs = abs_err;
          }
          if (first || abs_err > worst_abs) {
            worst = err;
            worst_abs = abs_err;
          }
          first = false;
        }
        for (const char* tag : {"best", "worst"}) {
          double err = tag[0] == 'b' ? best : worst;
          main_csv << run << "," << method << "," << tag << "," << r << "," << num(err) << ","
                   << num(std::abs(err)) << ",0\n";
          auto& cell = sums[method][tag];
          if (cell.size() <= r) cell.resize(r + 1, {0.0, 0.0});
          cell[r].first += err;
          cell[r].second += std::abs(err);
        }
      }
    }

  mean_csv << "method,selector,round,mean_err,mean_abs_err\n";
  if (spec.runs > 0)
    for (const auto& [method, by_sel] : sums)
      for (const auto& [sel, cells] : by_sel)
        for (std::size_t r = 0; r < cells.size(); ++r)
          mean_csv << method << "," << sel << "," << r << "," << num(cells[r].first / spec.runs)
                   << "," << num(cells[r].second / spec.runs) << "\n";
}

double sequence_aggregate(const PairwiseModel& m, Method method, std::span<const int> vars,
                          const ClampConfig& cfg, const InferenceResult* root) {
  // Depth-first over the branch tree of the fixed sequence.
  struct Node {
    PairwiseModel model;
    ClampMap map;
    InferenceResult res;
    EdgeAppearance rho;
  };
  Node start;
  start.model = m;
  start.map.index_map.resize(m.num_vars());
  for (int i = 0; i < m.num_vars(); ++i) start.map.index_map[i] = i;
  if (method == Method::TRW) start.rho = cfg.rho && static_cast<int>(cfg.rho->rho.size()) ==
                                                        m.num_edges()
                                             ? *cfg.rho
                                             : default_tree_weights(m);
  start.res = root ? *root
                   : run_inference(m, method, cfg, method == Method::TRW ? &start.rho : nullptr);

  std::vector<Node> level{std::move(start)};
  for (int var : vars) {
    std::vector<Node> next;
    for (const Node& parent : level) {
      int child_var = child_index_of(parent.map, var);
      if (child_var < 0) throw InputError("sequence_aggregate: repeated variable");
      for (int x = 0; x < parent.model.label_count(child_var); ++x) {
        ClampedModel step = clamp(parent.model, child_var, x);
        Node node;
        node.model = std::move(step.model);
        node.map.assignments = parent.map.assignments;
        node.map.assignments.emplace_back(var, x);
        for (int mid : step.map.index_map)
          node.map.index_map.push_back(parent.map.index_map[mid]);
        node.map.log_const = parent.map.log_const + step.map.log_const;

        EdgeAppearance child_rho;
        if (method == Method::TRW) {
          child_rho = cfg.recompute_rho_per_child
                          ? default_tree_weights(node.model)
                          : parent.rho.restricted_to(parent.model, step.map, node.model);
          node.rho = child_rho;
        }
        MfConfig mf = cfg.mf;
        BpConfig bp = cfg.bethe;
        InferenceResult res;
        switch (method) {
          case Method::MF:
            if (cfg.mf_warm_start && parent.res.has_marginals()) {
              mf.init = MfConfig::Init::Warm;
              FactorizedMarginals warm;
              warm.mu.resize(step.map.index_map.size());
              for (std::size_t c = 0; c < step.map.index_map.size(); ++c) {
                auto s = parent.res.singleton(step.map.index_map[c]);
                warm.mu[c].assign(s.begin(), s.end());
              }
              mf.warm = std::move(warm);
            }
            res = mf_optimize(node.model, mf);
            break;
          case Method::Bethe:
            if (cfg.bethe_warm_start && parent.res.has_marginals()) {
              bp.init = BpConfig::Init::Warm;
              FactorizedMarginals warm;
              warm.mu.resize(step.map.index_map.size());
              for (std::size_t c = 0; c < step.map.index_map.size(); ++c) {
                auto s = parent.res.singleton(step.map.index_map[c]);
                warm.mu[c].assign(s.begin(), s.end());
              }
              bp.warm_beliefs = std::move(warm);
            }
            res = bethe_optimize(node.model, bp);
            break;
          case Method::TRW:
            res = trw_optimize(node.model, child_rho, cfg.trw);
            break;
          case Method::Exact: {
            InferenceResult r;
            r.method = Method::Exact;
            r.log_z = eliminate_logz(node.model);
            res = r;
            break;
          }
        }
        node.res = std::move(res);
        next.push_back(std::move(node));
      }
    }
    level = std::move(next);
  }
  std::vector<double> vals;
  vals.reserve(level.size());
  for (const Node& node : level) vals.push_back(node.res.log_z + node.map.log_const);
  return log_sum_exp(vals);
}

SequenceSearchResult cmd_sequence_search(const PairwiseModel& m, Method method, int k,
                                         const ClampConfig& cfg) {
  if (k < 1 || k > 3) throw InputError("sequence search: k must be in [1, 3]");
  if (k > m.num_vars()) throw InputError("sequence search: k exceeds variable count");
  long sequences = 1;
  for (int t = 0; t < k; ++t) sequences *= m.num_vars() - t;
  double leaves_per_seq = 1.0;
  for (int t = 0; t < k; ++t) leaves_per_seq *= 2;  // binary-ish estimate
  if (sequences * leaves_per_seq > 20000)
    throw CapacityError("sequence search: combinatorial budget exceeded");

  SequenceSearchResult out;
  ClampReport greedy = clamp_sequence(m, method, "greedy", k, cfg);
  for (const ClampRound& r : greedy.rounds) out.greedy_sequence.push_back(r.var);
  out.greedy_aggregate = greedy.rounds.back().aggregate;

  bool maximize = method == Method::MF ||
                  (method == Method::Bethe && m.is_binary() && balance_certificate(m).balanced);

  InferenceResult root = run_inference(m, method, cfg);
  std::vector<int> seq(k);
  bool first = true;
  // Iterative enumeration of ordered sequences without repetition.
  std::vector<int> idx(k, -1);
  int depth = 0;
  while (depth >= 0) {
    ++idx[depth];
    if (idx[depth] >= m.num_vars()) {
      idx[depth] = -1;
      --depth;
      continue;
    }
    bool used = false;
    for (int t = 0; t < depth; ++t)
      if (seq[t] == idx[depth]) used = true;
    if (used) continue;
    seq[depth] = idx[depth];
    if (depth + 1 < k) {
      ++depth;
      continue;
    }
    double agg = sequence_aggregate(m, method, std::span<const int>(seq.data(), k), cfg, &root);
    bool better = first || (maximize ? agg > out.best_aggregate : agg < out.best_aggregate);
    if (better) {
      out.best_aggregate = agg;
      out.best_sequence = seq;
      first = false;
    }
  }
  out.gap = maximize ? out.best_aggregate - out.greedy_aggregate
                     : out.greedy_aggregate - out.best_aggregate;
  return out;
}

void cmd_histogram(std::ostream& csv, const ExperimentSpec& spec, const ClampConfig& cfg) {
  const double bin_width = 0.25;
  const std::string selector = spec.selectors.empty() ? "maxW" : spec.selectors.front();
  // (round, bin) -> count
  std::map<std::pair<int, long>, long> bins;
  std::vector<std::map<std::pair<int, long>, long>> per_run(spec.runs);

  detail::parallel_for(spec.runs, spec.jobs, [&](int run) {
    PairwiseModel m = spec_model(spec, run);
    double exact = eliminate_logz(m);
    int rounds = std::min(2, m.num_vars());
    ClampReport report = clamp_sequence(m, Method::Bethe, selector, std::max(rounds, 1), cfg);
    auto record = [&](int round, double err) {
      long bin = static_cast<long>(std::floor(err / bin_width));
      ++per_run[run][{round, bin}];
    };
    record(0, report.root_estimate - exact);
    for (int r = 0; r < rounds; ++r) record(r + 1, report.rounds[r].aggregate - exact);
  });
  for (const auto& one : per_run)
    for (const auto& [key, count] : one) bins[key] += count;

  csv << "round,bin_lo,bin_hi,count\n";
  for (const auto& [key, count] : bins)
    csv << key.first << "," << num(key.second * bin_width) << ","
        << num((key.second + 1) * bin_width) << "," << count << "\n";
}

}  // namespace cmrf
