#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmrf/clamping.hpp"
#include "cmrf/gen.hpp"
#include "cmrf/model.hpp"
#include "cmrf/result.hpp"

namespace cmrf {

struct ExperimentSpec {
  std::optional<std::string> model_file;  // takes precedence over `gen`
  GenSpec gen;
  int runs = 20;
  std::vector<Method> methods{Method::MF, Method::Bethe, Method::TRW};
  int rounds = 5;
  std::vector<std::string> selectors;  // empty -> the ten-heuristic basket
  std::uint64_t seed = 0;
  int jobs = 1;
};

// `infer`: the estimate block goes to `out` (deterministic for fixed seeds);
// wall time goes to `timing` so byte-stable output can be compared.
void print_infer(std::ostream& out, std::ostream& timing, const InferenceResult& result);

// `sweep`: symmetric-model error curves over a uniform weight grid.
// CSV: topology,n,w,method,err,err_after_1_clamp
struct SweepSpec {
  bool cycle = false;  // false -> complete graph
  int n = 5;
  double w_lo = -8.0, w_hi = 8.0, w_step = 1.0;
  std::vector<Method> methods{Method::MF, Method::Bethe, Method::TRW};
};
void cmd_sweep(std::ostream& csv, const SweepSpec& spec, const ClampConfig& cfg);

// `clamp`: error-vs-clamp-count experiment over generated runs.
// main CSV:   run,method,selector,round,err,abs_err,time_ms
// mean CSV:   method,selector,round,mean_err,mean_abs_err
// timing CSV: run,method,selector,round,err,abs_err,cum_time_ms
// `best`/`worst` selector rows aggregate the basket per run/method/round.
void cmd_clamp_experiment(std::ostream& main_csv, std::ostream& mean_csv,
                          std::ostream& timing_csv, const ExperimentSpec& spec,
                          const ClampConfig& cfg);

// `seqsearch`: exhaustive ordered clamp sequences vs iterated greedy.
struct SequenceSearchResult {
  std::vector<int> greedy_sequence;
  double greedy_aggregate = 0.0;
  std::vector<int> best_sequence;
  double best_aggregate = 0.0;
  double gap = 0.0;  // >= 0 in the bound-improving direction
};
SequenceSearchResult cmd_sequence_search(const PairwiseModel& m, Method method, int k,
                                         const ClampConfig& cfg);

// Aggregate after clamping a fixed ordered variable sequence (all branches).
double sequence_aggregate(const PairwiseModel& m, Method method, std::span<const int> vars,
                          const ClampConfig& cfg, const InferenceResult* root = nullptr);

// `hist`: signed Bethe error bins (width 0.25) at clamp rounds 0..2.
// CSV: round,bin_lo,bin_hi,count
void cmd_histogram(std::ostream& csv, const ExperimentSpec& spec, const ClampConfig& cfg);

}  // namespace cmrf
