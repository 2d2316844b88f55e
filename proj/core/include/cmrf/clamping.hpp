#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cmrf/bethe.hpp"
#include "cmrf/meanfield.hpp"
#include "cmrf/model.hpp"
#include "cmrf/result.hpp"
#include "cmrf/trw.hpp"

namespace cmrf {

struct ClampConfig {
  MfConfig mf;
  BpConfig bethe;
  BpConfig trw = BpConfig::trw_defaults();
  // Edge appearances for the root model; computed by default policy if unset.
  std::optional<EdgeAppearance> rho;
  // Children reuse the parent rho restricted to surviving edges by default;
  // recomputing can only lower the TRW bound but departs from the guarantee
  // configuration.
  bool recompute_rho_per_child = false;
  // Warm starts carry the monotonicity guarantees (MF) and mirror them (Bethe).
  bool mf_warm_start = true;
  bool bethe_warm_start = true;
  int jobs = 1;  // concurrent branch evaluations
};

// Single-shot inference dispatch. For TRW, `rho` must match the model (or be
// null to use cfg.rho / the default policy).
InferenceResult run_inference(const PairwiseModel& m, Method method, const ClampConfig& cfg,
                              const EdgeAppearance* rho = nullptr);

struct ClampSum {
  double aggregate = 0.0;            // log sum_x exp(A(x_i))
  std::vector<double> p_tilde;       // induced clamp distribution
  std::vector<InferenceResult> children;  // per label; log_z excludes the carried constant
  std::vector<double> child_logz;    // per label, constant included
};

// Clamps `var` to every label, runs `method` on each child, and aggregates by
// stable log-sum-exp. MF children warm-start from the parent optimum; Bethe
// children from parent beliefs; TRW children reuse the restricted parent rho.
ClampSum clamp_sum(const PairwiseModel& m, Method method, int var, const ClampConfig& cfg,
                   const InferenceResult* parent = nullptr,
                   const EdgeAppearance* rho = nullptr);

struct ClampRound {
  int var = -1;  // original model index chosen this round
  std::vector<std::string> label_path;  // per live branch, "x1.x2..."
  std::vector<double> child_logz;       // per live branch, constants included
  double aggregate = 0.0;
  std::vector<double> p_tilde;  // over this round's labels
  double wall_time_s = 0.0;
  bool selector_fallback = false;
};

struct ClampReport {
  InferenceResult root;
  double root_estimate = 0.0;
  std::vector<ClampRound> rounds;
  std::vector<ClampMap> leaves;  // final branch tree, label-ascending order
};

// Runs k rounds; each round one variable is chosen by `selector` (a heuristic
// name, "greedy", or "pseudogreedy") and clamped across all live branches.
ClampReport clamp_sequence(const PairwiseModel& m, Method method, const std::string& selector,
                           int k, const ClampConfig& cfg);

struct GreedyPick {
  int var = -1;
  double aggregate = 0.0;
};

// Evaluates clamp_sum at every variable; best by the method's bound direction
// (max for MF / attractive Bethe, min for TRW; mixed Bethe ranks by the TRW
// fall). Ties go to the lowest index.
GreedyPick greedy_select(const PairwiseModel& m, Method method, const ClampConfig& cfg);

struct HeuristicEvaluation {
  std::string heuristic;
  int var = -1;
  double aggregate = 0.0;  // ranking value (method aggregate, or TRW proxy)
};

struct PseudoGreedyPick {
  int var = -1;
  double aggregate = 0.0;
  std::vector<HeuristicEvaluation> table;
};

// Evaluates clamp_sum only at the basket heuristics' picks.
PseudoGreedyPick pseudo_greedy_select(const PairwiseModel& m, Method method,
                                      const std::vector<std::string>& heuristics,
                                      const ClampConfig& cfg);

// CSV: round,var,label_path,child_logz,aggregate_logz,exact_logz,wall_time_ms
// (round 0 carries the root estimate; exact column blank when unknown).
void write_clamp_report_csv(std::ostream& out, const ClampReport& report,
                            std::optional<double> exact_logz = std::nullopt);

}  // namespace cmrf
