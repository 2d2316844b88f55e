#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmrf/model.hpp"
#include "cmrf/result.hpp"

namespace cmrf {

// Sub-model induced on a vertex subset, with the index map back to the input.
struct Subgraph {
  PairwiseModel model;
  std::vector<int> to_orig;
};

Subgraph induce(const PairwiseModel& m, const std::vector<int>& keep);

// Iteratively removes degree-1 vertices. Empty cores are legal (forests).
Subgraph strip_to_core(const PairwiseModel& m);

struct SelectionScore {
  std::string heuristic;
  // Indexed by the scored model's variables; -inf marks vertices outside the
  // core, which are never selected while the core is nonempty.
  std::vector<double> score;
  std::vector<int> core_map;  // core index -> scored-model index
  enum class Fallback { None, Unstripped, MaxW0 };
  Fallback fallback = Fallback::None;
};

// s(i) = sum_{j in N(i)} |W_ij|, on the core when strip is set. Binary only.
SelectionScore score_maxw(const PairwiseModel& m, bool strip = true);

// Closed-walk series score: diagonal of (I-M)^{-1} - I minus the backtracking
// correction s_i/(1-s_i), with M_ij = tanh|W_ij/4|/(n-1) on the core.
SelectionScore score_mpower(const PairwiseModel& m);

enum class CycleMode { Frustrated, Strong };

// Fundamental-cycle scores off a maximum-weight spanning tree (weights
// tanh|W/4|): cycScore(C) = log(1 + prod_C tanh(W/4)) with signed weights,
// accumulated on cycle vertices (frustrated mode: only when negative);
// final scores are absolute values.
SelectionScore score_cycles(const PairwiseModel& m, CycleMode mode);

// s'(i) = s(i) * H(mu_i) using the TRW singleton marginals; -inf preserved.
SelectionScore tre_adjust(const SelectionScore& s, const PairwiseModel& m,
                          const InferenceResult& trw_result);

// The ten-heuristic basket of canonical names.
const std::vector<std::string>& heuristic_basket();

struct SelectContext {
  std::vector<char> excluded;  // by model variable; empty means none
  // Singleton TRW entropies per model variable, for TRE scoring. Computed on
  // demand (one TRW run) when absent.
  std::optional<std::vector<double>> trw_entropy;
};

struct Selection {
  int var = -1;  // model variable index
  SelectionScore::Fallback fallback = SelectionScore::Fallback::None;
};

// Composes strip -> score -> optional TRE -> argmax (ties: lowest index),
// excluding context variables. Heuristics: maxW, maxW0, Mpower, frustCycles,
// strongCycles, and TRE-<name> variants. Throws ExhaustionError when no
// candidate remains.
Selection select_variable(const PairwiseModel& m, const std::string& heuristic,
                          const SelectContext& ctx = {});

// CSV rows `heuristic,var,score` for a batch of score tables.
void write_scores_csv(std::ostream& out, std::span<const SelectionScore> scores);

}  // namespace cmrf
