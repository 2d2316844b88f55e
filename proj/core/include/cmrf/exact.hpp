#pragma once

#include <optional>
#include <vector>

#include "cmrf/model.hpp"

namespace cmrf {

struct EliminationOrder {
  std::vector<int> order;  // permutation of variables
  int induced_width = 0;   // max intermediate scope size minus one
};

// Greedy min-fill ordering, ties broken by lowest variable index.
EliminationOrder min_fill_order(const PairwiseModel& m);

// log Z by exhaustive enumeration (streamed, max-shifted).
// Requires prod L_i <= 2^25.
double brute_logz(const PairwiseModel& m);

// log Z and all singleton marginals in one enumeration pass.
// Same capacity bound as brute_logz.
struct BruteSummary {
  double log_z = 0.0;
  std::vector<std::vector<double>> marginals;
};
BruteSummary brute_summary(const PairwiseModel& m);

// log Z by variable elimination in the log domain. Requires
// (max L)^(width+1) <= 2^26 for the chosen (or min-fill) order.
double eliminate_logz(const PairwiseModel& m,
                      const std::optional<EliminationOrder>& order = std::nullopt);

// p(X_var = x) = exp(logZ(clamped child) + const - logZ(model)), normalized.
std::vector<double> exact_marginal(const PairwiseModel& m, int var);

}  // namespace cmrf
