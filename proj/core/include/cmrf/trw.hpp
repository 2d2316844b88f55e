#pragma once

#include <cstdint>
#include <vector>

#include "cmrf/bethe.hpp"
#include "cmrf/model.hpp"
#include "cmrf/result.hpp"

namespace cmrf {

// Per-edge spanning-tree appearance probabilities, aligned with model.edges().
// For a connected graph the entries sum to n-1; for a forest decomposition,
// n minus the number of components.
struct EdgeAppearance {
  enum class Source { Sampled, Exact, Uniform };
  std::vector<double> rho;
  Source source = Source::Exact;

  // Restriction to a clamped child: keeps entries of surviving edges, in the
  // child's edge order. No renormalization.
  EdgeAppearance restricted_to(const PairwiseModel& parent, const ClampMap& map,
                               const PairwiseModel& child) const;
};

// rho from `ntrees` uniform spanning trees (Wilson's loop-erased random walk),
// floored at 1/(2*ntrees). Disconnected graphs are handled per component.
EdgeAppearance sample_tree_weights(const PairwiseModel& m, int ntrees = 1000,
                                   std::uint64_t seed = 0);

// Exact uniform-spanning-tree edge probabilities via effective resistances
// (matrix-tree theorem). Requires n <= 2000; per-component on disconnected
// graphs.
EdgeAppearance exact_tree_weights(const PairwiseModel& m);

// The (n_c - 1)/m_c per-component heuristic.
EdgeAppearance uniform_tree_weights(const PairwiseModel& m);

// Default policy: exact weights up to 200 variables, sampled above.
EdgeAppearance default_tree_weights(const PairwiseModel& m, std::uint64_t seed = 0);

// TRW negative free energy: theta.mu + sum_i H(mu_i) - sum_ij rho_ij I_ij.
double trw_free_energy(const PairwiseModel& m, const PseudoMarginals& mu,
                       const EdgeAppearance& rho, double polytope_tol = 1e-6);

// Damped TRW-BP; the objective is concave for valid rho, so the converged
// value upper-bounds A within solver tolerance.
InferenceResult trw_optimize(const PairwiseModel& m, const EdgeAppearance& rho,
                             const BpConfig& cfg = BpConfig::trw_defaults());

}  // namespace cmrf
