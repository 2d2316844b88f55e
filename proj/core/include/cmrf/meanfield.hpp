#pragma once

#include <cstdint>
#include <optional>

#include "cmrf/model.hpp"
#include "cmrf/result.hpp"

namespace cmrf {

struct MfConfig {
  double tol = 1e-7;        // max per-variable L-inf marginal change per sweep
  int max_sweeps = 10000;
  int restarts = 5;         // first uses `init`, the rest Dirichlet(1) draws
  std::uint64_t seed = 0;
  enum class Init { Uniform, Random, Warm };
  Init init = Init::Uniform;
  std::optional<FactorizedMarginals> warm;  // required when init == Warm
};

// Mean-field negative free energy of a factorized q (nats):
//   sum_i theta_i . mu_i + sum_(ij) mu_i^T theta_ij mu_j + sum_i H(mu_i).
double mf_free_energy(const PairwiseModel& m, const FactorizedMarginals& q);

// Exact coordinate update of mu_var (softmax of its mean field); other
// marginals untouched. Returns the updated marginals.
FactorizedMarginals mf_update(const PairwiseModel& m, const FactorizedMarginals& q, int var);

// Coordinate ascent with restarts; returns the best free energy found, a
// guaranteed lower bound on A.
InferenceResult mf_optimize(const PairwiseModel& m, const MfConfig& cfg = {});

}  // namespace cmrf
