#pragma once

#include <cstdint>
#include <optional>

#include "cmrf/model.hpp"
#include "cmrf/result.hpp"

namespace cmrf {

struct BpConfig {
  double damping = 0.5;  // in [0,1); convex weight on the old message
  double tol = 1e-9;     // message L-inf change per sweep
  int max_iters = 10000;
  enum class Schedule { SequentialFixed, RandomSequential };
  Schedule schedule = Schedule::SequentialFixed;
  int restarts = 5;  // first uses `init`, the rest random message draws
  std::uint64_t seed = 0;
  enum class Init { Uniform, Random, Warm };
  Init init = Init::Uniform;
  std::optional<FactorizedMarginals> warm_beliefs;  // message seed when Warm
  // Exact message state (2e + dir indexing, probability domain); takes
  // precedence over warm_beliefs when Warm.
  std::optional<std::vector<std::vector<double>>> warm_messages;

  static BpConfig trw_defaults() {
    BpConfig c;
    c.damping = 0.25;
    c.restarts = 1;
    return c;
  }
};

// Bethe negative free energy (nats): theta.mu + sum_i H(mu_i) - sum_ij I_ij.
// Throws InputError when mu violates the local polytope beyond polytope_tol.
double bethe_free_energy(const PairwiseModel& m, const PseudoMarginals& mu,
                         double polytope_tol = 1e-6);

struct BpRunResult {
  PseudoMarginals beliefs;
  bool converged = false;
  int iters = 0;
  // Final messages (probability domain), directed id 2e (i->j) / 2e+1 (j->i).
  std::vector<std::vector<double>> messages;
};

// One damped sum-product run (messages updated in the probability domain,
// normalized each step; log-domain damping engages automatically for very
// strong potentials). Beliefs assembled at exit.
BpRunResult bp_run(const PairwiseModel& m, const BpConfig& cfg = {});

// Best Bethe fixed point over restarts. Bound is `lower` only when the model
// is binary and certified balanced (flippable to attractive), else `none`.
InferenceResult bethe_optimize(const PairwiseModel& m, const BpConfig& cfg = {});

}  // namespace cmrf
