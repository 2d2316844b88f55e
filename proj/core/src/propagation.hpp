#pragma once

// Internal reweighted sum-product engine shared by the Bethe (rho = 1) and
// TRW solvers. Messages are kept as normalized log vectors; the update for
// directed edge u->v over edge e is
//   m(x_v) <- lse_{x_u} [ theta_u(x_u) + theta_uv(x_u,x_v)/rho_e
//                         + sum_{k in N(u)} rho_ku * lm_{k->u}(x_u)
//                         - lm_{v->u}(x_u) ]
// followed by damping in the probability domain (or geometric damping in the
// log domain for very strong potentials).

#include <vector>

#include "cmrf/bethe.hpp"
#include "cmrf/model.hpp"
#include "cmrf/result.hpp"

namespace cmrf::detail {

struct PropagationResult {
  PseudoMarginals beliefs;
  bool converged = false;
  int iters = 0;
  std::vector<std::vector<double>> messages;  // probability domain, 2e + dir
};

// rho empty means all ones (standard BP). `restart` selects the random
// stream for Random init / RandomSequential schedules.
PropagationResult propagate(const PairwiseModel& m, const std::vector<double>& rho,
                            const BpConfig& cfg, BpConfig::Init init, int restart);

}  // namespace cmrf::detail
