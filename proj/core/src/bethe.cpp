#include "cmrf/bethe.hpp"

#include <chrono>
#include <cmath>

#include "cmrf/errors.hpp"
#include "cmrf/numeric.hpp"
#include "propagation.hpp"

namespace cmrf {

namespace {

// theta.mu over the overcomplete representation.
double linear_term(const PairwiseModel& m, const PseudoMarginals& mu) {
  double f = 0.0;
  for (int i = 0; i < m.num_vars(); ++i)
    for (int x = 0; x < m.label_count(i); ++x) f += m.theta(i, x) * mu.node[i][x];
  for (int e = 0; e < m.num_edges(); ++e) {
    auto t = m.edge_table(e);
    for (std::size_t k = 0; k < t.size(); ++k) f += t[k] * mu.edge[e][k];
  }
  return f;
}

void check_shape(const PairwiseModel& m, const PseudoMarginals& mu, const char* who) {
  if (static_cast<int>(mu.node.size()) != m.num_vars() ||
      static_cast<int>(mu.edge.size()) != m.num_edges())
    throw InputError(std::string(who) + ": pseudomarginal shape mismatch");
  for (int i = 0; i < m.num_vars(); ++i)
    if (static_cast<int>(mu.node[i].size()) != m.label_count(i))
      throw InputError(std::string(who) + ": singleton table shape mismatch");
  for (int e = 0; e < m.num_edges(); ++e) {
    const Edge& ed = m.edges()[e];
    if (static_cast<int>(mu.edge[e].size()) != m.label_count(ed.i) * m.label_count(ed.j))
      throw InputError(std::string(who) + ": edge table shape mismatch");
  }
}

}  // namespace

double bethe_free_energy(const PairwiseModel& m, const PseudoMarginals& mu,
                         double polytope_tol) {
  check_shape(m, mu, "bethe_free_energy");
  if (mu.polytope_gap(m) > polytope_tol)
    throw InputError("bethe_free_energy: pseudomarginals violate the local polytope");
  double f = linear_term(m, mu);
  for (int i = 0; i < m.num_vars(); ++i) f += entropy(mu.node[i]);
  for (int e = 0; e < m.num_edges(); ++e) {
    const Edge& ed = m.edges()[e];
    f -= mutual_information(mu.edge[e], m.label_count(ed.i), m.label_count(ed.j));
  }
  return f;
}

BpRunResult bp_run(const PairwiseModel& m, const BpConfig& cfg) {
  detail::PropagationResult r = detail::propagate(m, {}, cfg, cfg.init, /*restart=*/0);
  return {std::move(r.beliefs), r.converged, r.iters, std::move(r.messages)};
}

InferenceResult bethe_optimize(const PairwiseModel& m, const BpConfig& cfg) {
  if (cfg.restarts < 1) throw InputError("bethe_optimize: restarts must be >= 1");
  auto t0 = std::chrono::steady_clock::now();

  InferenceResult best;
  best.method = Method::Bethe;
  best.bound = Bound::None;
  if (m.is_binary() && balance_certificate(m).balanced) best.bound = Bound::Lower;

  double best_converged_value = kNegInf;
  double best_any_value = kNegInf;
  PseudoMarginals best_any;
  int best_any_iters = 0;
  bool have_converged = false;

  for (int r = 0; r < cfg.restarts; ++r) {
    BpConfig::Init init = r == 0 ? cfg.init : BpConfig::Init::Random;
    detail::PropagationResult run = detail::propagate(m, {}, cfg, init, r);
    // Loose polytope tolerance: non-fixed-point beliefs are still scored so
    // non-convergence can be reported honestly with a value attached.
    double value = bethe_free_energy(m, run.beliefs, 1e6);
    if (run.converged && value > best_converged_value) {
      best_converged_value = value;
      best.log_z = value;
      best.marginals = std::move(run.beliefs);
      best.iters = run.iters;
      have_converged = true;
    } else if (!have_converged && value > best_any_value) {
      best_any_value = value;
      best_any = std::move(run.beliefs);
      best_any_iters = run.iters;
    }
  }
  if (!have_converged) {
    best.log_z = best_any_value;
    best.marginals = std::move(best_any);
    best.iters = best_any_iters;
    best.converged = false;
  } else {
    best.converged = true;
  }
  best.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return best;
}

}  // namespace cmrf
