#include "cmrf/meanfield.hpp"

#include <chrono>
#include <cmath>

#include "cmrf/errors.hpp"
#include "cmrf/numeric.hpp"
#include "cmrf/rng.hpp"

namespace cmrf {

double mf_free_energy(const PairwiseModel& m, const FactorizedMarginals& q) {
  if (!q.valid_for(m, 1e-9)) throw InputError("mf_free_energy: marginals do not match model");
  double f = 0.0;
  for (int i = 0; i < m.num_vars(); ++i) {
    for (int x = 0; x < m.label_count(i); ++x) f += m.theta(i, x) * q.mu[i][x];
    f += entropy(q.mu[i]);
  }
  for (int e = 0; e < m.num_edges(); ++e) {
    const Edge& ed = m.edges()[e];
    auto t = m.edge_table(e);
    int Lj = m.label_count(ed.j);
    for (int a = 0; a < m.label_count(ed.i); ++a)
      for (int b = 0; b < Lj; ++b)
        f += t[a * Lj + b] * q.mu[ed.i][a] * q.mu[ed.j][b];
  }
  return f;
}

namespace {

// Mean field of var given the neighbors' marginals, then softmax in place.
void update_site(const PairwiseModel& m, std::vector<std::vector<double>>& mu, int var) {
  int L = m.label_count(var);
  std::vector<double> field(m.theta(var).begin(), m.theta(var).end());
  for (const auto& [j, e] : m.neighbors(var)) {
    auto t = m.edge_table(e);
    int Lj = m.label_count(j);
    bool var_is_row = m.edges()[e].i == var;
    for (int x = 0; x < L; ++x) {
      double s = 0.0;
      for (int y = 0; y < Lj; ++y)
        s += (var_is_row ? t[x * Lj + y] : t[y * L + x]) * mu[j][y];
      field[x] += s;
    }
  }
  double lse = log_sum_exp(field);
  for (int x = 0; x < L; ++x) mu[var][x] = std::exp(field[x] - lse);
}

}  // namespace

FactorizedMarginals mf_update(const PairwiseModel& m, const FactorizedMarginals& q, int var) {
  if (!q.valid_for(m, 1e-9)) throw InputError("mf_update: marginals do not match model");
  if (var < 0 || var >= m.num_vars()) throw InputError("mf_update: variable out of range");
  FactorizedMarginals out = q;
  update_site(m, out.mu, var);
  return out;
}

InferenceResult mf_optimize(const PairwiseModel& m, const MfConfig& cfg) {
  if (cfg.tol <= 0.0 || cfg.max_sweeps < 1 || cfg.restarts < 1)
    throw InputError("mf_optimize: invalid config");
  if (cfg.init == MfConfig::Init::Warm &&
      (!cfg.warm || !cfg.warm->valid_for(m, 1e-9)))
    throw InputError("mf_optimize: warm start requested without valid marginals");

  auto t0 = std::chrono::steady_clock::now();
  InferenceResult best;
  best.method = Method::MF;
  best.bound = Bound::Lower;
  best.log_z = kNegInf;
  SplitMix64 rng(stream_key(cfg.seed, /*tag=*/0x6d66 /* "mf" */));

  for (int r = 0; r < cfg.restarts; ++r) {
    FactorizedMarginals q;
    if (r == 0 && cfg.init == MfConfig::Init::Warm) {
      q = *cfg.warm;
    } else if (r == 0 && cfg.init == MfConfig::Init::Uniform) {
      q = FactorizedMarginals::uniform(m);
    } else {
      q.mu.resize(m.num_vars());
      for (int i = 0; i < m.num_vars(); ++i) q.mu[i] = dirichlet_uniform(rng, m.label_count(i));
    }

    bool converged = m.num_vars() == 0;
    int sweeps = 0;
    std::vector<double> prev;
    for (; sweeps < cfg.max_sweeps && !converged; ) {
      double change = 0.0;
      for (int i = 0; i < m.num_vars(); ++i) {
        prev = q.mu[i];
        update_site(m, q.mu, i);
        for (int x = 0; x < m.label_count(i); ++x)
          change = std::max(change, std::abs(q.mu[i][x] - prev[x]));
      }
      ++sweeps;
      converged = change < cfg.tol;
    }
    double value = mf_free_energy(m, q);
    if (value > best.log_z) {
      best.log_z = value;
      best.marginals = std::move(q);
      best.converged = converged;
      best.iters = sweeps;
    }
  }
  best.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return best;
}

}  // namespace cmrf
