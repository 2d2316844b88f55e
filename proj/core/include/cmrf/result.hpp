#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cmrf/model.hpp"

namespace cmrf {

enum class Method { MF, Bethe, TRW, Exact };
enum class Bound { Lower, Upper, None };

const char* to_string(Method m);
const char* to_string(Bound b);
Method method_from_string(const std::string& s);

// Fully factorized marginals: one distribution per variable.
struct FactorizedMarginals {
  std::vector<std::vector<double>> mu;

  static FactorizedMarginals uniform(const PairwiseModel& m);
  bool valid_for(const PairwiseModel& m, double tol = 1e-12) const;
};

// Local-polytope pseudomarginals: singleton and per-edge tables (edge tables
// row-major in the model's canonical i<j orientation).
struct PseudoMarginals {
  std::vector<std::vector<double>> node;
  std::vector<std::vector<double>> edge;

  // Largest violation of normalization / pairwise consistency.
  double polytope_gap(const PairwiseModel& m) const;
};

struct InferenceResult {
  double log_z = 0.0;
  Method method = Method::Exact;
  Bound bound = Bound::None;
  bool converged = true;
  int iters = 0;
  double wall_time_s = 0.0;
  std::variant<FactorizedMarginals, PseudoMarginals> marginals;

  // Singleton marginal of variable i, whichever representation is held.
  // Empty when marginals were not computed.
  std::span<const double> singleton(int i) const;
  bool has_marginals() const;
};

}  // namespace cmrf
