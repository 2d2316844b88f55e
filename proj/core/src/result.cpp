#include "cmrf/result.hpp"

#include <cmath>

#include "cmrf/errors.hpp"

namespace cmrf {

const char* to_string(Method m) {
  switch (m) {
    case Method::MF: return "MF";
    case Method::Bethe: return "Bethe";
    case Method::TRW: return "TRW";
    case Method::Exact: return "Exact";
  }
  return "?";
}

const char* to_string(Bound b) {
  switch (b) {
    case Bound::Lower: return "lower";
    case Bound::Upper: return "upper";
    case Bound::None: return "none";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  std::string t;
  for (char c : s) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (t == "mf" || t == "meanfield") return Method::MF;
  if (t == "bethe" || t == "bp") return Method::Bethe;
  if (t == "trw" || t == "trwbp") return Method::TRW;
  if (t == "exact") return Method::Exact;
  throw InputError("unknown method: " + s);
}

FactorizedMarginals FactorizedMarginals::uniform(const PairwiseModel& m) {
  FactorizedMarginals q;
  q.mu.resize(m.num_vars());
  for (int i = 0; i < m.num_vars(); ++i)
    q.mu[i].assign(m.label_count(i), 1.0 / m.label_count(i));
  return q;
}

bool FactorizedMarginals::valid_for(const PairwiseModel& m, double tol) const {
  if (static_cast<int>(mu.size()) != m.num_vars()) return false;
  for (int i = 0; i < m.num_vars(); ++i) {
    if (static_cast<int>(mu[i].size()) != m.label_count(i)) return false;
    double s = 0.0;
    for (double v : mu[i]) {
      if (v < 0.0 || !std::isfinite(v)) return false;
      s += v;
    }
    if (std::abs(s - 1.0) > tol) return false;
  }
  return true;
}

double PseudoMarginals::polytope_gap(const PairwiseModel& m) const {
  double gap = 0.0;
  for (int i = 0; i < m.num_vars(); ++i) {
    double s = 0.0;
    for (double v : node[i]) {
      s += v;
      if (v < 0.0) gap = std::max(gap, -v);
    }
    gap = std::max(gap, std::abs(s - 1.0));
  }
  for (int e = 0; e < m.num_edges(); ++e) {
    const Edge& ed = m.edges()[e];
    int Li = m.label_count(ed.i), Lj = m.label_count(ed.j);
    double s = 0.0;
    for (double v : edge[e]) {
      s += v;
      if (v < 0.0) gap = std::max(gap, -v);
    }
    gap = std::max(gap, std::abs(s - 1.0));
    for (int a = 0; a < Li; ++a) {
      double row = 0.0;
      for (int b = 0; b < Lj; ++b) row += edge[e][a * Lj + b];
      gap = std::max(gap, std::abs(row - node[ed.i][a]));
    }
    for (int b = 0; b < Lj; ++b) {
      double col = 0.0;
      for (int a = 0; a < Li; ++a) col += edge[e][a * Lj + b];
      gap = std::max(gap, std::abs(col - node[ed.j][b]));
    }
  }
  return gap;
}

std::span<const double> InferenceResult::singleton(int i) const {
  if (const auto* f = std::get_if<FactorizedMarginals>(&marginals)) {
    if (i < static_cast<int>(f->mu.size())) return f->mu[i];
    return {};
  }
  const auto& p = std::get<PseudoMarginals>(marginals);
  if (i < static_cast<int>(p.node.size())) return p.node[i];
  return {};
}

bool InferenceResult::has_marginals() const {
  if (const auto* f = std::get_if<FactorizedMarginals>(&marginals)) return !f->mu.empty();
  return !std::get<PseudoMarginals>(marginals).node.empty();
}

}  // namespace cmrf
