#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace cmrf {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(sum_i exp(a_i)), max-shifted. Empty input yields -inf.
inline double log_sum_exp(std::span<const double> a) {
  double m = kNegInf;
  for (double v : a) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : a) s += std::exp(v - m);
  return m + std::log(s);
}

inline double log_sum_exp(const std::vector<double>& a) {
  return log_sum_exp(std::span<const double>(a));
}

inline double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// x*log(x) with the 0*log(0) = 0 convention.
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

// Shannon entropy in nats of an (assumed normalized) distribution.
inline double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) h -= xlogx(v);
  return h;
}

inline double entropy(const std::vector<double>& p) {
  return entropy(std::span<const double>(p));
}

// Mutual information of a joint table (row-major rows x cols), nats.
inline double mutual_information(std::span<const double> joint, int rows, int cols) {
  std::vector<double> pr(rows, 0.0), pc(cols, 0.0);
  for (int a = 0; a < rows; ++a)
    for (int b = 0; b < cols; ++b) {
      pr[a] += joint[a * cols + b];
      pc[b] += joint[a * cols + b];
    }
  return entropy(pr) + entropy(pc) - entropy(joint);
}

// In-place normalization to sum 1; returns the original sum.
inline double normalize(std::span<double> p) {
  double s = 0.0;
  for (double v : p) s += v;
  if (s > 0.0)
    for (double& v : p) v /= s;
  return s;
}

}  // namespace cmrf
