#pragma once

#include <cstdint>
#include <string>

#include "cmrf/model.hpp"

namespace cmrf {

// Random / structured binary model families. theta and W draws use streams
// keyed per variable and per vertex pair, so topology changes never perturb
// unrelated draws for the same seed.
struct GenSpec {
  enum class Family { Grid, Erdos, Regular, Complete, SymmetricCycle, SymmetricComplete };
  Family family = Family::Grid;

  int n = 9;              // variable count (non-grid families)
  int rows = 3, cols = 3; // grid
  bool toroidal = true;
  double erdos_p = -1.0;  // < 0 means 4/(n-1), average degree 4
  int degree = 4;         // regular family

  double theta_lo = -2.0, theta_hi = 2.0;
  double w_lo = -6.0, w_hi = 6.0;
  double symmetric_w = 6.0;  // symmetric families: theta = 0, all W equal

  std::uint64_t seed = 0;

  int var_count() const { return family == Family::Grid ? rows * cols : n; }
};

GenSpec parse_family(const std::string& name);  // grid|erdos|regular|complete|cycle

// Deterministic in spec+seed. Regular graphs are simple and connected via
// rejection (RetryError if the budget is exhausted).
PairwiseModel generate(const GenSpec& spec);

// One-line provenance string embedded in CSV headers.
std::string describe(const GenSpec& spec);

}  // namespace cmrf
