#pragma once

#include <iosfwd>
#include <string>

#include "cmrf/model.hpp"

namespace cmrf {

// UAI MARKOV format. Tables are exponentiated potentials on write and logged
// on read; zero (or negative) table entries are rejected since they have no
// finite log-potential. Only singleton and pairwise scopes are accepted;
// repeated scopes are merged by multiplication.
PairwiseModel read_uai(std::istream& in);
void write_uai(std::ostream& out, const PairwiseModel& m);

// Native text format, log scale:
//   n m
//   i L_i                (n lines)
//   <scope>              (m factor blocks: "i" singleton or "i j" pairwise)
//   <row-major log table>
PairwiseModel read_native(std::istream& in);
void write_native(std::ostream& out, const PairwiseModel& m);

// Dispatch by extension: ".uai" -> UAI, anything else -> native.
PairwiseModel load_model(const std::string& path);
void save_model(const std::string& path, const PairwiseModel& m);

}  // namespace cmrf
