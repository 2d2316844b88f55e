#pragma once

#include <stdexcept>
#include <string>

namespace cmrf {

// Invalid argument: out-of-range labels, malformed tables, polytope violations.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// Problem instance exceeds a hard resource bound (state space, induced width,
// combinatorial search budget).
class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

// Operation defined only for a restricted model class (e.g. binary-only
// selection heuristics).
class UnsupportedError : public std::runtime_error {
 public:
  explicit UnsupportedError(const std::string& what) : std::runtime_error(what) {}
};

// No candidate left to select.
class ExhaustionError : public std::runtime_error {
 public:
  explicit ExhaustionError(const std::string& what) : std::runtime_error(what) {}
};

// Randomized construction ran out of rejection budget; retry with another seed.
class RetryError : public std::runtime_error {
 public:
  explicit RetryError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cmrf
