#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace polydiff {

// Bad input: shape or space mismatch, out-of-range parameter.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A structural invariant was found broken (e.g. a rate matrix with a
// positive row sum, an asymmetric coefficient tensor).
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Requested state space exceeds the configured dense-storage budget.
class MemoryGuardError : public std::length_error {
 public:
  MemoryGuardError(const std::string& what, double dense_states, double symmetric_states)
      : std::length_error(what), dense_states_(dense_states), symmetric_states_(symmetric_states) {}

  double dense_states() const { return dense_states_; }
  double symmetric_states() const { return symmetric_states_; }

 private:
  double dense_states_;
  double symmetric_states_;
};

// Explicit time stepping blew up (norm growth beyond the monitor tolerance).
class InstabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace polydiff
