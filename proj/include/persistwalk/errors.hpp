#pragma once

#include <stdexcept>
#include <string>

namespace pw {

// Error taxonomy shared by the library and the CLI. Each condition that a
// caller can reasonably branch on gets its own code; the message carries the
// offending token or value.
enum class errc {
  non_centered,
  invalid_mass,
  zero_variance,
  no_positive_part,
  not_applicable,
  degenerate_law,
  cycle_budget_exceeded,
  not_lattice,
  state_budget_exceeded,
  too_large,
  overshoot_not_discrete,
  hypothesis_not_met,
  bad_constant_term,
  truncation_too_short,
  insufficient_data,
  empty_sample,
  invalid_region,
  incomplete_cycles,
  parse_error,
};

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw Error(code, what); }

}  // namespace pw
