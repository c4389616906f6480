#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "persistwalk/laws.hpp"
#include "persistwalk/rational.hpp"

namespace pw {

inline constexpr std::size_t kDefaultStateBudget = 100'000'000;

// Exact probability that A_1,...,A_N all stay >= 0, by forward DP over
// states (k, S_k, A_k) with exact rational mass. States that cannot reach a
// negative area within the remaining horizon are absorbed into a certain-
// success aggregate, which caps the growth of the area coordinate. With
// `tilted`, S_1 is drawn from Law(S_1 | S_1 > 0).
Rat exact_pN(const IncrementLaw& law, long long n, bool tilted = false,
             std::size_t state_budget = kDefaultStateBudget);

// Exhaustive path enumeration; the independent oracle for exact_pN. No state
// merging and no success pruning, so the two share no logic beyond the law.
Rat brute_force_pN(const IncrementLaw& law, long long n, bool tilted = false,
                   double path_budget = 1e8);

enum class CycleKind { zero_cycle, overshoot_cycle };

// Exact joint law of (theta, xi) for the first cycle, truncated at duration
// L; `defect` is the mass of cycles longer than L, so entries + defect = 1
// exactly. Zero-cycle laws of centered integer walks satisfy
// P(theta, xi) = P(theta, -xi) entry by entry.
struct BivariateCycleLaw {
  CycleKind kind = CycleKind::zero_cycle;
  long long truncation = 0;
  std::map<std::pair<long long, long long>, Rat> entries;  // (theta, xi) -> mass
  Rat defect;

  std::map<long long, Rat> theta_marginal() const;
  Rat total_mass() const;
  bool xi_symmetric() const;
};

BivariateCycleLaw exact_cycle_law(const IncrementLaw& law, long long truncation, CycleKind kind,
                                  std::size_t state_budget = kDefaultStateBudget);

// Law of (theta+, xi+) alone: the first weakly-nonnegative run of the tilted
// walk, ended by the first strictly negative value. Convolving this with its
// mirror image under the negated law reproduces the full cycle law exactly
// when the down-crossing overshoot is memoryless.
std::map<std::pair<long long, long long>, Rat> exact_positive_run_law(
    const IncrementLaw& law, long long truncation, std::size_t state_budget = kDefaultStateBudget);

// Ladder-epoch constants and exact tail tables for a finite lattice walk.
// Per-n probabilities come out of an exact convolution DP and are accumulated
// in long double (64-bit mantissa).
struct LadderConstants {
  // partial sums through n, index n-1
  std::vector<long double> c_plus;
  std::vector<long double> c_zero;
  std::vector<long double> c_minus;
  // P{tau+ > n} = P{min_{1<=i<=n} U_i >= 0}, and the mirror tail
  std::vector<long double> tau_plus_tail;
  std::vector<long double> tau_minus_tail;
  // P{theta0 > n}: no completed return to zero by time n
  std::vector<long double> theta0_tail;
};

LadderConstants ladder_constants(const IncrementLaw& law, long long depth,
                                 std::size_t state_budget = kDefaultStateBudget);

}  // namespace pw
