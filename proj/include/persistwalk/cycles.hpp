#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "persistwalk/laws.hpp"
#include "persistwalk/rng.hpp"

namespace pw {

// One simulated path: increments X_k, partial sums S_k and integrated sums
// A_k for k = 1..N (index 0 of each vector is k=1). Values are doubles; for
// integer-valued laws every entry is a small integer, so the arithmetic is
// exact.
struct Trajectory {
  std::vector<double> increments;
  std::vector<double> sums;
  std::vector<double> areas;
  bool tilted = false;
};

Trajectory simulate_trajectory(const IncrementLaw& law, std::size_t n, bool tilted, Rng& rng);

// A cycle of the tilted walk: the maximal weakly-nonnegative run (theta+,
// xi+) followed by the maximal weakly-nonpositive run (theta-, xi-), ending
// the step before the next strict up-crossing of zero.
struct Cycle {
  long long theta_plus = 0;
  long long theta_minus = 0;
  double xi_plus = 0.0;
  double xi_minus = 0.0;
  long long theta() const { return theta_plus + theta_minus; }
  double xi() const { return xi_plus + xi_minus; }
};

struct ZeroCycle {
  long long theta0 = 0;
  long long xi0 = 0;
};

inline constexpr long long kDefaultCycleStepCap = 1'000'000'000;

// Streaming decomposition of one tilted walk into consecutive cycles. The
// up-crossing value that ends cycle n is the first value of cycle n+1, so the
// stream is the literal decomposition of a single trajectory.
class CycleStream {
 public:
  CycleStream(const IncrementLaw& law, Rng rng, long long step_cap = kDefaultCycleStepCap);

  // Next cycle; throws errc::cycle_budget_exceeded if the cap is hit.
  Cycle next();

  // Next cycle, or nullopt if the cap censored it (the walk restarts fresh).
  std::optional<Cycle> next_censored();

 private:
  std::optional<Cycle> run(bool throw_on_cap);
  const IncrementLaw* law_;
  PositiveLaw overshoot_;
  Rng rng_;
  long long step_cap_;
  std::optional<double> pending_first_;
};

// Streaming decomposition of an integer-valued walk into return-to-zero
// cycles. A cycle may start with a run of zero steps; it ends at the first
// k with S_k = 0 and S_{k-1} != 0.
class ZeroCycleStream {
 public:
  ZeroCycleStream(const IncrementLaw& law, Rng rng, long long step_cap = kDefaultCycleStepCap);
  ZeroCycle next();
  std::optional<ZeroCycle> next_censored();

 private:
  std::optional<ZeroCycle> run(bool throw_on_cap);
  const IncrementLaw* law_;
  Rng rng_;
  long long step_cap_;
};

std::vector<Cycle> decompose_cycles(const IncrementLaw& law, std::size_t n_cycles, Rng& rng,
                                    long long step_cap = kDefaultCycleStepCap);

// Complete cycles of an explicit tilted path (values S~_1, S~_2, ...); a
// trailing unfinished cycle is dropped.
std::vector<Cycle> decompose_path(const std::vector<double>& tilted_values);
std::vector<ZeroCycle> decompose_zero_cycles(const IncrementLaw& law, std::size_t n_cycles,
                                             Rng& rng,
                                             long long step_cap = kDefaultCycleStepCap);

struct SandwichReport {
  bool pass = false;
  long long eta = 0;              // complete cycles within the horizon
  long long first_violation = -1; // cycle index of the first failed check
  bool censored = false;          // straddling cycle did not finish in budget
};

// Pathwise consistency of the cycle decomposition on an explicit tilted path:
// (i) for every n <= eta(N)+1, min_{k<=tau_n} A_k >= 0 iff the minimum over
// cycle-boundary prefixes of the xi sums is >= 0; (ii) eta(N) agrees with
// max{k : theta_1+...+theta_k <= N}; (iii) the cycle areas reconstruct
// A_{tau_n}. Requires the path to contain eta(N)+1 complete cycles
// (errc::incomplete_cycles otherwise).
SandwichReport sandwich_check_path(const std::vector<double>& tilted_values, std::size_t horizon,
                                   bool integer_valued);

// Simulates a tilted path long enough for the check above; extension past the
// horizon is bounded by extension_cap steps (censored report if exceeded).
SandwichReport sandwich_check(const IncrementLaw& law, std::size_t horizon, Rng& rng,
                              long long extension_cap = 1'000'000);

}  // namespace pw
