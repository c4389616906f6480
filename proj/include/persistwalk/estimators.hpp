#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "persistwalk/cycles.hpp"
#include "persistwalk/laws.hpp"

namespace pw {

struct MCEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  std::string description;
};

enum class PathFunctional {
  integrated_min,  // all A_k >= 0
  walk_min,        // all S_k >= 0 (control experiment)
};

// Fraction of simulated trajectories whose functional stays nonnegative
// through the horizon; terminates each path at the first violation. Results
// are bit-identical for any worker count (fixed chunking).
MCEstimate mc_p(const IncrementLaw& law, long long horizon, std::uint64_t reps, bool tilted,
                std::uint64_t seed, unsigned workers,
                PathFunctional functional = PathFunctional::integrated_min);

struct ExponentPoint {
  double n = 0;
  double value = 0;
  double stderr_ = 0;
};

struct ExponentFit {
  double slope = 0;
  double slope_se = 0;
  double ci_lo = 0;  // 95% interval
  double ci_hi = 0;
  double intercept = 0;
};

// Weighted least-squares slope of log(value) against log(n). Needs >= 6
// points whose n-range spans a factor >= 30.
ExponentFit exponent_fit(const std::vector<ExponentPoint>& points);

enum class TailEvent {
  xi_plus,     // xi+ > s n^{3/2}, theta+ > t n
  xi_minus,    // xi- < -s n^{3/2}, theta- > t n
  xi_full,     // xi  > s n^{3/2}, theta  > t n
  theta_only,  // theta+ > t n
  zero_cycle,  // xi0 > s n^{3/2}, theta0 > t n
};

struct TailCurvePoint {
  double n = 0;
  double scaled = 0;   // sqrt(n) * estimate
  double stderr_ = 0;  // of the scaled estimate
  double raw = 0;
  std::uint64_t decided = 0;
  std::uint64_t censored = 0;
};

struct TailCurve {
  std::vector<TailCurvePoint> points;
  std::string scaling = "sqrt(n)*P";
  double theory = 0.0;
  bool theory_attached = false;
};

// Estimates sqrt(n) P{event at scale n} over the grid from `reps` cycles per
// grid point, attaching the limit constant (via the tail constant and the
// excursion functional F) when the law hypothesis supports it. Cycles whose
// event is still undecided after cycle_cap steps are censored and reported.
TailCurve joint_tail(const IncrementLaw& law, double s, double t,
                     const std::vector<long long>& n_grid, std::uint64_t reps, TailEvent which,
                     std::uint64_t seed, unsigned workers, long long cycle_cap = 1'000'000,
                     std::span<const double> xi_ex_samples = {});

struct SymmetryReport {
  std::uint64_t n_used = 0;
  std::uint64_t n_pos = 0, n_neg = 0, n_zero = 0;
  std::uint64_t censored = 0;
  double sign_z = 0;        // (n_pos - n_neg) / sqrt(n_pos + n_neg)
  double sign_z_crit = 0;
  double ks_stat = 0;       // split-sample KS distance between xi and -xi
  double ks_threshold = 0;
  double max_stratum_z = 0; // worst dyadic-theta stratum, Bonferroni-adjusted
  double stratum_z_crit = 0;
  bool upper_exponential = false;  // hypothesis under which symmetry is a theorem
  bool pass = false;
};

// Two-sided sign test plus a split-sample KS distance between xi and -xi,
// with per-stratum sign tests across dyadic theta buckets; rejects at the
// given level.
SymmetryReport xi_symmetry_test(const IncrementLaw& law, std::uint64_t reps, std::uint64_t seed,
                                unsigned workers, long long cycle_cap = 1'000'000,
                                double level = 1e-3);

struct AssociationCell {
  double a = 0, b = 0;
  double cov = 0;
  double stderr_ = 0;
};

struct AssociationReport {
  std::vector<double> xi_thresholds;
  std::vector<double> theta_thresholds;
  std::vector<AssociationCell> cells;  // row-major over (a, b)
  int violations = 0;                  // cells with cov < -5 stderr
  std::uint64_t n_used = 0;
  std::uint64_t censored = 0;
};

// Empirical cov(1{xi > a}, 1{theta+ > b}) over a grid of empirical quantile
// thresholds. Association predicts every covariance >= 0; cells below
// -5 stderr are flagged.
AssociationReport association_scan(const IncrementLaw& law, std::size_t grid_size,
                                   std::uint64_t reps, std::uint64_t seed, unsigned workers,
                                   long long cycle_cap = 10'000'000);

struct InequalityCheck {
  MCEstimate lhs, rhs;
  double margin_sigmas = 0;  // (rhs - lhs) / combined sigma
  bool ok = false;           // lhs <= rhs within 3 sigma
};

struct ChainReport {
  long long horizon = 0;
  // upper chain: p~_N <= P{tau_nu > N}
  InequalityCheck upper;
  // lower chain: P{min prefix xi >= 0} * P{sum theta+ > N} <= p~_N
  MCEstimate min_xi_prefix, theta_sum_tail;
  double product = 0, product_se = 0;
  InequalityCheck lower;  // lhs = product bound, rhs = p~_N
  // integer-valued variant: p_N <= P{tau0_nu0 > N}
  std::optional<InequalityCheck> upper_zero;
  std::vector<double> egorov_partial_sums;  // sum_{k<=n} (P{prefix_k > 0} - 1/2)/k
  std::uint64_t censored_reps = 0;
};

ChainReport chain_checks(const IncrementLaw& law, long long horizon, std::uint64_t reps,
                         std::uint64_t seed, unsigned workers, long long cycle_cap = 100'000);

}  // namespace pw
