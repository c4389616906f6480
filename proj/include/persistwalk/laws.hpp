#pragma once

#include <optional>
#include <string>
#include <vector>

#include "persistwalk/errors.hpp"
#include "persistwalk/rational.hpp"
#include "persistwalk/rng.hpp"

namespace pw {

enum class LawKind {
  lattice,                      // finite integer support, exact rational masses
  two_sided_geometric,          // geometric tails both sides, optional atom at 0
  two_sided_exponential,        // exponential tails both sides, optional atom at 0
  upper_exp_lattice_down,       // exponential above 0, finite lattice at/below 0
};

struct LatticeAtom {
  long long value;
  Rat prob;
};

// Law(S1 | S1 > 0). The overshoot distribution of a walk over any level it
// up-crosses coincides with this law exactly when the kind is memoryless
// (point mass at 1 / geometric / exponential).
struct PositiveLaw {
  enum class Kind { point_mass, discrete, geometric, exponential } kind;
  std::vector<LatticeAtom> atoms;  // point_mass / discrete
  double q = 0.0;                  // geometric: P{k} = (1-q) q^(k-1)
  double rate = 0.0;               // exponential

  double sample(Rng& rng) const;
};

struct WalkClassification {
  bool integer_valued = false;
  bool upper_exponential = false;
  bool lower_exponential = false;
  bool upper_geometric = false;
  bool lower_geometric = false;
  bool right_continuous = false;
  bool left_continuous = false;
  bool symmetric = false;
  bool two_sided_exponential = false;
  bool slackened_simple = false;
  bool theorem1_applies = false;
  bool theorem2_part1_applies = false;
  bool theorem2_part2_applies = false;
};

// A centered step distribution. Immutable after construction; all sampling
// goes through an explicit Rng, so instances can be shared across threads.
class IncrementLaw {
 public:
  static IncrementLaw lattice(std::vector<LatticeAtom> atoms);
  static IncrementLaw simple();
  static IncrementLaw slackened(const Rat& p0);
  static IncrementLaw geometric2(const Rat& q_plus, const Rat& q_minus, const Rat& a0);
  static IncrementLaw exponential2(double lambda_plus, double lambda_minus, double a0 = 0.0);
  static IncrementLaw upper_exp_lattice_down(double lambda_plus, std::vector<LatticeAtom> lower_atoms);

  LawKind kind() const { return kind_; }
  const std::string& spec_string() const { return spec_; }

  // Sign masses. Exact values exist for the integer-valued kinds.
  double a_plus() const { return a_plus_d_; }
  double a_zero() const { return a_zero_d_; }
  double a_minus() const { return a_minus_d_; }
  const Rat& a_plus_exact() const;
  const Rat& a_zero_exact() const;
  const Rat& a_minus_exact() const;

  double sigma2() const { return sigma2_d_; }
  double abs_mean() const { return abs_mean_d_; }
  const Rat& sigma2_exact() const;
  const Rat& abs_mean_exact() const;

  // Lattice span: gcd of support differences; 0 for continuous kinds.
  long long span() const { return span_; }
  bool integer_valued() const {
    return kind_ == LawKind::lattice || kind_ == LawKind::two_sided_geometric;
  }
  bool finite_support() const { return kind_ == LawKind::lattice; }

  // Finite-lattice accessors (errc::not_lattice otherwise).
  const std::vector<LatticeAtom>& atoms() const;
  long long min_value() const;
  long long max_value() const;
  // Common denominator D and per-atom integer numerators, for DP layers whose
  // level-k masses all live over D^k.
  const Int& common_den() const;
  const std::vector<std::pair<long long, Int>>& atom_numerators() const;

  double lambda_plus() const { return lambda_plus_; }
  double lambda_minus() const { return lambda_minus_; }
  double q_plus() const { return q_plus_d_; }
  double q_minus() const { return q_minus_d_; }
  const Rat& q_plus_exact() const { return q_plus_; }
  const Rat& q_minus_exact() const { return q_minus_; }

  PositiveLaw overshoot_law() const;
  IncrementLaw negated() const;

  double sample(Rng& rng) const;

 private:
  IncrementLaw() = default;
  void finalize_lattice();

  LawKind kind_ = LawKind::lattice;
  std::string spec_;

  std::vector<LatticeAtom> atoms_;  // lattice kind, sorted by value
  std::vector<double> cdf_;         // sampling table for the lattice kind
  Rat q_plus_, q_minus_;            // two_sided_geometric
  double q_plus_d_ = 0, q_minus_d_ = 0;
  double lambda_plus_ = 0, lambda_minus_ = 0;

  Rat a_plus_x_, a_zero_x_, a_minus_x_, sigma2_x_, abs_mean_x_;
  bool exact_moments_ = false;
  double a_plus_d_ = 0, a_zero_d_ = 0, a_minus_d_ = 0;
  double sigma2_d_ = 0, abs_mean_d_ = 0;
  long long span_ = 0;

  Int common_den_ = 1;
  std::vector<std::pair<long long, Int>> atom_nums_;
};

WalkClassification classify(const IncrementLaw& law);

// The tail constant of Prop.-1(b) type joint-tail limits. Uses the
// two-sided-class formula (1-a0) E|S1| / (sqrt(2 pi) a+ a- sigma) when the
// law is in the two-sided class, the upper-exponential formula
// sqrt(2/pi) sigma / E|S1| otherwise; when both apply they must agree to
// 1e-12 relative and the first is returned.
double prop1_constant(const IncrementLaw& law);

// Law spec grammar: simple | slackened:p0=<rat> | geom2:q+=<rat>,q-=<rat>,a0=<rat>
//                 | exp2:l+=<real>,l-=<real> | lattice:{v:p,v:p,...}
IncrementLaw parse_law(const std::string& spec);

}  // namespace pw
