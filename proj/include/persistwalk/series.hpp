#pragma once

#include <map>
#include <string>
#include <vector>

#include "persistwalk/exactdp.hpp"
#include "persistwalk/rational.hpp"

namespace pw {

// Truncated power series with exact rational coefficients c_0..c_L.
// Arithmetic is closed at the order: terms above L are discarded.
class RationalSeries {
 public:
  explicit RationalSeries(long long order, std::string label = "derived");
  static RationalSeries from_coeffs(std::vector<Rat> coeffs, std::string label = "derived");

  long long order() const { return static_cast<long long>(c_.size()) - 1; }
  const Rat& coeff(long long k) const { return c_.at(static_cast<std::size_t>(k)); }
  Rat& at(long long k) { return c_.at(static_cast<std::size_t>(k)); }
  const std::string& label() const { return label_; }
  void set_label(std::string label) { label_ = std::move(label); }

  RationalSeries operator+(const RationalSeries& o) const;
  RationalSeries operator-(const RationalSeries& o) const;
  RationalSeries operator*(const RationalSeries& o) const;
  bool operator==(const RationalSeries& o) const { return c_ == o.c_; }

  RationalSeries log() const;   // needs c0 == 1
  RationalSeries exp() const;   // needs c0 == 0
  RationalSeries sqrt() const;  // needs c0 == 1

 private:
  std::vector<Rat> c_;
  std::string label_;
};

// Per-k sign masses of k-fold cycle convolutions truncated at total duration
// L: neg[k][l] = P{xi_1+...+xi_k < 0, theta_1+...+theta_k = l}, and likewise
// for the zero and unconditioned masses.
struct SignMassTable {
  long long order = 0;
  std::vector<std::map<long long, Rat>> neg, zero, total;  // index k-1
};

SignMassTable sign_mass_table(const BivariateCycleLaw& cycle_law, long long order);

// Generating function of theta: coefficient of t^l is P{theta = l}.
RationalSeries zeta_from_cycle_law(const BivariateCycleLaw& cycle_law, long long order);

// Generating function of the first-passage time tau_nu, where nu is the
// first k with xi_1+...+xi_k < 0, assembled from the log-series
// ln 1/(1-chi) = sum_{k,l} t^l/k P{sum xi < 0, sum theta = l}.
RationalSeries chi_from_cycle_law(const BivariateCycleLaw& cycle_law, long long order);

// H(t) = 1/2 sum_{k,l} t^l/k P{sum xi = 0, sum theta = l}.
RationalSeries h_series(const BivariateCycleLaw& cycle_law, long long order);

struct SeriesIdentityReport {
  std::string identity;
  long long order = 0;
  std::vector<Rat> lhs, rhs, diff;  // 1-chi vs the factorized side
  Rat max_abs_diff;
  bool exact() const { return max_abs_diff == 0; }
};

// identity "xi-zeta":   1 - chi = sqrt(1 - zeta)
// identity "lattice-H": 1 - chi = sqrt(1 - zeta) * e^{H}
SeriesIdentityReport check_factorization(const BivariateCycleLaw& cycle_law, long long order,
                                         const std::string& identity);

struct TailPoint {
  double n = 0;
  double value = 0;
  double stderr_ = 0;  // 0 = unweighted
};

struct TailFit {
  double slope = 0;      // d log(value) / d log(n)
  double slope_se = 0;
  double p = 0;          // 1 + slope: tail n^{p-1} convention
  double prefactor = 0;  // A in value ~ A n^slope
  double r2 = 0;
  bool degenerate = false;  // slope indistinguishable from 0
};

// Weighted log-log regression of a positive tail. Needs >= 8 points spanning
// >= 2 decades in n (errc::insufficient_data otherwise).
TailFit tauberian_fit(const std::vector<TailPoint>& points);

}  // namespace pw
