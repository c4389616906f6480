#include "persistwalk/laws.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace pw {

namespace {

Rat kOne(1);

std::string lattice_spec_string(const std::vector<LatticeAtom>& atoms) {
  std::ostringstream os;
  os << "lattice:{";
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (i) os << ",";
    os << atoms[i].value << ":" << rat_str(atoms[i].prob);
  }
  os << "}";
  return os.str();
}

}  // namespace

double PositiveLaw::sample(Rng& rng) const {
  switch (kind) {
    case Kind::point_mass:
      return static_cast<double>(atoms.front().value);
    case Kind::discrete: {
      double u = rng.uniform();
      double acc = 0.0;
      for (const auto& a : atoms) {
        acc += to_double(a.prob);
        if (u < acc) return static_cast<double>(a.value);
      }
      return static_cast<double>(atoms.back().value);
    }
    case Kind::geometric:
      return static_cast<double>(rng.geometric(q));
    case Kind::exponential:
      return rng.exponential(rate);
  }
  return 0.0;
}

void IncrementLaw::finalize_lattice() {
  std::sort(atoms_.begin(), atoms_.end(),
            [](const LatticeAtom& a, const LatticeAtom& b) { return a.value < b.value; });
  for (std::size_t i = 0; i + 1 < atoms_.size(); ++i)
    if (atoms_[i].value == atoms_[i + 1].value)
      fail(errc::parse_error, "duplicate lattice value " + std::to_string(atoms_[i].value));

  Rat total(0), mean(0), sig2(0), absm(0), ap(0), a0(0), am(0);
  for (const auto& a : atoms_) {
    if (a.prob < 0) fail(errc::invalid_mass, "negative mass at value " + std::to_string(a.value));
    total += a.prob;
    Rat v(static_cast<long>(a.value));
    mean += v * a.prob;
    sig2 += v * v * a.prob;
    absm += (a.value < 0 ? -v : v) * a.prob;
    if (a.value > 0)
      ap += a.prob;
    else if (a.value == 0)
      a0 += a.prob;
    else
      am += a.prob;
  }
  if (total != kOne) fail(errc::invalid_mass, "masses sum to " + rat_str(total) + ", expected 1");
  if (mean != 0) fail(errc::non_centered, "mean is " + rat_str(mean) + ", expected 0");
  if (sig2 == 0) fail(errc::zero_variance, "degenerate law: variance 0");

  a_plus_x_ = ap;
  a_zero_x_ = a0;
  a_minus_x_ = am;
  sigma2_x_ = sig2;  // second moment equals variance since the mean is 0
  abs_mean_x_ = absm;
  exact_moments_ = true;
  a_plus_d_ = to_double(ap);
  a_zero_d_ = to_double(a0);
  a_minus_d_ = to_double(am);
  sigma2_d_ = to_double(sig2);
  abs_mean_d_ = to_double(absm);

  long long g = 0;
  for (std::size_t i = 1; i < atoms_.size(); ++i)
    g = std::gcd(g, atoms_[i].value - atoms_[0].value);
  span_ = g == 0 ? 1 : g;

  // Shared denominator and integer numerators for exact DP layers.
  Int den(1);
  for (const auto& a : atoms_) {
    Int d(mpq_denref(a.prob.get_mpq_t()));
    Int g2;
    mpz_gcd(g2.get_mpz_t(), den.get_mpz_t(), d.get_mpz_t());
    den = den / g2 * d;
  }
  common_den_ = den;
  for (const auto& a : atoms_) {
    Int num = Int(mpq_numref(a.prob.get_mpq_t())) * (den / Int(mpq_denref(a.prob.get_mpq_t())));
    atom_nums_.emplace_back(a.value, num);
  }

  cdf_.resize(atoms_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    acc += to_double(atoms_[i].prob);
    cdf_[i] = acc;
  }
  cdf_.back() = 1.0;

  spec_ = lattice_spec_string(atoms_);
}

IncrementLaw IncrementLaw::lattice(std::vector<LatticeAtom> atoms) {
  if (atoms.empty()) fail(errc::invalid_mass, "empty lattice support");
  IncrementLaw law;
  law.kind_ = LawKind::lattice;
  law.atoms_ = std::move(atoms);
  law.finalize_lattice();
  return law;
}

IncrementLaw IncrementLaw::simple() {
  auto law = lattice({{1, make_rat(1, 2)}, {-1, make_rat(1, 2)}});
  law.spec_ = "simple";
  return law;
}

IncrementLaw IncrementLaw::slackened(const Rat& p0) {
  if (p0 < 0 || p0 >= 1) fail(errc::invalid_mass, "slackened p0 must lie in [0,1)");
  Rat side = (kOne - p0) / 2;
  std::vector<LatticeAtom> atoms{{-1, side}, {1, side}};
  if (p0 != 0) atoms.push_back({0, p0});
  auto law = lattice(std::move(atoms));
  law.spec_ = "slackened:p0=" + rat_str(p0);
  return law;
}

IncrementLaw IncrementLaw::geometric2(const Rat& q_plus, const Rat& q_minus, const Rat& a0) {
  if (q_plus < 0 || q_plus >= 1 || q_minus < 0 || q_minus >= 1)
    fail(errc::parse_error, "geometric ratios must lie in [0,1)");
  if (a0 < 0 || a0 >= 1) fail(errc::invalid_mass, "a0 must lie in [0,1)");
  IncrementLaw law;
  law.kind_ = LawKind::two_sided_geometric;
  law.q_plus_ = q_plus;
  law.q_minus_ = q_minus;
  law.q_plus_d_ = to_double(q_plus);
  law.q_minus_d_ = to_double(q_minus);

  // Masses from centering: a+/(1-q+) = a-/(1-q-), a+ + a- = 1 - a0.
  Rat denom = (kOne - q_plus) + (kOne - q_minus);
  Rat ap = (kOne - a0) * (kOne - q_plus) / denom;
  Rat am = (kOne - a0) * (kOne - q_minus) / denom;
  law.a_plus_x_ = ap;
  law.a_zero_x_ = a0;
  law.a_minus_x_ = am;
  // E[G] = 1/(1-q), E[G^2] = (1+q)/(1-q)^2 for a geometric on {1,2,...}.
  Rat m_plus = ap / (kOne - q_plus);
  Rat m_minus = am / (kOne - q_minus);
  law.abs_mean_x_ = m_plus + m_minus;
  law.sigma2_x_ = ap * (kOne + q_plus) / ((kOne - q_plus) * (kOne - q_plus)) +
                  am * (kOne + q_minus) / ((kOne - q_minus) * (kOne - q_minus));
  if (law.sigma2_x_ == 0) fail(errc::zero_variance, "degenerate law: variance 0");
  law.exact_moments_ = true;
  law.a_plus_d_ = to_double(ap);
  law.a_zero_d_ = to_double(a0);
  law.a_minus_d_ = to_double(am);
  law.sigma2_d_ = to_double(law.sigma2_x_);
  law.abs_mean_d_ = to_double(law.abs_mean_x_);
  law.span_ = 1;
  law.spec_ =
      "geom2:q+=" + rat_str(q_plus) + ",q-=" + rat_str(q_minus) + ",a0=" + rat_str(a0);
  return law;
}

IncrementLaw IncrementLaw::exponential2(double lambda_plus, double lambda_minus, double a0) {
  if (!(lambda_plus > 0) || !(lambda_minus > 0))
    fail(errc::parse_error, "exponential rates must be positive");
  if (a0 < 0 || a0 >= 1) fail(errc::invalid_mass, "a0 must lie in [0,1)");
  IncrementLaw law;
  law.kind_ = LawKind::two_sided_exponential;
  law.lambda_plus_ = lambda_plus;
  law.lambda_minus_ = lambda_minus;
  // a+/l+ = a-/l- with a+ + a- = 1 - a0 centers the law.
  law.a_plus_d_ = (1.0 - a0) * lambda_plus / (lambda_plus + lambda_minus);
  law.a_minus_d_ = (1.0 - a0) * lambda_minus / (lambda_plus + lambda_minus);
  law.a_zero_d_ = a0;
  law.abs_mean_d_ = 2.0 * law.a_plus_d_ / lambda_plus;
  law.sigma2_d_ = 2.0 * law.a_plus_d_ / (lambda_plus * lambda_plus) +
                  2.0 * law.a_minus_d_ / (lambda_minus * lambda_minus);
  law.span_ = 0;
  std::ostringstream os;
  os << "exp2:l+=" << lambda_plus << ",l-=" << lambda_minus;
  if (a0 != 0.0) os << ",a0=" << a0;
  law.spec_ = os.str();
  return law;
}

IncrementLaw IncrementLaw::upper_exp_lattice_down(double lambda_plus,
                                                  std::vector<LatticeAtom> lower_atoms) {
  if (!(lambda_plus > 0)) fail(errc::parse_error, "exponential rate must be positive");
  IncrementLaw law;
  law.kind_ = LawKind::upper_exp_lattice_down;
  law.lambda_plus_ = lambda_plus;
  law.atoms_ = std::move(lower_atoms);
  std::sort(law.atoms_.begin(), law.atoms_.end(),
            [](const LatticeAtom& a, const LatticeAtom& b) { return a.value < b.value; });
  Rat lower_total(0), lower_absm(0), a0(0);
  double lower_m2 = 0.0;
  for (const auto& a : law.atoms_) {
    if (a.value > 0) fail(errc::parse_error, "lower part may only carry values <= 0");
    if (a.prob < 0) fail(errc::invalid_mass, "negative mass at value " + std::to_string(a.value));
    lower_total += a.prob;
    if (a.value == 0) a0 += a.prob;
    lower_absm += Rat(static_cast<long>(-a.value)) * a.prob;
    lower_m2 += static_cast<double>(a.value) * static_cast<double>(a.value) * to_double(a.prob);
  }
  if (lower_total >= 1) fail(errc::invalid_mass, "lower part leaves no mass above 0");
  double ap = 1.0 - to_double(lower_total);
  double mean = ap / lambda_plus - to_double(lower_absm);
  if (std::fabs(mean) > 1e-12 * (ap / lambda_plus + to_double(lower_absm)))
    fail(errc::non_centered, "upper-exponential law is not centered");
  law.a_plus_d_ = ap;
  law.a_zero_d_ = to_double(a0);
  law.a_minus_d_ = to_double(lower_total - a0);
  law.abs_mean_d_ = 2.0 * ap / lambda_plus;
  law.sigma2_d_ = 2.0 * ap / (lambda_plus * lambda_plus) + lower_m2;
  if (law.sigma2_d_ <= 0) fail(errc::zero_variance, "degenerate law: variance 0");
  law.span_ = 0;
  law.spec_ = "uexp-latdown";
  double acc = 0.0;
  for (const auto& a : law.atoms_) {
    acc += to_double(a.prob);
    law.cdf_.push_back(acc);
  }
  return law;
}

const Rat& IncrementLaw::a_plus_exact() const {
  if (!exact_moments_) fail(errc::not_lattice, "exact masses exist only for integer-valued kinds");
  return a_plus_x_;
}
const Rat& IncrementLaw::a_zero_exact() const {
  if (!exact_moments_) fail(errc::not_lattice, "exact masses exist only for integer-valued kinds");
  return a_zero_x_;
}
const Rat& IncrementLaw::a_minus_exact() const {
  if (!exact_moments_) fail(errc::not_lattice, "exact masses exist only for integer-valued kinds");
  return a_minus_x_;
}
const Rat& IncrementLaw::sigma2_exact() const {
  if (!exact_moments_) fail(errc::not_lattice, "exact moments exist only for integer-valued kinds");
  return sigma2_x_;
}
const Rat& IncrementLaw::abs_mean_exact() const {
  if (!exact_moments_) fail(errc::not_lattice, "exact moments exist only for integer-valued kinds");
  return abs_mean_x_;
}

const std::vector<LatticeAtom>& IncrementLaw::atoms() const {
  if (kind_ != LawKind::lattice && kind_ != LawKind::upper_exp_lattice_down)
    fail(errc::not_lattice, "law has no finite lattice support");
  return atoms_;
}

long long IncrementLaw::min_value() const { return atoms().front().value; }
long long IncrementLaw::max_value() const { return atoms().back().value; }

const Int& IncrementLaw::common_den() const {
  if (kind_ != LawKind::lattice) fail(errc::not_lattice, "law has no finite lattice support");
  return common_den_;
}

const std::vector<std::pair<long long, Int>>& IncrementLaw::atom_numerators() const {
  if (kind_ != LawKind::lattice) fail(errc::not_lattice, "law has no finite lattice support");
  return atom_nums_;
}

PositiveLaw IncrementLaw::overshoot_law() const {
  if (!(a_plus_d_ > 0)) fail(errc::no_positive_part, "law has no mass above 0");
  PositiveLaw out;
  switch (kind_) {
    case LawKind::lattice: {
      std::vector<LatticeAtom> pos;
      for (const auto& a : atoms_)
        if (a.value > 0) pos.push_back({a.value, a.prob / a_plus_x_});
      if (pos.size() == 1 && pos[0].value == 1) {
        out.kind = PositiveLaw::Kind::point_mass;
        out.atoms = {{1, kOne}};
      } else if (pos.size() == 1) {
        out.kind = PositiveLaw::Kind::point_mass;
        out.atoms = {{pos[0].value, kOne}};
      } else {
        out.kind = PositiveLaw::Kind::discrete;
        out.atoms = std::move(pos);
      }
      return out;
    }
    case LawKind::two_sided_geometric:
      out.kind = PositiveLaw::Kind::geometric;
      out.q = q_plus_d_;
      return out;
    case LawKind::two_sided_exponential:
    case LawKind::upper_exp_lattice_down:
      out.kind = PositiveLaw::Kind::exponential;
      out.rate = lambda_plus_;
      return out;
  }
  fail(errc::no_positive_part, "unreachable");
}

IncrementLaw IncrementLaw::negated() const {
  switch (kind_) {
    case LawKind::lattice: {
      std::vector<LatticeAtom> neg;
      for (const auto& a : atoms_) neg.push_back({-a.value, a.prob});
      return lattice(std::move(neg));
    }
    case LawKind::two_sided_geometric:
      return geometric2(q_minus_, q_plus_, a_zero_x_);
    case LawKind::two_sided_exponential:
      return exponential2(lambda_minus_, lambda_plus_, a_zero_d_);
    case LawKind::upper_exp_lattice_down:
      fail(errc::not_applicable, "negation leaves the supported kinds");
  }
  fail(errc::not_applicable, "unreachable");
}

double IncrementLaw::sample(Rng& rng) const {
  switch (kind_) {
    case LawKind::lattice: {
      double u = rng.uniform();
      for (std::size_t i = 0; i < atoms_.size(); ++i)
        if (u < cdf_[i]) return static_cast<double>(atoms_[i].value);
      return static_cast<double>(atoms_.back().value);
    }
    case LawKind::two_sided_geometric: {
      double u = rng.uniform();
      if (u < a_plus_d_) return static_cast<double>(rng.geometric(q_plus_d_));
      if (u < a_plus_d_ + a_minus_d_) return -static_cast<double>(rng.geometric(q_minus_d_));
      return 0.0;
    }
    case LawKind::two_sided_exponential: {
      double u = rng.uniform();
      if (u < a_plus_d_) return rng.exponential(lambda_plus_);
      if (u < a_plus_d_ + a_minus_d_) return -rng.exponential(lambda_minus_);
      return 0.0;
    }
    case LawKind::upper_exp_lattice_down: {
      double u = rng.uniform();
      double lower = 1.0 - a_plus_d_;
      if (u >= lower) return rng.exponential(lambda_plus_);
      for (std::size_t i = 0; i < atoms_.size(); ++i)
        if (u < cdf_[i]) return static_cast<double>(atoms_[i].value);
      return static_cast<double>(atoms_.back().value);
    }
  }
  return 0.0;
}

WalkClassification classify(const IncrementLaw& law) {
  WalkClassification c;
  c.integer_valued = law.integer_valued();
  c.two_sided_exponential = law.kind() == LawKind::two_sided_exponential;
  c.upper_exponential = c.two_sided_exponential || law.kind() == LawKind::upper_exp_lattice_down;
  c.lower_exponential = c.two_sided_exponential;
  c.upper_geometric = law.kind() == LawKind::two_sided_geometric && law.a_plus() > 0;
  c.lower_geometric = law.kind() == LawKind::two_sided_geometric && law.a_minus() > 0;

  if (law.kind() == LawKind::lattice) {
    const auto& atoms = law.atoms();
    c.right_continuous = atoms.back().value <= 1;
    c.left_continuous = atoms.front().value >= -1;
    c.symmetric = true;
    for (const auto& a : atoms) {
      Rat mirror(0);
      for (const auto& b : atoms)
        if (b.value == -a.value) mirror = b.prob;
      if (mirror != a.prob) {
        c.symmetric = false;
        break;
      }
    }
  } else if (law.kind() == LawKind::two_sided_geometric) {
    c.symmetric = law.q_plus_exact() == law.q_minus_exact();
  } else if (law.kind() == LawKind::two_sided_exponential) {
    c.symmetric = law.lambda_plus() == law.lambda_minus();
  }

  c.slackened_simple = c.symmetric && c.right_continuous && c.left_continuous;
  c.theorem1_applies = c.integer_valued || c.upper_exponential;
  c.theorem2_part1_applies = (c.upper_geometric || c.right_continuous) &&
                             (c.lower_geometric || c.left_continuous);
  c.theorem2_part2_applies =
      c.two_sided_exponential || (c.theorem2_part1_applies && c.symmetric);
  return c;
}

double prop1_constant(const IncrementLaw& law) {
  auto c = classify(law);
  const bool two_sided_class = c.theorem2_part1_applies || c.theorem2_part2_applies;
  const bool upper_exp = c.upper_exponential;
  if (!two_sided_class && !upper_exp)
    fail(errc::not_applicable, "law is in neither tail-constant class");
  const double sigma = std::sqrt(law.sigma2());
  const double c_two_sided = (1.0 - law.a_zero()) * law.abs_mean() /
                             (std::sqrt(2.0 * M_PI) * law.a_plus() * law.a_minus() * sigma);
  const double c_upper_exp = std::sqrt(2.0 / M_PI) * sigma / law.abs_mean();
  if (two_sided_class && upper_exp) {
    if (std::fabs(c_two_sided - c_upper_exp) > 1e-12 * std::fabs(c_two_sided))
      fail(errc::not_applicable, "tail-constant formulas disagree beyond 1e-12");
  }
  return two_sided_class ? c_two_sided : c_upper_exp;
}

namespace {

// key=value parameter lists like "q+=1/2,q-=1/2,a0=0".
std::vector<std::pair<std::string, std::string>> parse_kv(const std::string& body) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t pos = 0;
  while (pos < body.size()) {
    std::size_t comma = body.find(',', pos);
    std::string item = body.substr(pos, comma == std::string::npos ? comma : comma - pos);
    std::size_t eq = item.find('=');
    if (eq == std::string::npos) fail(errc::parse_error, "expected key=value, got '" + item + "'");
    out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::string find_kv(const std::vector<std::pair<std::string, std::string>>& kv,
                    const std::string& key, const std::string& spec) {
  for (const auto& [k, v] : kv)
    if (k == key) return v;
  fail(errc::parse_error, "law spec '" + spec + "' is missing '" + key + "'");
}

}  // namespace

IncrementLaw parse_law(const std::string& spec) {
  if (spec == "simple") return IncrementLaw::simple();
  std::size_t colon = spec.find(':');
  std::string head = spec.substr(0, colon);
  std::string body = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (head == "slackened") {
    auto kv = parse_kv(body);
    return IncrementLaw::slackened(parse_rat(find_kv(kv, "p0", spec)));
  }
  if (head == "geom2") {
    auto kv = parse_kv(body);
    return IncrementLaw::geometric2(parse_rat(find_kv(kv, "q+", spec)),
                                    parse_rat(find_kv(kv, "q-", spec)),
                                    parse_rat(find_kv(kv, "a0", spec)));
  }
  if (head == "exp2") {
    auto kv = parse_kv(body);
    double a0 = 0.0;
    for (const auto& [k, v] : kv)
      if (k == "a0") a0 = std::stod(v);
    return IncrementLaw::exponential2(std::stod(find_kv(kv, "l+", spec)),
                                      std::stod(find_kv(kv, "l-", spec)), a0);
  }
  if (head == "lattice") {
    if (body.size() < 2 || body.front() != '{' || body.back() != '}')
      fail(errc::parse_error, "lattice spec must look like lattice:{v:p,...}, got '" + spec + "'");
    std::vector<LatticeAtom> atoms;
    std::string inner = body.substr(1, body.size() - 2);
    std::size_t pos = 0;
    while (pos < inner.size()) {
      std::size_t comma = inner.find(',', pos);
      std::string item = inner.substr(pos, comma == std::string::npos ? comma : comma - pos);
      std::size_t sep = item.find(':');
      if (sep == std::string::npos)
        fail(errc::parse_error, "expected value:prob, got '" + item + "'");
      atoms.push_back({std::stoll(item.substr(0, sep)), parse_rat(item.substr(sep + 1))});
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    return IncrementLaw::lattice(std::move(atoms));
  }
  fail(errc::parse_error, "unknown law spec '" + spec + "'");
}

}  // namespace pw
