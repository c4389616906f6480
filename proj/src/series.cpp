#include "persistwalk/series.hpp"

#include <algorithm>
#include <cmath>

namespace pw {

RationalSeries::RationalSeries(long long order, std::string label) : label_(std::move(label)) {
  if (order < 0) fail(errc::parse_error, "series order must be >= 0");
  c_.assign(static_cast<std::size_t>(order) + 1, Rat(0));
}

RationalSeries RationalSeries::from_coeffs(std::vector<Rat> coeffs, std::string label) {
  if (coeffs.empty()) fail(errc::parse_error, "series needs at least the constant term");
  RationalSeries s(static_cast<long long>(coeffs.size()) - 1, std::move(label));
  s.c_ = std::move(coeffs);
  return s;
}

RationalSeries RationalSeries::operator+(const RationalSeries& o) const {
  const long long n = std::min(order(), o.order());
  RationalSeries out(n);
  for (long long k = 0; k <= n; ++k) out.at(k) = coeff(k) + o.coeff(k);
  return out;
}

RationalSeries RationalSeries::operator-(const RationalSeries& o) const {
  const long long n = std::min(order(), o.order());
  RationalSeries out(n);
  for (long long k = 0; k <= n; ++k) out.at(k) = coeff(k) - o.coeff(k);
  return out;
}

RationalSeries RationalSeries::operator*(const RationalSeries& o) const {
  const long long n = std::min(order(), o.order());
  RationalSeries out(n);
  for (long long i = 0; i <= n; ++i) {
    if (coeff(i) == 0) continue;
    for (long long j = 0; i + j <= n; ++j) {
      if (o.coeff(j) == 0) continue;
      out.at(i + j) += coeff(i) * o.coeff(j);
    }
  }
  return out;
}

RationalSeries RationalSeries::log() const {
  if (coeff(0) != 1) fail(errc::bad_constant_term, "log needs constant term 1");
  const long long n = order();
  RationalSeries g(n, "log(" + label_ + ")");
  for (long long k = 1; k <= n; ++k) {
    Rat acc = coeff(k);
    for (long long j = 1; j < k; ++j) acc -= Rat(static_cast<long>(j)) * g.coeff(j) * coeff(k - j) / Rat(static_cast<long>(k));
    g.at(k) = acc;
  }
  return g;
}

RationalSeries RationalSeries::exp() const {
  if (coeff(0) != 0) fail(errc::bad_constant_term, "exp needs constant term 0");
  const long long n = order();
  RationalSeries g(n, "exp(" + label_ + ")");
  g.at(0) = 1;
  for (long long k = 1; k <= n; ++k) {
    Rat acc(0);
    for (long long j = 1; j <= k; ++j) acc += Rat(static_cast<long>(j)) * coeff(j) * g.coeff(k - j);
    g.at(k) = acc / Rat(static_cast<long>(k));
  }
  return g;
}

RationalSeries RationalSeries::sqrt() const {
  if (coeff(0) != 1) fail(errc::bad_constant_term, "sqrt needs constant term 1");
  const long long n = order();
  RationalSeries s(n, "sqrt(" + label_ + ")");
  s.at(0) = 1;
  for (long long k = 1; k <= n; ++k) {
    Rat acc = coeff(k);
    for (long long j = 1; j < k; ++j) acc -= s.coeff(j) * s.coeff(k - j);
    s.at(k) = acc / 2;
  }
  return s;
}

namespace {

using CycleMap = std::map<std::pair<long long, long long>, Rat>;

CycleMap convolve(const CycleMap& a, const CycleMap& b, long long order) {
  CycleMap out;
  for (const auto& [ka, ma] : a) {
    for (const auto& [kb, mb] : b) {
      const long long theta = ka.first + kb.first;
      if (theta > order) break;  // b is ordered by theta first
      out[{theta, ka.second + kb.second}] += ma * mb;
    }
  }
  return out;
}

}  // namespace

SignMassTable sign_mass_table(const BivariateCycleLaw& cycle_law, long long order) {
  if (cycle_law.truncation < order)
    fail(errc::truncation_too_short,
         "cycle law truncated at " + std::to_string(cycle_law.truncation) +
             " cannot support order " + std::to_string(order));
  SignMassTable table;
  table.order = order;
  CycleMap base;
  for (const auto& [key, mass] : cycle_law.entries)
    if (key.first <= order) base[key] = mass;

  CycleMap conv = base;
  while (!conv.empty()) {
    std::map<long long, Rat> neg, zero, total;
    for (const auto& [key, mass] : conv) {
      total[key.first] += mass;
      if (key.second < 0)
        neg[key.first] += mass;
      else if (key.second == 0)
        zero[key.first] += mass;
    }
    table.neg.push_back(std::move(neg));
    table.zero.push_back(std::move(zero));
    table.total.push_back(std::move(total));
    conv = convolve(conv, base, order);
  }
  return table;
}

RationalSeries zeta_from_cycle_law(const BivariateCycleLaw& cycle_law, long long order) {
  if (cycle_law.truncation < order)
    fail(errc::truncation_too_short,
         "cycle law truncated at " + std::to_string(cycle_law.truncation) +
             " cannot support order " + std::to_string(order));
  RationalSeries zeta(order, "zeta");
  for (const auto& [key, mass] : cycle_law.entries)
    if (key.first <= order) zeta.at(key.first) += mass;
  return zeta;
}

namespace {

RationalSeries chi_from_table(const SignMassTable& table, long long order) {
  RationalSeries log_side(order, "log-series");
  for (std::size_t k = 0; k < table.neg.size(); ++k) {
    const Rat inv_k(1, static_cast<long>(k + 1));
    for (const auto& [l, mass] : table.neg[k])
      if (l <= order) log_side.at(l) += inv_k * mass;
  }
  // ln 1/(1-chi) = M  =>  chi = 1 - exp(-M)
  RationalSeries minus_m(order);
  for (long long l = 0; l <= order; ++l) minus_m.at(l) = -log_side.coeff(l);
  RationalSeries chi = minus_m.exp();
  for (long long l = 0; l <= order; ++l) chi.at(l) = -chi.coeff(l);
  chi.at(0) += 1;
  chi.set_label("chi");
  return chi;
}

RationalSeries h_from_table(const SignMassTable& table, long long order) {
  RationalSeries h(order, "H");
  for (std::size_t k = 0; k < table.zero.size(); ++k) {
    const Rat inv_2k(1, 2 * static_cast<long>(k + 1));
    for (const auto& [l, mass] : table.zero[k])
      if (l <= order && l >= 1) h.at(l) += inv_2k * mass;
  }
  return h;
}

}  // namespace

RationalSeries chi_from_cycle_law(const BivariateCycleLaw& cycle_law, long long order) {
  return chi_from_table(sign_mass_table(cycle_law, order), order);
}

RationalSeries h_series(const BivariateCycleLaw& cycle_law, long long order) {
  return h_from_table(sign_mass_table(cycle_law, order), order);
}

SeriesIdentityReport check_factorization(const BivariateCycleLaw& cycle_law, long long order,
                                         const std::string& identity) {
  if (identity != "xi-zeta" && identity != "lattice-H")
    fail(errc::parse_error, "unknown identity '" + identity + "'");
  auto table = sign_mass_table(cycle_law, order);
  RationalSeries chi = chi_from_table(table, order);
  RationalSeries zeta = zeta_from_cycle_law(cycle_law, order);

  RationalSeries one_minus_chi(order);
  one_minus_chi.at(0) = 1;
  for (long long l = 0; l <= order; ++l) one_minus_chi.at(l) -= chi.coeff(l);

  RationalSeries one_minus_zeta(order);
  one_minus_zeta.at(0) = 1;
  for (long long l = 0; l <= order; ++l) one_minus_zeta.at(l) -= zeta.coeff(l);

  RationalSeries rhs = one_minus_zeta.sqrt();
  if (identity == "lattice-H") rhs = rhs * h_from_table(table, order).exp();

  SeriesIdentityReport rep;
  rep.identity = identity;
  rep.order = order;
  rep.max_abs_diff = 0;
  for (long long l = 0; l <= order; ++l) {
    rep.lhs.push_back(one_minus_chi.coeff(l));
    rep.rhs.push_back(rhs.coeff(l));
    Rat d = one_minus_chi.coeff(l) - rhs.coeff(l);
    rep.diff.push_back(d);
    Rat ad = d < 0 ? Rat(-d) : d;
    if (ad > rep.max_abs_diff) rep.max_abs_diff = ad;
  }
  return rep;
}

TailFit tauberian_fit(const std::vector<TailPoint>& points) {
  if (points.size() < 8) fail(errc::insufficient_data, "need at least 8 tail points");
  double n_min = points.front().n, n_max = points.front().n;
  for (const auto& p : points) {
    if (!(p.n > 0) || !(p.value > 0))
      fail(errc::insufficient_data, "tail points must be positive");
    n_min = std::min(n_min, p.n);
    n_max = std::max(n_max, p.n);
  }
  if (n_max < 100.0 * n_min)
    fail(errc::insufficient_data, "tail points must span at least two decades");

  const bool weighted = std::all_of(points.begin(), points.end(),
                                    [](const TailPoint& p) { return p.stderr_ > 0; });
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : points) {
    const double x = std::log(p.n);
    const double y = std::log(p.value);
    const double se_log = weighted ? p.stderr_ / p.value : 1.0;
    const double w = 1.0 / (se_log * se_log);
    sw += w;
    sx += w * x;
    sy += w * y;
    sxx += w * x * x;
    sxy += w * x * y;
  }
  const double xbar = sx / sw, ybar = sy / sw;
  const double sxx_c = sxx - sw * xbar * xbar;
  const double sxy_c = sxy - sw * xbar * ybar;
  TailFit fit;
  fit.slope = sxy_c / sxx_c;
  const double intercept = ybar - fit.slope * xbar;
  fit.prefactor = std::exp(intercept);
  fit.p = 1.0 + fit.slope;

  double ss_res = 0, ss_tot = 0;
  for (const auto& p : points) {
    const double x = std::log(p.n);
    const double y = std::log(p.value);
    const double se_log = weighted ? p.stderr_ / p.value : 1.0;
    const double w = 1.0 / (se_log * se_log);
    const double r = y - (intercept + fit.slope * x);
    ss_res += w * r * r;
    ss_tot += w * (y - ybar) * (y - ybar);
  }
  fit.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  const double dof = static_cast<double>(points.size()) - 2.0;
  const double var_scale = weighted ? 1.0 : ss_res / dof;
  fit.slope_se = std::sqrt(var_scale / sxx_c);
  fit.degenerate = std::fabs(fit.slope) < std::max(0.01, 2.0 * fit.slope_se);
  return fit;
}

}  // namespace pw
