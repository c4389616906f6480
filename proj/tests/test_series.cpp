#include <doctest.h>

#include <cmath>

#include "persistwalk/series.hpp"

using namespace pw;

namespace {

RationalSeries one_minus_t_squared(long long order) {
  RationalSeries s(order);
  s.at(0) = 1;
  if (order >= 2) s.at(2) = -1;
  return s;
}

// First-passage coefficients of tau_nu straight from the definition: walk
// over cycle sequences (theta_i, xi_i) until the running xi sum first goes
// negative. Independent of the generating-function pipeline.
std::vector<Rat> tau_nu_coeffs_by_enumeration(const BivariateCycleLaw& law, long long order) {
  std::vector<Rat> out(static_cast<std::size_t>(order) + 1, Rat(0));
  struct Frame {
    long long theta;
    long long xi;
    Rat mass;
  };
  std::vector<std::pair<std::pair<long long, long long>, Rat>> atoms(law.entries.begin(),
                                                                     law.entries.end());
  // depth-first over sequences with total duration <= order
  auto rec = [&](auto&& self, long long theta_sum, long long xi_sum, const Rat& mass) -> void {
    for (const auto& [key, m] : atoms) {
      const long long theta = theta_sum + key.first;
      if (theta > order) continue;
      const long long xi = xi_sum + key.second;
      Rat w = mass * m;
      if (xi < 0)
        out[static_cast<std::size_t>(theta)] += w;  // nu happened here, tau_nu = theta
      else
        self(self, theta, xi, w);
    }
  };
  rec(rec, 0, 0, Rat(1));
  return out;
}

}  // namespace

TEST_CASE("sqrt of 1 - t^2 has the halved binomial coefficients") {
  auto s = one_minus_t_squared(8).sqrt();
  CHECK(s.coeff(0) == 1);
  CHECK(s.coeff(2) == make_rat(-1, 2));
  CHECK(s.coeff(4) == make_rat(-1, 8));
  CHECK(s.coeff(6) == make_rat(-1, 16));
  CHECK(s.coeff(8) == make_rat(-5, 128));
  CHECK(s.coeff(1) == 0);
  CHECK(s.coeff(3) == 0);
}

TEST_CASE("log of 1/(1-t) is the harmonic series") {
  RationalSeries denom(8);
  denom.at(0) = 1;
  denom.at(1) = -1;
  // 1/(1-t) via the sqrt/log identities is overkill; build it directly
  RationalSeries geom(8);
  for (long long k = 0; k <= 8; ++k) geom.at(k) = 1;
  auto lg = geom.log();
  for (long long k = 1; k <= 8; ++k) CHECK(lg.coeff(k) == Rat(1, static_cast<long>(k)));
}

TEST_CASE("exp and log invert; sqrt squares back") {
  RationalSeries f(10);
  f.at(0) = 1;
  f.at(1) = make_rat(1, 2);
  f.at(2) = make_rat(3, 7);
  f.at(3) = make_rat(-2, 5);
  f.at(5) = make_rat(9, 11);
  f.at(7) = make_rat(-1, 13);
  CHECK(f.log().exp() == f);
  auto r = f.sqrt();
  CHECK(r * r == f);
}

TEST_CASE("constant-term preconditions") {
  RationalSeries f(4);
  f.at(0) = 2;
  CHECK_THROWS_AS(f.log(), Error);
  CHECK_THROWS_AS(f.sqrt(), Error);
  RationalSeries g(4);
  g.at(0) = 1;
  CHECK_THROWS_AS(g.exp(), Error);
}

TEST_CASE("zeta of simple-walk zero cycles matches 1 - sqrt(1 - t^2)") {
  auto cl = exact_cycle_law(IncrementLaw::simple(), 12, CycleKind::zero_cycle);
  auto zeta = zeta_from_cycle_law(cl, 12);
  auto closed = one_minus_t_squared(12).sqrt();
  CHECK(zeta.coeff(0) == 0);
  for (long long k = 1; k <= 12; ++k) {
    CAPTURE(k);
    CHECK(zeta.coeff(k) == -closed.coeff(k));
  }
}

TEST_CASE("zeta is a sub-probability series under truncation") {
  auto cl = exact_cycle_law(IncrementLaw::simple(), 10, CycleKind::zero_cycle);
  auto zeta = zeta_from_cycle_law(cl, 10);
  Rat total(0);
  for (long long k = 0; k <= 10; ++k) total += zeta.coeff(k);
  CHECK(total < 1);
  CHECK(total + cl.defect == 1);
  CHECK_THROWS_AS(zeta_from_cycle_law(cl, 11), Error);  // truncation too short
}

TEST_CASE("chi matches direct first-passage enumeration") {
  for (const char* spec : {"simple", "lattice:{-2:1/4,-1:1/4,1:1/4,2:1/4}"}) {
    CAPTURE(spec);
    auto law = parse_law(spec);
    const long long order = 8;
    auto zero = exact_cycle_law(law, order, CycleKind::zero_cycle);
    auto chi = chi_from_cycle_law(zero, order);
    auto direct = tau_nu_coeffs_by_enumeration(zero, order);
    for (long long l = 0; l <= order; ++l) {
      CAPTURE(l);
      CHECK(chi.coeff(l) == direct[static_cast<std::size_t>(l)]);
    }
  }
}

TEST_CASE("lattice factorization is exact for simple and slackened zero cycles") {
  for (const char* spec : {"simple", "slackened:p0=1/2", "slackened:p0=1/4"}) {
    CAPTURE(spec);
    auto cl = exact_cycle_law(parse_law(spec), 12, CycleKind::zero_cycle);
    auto rep = check_factorization(cl, 12, "lattice-H");
    CHECK(rep.max_abs_diff == 0);
    CHECK(rep.exact());
  }
}

TEST_CASE("H-corrected factorization also holds on symmetric overshoot cycles") {
  // The positive-run overshoot of the simple walk is a point mass, so the
  // cycle area is symmetric and 1 - chi = sqrt(1 - zeta) e^H exactly.
  auto cl = exact_cycle_law(IncrementLaw::simple(), 12, CycleKind::overshoot_cycle);
  CHECK(cl.xi_symmetric());
  auto rep = check_factorization(cl, 12, "lattice-H");
  CHECK(rep.max_abs_diff == 0);
}

TEST_CASE("bare square-root factorization fails on lattice overshoot cycles") {
  // Cycles with xi = 0 carry positive mass on any lattice walk, which shows
  // up as the e^H factor; without it the identity misses exactly that mass.
  auto cl = exact_cycle_law(IncrementLaw::simple(), 8, CycleKind::overshoot_cycle);
  auto rep = check_factorization(cl, 8, "xi-zeta");
  CHECK(rep.max_abs_diff > 0);
  auto h = h_series(cl, 8);
  Rat h_total(0);
  for (long long l = 0; l <= 8; ++l) h_total += h.coeff(l);
  CHECK(h_total > 0);
}

TEST_CASE("sign masses split in half for symmetric cycle areas") {
  // With (theta, xi) =d (theta, -xi): P{sum xi < 0, sum theta = l} equals
  // (P{sum theta = l} - P{sum xi = 0, sum theta = l}) / 2 for every k, l.
  for (const char* spec : {"simple", "slackened:p0=1/2", "lattice:{2:1/3,-1:2/3}"}) {
    CAPTURE(spec);
    auto cl = exact_cycle_law(parse_law(spec), 10, CycleKind::zero_cycle);
    auto table = sign_mass_table(cl, 10);
    for (std::size_t k = 0; k < table.neg.size(); ++k) {
      for (const auto& [l, total] : table.total[k]) {
        Rat zero(0), neg(0);
        auto zit = table.zero[k].find(l);
        if (zit != table.zero[k].end()) zero = zit->second;
        auto nit = table.neg[k].find(l);
        if (nit != table.neg[k].end()) neg = nit->second;
        CAPTURE(k);
        CAPTURE(l);
        CHECK(neg == (total - zero) / 2);
      }
    }
  }
}

TEST_CASE("single-cycle zero mass is empty for the simple walk") {
  // zero cycles of the simple walk stay one-signed, so a single cycle never
  // has area 0, and every theta0 is even.
  auto cl = exact_cycle_law(IncrementLaw::simple(), 12, CycleKind::zero_cycle);
  auto table = sign_mass_table(cl, 12);
  CHECK(table.zero[0].empty());
  auto h = h_series(cl, 12);
  for (long long l = 1; l <= 12; l += 2) CHECK(h.coeff(l) == 0);
  // H(1) partial sums stay under the walk's own c0 scale (= ln 2).
  Rat h_total(0);
  for (long long l = 0; l <= 12; ++l) h_total += h.coeff(l);
  CHECK(to_double(h_total) < std::log(2.0));
}

TEST_CASE("tail fit recovers a clean power law") {
  std::vector<TailPoint> pts;
  for (long long n = 16; n <= 65536; n *= 2)
    pts.push_back({static_cast<double>(n), 2.0 * std::pow(static_cast<double>(n), -0.25), 0.0});
  auto fit = tauberian_fit(pts);
  CHECK(fit.slope == doctest::Approx(-0.25).epsilon(1e-9));
  CHECK(fit.p == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(fit.prefactor == doctest::Approx(2.0).epsilon(1e-9));
  CHECK_FALSE(fit.degenerate);
}

TEST_CASE("tail fit on exact ladder tails finds the half exponent") {
  auto lc = ladder_constants(IncrementLaw::simple(), 4096);
  std::vector<TailPoint> pts;
  for (long long n = 16; n <= 4096; n *= 2)
    pts.push_back({static_cast<double>(n), static_cast<double>(lc.tau_plus_tail[n - 1]), 0.0});
  auto fit = tauberian_fit(pts);
  CHECK(fit.slope > -0.52);
  CHECK(fit.slope < -0.48);
}

TEST_CASE("tail fit rejects unusable inputs") {
  std::vector<TailPoint> few = {{1, 1, 0}, {2, 1, 0}, {4, 1, 0}};
  CHECK_THROWS_AS(tauberian_fit(few), Error);
  std::vector<TailPoint> narrow;
  for (long long n = 16; n <= 64; n += 8) narrow.push_back({(double)n, 1.0 / n, 0});
  CHECK_THROWS_AS(tauberian_fit(narrow), Error);
  std::vector<TailPoint> nonpos;
  for (long long n = 1; n <= 4096; n *= 2) nonpos.push_back({(double)n, 0.0, 0});
  CHECK_THROWS_AS(tauberian_fit(nonpos), Error);
}

TEST_CASE("a constant tail is flagged degenerate") {
  std::vector<TailPoint> pts;
  for (long long n = 4; n <= 16384; n *= 2) pts.push_back({(double)n, 0.125, 0});
  auto fit = tauberian_fit(pts);
  CHECK(fit.degenerate);
  CHECK(std::fabs(fit.slope) < 0.01);
}
