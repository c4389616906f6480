#include <doctest.h>

#include <cmath>

#include "persistwalk/exactdp.hpp"

using namespace pw;

namespace {

const char* kZoo[] = {"simple", "slackened:p0=1/4", "slackened:p0=1/2",
                      "lattice:{-2:1/4,-1:1/4,1:1/4,2:1/4}", "lattice:{2:1/3,-1:2/3}"};

long double binom_central_over_4m(long long m) {
  // C(2m, m) 4^{-m} via the stable product recursion.
  long double b = 1.0L;
  for (long long j = 1; j <= m; ++j) b *= (2.0L * j - 1.0L) / (2.0L * j);
  return b;
}

}  // namespace

TEST_CASE("small exact persistence probabilities of the simple walk") {
  auto simple = IncrementLaw::simple();
  CHECK(exact_pN(simple, 1) == make_rat(1, 2));
  CHECK(exact_pN(simple, 2) == make_rat(1, 2));
  CHECK(exact_pN(simple, 3) == make_rat(1, 2));
  CHECK(exact_pN(simple, 4) == make_rat(7, 16));
}

TEST_CASE("DP equals exhaustive enumeration across the law zoo") {
  for (const char* spec : kZoo) {
    CAPTURE(spec);
    auto law = parse_law(spec);
    for (long long n = 1; n <= 9; ++n) {
      CAPTURE(n);
      CHECK(exact_pN(law, n) == brute_force_pN(law, n));
    }
  }
}

TEST_CASE("first step sets p_1 = a+ + a0") {
  for (const char* spec : kZoo) {
    CAPTURE(spec);
    auto law = parse_law(spec);
    CHECK(exact_pN(law, 1) == law.a_plus_exact() + law.a_zero_exact());
  }
}

TEST_CASE("p_N is nonincreasing in N") {
  for (const char* spec : kZoo) {
    CAPTURE(spec);
    auto law = parse_law(spec);
    Rat prev(1);
    for (long long n = 1; n <= 16; ++n) {
      Rat p = exact_pN(law, n);
      CHECK(p <= prev);
      prev = p;
    }
  }
}

TEST_CASE("tilted DP: p_N = a+ p~_N when a0 = 0") {
  auto simple = IncrementLaw::simple();
  for (long long n = 1; n <= 12; ++n) {
    CAPTURE(n);
    CHECK(exact_pN(simple, n) == make_rat(1, 2) * exact_pN(simple, n, true));
  }
  CHECK(exact_pN(simple, 6, true) == brute_force_pN(simple, 6, true));
}

TEST_CASE("conditioning on the leading zero-step run") {
  // p_N = sum_{n<N} a0^n a+ p~_{N-n} + a0^N, splitting on the number of
  // initial zero steps (the all-zero path survives outright).
  auto law = parse_law("slackened:p0=1/4");
  const Rat a0 = law.a_zero_exact();
  const Rat ap = law.a_plus_exact();
  for (long long n = 2; n <= 8; ++n) {
    CAPTURE(n);
    Rat rhs(0);
    Rat a0_pow(1);
    for (long long j = 0; j < n; ++j) {
      rhs += a0_pow * ap * exact_pN(law, n - j, true);
      a0_pow *= a0;
    }
    rhs += a0_pow;
    CHECK(exact_pN(law, n) == rhs);
  }
}

TEST_CASE("enumeration budget guard") {
  CHECK_THROWS_AS(brute_force_pN(IncrementLaw::simple(), 40), Error);
}

TEST_CASE("geometric and continuous laws have no finite exact state space") {
  auto geom = IncrementLaw::geometric2(make_rat(1, 2), make_rat(1, 2), Rat(0));
  CHECK_THROWS_AS(exact_pN(geom, 4), Error);
  CHECK_THROWS_AS(exact_pN(IncrementLaw::exponential2(1, 1), 4), Error);
}

TEST_CASE("state budget trips with an explicit horizon") {
  auto law = parse_law("lattice:{2:1/3,-1:2/3}");
  CHECK_THROWS_WITH_AS(exact_pN(law, 64, false, 10), doctest::Contains("state budget"), Error);
}

TEST_CASE("zero-cycle law of the simple walk") {
  auto cl = exact_cycle_law(IncrementLaw::simple(), 12, CycleKind::zero_cycle);
  CHECK(cl.entries.at({2, 1}) == make_rat(1, 4));
  CHECK(cl.entries.at({2, -1}) == make_rat(1, 4));
  auto marg = cl.theta_marginal();
  CHECK(marg.at(2) == make_rat(1, 2));
  CHECK(marg.at(4) == make_rat(1, 8));
  CHECK(marg.at(6) == make_rat(1, 16));
  CHECK(cl.xi_symmetric());
  CHECK(cl.total_mass() + cl.defect == 1);
}

TEST_CASE("zero-cycle law of the skew lattice walk") {
  auto law = parse_law("lattice:{2:1/3,-1:2/3}");
  auto cl = exact_cycle_law(law, 12, CycleKind::zero_cycle);
  // shortest return: 0 -> 2 -> 1 -> 0 with area 3, probability 4/27; its
  // mirror 0 -> -1 -> -2 -> 0 is -3; the two-signed 0 -> -1 -> 1 -> 0 is 0.
  CHECK(cl.entries.at({3, 3}) == make_rat(4, 27));
  CHECK(cl.entries.at({3, -3}) == make_rat(4, 27));
  CHECK(cl.entries.at({3, 0}) == make_rat(4, 27));
  CHECK(cl.xi_symmetric());
  CHECK(cl.total_mass() + cl.defect == 1);
}

TEST_CASE("zero-cycle symmetry is exact for slackened walks") {
  auto cl = exact_cycle_law(parse_law("slackened:p0=1/2"), 10, CycleKind::zero_cycle);
  CHECK(cl.xi_symmetric());
  // a zero step cannot end a cycle: theta0 >= 2 always
  for (const auto& [key, mass] : cl.entries) CHECK(key.first >= 2);
}

TEST_CASE("overshoot cycles of the simple walk") {
  auto cl = exact_cycle_law(IncrementLaw::simple(), 10, CycleKind::overshoot_cycle);
  // shortest cycle: values 1, 0, -1, 0 then an up-cross, four steps of
  // probability 1/2 each; the nonnegative run must reach 0 before a negative
  // value, and the up-cross happens from 0.
  CHECK(cl.entries.at({4, 0}) == make_rat(1, 16));
  CHECK(cl.total_mass() + cl.defect == 1);
  for (const auto& [key, mass] : cl.entries) {
    CHECK(key.first >= 4);
    CHECK(key.first % 2 == 0);
  }
}

TEST_CASE("cycle phases are independent for a slackened walk") {
  // The joint cycle law equals the positive-run law convolved with the
  // mirrored positive-run law of the negated walk.
  auto law = parse_law("slackened:p0=1/2");
  const long long trunc = 8;
  auto joint = exact_cycle_law(law, trunc, CycleKind::overshoot_cycle);
  auto pos = exact_positive_run_law(law, trunc);
  auto neg_mirror = exact_positive_run_law(law.negated(), trunc);
  std::map<std::pair<long long, long long>, Rat> product;
  for (const auto& [kp, mp] : pos)
    for (const auto& [kn, mn] : neg_mirror) {
      if (kp.first + kn.first > trunc) continue;
      product[{kp.first + kn.first, kp.second - kn.second}] += mp * mn;
    }
  for (const auto& [key, mass] : joint.entries) {
    CAPTURE(key.first);
    CAPTURE(key.second);
    auto it = product.find(key);
    REQUIRE(it != product.end());
    CHECK(it->second == mass);
  }
}

TEST_CASE("exact cycle laws reject continuous overshoots") {
  CHECK_THROWS_AS(exact_cycle_law(IncrementLaw::exponential2(1, 1), 8, CycleKind::zero_cycle),
                  Error);
}

TEST_CASE("ladder constants of the simple walk") {
  auto lc = ladder_constants(IncrementLaw::simple(), 512);

  // c0 partial sums against the direct binomial series sum_m C(2m,m)4^{-m}/(2m).
  long double direct = 0.0L;
  for (long long m = 1; m <= 256; ++m) direct += binom_central_over_4m(m) / (2.0L * m);
  CHECK(std::fabs(static_cast<double>(lc.c_zero[511] - direct)) < 1e-12);

  // symmetric walk: c+ = c- = -c0/2
  CHECK(static_cast<double>(lc.c_plus[511]) ==
        doctest::Approx(static_cast<double>(lc.c_minus[511])).epsilon(1e-15));
  CHECK(static_cast<double>(lc.c_plus[511] + lc.c_zero[511] / 2.0L) ==
        doctest::Approx(0.0).epsilon(1e-12));

  // P{theta0 > 2m} = C(2m,m) 4^{-m} for the simple walk.
  for (long long m : {1LL, 2LL, 5LL, 64LL, 256LL}) {
    CAPTURE(m);
    CHECK(static_cast<double>(lc.theta0_tail[2 * m - 1]) ==
          doctest::Approx(static_cast<double>(binom_central_over_4m(m))).epsilon(1e-13));
  }

  // tau+ tails are exact survival probabilities; cross-check by enumeration.
  for (long long n : {1LL, 2LL, 3LL, 8LL, 11LL}) {
    CAPTURE(n);
    long long stay = 0;
    for (long long mask = 0; mask < (1LL << n); ++mask) {
      long long s = 0;
      bool ok = true;
      for (long long k = 0; k < n; ++k) {
        s += (mask >> k) & 1 ? 1 : -1;
        if (s < 0) {
          ok = false;
          break;
        }
      }
      if (ok) ++stay;
    }
    const double expect = static_cast<double>(stay) / std::pow(2.0, static_cast<double>(n));
    CHECK(static_cast<double>(lc.tau_plus_tail[n - 1]) == doctest::Approx(expect).epsilon(1e-14));
  }
}

TEST_CASE("ladder-height identity for the simple walk") {
  // The first ladder height of the simple walk is -1 and equals
  // -(sigma/sqrt(2)) e^{c+ + c0} in the limit; depth 2048 lands within 1%.
  auto lc = ladder_constants(IncrementLaw::simple(), 2048);
  const double e_cpc0 = static_cast<double>(std::exp(lc.c_plus[2047] + lc.c_zero[2047]));
  CHECK(std::fabs(e_cpc0 / std::sqrt(2.0) - 1.0) < 0.01);
}

TEST_CASE("ladder constants of the skew lattice walk stay consistent") {
  auto law = parse_law("lattice:{2:1/3,-1:2/3}");
  auto lc = ladder_constants(law, 256);
  // nonincreasing up to the last-ulp rounding of the long double conversion
  const long double slack = 1.0L + 1e-18L;
  for (std::size_t i = 1; i < 256; ++i) {
    CHECK(lc.tau_plus_tail[i] <= lc.tau_plus_tail[i - 1] * slack);
    CHECK(lc.theta0_tail[i] <= lc.theta0_tail[i - 1] * slack);
    CHECK(lc.theta0_tail[i] >= 0);
  }
  // brute-force the survival probability at n = 6 over the 3^6 step codes
  long long hits = 0;
  for (long long code = 0; code < 729; ++code) {
    long long c = code, s = 0;
    bool ok = true;
    for (int k = 0; k < 6; ++k) {
      s += (c % 3 == 0) ? 2 : -1;
      c /= 3;
      if (s < 0) {
        ok = false;
        break;
      }
    }
    if (ok) ++hits;
  }
  CHECK(static_cast<double>(lc.tau_plus_tail[5]) ==
        doctest::Approx(static_cast<double>(hits) / 729.0).epsilon(1e-14));
}
