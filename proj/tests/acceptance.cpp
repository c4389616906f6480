// Acceptance suite: one verdict line per criterion, exit 0 iff everything
// that ran passed. Run all criteria or a single one with --criterion k.

#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "persistwalk/cycles.hpp"
#include "persistwalk/estimators.hpp"
#include "persistwalk/exactdp.hpp"
#include "persistwalk/excursion.hpp"
#include "persistwalk/parallel.hpp"
#include "persistwalk/series.hpp"

using namespace pw;

namespace {

constexpr std::uint64_t kSeedBase = 20260808;

// Pre-registered high-mesh oracle (mesh 2^14, 1e5 draws, seed 2026).
constexpr double kXiExOracle = 0.622326;

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? " [ok]" : " [FAILED]");
  }
};

const char* kZoo[] = {"simple", "slackened:p0=1/4", "slackened:p0=1/2",
                      "lattice:{-2:1/4,-1:1/4,1:1/4,2:1/4}", "lattice:{2:1/3,-1:2/3}"};

// Finite stand-in for the symmetric two-sided geometric walk in exact-DP
// contexts: the q = 1/2 tails folded into the +-2 atoms, keeping the law
// centered, symmetric, and inside the enumeration budget.
const char* kGeomSurrogate = "lattice:{-2:1/4,-1:1/4,1:1/4,2:1/4}";

unsigned workers() { return default_workers(); }

Verdict criterion1() {
  Verdict v;
  v.require(exact_pN(IncrementLaw::simple(), 4) == make_rat(7, 16), "p_4(simple) = 7/16");
  for (const char* spec : kZoo) {
    bool all = true;
    auto law = parse_law(spec);
    for (long long n = 1; n <= 12; ++n)
      if (exact_pN(law, n) != brute_force_pN(law, n)) all = false;
    v.require(all, std::string("DP = enumeration, N <= 12, ") + spec);
  }
  return v;
}

Verdict criterion2() {
  Verdict v;
  auto law = parse_law("lattice:{2:1/3,-1:2/3}");
  auto cl = exact_cycle_law(law, 20, CycleKind::zero_cycle);
  v.require(cl.xi_symmetric(), "zero-cycle law at L=20 symmetric entry-by-entry");
  v.require(cl.total_mass() + cl.defect == 1, "mass + defect = 1 exactly");
  return v;
}

Verdict criterion3() {
  Verdict v;
  {
    auto cl = exact_cycle_law(parse_law(kGeomSurrogate), 16, CycleKind::overshoot_cycle);
    auto rep = check_factorization(cl, 16, "xi-zeta");
    v.require(rep.max_abs_diff == 0,
              "1-chi = sqrt(1-zeta) exact to order 16, geometric-type overshoot cycles"
              " (max diff " + rat_str(rep.max_abs_diff) + ")");
  }
  {
    auto cl = exact_cycle_law(IncrementLaw::simple(), 16, CycleKind::zero_cycle);
    auto rep = check_factorization(cl, 16, "lattice-H");
    v.require(rep.max_abs_diff == 0,
              "1-chi0 = sqrt(1-zeta0) e^H exact to order 16, simple-walk zero cycles");
  }
  return v;
}

Verdict criterion4() {
  Verdict v;
  std::vector<long long> grid;
  for (long long n = 256; n <= 16384; n *= 2) grid.push_back(n);
  auto slope_of = [&](const IncrementLaw& law, PathFunctional f, std::uint64_t seed) {
    std::vector<ExponentPoint> pts;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      auto est = mc_p(law, grid[i], 1'000'000, false, seed + i, workers(), f);
      pts.push_back({static_cast<double>(grid[i]), est.value, est.stderr_});
    }
    return exponent_fit(pts).slope;
  };
  const double s_simple =
      slope_of(IncrementLaw::simple(), PathFunctional::integrated_min, kSeedBase + 41);
  v.require(s_simple > -0.30 && s_simple < -0.20,
            "simple-walk slope " + std::to_string(s_simple) + " in [-0.30,-0.20]");
  const double s_laplace = slope_of(IncrementLaw::exponential2(1, 1),
                                    PathFunctional::integrated_min, kSeedBase + 42);
  v.require(s_laplace > -0.30 && s_laplace < -0.20,
            "Laplace slope " + std::to_string(s_laplace) + " in [-0.30,-0.20]");
  const double s_control =
      slope_of(IncrementLaw::simple(), PathFunctional::walk_min, kSeedBase + 43);
  v.require(s_control > -0.55 && s_control < -0.45,
            "control min-S slope " + std::to_string(s_control) + " in [-0.55,-0.45]");
  return v;
}

Verdict criterion5() {
  Verdict v;
  auto lc = ladder_constants(IncrementLaw::simple(), 4096);
  const double scaled =
      std::sqrt(4096.0) * static_cast<double>(lc.theta0_tail[4095]);
  const double spitzer = std::sqrt(2.0 / M_PI);
  v.require(std::fabs(scaled / spitzer - 1.0) < 0.02,
            "sqrt(n) P{theta0 > n} = " + std::to_string(scaled) + " within 2% of " +
                std::to_string(spitzer) + " at n = 4096");
  const double c0 = static_cast<double>(lc.c_zero[1999]);
  v.require(std::fabs(c0 / std::log(2.0) - 1.0) < 0.01,
            "c0 partial sum " + std::to_string(c0) + " within 1% of ln 2 = " +
                std::to_string(std::log(2.0)) + " at depth 2000");
  return v;
}

Verdict criterion6() {
  Verdict v;
  auto law = IncrementLaw::exponential2(1, 1);
  const double c = prop1_constant(law);  // cross-checks both formulas to 1e-12
  const double target = 2.0 / std::sqrt(M_PI);
  v.require(std::fabs(c - target) < 1e-12, "tail-constant formulas agree at 2/sqrt(pi)");
  auto curve =
      joint_tail(law, 0, 1, {1024}, 10'000'000, TailEvent::theta_only, kSeedBase + 6,
                 workers());
  const double est = curve.points[0].scaled;
  v.require(std::fabs(est / target - 1.0) < 0.10,
            "sqrt(n) P{theta+ > n} = " + std::to_string(est) + " within 10% of " +
                std::to_string(target) + " at n = 2^10, 1e7 cycles");
  return v;
}

Verdict criterion7() {
  Verdict v;
  auto probe = sample_xi_ex_bulk(1024, 10000, kSeedBase + 71, workers());
  v.require(f_eval(0.0, probe).value == 1.0, "F(0) = 1 exactly");
  std::vector<double> xs;
  for (double x = 0.0; x <= 4.0; x += 0.2) xs.push_back(x);
  auto curve = f_curve(xs, probe, 1024);
  bool mono_f = true, mono_xf = true;
  for (std::size_t i = 1; i < curve.x.size(); ++i) {
    if (curve.f[i] > curve.f[i - 1]) mono_f = false;
    if (std::cbrt(curve.x[i]) * curve.f[i] < std::cbrt(curve.x[i - 1]) * curve.f[i - 1] - 1e-12)
      mono_xf = false;
  }
  v.require(mono_f, "F nonincreasing on a common sample set");
  v.require(mono_xf, "x^{1/3} F(x) nondecreasing on the same set");
  auto areas = sample_xi_ex_bulk(1024, 1'000'000, kSeedBase + 72, workers());
  double sum = 0;
  for (double a : areas) sum += a;
  const double mean = sum / areas.size();
  v.require(std::fabs(mean / kXiExOracle - 1.0) < 0.02,
            "mean area " + std::to_string(mean) + " within 2% of the mesh-2^14 oracle " +
                std::to_string(kXiExOracle) + " at mesh 2^10, 1e6 draws");
  return v;
}

Verdict criterion8() {
  Verdict v;
  auto laplace = chain_checks(IncrementLaw::exponential2(1, 1), 1024, 1'000'000,
                              kSeedBase + 81, workers(), 300'000);
  v.require(laplace.upper.ok, "Laplace: p~_N <= P{tau_nu > N} + 3 sigma at N = 1024");
  v.require(laplace.lower.ok, "Laplace: product bound <= p~_N + 3 sigma");
  auto simple = chain_checks(IncrementLaw::simple(), 1024, 1'000'000, kSeedBase + 82,
                             workers(), 300'000);
  v.require(simple.upper_zero && simple.upper_zero->ok,
            "simple: p_N <= P{tau0_nu0 > N} + 3 sigma");
  for (const char* spec : kZoo) {
    auto law = parse_law(spec);
    Rng rng(kSeedBase + 83, std::hash<std::string>{}(spec) & 0xffff);
    int completed = 0, failures = 0, attempts = 0;
    while (completed < 10000 && attempts < 30000) {
      ++attempts;
      auto rep = sandwich_check(law, 256, rng);
      if (rep.censored) continue;
      ++completed;
      if (!rep.pass) ++failures;
    }
    v.require(completed >= 10000 && failures == 0,
              std::string("sandwich checks on 1e4 paths, ") + spec);
  }
  {
    // geometric member of the zoo, samplable even though exact DP is not
    auto law = IncrementLaw::geometric2(make_rat(1, 2), make_rat(1, 2), Rat(0));
    Rng rng(kSeedBase + 84, 7);
    int completed = 0, failures = 0, attempts = 0;
    while (completed < 10000 && attempts < 30000) {
      ++attempts;
      auto rep = sandwich_check(law, 256, rng);
      if (rep.censored) continue;
      ++completed;
      if (!rep.pass) ++failures;
    }
    v.require(completed >= 10000 && failures == 0,
              "sandwich checks on 1e4 paths, geom2:q+=1/2,q-=1/2,a0=0");
  }
  return v;
}

Verdict criterion9() {
  Verdict v;
  auto lap = association_scan(IncrementLaw::exponential2(1, 1), 10, 1'000'000,
                              kSeedBase + 91, workers(), 10'000'000);
  v.require(lap.violations == 0, "Laplace 10x10 grid: no cell below -5 stderr (censored " +
                                     std::to_string(lap.censored) + ")");
  auto slack = association_scan(parse_law("slackened:p0=1/2"), 10, 1'000'000, kSeedBase + 92,
                                workers(), 10'000'000);
  v.require(slack.violations == 0,
            "slackened 10x10 grid: no cell below -5 stderr (censored " +
                std::to_string(slack.censored) + ")");
  return v;
}

Verdict criterion10() {
  Verdict v;
  auto law = IncrementLaw::exponential2(1, 1);
  auto m1 = mc_p(law, 128, 20000, true, kSeedBase, 1);
  auto m2 = mc_p(law, 128, 20000, true, kSeedBase, 2);
  v.require(m1.value == m2.value && m1.stderr_ == m2.stderr_, "pn-mc bitwise stable");
  auto t1 = joint_tail(law, 0, 1, {256}, 20000, TailEvent::theta_only, kSeedBase, 1);
  auto t2 = joint_tail(law, 0, 1, {256}, 20000, TailEvent::theta_only, kSeedBase, 2);
  v.require(t1.points[0].scaled == t2.points[0].scaled, "tails bitwise stable");
  auto e1 = sample_xi_ex_bulk(256, 20000, kSeedBase, 1);
  auto e2 = sample_xi_ex_bulk(256, 20000, kSeedBase, 2);
  v.require(e1 == e2, "excursion areas bitwise stable");
  auto a1 = association_scan(law, 4, 20000, kSeedBase, 1, 1'000'000);
  auto a2 = association_scan(law, 4, 20000, kSeedBase, 2, 1'000'000);
  bool same = a1.cells.size() == a2.cells.size();
  for (std::size_t i = 0; same && i < a1.cells.size(); ++i)
    same = a1.cells[i].cov == a2.cells[i].cov;
  v.require(same, "association cells bitwise stable");
  auto s1 = xi_symmetry_test(law, 20000, kSeedBase, 1, 100000);
  auto s2 = xi_symmetry_test(law, 20000, kSeedBase, 2, 100000);
  v.require(s1.sign_z == s2.sign_z && s1.ks_stat == s2.ks_stat, "symmetry stats bitwise stable");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::strcmp(argv[i], "--criterion") == 0) only = std::atoi(argv[i + 1]);

  Verdict (*criteria[])() = {criterion1, criterion2, criterion3, criterion4, criterion5,
                             criterion6, criterion7, criterion8, criterion9, criterion10};
  bool all_pass = true;
  for (int k = 1; k <= 10; ++k) {
    if (only != 0 && only != k) continue;
    Verdict v;
    try {
      v = criteria[k - 1]();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    std::printf("criterion %2d: %s — %s\n", k, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
    if (!v.pass) all_pass = false;
  }
  return all_pass ? 0 : 1;
}
