#include "persistwalk/exactdp.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace pw {

namespace {

struct StateKey {
  long long s;
  long long a;
  bool operator==(const StateKey&) const = default;
};

struct StateHash {
  std::size_t operator()(const StateKey& k) const {
    std::uint64_t h = static_cast<std::uint64_t>(k.s) * 0x9e3779b97f4a7c15ULL;
    h ^= static_cast<std::uint64_t>(k.a) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

using StateMap = std::unordered_map<StateKey, Int, StateHash>;

void require_finite_lattice(const IncrementLaw& law, const char* op) {
  if (law.kind() == LawKind::two_sided_geometric)
    fail(errc::state_budget_exceeded,
         std::string(op) + ": geometric tails give an unbounded exact state space; "
                           "use a finite lattice law or the Monte Carlo estimator");
  if (!law.finite_support()) fail(errc::not_lattice, std::string(op) + ": law is not lattice");
}

long double ratio_ld(const Int& num, const Int& den) {
  return ratio_long_double(num.get_mpz_t(), den.get_mpz_t());
}

// Positive-part atoms with their numerators; level-1 denominator for the
// tilted start is their sum.
std::pair<std::vector<std::pair<long long, Int>>, Int> tilted_start(const IncrementLaw& law) {
  std::vector<std::pair<long long, Int>> pos;
  Int den(0);
  for (const auto& [v, num] : law.atom_numerators())
    if (v > 0) {
      pos.emplace_back(v, num);
      den += num;
    }
  if (pos.empty()) fail(errc::no_positive_part, "law has no mass above 0");
  return {pos, den};
}

}  // namespace

Rat exact_pN(const IncrementLaw& law, long long n, bool tilted, std::size_t state_budget) {
  require_finite_lattice(law, "exact_pN");
  if (n < 1) fail(errc::parse_error, "horizon must be >= 1");
  const auto& atoms = law.atom_numerators();
  const Int& den_step = law.common_den();
  const long long v_min = law.min_value();
  if (v_min >= 0) fail(errc::degenerate_law, "law has no mass below 0");

  // A state (k, S, A) is a certain success if even the steepest descent
  // cannot push the area negative: A + jS + v_min*j(j+1)/2 >= 0 for all
  // j <= n-k. The expression is concave in j, so the endpoints suffice.
  auto certain_success = [&](long long k, long long s, long long a) {
    const long long j = n - k;
    if (j <= 0) return true;
    if (a + s + v_min < 0) return false;
    return a + j * s + v_min * j * (j + 1) / 2 >= 0;
  };

  StateMap cur;
  Int level_den(1);
  Rat absorbed(0);
  std::size_t states_seen = 1;

  // Level 1.
  if (tilted) {
    auto [pos, den1] = tilted_start(law);
    level_den = den1;
    for (const auto& [v, num] : pos) cur[{v, v}] = num;
  } else {
    level_den = den_step;
    for (const auto& [v, num] : atoms)
      if (v >= 0) cur[{v, v}] = num;
  }
  auto absorb = [&](StateMap& states, long long k) {
    for (auto it = states.begin(); it != states.end();) {
      if (certain_success(k, it->first.s, it->first.a)) {
        Rat mass(it->second, level_den);
        mass.canonicalize();
        absorbed += mass;
        it = states.erase(it);
      } else {
        ++it;
      }
    }
  };
  absorb(cur, 1);

  for (long long k = 2; k <= n && !cur.empty(); ++k) {
    StateMap next;
    next.reserve(cur.size() * atoms.size());
    for (const auto& [key, num] : cur) {
      for (const auto& [v, anum] : atoms) {
        const long long s = key.s + v;
        const long long a = key.a + s;
        if (a < 0) continue;
        Int& slot = next[{s, a}];
        mpz_addmul(slot.get_mpz_t(), num.get_mpz_t(), anum.get_mpz_t());
      }
    }
    level_den *= den_step;
    states_seen += next.size();
    if (states_seen > state_budget)
      fail(errc::state_budget_exceeded,
           "state budget exceeded at horizon " + std::to_string(k));
    absorb(next, k);
    cur = std::move(next);
  }

  Int surviving(0);
  for (const auto& [key, num] : cur) surviving += num;
  Rat tail(surviving, level_den);
  tail.canonicalize();
  Rat p = absorbed + tail;
  p.canonicalize();
  return p;
}

Rat brute_force_pN(const IncrementLaw& law, long long n, bool tilted, double path_budget) {
  require_finite_lattice(law, "brute_force_pN");
  if (n < 1) fail(errc::parse_error, "horizon must be >= 1");
  const auto& atoms = law.atom_numerators();
  const double paths = std::pow(static_cast<double>(atoms.size()), static_cast<double>(n));
  if (paths > path_budget)
    fail(errc::too_large, "enumeration would visit ~" + std::to_string(paths) + " paths");

  // Numerator products fit in u64 when max_num^n does; true for all small
  // laws this oracle is meant for.
  unsigned long long max_num = 0;
  for (const auto& [v, num] : atoms) {
    if (!num.fits_ulong_p()) fail(errc::too_large, "atom numerator too large for enumeration");
    max_num = std::max(max_num, static_cast<unsigned long long>(num.get_ui()));
  }
  long double prod_bound = 1.0L;
  for (long long i = 0; i < n; ++i) prod_bound *= static_cast<long double>(max_num);
  if (prod_bound > 1e18L) fail(errc::too_large, "numerator products overflow the enumerator");

  std::vector<std::pair<long long, unsigned long long>> steps;
  for (const auto& [v, num] : atoms) steps.emplace_back(v, num.get_ui());

  Int success(0);
  Int den = int_pow(law.common_den(), static_cast<unsigned long>(n));

  auto dfs = [&](auto&& self, long long k, long long s, long long a,
                 unsigned long long num) -> void {
    if (k == n) {
      mpz_add_ui(success.get_mpz_t(), success.get_mpz_t(), static_cast<unsigned long>(num));
      return;
    }
    for (const auto& [v, anum] : steps) {
      const long long s2 = s + v;
      const long long a2 = a + s2;
      if (a2 < 0) continue;
      self(self, k + 1, s2, a2, num * anum);
    }
  };

  if (tilted) {
    auto [pos, den1] = tilted_start(law);
    Int den_t = den1 * int_pow(law.common_den(), static_cast<unsigned long>(n - 1));
    for (const auto& [v, num] : pos) dfs(dfs, 1, v, v, num.get_ui());
    Rat p(success, den_t);
    p.canonicalize();
    return p;
  }
  dfs(dfs, 0, 0, 0, 1ULL);
  Rat p(success, den);
  p.canonicalize();
  return p;
}

std::map<long long, Rat> BivariateCycleLaw::theta_marginal() const {
  std::map<long long, Rat> out;
  for (const auto& [key, mass] : entries) out[key.first] += mass;
  return out;
}

Rat BivariateCycleLaw::total_mass() const {
  Rat total(0);
  for (const auto& [key, mass] : entries) total += mass;
  return total;
}

bool BivariateCycleLaw::xi_symmetric() const {
  for (const auto& [key, mass] : entries) {
    auto it = entries.find({key.first, -key.second});
    if (it == entries.end() || it->second != mass) return false;
  }
  return true;
}

namespace {

struct PhaseKey {
  long long pos;
  long long area;
  int phase;  // cycle DP phase tag
  bool operator==(const PhaseKey&) const = default;
};

struct PhaseHash {
  std::size_t operator()(const PhaseKey& k) const {
    std::uint64_t h = static_cast<std::uint64_t>(k.pos) * 0x9e3779b97f4a7c15ULL;
    h ^= static_cast<std::uint64_t>(k.area) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.phase) * 0xbf58476d1ce4e5b9ULL;
    return static_cast<std::size_t>(h);
  }
};

using PhaseMap = std::unordered_map<PhaseKey, Int, PhaseHash>;

constexpr int kLeading = 0;   // zero cycles: still sitting at 0
constexpr int kDeparted = 1;  // zero cycles: left 0, not yet returned
constexpr int kPosRun = 2;    // overshoot cycles: weakly nonnegative run
constexpr int kNegRun = 3;    // overshoot cycles: weakly nonpositive run

}  // namespace

BivariateCycleLaw exact_cycle_law(const IncrementLaw& law, long long truncation, CycleKind kind,
                                  std::size_t state_budget) {
  if (law.kind() == LawKind::two_sided_exponential ||
      law.kind() == LawKind::upper_exp_lattice_down)
    fail(errc::overshoot_not_discrete, "exact cycle laws need a discrete overshoot");
  require_finite_lattice(law, "exact_cycle_law");
  if (truncation < 1) fail(errc::parse_error, "truncation must be >= 1");

  const auto& atoms = law.atom_numerators();
  const Int& den_step = law.common_den();

  BivariateCycleLaw out;
  out.kind = kind;
  out.truncation = truncation;

  PhaseMap cur;
  Int level_den(1);
  std::size_t states_seen = 0;

  if (kind == CycleKind::zero_cycle) {
    cur[{0, 0, kLeading}] = 1;
  } else {
    if (!(law.a_plus() > 0) || !(law.a_minus() > 0))
      fail(errc::degenerate_law, "cycles need mass on both sides of 0");
    auto [pos, den1] = tilted_start(law);
    level_den = den1;
    for (const auto& [v, num] : pos) cur[{v, v, kPosRun}] = num;
  }

  // Mass of atoms landing strictly above -pos, i.e. the up-crossing weight.
  auto up_mass = [&](long long pos) {
    Int m(0);
    for (const auto& [v, num] : atoms)
      if (pos + v > 0) m += num;
    return m;
  };

  for (long long t = (kind == CycleKind::zero_cycle ? 0 : 1); t < truncation && !cur.empty();
       ++t) {
    // Overshoot cycles complete by up-crossing from the nonpositive run; the
    // completing step is not part of the cycle, so record before expanding.
    if (kind == CycleKind::overshoot_cycle && t >= 1) {
      for (const auto& [key, num] : cur) {
        if (key.phase != kNegRun) continue;
        Int m = up_mass(key.pos);
        if (m != 0) {
          Rat mass(num * m, level_den * den_step);
          mass.canonicalize();
          out.entries[{t, key.area}] += mass;
        }
      }
    }

    PhaseMap next;
    next.reserve(cur.size() * atoms.size());
    for (const auto& [key, num] : cur) {
      for (const auto& [v, anum] : atoms) {
        const long long pos = key.pos + v;
        if (kind == CycleKind::zero_cycle) {
          if (key.phase == kLeading) {
            PhaseKey k2 = (v == 0) ? PhaseKey{0, 0, kLeading} : PhaseKey{pos, pos, kDeparted};
            Int& slot = next[k2];
            mpz_addmul(slot.get_mpz_t(), num.get_mpz_t(), anum.get_mpz_t());
          } else {
            const long long area = key.area + pos;
            if (pos == 0) {
              Rat mass(num * anum, level_den * den_step);
              mass.canonicalize();
              out.entries[{t + 1, area}] += mass;
            } else {
              Int& slot = next[{pos, area, kDeparted}];
              mpz_addmul(slot.get_mpz_t(), num.get_mpz_t(), anum.get_mpz_t());
            }
          }
        } else {
          const long long area = key.area + pos;
          if (key.phase == kPosRun) {
            Int& slot = next[{pos, area, pos >= 0 ? kPosRun : kNegRun}];
            mpz_addmul(slot.get_mpz_t(), num.get_mpz_t(), anum.get_mpz_t());
          } else {
            if (pos > 0) continue;  // up-crossing handled above
            Int& slot = next[{pos, area, kNegRun}];
            mpz_addmul(slot.get_mpz_t(), num.get_mpz_t(), anum.get_mpz_t());
          }
        }
      }
    }
    level_den *= den_step;
    states_seen += next.size();
    if (states_seen > state_budget)
      fail(errc::state_budget_exceeded, "cycle-law state budget exceeded at step " +
                                            std::to_string(t + 1));
    cur = std::move(next);
  }

  // Completions exactly at the truncation depth.
  if (kind == CycleKind::overshoot_cycle) {
    for (const auto& [key, num] : cur) {
      if (key.phase != kNegRun) continue;
      Int m = up_mass(key.pos);
      if (m != 0) {
        Rat mass(num * m, level_den * den_step);
        mass.canonicalize();
        out.entries[{truncation, key.area}] += mass;
      }
    }
  }

  out.defect = Rat(1) - out.total_mass();
  out.defect.canonicalize();
  return out;
}

std::map<std::pair<long long, long long>, Rat> exact_positive_run_law(const IncrementLaw& law,
                                                                      long long truncation,
                                                                      std::size_t state_budget) {
  require_finite_lattice(law, "exact_positive_run_law");
  const auto& atoms = law.atom_numerators();
  const Int& den_step = law.common_den();

  auto down_mass = [&](long long pos) {
    Int m(0);
    for (const auto& [v, num] : atoms)
      if (pos + v < 0) m += num;
    return m;
  };

  std::map<std::pair<long long, long long>, Rat> out;
  PhaseMap cur;
  auto [pos_atoms, den1] = tilted_start(law);
  Int level_den = den1;
  for (const auto& [v, num] : pos_atoms) cur[{v, v, kPosRun}] = num;
  std::size_t states_seen = 0;

  for (long long t = 1; t <= truncation && !cur.empty(); ++t) {
    for (const auto& [key, num] : cur) {
      Int m = down_mass(key.pos);
      if (m != 0) {
        Rat mass(num * m, level_den * den_step);
        mass.canonicalize();
        out[{t, key.area}] += mass;
      }
    }
    if (t == truncation) break;
    PhaseMap next;
    for (const auto& [key, num] : cur) {
      for (const auto& [v, anum] : atoms) {
        const long long pos = key.pos + v;
        if (pos < 0) continue;
        Int& slot = next[{pos, key.area + pos, kPosRun}];
        mpz_addmul(slot.get_mpz_t(), num.get_mpz_t(), anum.get_mpz_t());
      }
    }
    level_den *= den_step;
    states_seen += next.size();
    if (states_seen > state_budget)
      fail(errc::state_budget_exceeded, "positive-run state budget exceeded");
    cur = std::move(next);
  }
  return out;
}

LadderConstants ladder_constants(const IncrementLaw& law, long long depth,
                                 std::size_t state_budget) {
  require_finite_lattice(law, "ladder_constants");
  if (depth < 1) fail(errc::parse_error, "depth must be >= 1");
  const auto& atoms = law.atom_numerators();
  const Int& den_step = law.common_den();
  const long long v_min = law.min_value();
  const long long v_max = law.max_value();
  const long long width = v_max - v_min;
  if (width <= 0) fail(errc::degenerate_law, "single-atom law");

  const std::size_t full_size = static_cast<std::size_t>(width) * depth + 1;
  if (4 * full_size * static_cast<std::size_t>(depth) / 2 > state_budget)
    fail(errc::state_budget_exceeded, "ladder DP exceeds the state budget");

  LadderConstants out;
  out.c_plus.reserve(depth);
  out.c_zero.reserve(depth);
  out.c_minus.reserve(depth);
  out.tau_plus_tail.reserve(depth);
  out.tau_minus_tail.reserve(depth);
  out.theta0_tail.reserve(depth);

  // Offset-indexed numerator vectors; level n has implicit denominator D^n.
  // full-line walk, the two one-sided walks, and the not-yet-returned walk.
  const long long off = -v_min * depth;
  std::vector<Int> full(full_size), next_full;
  std::vector<Int> up(full_size), next_up;       // min U_i >= 0 so far
  std::vector<Int> down(full_size), next_down;   // max U_i <= 0 so far
  std::vector<Int> noret(full_size), next_noret; // theta0 > n so far
  full[off] = 1;
  up[off] = 1;
  down[off] = 1;
  noret[off] = 1;

  Int den(1);
  long double cp = 0.0L, cz = 0.0L, cm = 0.0L;

  for (long long n = 1; n <= depth; ++n) {
    den *= den_step;
    next_full.assign(full_size, Int(0));
    next_up.assign(full_size, Int(0));
    next_down.assign(full_size, Int(0));
    next_noret.assign(full_size, Int(0));
    const long long lo = v_min * n, hi = v_max * n;
    for (long long p = v_min * (n - 1); p <= v_max * (n - 1); ++p) {
      const std::size_t i = static_cast<std::size_t>(p + off);
      for (const auto& [v, anum] : atoms) {
        const long long p2 = p + v;
        if (p2 < lo || p2 > hi) continue;
        const std::size_t j = static_cast<std::size_t>(p2 + off);
        if (full[i] != 0)
          mpz_addmul(next_full[j].get_mpz_t(), full[i].get_mpz_t(), anum.get_mpz_t());
        if (p2 >= 0 && up[i] != 0)
          mpz_addmul(next_up[j].get_mpz_t(), up[i].get_mpz_t(), anum.get_mpz_t());
        if (p2 <= 0 && down[i] != 0)
          mpz_addmul(next_down[j].get_mpz_t(), down[i].get_mpz_t(), anum.get_mpz_t());
        if (noret[i] != 0) {
          // A return closes the cycle unless the walk never left zero.
          const bool at_zero_still = p == 0 && v == 0;
          if (p2 != 0 || at_zero_still)
            mpz_addmul(next_noret[j].get_mpz_t(), noret[i].get_mpz_t(), anum.get_mpz_t());
        }
      }
    }
    full.swap(next_full);
    up.swap(next_up);
    down.swap(next_down);
    noret.swap(next_noret);

    Int pos_mass(0), zero_mass(0), neg_mass(0), up_mass(0), down_mass(0), noret_mass(0);
    for (long long p = lo; p <= hi; ++p) {
      const std::size_t i = static_cast<std::size_t>(p + off);
      if (p > 0)
        pos_mass += full[i];
      else if (p == 0)
        zero_mass += full[i];
      else
        neg_mass += full[i];
      up_mass += up[i];
      down_mass += down[i];
      noret_mass += noret[i];
    }
    const long double inv_n = 1.0L / static_cast<long double>(n);
    cp += inv_n * (ratio_ld(pos_mass, den) - 0.5L);
    cz += inv_n * ratio_ld(zero_mass, den);
    cm += inv_n * (ratio_ld(neg_mass, den) - 0.5L);
    out.c_plus.push_back(cp);
    out.c_zero.push_back(cz);
    out.c_minus.push_back(cm);
    out.tau_plus_tail.push_back(ratio_ld(up_mass, den));
    out.tau_minus_tail.push_back(ratio_ld(down_mass, den));
    out.theta0_tail.push_back(ratio_ld(noret_mass, den));
  }
  return out;
}

}  // namespace pw
