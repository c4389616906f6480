#include "persistwalk/cycles.hpp"

#include <cmath>

namespace pw {

Trajectory simulate_trajectory(const IncrementLaw& law, std::size_t n, bool tilted, Rng& rng) {
  if (n == 0) fail(errc::parse_error, "horizon must be >= 1");
  Trajectory t;
  t.tilted = tilted;
  t.increments.resize(n);
  t.sums.resize(n);
  t.areas.resize(n);
  PositiveLaw overshoot;
  if (tilted) overshoot = law.overshoot_law();
  double s = 0.0, a = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double x = (k == 0 && tilted) ? overshoot.sample(rng) : law.sample(rng);
    s += x;
    a += s;
    t.increments[k] = x;
    t.sums[k] = s;
    t.areas[k] = a;
  }
  return t;
}

CycleStream::CycleStream(const IncrementLaw& law, Rng rng, long long step_cap)
    : law_(&law), rng_(rng), step_cap_(step_cap) {
  if (!(law.a_plus() > 0) || !(law.a_minus() > 0))
    fail(errc::degenerate_law, "cycles need mass on both sides of 0");
  overshoot_ = law.overshoot_law();
}

std::optional<Cycle> CycleStream::run(bool throw_on_cap) {
  double v = pending_first_ ? *pending_first_ : overshoot_.sample(rng_);
  pending_first_.reset();
  Cycle c;
  c.theta_plus = 1;
  c.xi_plus = v;
  long long steps = 1;
  bool negative_phase = false;
  for (;;) {
    if (++steps > step_cap_) {
      if (throw_on_cap)
        fail(errc::cycle_budget_exceeded,
             "cycle exceeded " + std::to_string(step_cap_) + " steps");
      return std::nullopt;  // walk restarts from a fresh overshoot
    }
    const double x = law_->sample(rng_);
    const double w = v + x;
    if (!negative_phase) {
      if (w >= 0.0) {
        ++c.theta_plus;
        c.xi_plus += w;
      } else {
        negative_phase = true;
        c.theta_minus = 1;
        c.xi_minus = w;
      }
    } else {
      if (w > 0.0) {
        pending_first_ = w;  // the up-crossing value opens the next cycle
        return c;
      }
      ++c.theta_minus;
      c.xi_minus += w;
    }
    v = w;
  }
}

Cycle CycleStream::next() { return *run(true); }
std::optional<Cycle> CycleStream::next_censored() { return run(false); }

ZeroCycleStream::ZeroCycleStream(const IncrementLaw& law, Rng rng, long long step_cap)
    : law_(&law), rng_(rng), step_cap_(step_cap) {
  if (!law.integer_valued()) fail(errc::not_lattice, "zero cycles need an integer-valued law");
}

std::optional<ZeroCycle> ZeroCycleStream::run(bool throw_on_cap) {
  ZeroCycle z;
  long long v = 0;
  for (;;) {
    if (z.theta0 >= step_cap_) {
      if (throw_on_cap)
        fail(errc::cycle_budget_exceeded,
             "zero cycle exceeded " + std::to_string(step_cap_) + " steps");
      return std::nullopt;
    }
    const long long x = static_cast<long long>(law_->sample(rng_));
    v += x;
    ++z.theta0;
    z.xi0 += v;
    if (v == 0 && x != 0) return z;  // returned to zero from a nonzero value
  }
}

ZeroCycle ZeroCycleStream::next() { return *run(true); }
std::optional<ZeroCycle> ZeroCycleStream::next_censored() { return run(false); }

std::vector<Cycle> decompose_cycles(const IncrementLaw& law, std::size_t n_cycles, Rng& rng,
                                    long long step_cap) {
  CycleStream stream(law, rng, step_cap);
  std::vector<Cycle> out;
  out.reserve(n_cycles);
  for (std::size_t i = 0; i < n_cycles; ++i) out.push_back(stream.next());
  return out;
}

std::vector<ZeroCycle> decompose_zero_cycles(const IncrementLaw& law, std::size_t n_cycles,
                                             Rng& rng, long long step_cap) {
  ZeroCycleStream stream(law, rng, step_cap);
  std::vector<ZeroCycle> out;
  out.reserve(n_cycles);
  for (std::size_t i = 0; i < n_cycles; ++i) out.push_back(stream.next());
  return out;
}

std::vector<Cycle> decompose_path(const std::vector<double>& values) {
  std::vector<Cycle> out;
  if (values.empty()) return out;
  Cycle cur;
  cur.theta_plus = 1;
  cur.xi_plus = values[0];
  bool negative_phase = false;
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double w = values[i];
    if (!negative_phase) {
      if (w >= 0.0) {
        ++cur.theta_plus;
        cur.xi_plus += w;
      } else {
        negative_phase = true;
        cur.theta_minus = 1;
        cur.xi_minus = w;
      }
    } else if (w > 0.0) {
      // values[i] up-crosses zero; the previous value closed the cycle
      out.push_back(cur);
      cur = Cycle{};
      cur.theta_plus = 1;
      cur.xi_plus = w;
      negative_phase = false;
    } else {
      ++cur.theta_minus;
      cur.xi_minus += w;
    }
  }
  return out;
}

SandwichReport sandwich_check_path(const std::vector<double>& values, std::size_t horizon,
                                   bool integer_valued) {
  auto cycles = decompose_path(values);
  std::vector<long long> tau;
  std::vector<double> xi;
  long long acc = 0;
  for (const auto& c : cycles) {
    acc += c.theta();
    tau.push_back(acc);
    xi.push_back(c.xi());
  }
  // eta(N) counts complete cycles ending within the horizon; the check needs
  // the straddling cycle as well.
  long long eta = 0;
  for (long long t : tau)
    if (static_cast<std::size_t>(t) <= horizon) ++eta;
  if (static_cast<std::size_t>(eta) == tau.size())
    fail(errc::incomplete_cycles, "path does not contain eta(N)+1 complete cycles");

  SandwichReport rep;
  rep.eta = eta;

  // Prefix sums and minima of A along the path.
  std::vector<double> area(values.size());
  double a = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    a += values[i];
    area[i] = a;
  }

  const double tol = integer_valued ? 0.0 : 1e-9;
  double run_min = 0.0;
  std::size_t scan = 0;
  double boundary_min = 0.0;
  double prev_boundary_area = 0.0;
  for (std::size_t n = 0; n < tau.size(); ++n) {
    const auto t = static_cast<std::size_t>(tau[n]);
    while (scan < t) {
      run_min = std::min(run_min, area[scan]);
      ++scan;
    }
    boundary_min = std::min(boundary_min, area[t - 1]);
    const bool lhs = run_min >= 0.0;
    const bool rhs = boundary_min >= 0.0;
    const double xi_recon = area[t - 1] - prev_boundary_area;
    prev_boundary_area = area[t - 1];
    const bool xi_ok = std::fabs(xi_recon - xi[n]) <= tol * (1.0 + std::fabs(xi_recon));
    if (lhs != rhs || !xi_ok) {
      rep.first_violation = static_cast<long long>(n) + 1;
      rep.pass = false;
      return rep;
    }
    if (static_cast<long long>(n) == eta) break;  // checked the straddling cycle
  }
  rep.pass = true;
  return rep;
}

SandwichReport sandwich_check(const IncrementLaw& law, std::size_t horizon, Rng& rng,
                              long long extension_cap) {
  PositiveLaw overshoot = law.overshoot_law();
  std::vector<double> values;
  values.reserve(horizon + 64);
  double v = overshoot.sample(rng);
  values.push_back(v);
  bool negative_phase = false;
  long long extension = 0;
  // Extend until the cycle containing the horizon completes.
  for (;;) {
    const double x = law.sample(rng);
    const double w = v + x;
    if (negative_phase && w > 0.0) {
      if (values.size() > horizon) {
        values.push_back(w);  // record the up-crossing so the split sees the cycle end
        break;
      }
      negative_phase = false;
    } else if (!negative_phase && w < 0.0) {
      negative_phase = true;
    }
    values.push_back(w);
    v = w;
    if (values.size() > horizon && ++extension > extension_cap) {
      SandwichReport rep;
      rep.censored = true;
      return rep;
    }
  }
  return sandwich_check_path(values, horizon, law.integer_valued());
}

}  // namespace pw
