#include "persistwalk/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "persistwalk/parallel.hpp"

namespace pw {

namespace {

constexpr std::size_t kChunk = 8192;

struct BernoulliTally {
  std::uint64_t hits = 0;
  std::uint64_t decided = 0;
  std::uint64_t censored = 0;
};

// Chunked Bernoulli reduction; the indicator may censor (nullopt). `salt`
// separates the substream families of different kernels under one seed.
template <typename Indicator>
BernoulliTally bernoulli_reduce(std::uint64_t reps, std::uint64_t seed, std::uint64_t salt,
                                unsigned workers, Indicator&& indicator) {
  ChunkPlan plan{static_cast<std::size_t>(reps), kChunk};
  auto partials = run_chunks<BernoulliTally>(
      plan.count(), workers, [&](std::size_t c) {
        Rng rng(seed, salt * 0x100000000ULL + c);
        BernoulliTally t;
        for (std::size_t i = plan.begin(c); i < plan.end(c); ++i) {
          std::optional<bool> hit = indicator(rng);
          if (!hit) {
            ++t.censored;
            continue;
          }
          ++t.decided;
          if (*hit) ++t.hits;
        }
        return t;
      });
  BernoulliTally total;
  for (const auto& p : partials) {
    total.hits += p.hits;
    total.decided += p.decided;
    total.censored += p.censored;
  }
  return total;
}

MCEstimate to_estimate(const BernoulliTally& t, std::uint64_t seed, std::string desc) {
  MCEstimate e;
  e.n = t.decided;
  e.seed = seed;
  e.description = std::move(desc);
  if (t.decided > 0) {
    const double p = static_cast<double>(t.hits) / static_cast<double>(t.decided);
    e.value = p;
    e.stderr_ = std::sqrt(p * (1.0 - p) / static_cast<double>(t.decided));
  }
  return e;
}

bool run_path(const IncrementLaw& law, const PositiveLaw* overshoot, long long horizon,
              PathFunctional functional, Rng& rng) {
  double s = 0.0, a = 0.0;
  for (long long k = 0; k < horizon; ++k) {
    const double x = (k == 0 && overshoot) ? overshoot->sample(rng) : law.sample(rng);
    s += x;
    if (functional == PathFunctional::walk_min) {
      if (s < 0.0) return false;
    } else {
      a += s;
      if (a < 0.0) return false;
    }
  }
  return true;
}

// theta+ > cap? Runs the weakly-nonnegative run only as far as it needs.
bool theta_run_exceeds(const IncrementLaw& law, const PositiveLaw& overshoot, long long cap,
                       Rng& rng) {
  double v = overshoot.sample(rng);
  long long count = 1;
  for (;;) {
    if (count > cap) return true;
    const double w = v + law.sample(rng);
    if (w < 0.0) return false;
    v = w;
    ++count;
  }
}

// {xi+ > x_thresh and theta+ > t_cap}; nullopt if undecided within budget.
std::optional<bool> xi_plus_indicator(const IncrementLaw& law, const PositiveLaw& overshoot,
                                      long long t_cap, double x_thresh, long long budget,
                                      Rng& rng) {
  double v = overshoot.sample(rng);
  double area = v;
  long long count = 1;
  for (;;) {
    if (count > t_cap && area > x_thresh) return true;
    if (count > budget) return std::nullopt;
    const double w = v + law.sample(rng);
    if (w < 0.0) return count > t_cap && area > x_thresh;
    area += w;
    v = w;
    ++count;
  }
}

// {xi > x_thresh and theta > t_cap} for a full cycle. The running area only
// decreases in the nonpositive run, so the event dies as soon as it drops to
// the threshold.
std::optional<bool> xi_full_indicator(const IncrementLaw& law, const PositiveLaw& overshoot,
                                      long long t_cap, double x_thresh, long long budget,
                                      Rng& rng) {
  double v = overshoot.sample(rng);
  double area = v;
  long long count = 1;
  bool negative_phase = false;
  for (;;) {
    if (count > budget) return std::nullopt;
    const double w = v + law.sample(rng);
    if (!negative_phase) {
      if (w >= 0.0) {
        area += w;
      } else {
        negative_phase = true;
        area += w;
      }
    } else if (w > 0.0) {
      return count > t_cap && area > x_thresh;
    } else {
      area += w;
    }
    if (negative_phase && area <= x_thresh) return false;
    v = w;
    ++count;
  }
}

struct CycleDraw {
  long long theta_plus = 0;
  long long theta = 0;
  double xi_plus = 0;
  double xi = 0;
};

// Full cycle with per-phase caps; nullopt when censored.
std::optional<CycleDraw> cycle_draw(const IncrementLaw& law, const PositiveLaw& overshoot,
                                    long long phase_cap, Rng& rng) {
  CycleDraw c;
  double v = overshoot.sample(rng);
  c.theta_plus = 1;
  c.xi_plus = v;
  for (;;) {
    if (c.theta_plus > phase_cap) return std::nullopt;
    const double w = v + law.sample(rng);
    if (w < 0.0) {
      c.theta = c.theta_plus + 1;
      c.xi = c.xi_plus + w;
      v = w;
      break;
    }
    ++c.theta_plus;
    c.xi_plus += w;
    v = w;
  }
  for (;;) {
    if (c.theta - c.theta_plus > phase_cap) return std::nullopt;
    const double w = v + law.sample(rng);
    if (w > 0.0) return c;
    ++c.theta;
    c.xi += w;
    v = w;
  }
}

// {xi0 > x_thresh and theta0 > t_cap}. With one_signed (no step leaves
// [-1,1]) the area sign is fixed at departure, so the indicator resolves as
// soon as theta0 > t_cap.
std::optional<bool> zero_cycle_indicator(const IncrementLaw& law, long long t_cap,
                                         double x_thresh, long long budget, bool one_signed,
                                         Rng& rng) {
  long long v = 0, count = 0;
  double area = 0.0;
  for (;;) {
    if (count > budget) return std::nullopt;
    const long long x = static_cast<long long>(law.sample(rng));
    v += x;
    ++count;
    area += static_cast<double>(v);
    if (v == 0 && x != 0) return count > t_cap && area > x_thresh;
    if (one_signed && count > t_cap && v != 0) {
      if (x_thresh <= 0.0) return v > 0;        // sign already determined
      if (v < 0) return false;                  // area can only fall further
    }
  }
}

double z_crit(double two_sided_level) {
  // Inverse normal tail via bisection; levels here are never extreme.
  double lo = 0.0, hi = 40.0;
  auto tail2 = [](double z) { return std::erfc(z / std::sqrt(2.0)); };
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (tail2(mid) > two_sided_level)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

MCEstimate mc_p(const IncrementLaw& law, long long horizon, std::uint64_t reps, bool tilted,
                std::uint64_t seed, unsigned workers, PathFunctional functional) {
  if (horizon < 1) fail(errc::parse_error, "horizon must be >= 1");
  if (reps < 1) fail(errc::parse_error, "reps must be >= 1");
  PositiveLaw overshoot;
  if (tilted) overshoot = law.overshoot_law();
  auto tally = bernoulli_reduce(reps, seed, 1, workers, [&](Rng& rng) {
    return std::optional<bool>(
        run_path(law, tilted ? &overshoot : nullptr, horizon, functional, rng));
  });
  return to_estimate(tally, seed,
                     (functional == PathFunctional::walk_min ? "min-S" : "min-A") +
                         std::string(tilted ? " tilted" : "") + " N=" + std::to_string(horizon));
}

ExponentFit exponent_fit(const std::vector<ExponentPoint>& points) {
  if (points.size() < 6) fail(errc::insufficient_data, "need at least 6 grid points");
  double n_min = points.front().n, n_max = points.front().n;
  for (const auto& p : points) {
    if (!(p.n > 0) || !(p.value > 0)) fail(errc::insufficient_data, "points must be positive");
    n_min = std::min(n_min, p.n);
    n_max = std::max(n_max, p.n);
  }
  if (n_max < 30.0 * n_min)
    fail(errc::insufficient_data, "grid spans factor " + std::to_string(n_max / n_min) +
                                      ", need at least 30");
  const bool weighted = std::all_of(points.begin(), points.end(),
                                    [](const ExponentPoint& p) { return p.stderr_ > 0; });
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : points) {
    const double x = std::log(p.n);
    const double y = std::log(p.value);
    const double se = weighted ? p.stderr_ / p.value : 1.0;
    const double w = 1.0 / (se * se);
    sw += w;
    sx += w * x;
    sy += w * y;
    sxx += w * x * x;
    sxy += w * x * y;
  }
  const double xbar = sx / sw, ybar = sy / sw;
  const double sxx_c = sxx - sw * xbar * xbar;
  ExponentFit fit;
  fit.slope = (sxy - sw * xbar * ybar) / sxx_c;
  fit.intercept = ybar - fit.slope * xbar;
  double var_scale = 1.0;
  if (!weighted) {
    double ss = 0;
    for (const auto& p : points) {
      const double r = std::log(p.value) - (fit.intercept + fit.slope * std::log(p.n));
      ss += r * r;
    }
    var_scale = ss / (static_cast<double>(points.size()) - 2.0);
  }
  fit.slope_se = std::sqrt(var_scale / sxx_c);
  fit.ci_lo = fit.slope - 1.96 * fit.slope_se;
  fit.ci_hi = fit.slope + 1.96 * fit.slope_se;
  return fit;
}

TailCurve joint_tail(const IncrementLaw& law, double s, double t,
                     const std::vector<long long>& n_grid, std::uint64_t reps, TailEvent which,
                     std::uint64_t seed, unsigned workers, long long cycle_cap,
                     std::span<const double> xi_ex_samples) {
  if (s < 0 || t < 0 || (s == 0 && t == 0))
    fail(errc::invalid_region, "need s,t >= 0 with s+t > 0");
  if (n_grid.empty()) fail(errc::insufficient_data, "empty n grid");

  auto cls = classify(law);
  const bool two_sided_class = cls.theorem2_part1_applies || cls.theorem2_part2_applies;
  if (which == TailEvent::zero_cycle) {
    if (!law.integer_valued())
      fail(errc::hypothesis_not_met, "zero-cycle tails need an integer-valued law");
  } else if (!two_sided_class && !cls.upper_exponential) {
    fail(errc::hypothesis_not_met, "cycle tails need the two-sided class or upper exponential");
  }

  // The mirrored run of the negated walk has the law of (theta-, -xi-); for
  // upper exponential walks the positive run itself does.
  const IncrementLaw* sample_law = &law;
  std::optional<IncrementLaw> negated;
  if (which == TailEvent::xi_minus && two_sided_class) {
    negated = law.negated();
    sample_law = &*negated;
  }
  PositiveLaw overshoot;
  if (which != TailEvent::zero_cycle) overshoot = sample_law->overshoot_law();

  const bool one_signed =
      law.finite_support() && law.min_value() >= -1 && law.max_value() <= 1;
  const double sigma = std::sqrt(law.sigma2());

  TailCurve curve;
  std::uint64_t salt = 100;
  for (long long n : n_grid) {
    if (n < 1) fail(errc::parse_error, "grid points must be >= 1");
    const long long t_cap = static_cast<long long>(std::floor(
        t * static_cast<double>(n)));
    const double x_thresh = s * std::pow(static_cast<double>(n), 1.5);
    auto tally = bernoulli_reduce(reps, seed, salt++, workers,
                                  [&](Rng& rng) -> std::optional<bool> {
      switch (which) {
        case TailEvent::theta_only:
          return theta_run_exceeds(*sample_law, overshoot, t_cap, rng);
        case TailEvent::xi_plus:
        case TailEvent::xi_minus:
          return xi_plus_indicator(*sample_law, overshoot, t_cap, x_thresh, cycle_cap, rng);
        case TailEvent::xi_full:
          return xi_full_indicator(*sample_law, overshoot, t_cap, x_thresh, cycle_cap, rng);
        case TailEvent::zero_cycle:
          return zero_cycle_indicator(*sample_law, t_cap, x_thresh, cycle_cap, one_signed, rng);
      }
      return std::nullopt;
    });
    TailCurvePoint pt;
    pt.n = static_cast<double>(n);
    pt.decided = tally.decided;
    pt.censored = tally.censored;
    if (tally.decided > 0) {
      const double p = static_cast<double>(tally.hits) / static_cast<double>(tally.decided);
      const double root_n = std::sqrt(static_cast<double>(n));
      pt.raw = p;
      pt.scaled = root_n * p;
      pt.stderr_ = root_n * std::sqrt(p * (1.0 - p) / static_cast<double>(tally.decided));
    }
    curve.points.push_back(pt);
  }

  // Limit constant: C t^{-1/2} F(sigma s t^{-3/2}), with the zero-cycle
  // variant using sigma / sqrt(2 pi t). At t = 0 the continuity extension
  // C (sigma s)^{-1/3} E[xi_ex^{1/3}] applies. Zero-cycle theory needs span 1
  // unless s = 0, where only the duration tail and the sign split enter.
  if (which == TailEvent::theta_only) s = 0.0;  // the event does not involve areas
  const bool span_ok = which != TailEvent::zero_cycle || s == 0.0 || law.span() == 1;
  curve.theory_attached = false;
  if (span_ok) {
    double constant = 0.0;
    bool have_const = true;
    if (which == TailEvent::zero_cycle) {
      constant = sigma / std::sqrt(2.0 * M_PI);
    } else {
      try {
        constant = prop1_constant(law);
      } catch (const Error&) {
        have_const = false;
      }
    }
    if (have_const) {
      if (t > 0) {
        const double arg = sigma * s * std::pow(t, -1.5);
        double f_val = 1.0;
        bool ok = true;
        if (arg > 0) {
          if (xi_ex_samples.empty()) {
            ok = false;
          } else {
            double sum = 0;
            for (double xi : xi_ex_samples)
              sum += std::min(std::pow(arg, -1.0 / 3.0) * std::cbrt(xi), 1.0);
            f_val = sum / static_cast<double>(xi_ex_samples.size());
          }
        }
        if (ok) {
          curve.theory = constant / std::sqrt(t) * f_val;
          curve.theory_attached = true;
        }
      } else {
        // t = 0, s > 0
        if (!xi_ex_samples.empty()) {
          double sum = 0;
          for (double xi : xi_ex_samples) sum += std::cbrt(xi);
          const double mean_cbrt = sum / static_cast<double>(xi_ex_samples.size());
          curve.theory = constant * mean_cbrt * std::pow(sigma * s, -1.0 / 3.0);
          curve.theory_attached = true;
        }
      }
    }
  }
  return curve;
}

SymmetryReport xi_symmetry_test(const IncrementLaw& law, std::uint64_t reps, std::uint64_t seed,
                                unsigned workers, long long cycle_cap, double level) {
  if (!(law.a_plus() > 0) || !(law.a_minus() > 0))
    fail(errc::degenerate_law, "cycles need mass on both sides of 0");
  PositiveLaw overshoot = law.overshoot_law();

  ChunkPlan plan{static_cast<std::size_t>(reps), kChunk};
  struct Part {
    std::vector<double> xi;
    std::vector<long long> theta;
    std::uint64_t censored = 0;
  };
  auto partials = run_chunks<Part>(plan.count(), workers, [&](std::size_t c) {
    Rng rng(seed, 200 * 0x100000000ULL + c);
    Part part;
    for (std::size_t i = plan.begin(c); i < plan.end(c); ++i) {
      auto draw = cycle_draw(law, overshoot, cycle_cap, rng);
      if (!draw) {
        ++part.censored;
        continue;
      }
      part.xi.push_back(draw->xi);
      part.theta.push_back(draw->theta);
    }
    return part;
  });

  SymmetryReport rep;
  std::vector<double> xi;
  std::vector<long long> theta;
  for (auto& p : partials) {
    rep.censored += p.censored;
    xi.insert(xi.end(), p.xi.begin(), p.xi.end());
    theta.insert(theta.end(), p.theta.begin(), p.theta.end());
  }
  rep.n_used = xi.size();
  if (rep.n_used < 100) fail(errc::insufficient_data, "too few uncensored cycles");

  for (double v : xi) {
    if (v > 0)
      ++rep.n_pos;
    else if (v < 0)
      ++rep.n_neg;
    else
      ++rep.n_zero;
  }
  const double n_signed = static_cast<double>(rep.n_pos + rep.n_neg);
  rep.sign_z = (static_cast<double>(rep.n_pos) - static_cast<double>(rep.n_neg)) /
               std::sqrt(n_signed);
  rep.sign_z_crit = z_crit(level);

  // Split-sample KS: first half of xi against the negation of the second
  // half (independent samples under the iid cycle law).
  const std::size_t half = xi.size() / 2;
  std::vector<double> first(xi.begin(), xi.begin() + half);
  std::vector<double> second;
  second.reserve(xi.size() - half);
  for (std::size_t i = half; i < xi.size(); ++i) second.push_back(-xi[i]);
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());
  double d = 0;
  std::size_t i = 0, j = 0;
  while (i < first.size() && j < second.size()) {
    if (first[i] <= second[j])
      ++i;
    else
      ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / first.size() -
                              static_cast<double>(j) / second.size()));
  }
  rep.ks_stat = d;
  const double n1 = static_cast<double>(first.size()), n2 = static_cast<double>(second.size());
  rep.ks_threshold = std::sqrt(-0.5 * std::log(level / 2.0)) * std::sqrt((n1 + n2) / (n1 * n2));

  // Sign tests inside dyadic theta strata, Bonferroni-adjusted.
  std::vector<std::pair<long long, long long>> strata_counts(64, {0, 0});
  int max_bucket = 0;
  for (std::size_t k = 0; k < xi.size(); ++k) {
    int b = 0;
    long long th = theta[k];
    while (th > 1) {
      th >>= 1;
      ++b;
    }
    max_bucket = std::max(max_bucket, b);
    if (xi[k] > 0)
      ++strata_counts[b].first;
    else if (xi[k] < 0)
      ++strata_counts[b].second;
  }
  int n_strata = 0;
  for (int b = 0; b <= max_bucket; ++b)
    if (strata_counts[b].first + strata_counts[b].second >= 200) ++n_strata;
  rep.stratum_z_crit = z_crit(level / std::max(1, n_strata));
  for (int b = 0; b <= max_bucket; ++b) {
    const double np = static_cast<double>(strata_counts[b].first);
    const double nm = static_cast<double>(strata_counts[b].second);
    if (np + nm < 200) continue;
    rep.max_stratum_z = std::max(rep.max_stratum_z, std::fabs(np - nm) / std::sqrt(np + nm));
  }

  rep.upper_exponential = classify(law).upper_exponential;
  rep.pass = std::fabs(rep.sign_z) <= rep.sign_z_crit && rep.ks_stat <= rep.ks_threshold &&
             rep.max_stratum_z <= rep.stratum_z_crit;
  return rep;
}

AssociationReport association_scan(const IncrementLaw& law, std::size_t grid_size,
                                   std::uint64_t reps, std::uint64_t seed, unsigned workers,
                                   long long cycle_cap) {
  if (reps < 10'000) fail(errc::insufficient_data, "association scan needs reps >= 1e4");
  if (grid_size < 1 || grid_size > 32) fail(errc::parse_error, "grid size must be in 1..32");
  PositiveLaw overshoot = law.overshoot_law();

  // Pass 1: quantile thresholds from a smaller pilot sample.
  const std::uint64_t pilot = std::min<std::uint64_t>(reps, 100'000);
  std::vector<double> pilot_xi;
  std::vector<long long> pilot_theta;
  {
    ChunkPlan plan{static_cast<std::size_t>(pilot), kChunk};
    auto partials = run_chunks<std::pair<std::vector<double>, std::vector<long long>>>(
        plan.count(), workers, [&](std::size_t c) {
          Rng rng(seed, 300 * 0x100000000ULL + c);
          std::pair<std::vector<double>, std::vector<long long>> part;
          for (std::size_t i = plan.begin(c); i < plan.end(c); ++i) {
            auto draw = cycle_draw(law, overshoot, cycle_cap, rng);
            if (!draw) continue;
            part.first.push_back(draw->xi);
            part.second.push_back(draw->theta_plus);
          }
          return part;
        });
    for (auto& p : partials) {
      pilot_xi.insert(pilot_xi.end(), p.first.begin(), p.first.end());
      pilot_theta.insert(pilot_theta.end(), p.second.begin(), p.second.end());
    }
  }
  if (pilot_xi.size() < 1000) fail(errc::insufficient_data, "pilot pass mostly censored");
  std::sort(pilot_xi.begin(), pilot_xi.end());
  std::sort(pilot_theta.begin(), pilot_theta.end());

  AssociationReport rep;
  for (std::size_t i = 0; i < grid_size; ++i) {
    const double q = (static_cast<double>(i) + 0.5) / static_cast<double>(grid_size);
    rep.xi_thresholds.push_back(pilot_xi[static_cast<std::size_t>(q * pilot_xi.size())]);
    rep.theta_thresholds.push_back(
        static_cast<double>(pilot_theta[static_cast<std::size_t>(q * pilot_theta.size())]));
  }
  const double a_min = rep.xi_thresholds.front();

  // Pass 2: joint bucket histogram. bucket = #thresholds strictly below the
  // value, so 1{value > threshold_i} == (bucket >= i+1).
  const std::size_t nb = grid_size + 1;
  struct Hist {
    std::vector<std::uint64_t> counts;
    std::uint64_t censored = 0;
  };
  ChunkPlan plan{static_cast<std::size_t>(reps), kChunk};
  auto partials = run_chunks<Hist>(plan.count(), workers, [&](std::size_t c) {
    Rng rng(seed, 301 * 0x100000000ULL + c);
    Hist h;
    h.counts.assign(nb * nb, 0);
    for (std::size_t i = plan.begin(c); i < plan.end(c); ++i) {
      // Resolve theta+ exactly and xi far enough to place it on the grid.
      double v = overshoot.sample(rng);
      long long theta_plus = 1;
      double area = v;
      bool censored_cycle = false;
      for (;;) {
        if (theta_plus > cycle_cap) {
          censored_cycle = true;
          break;
        }
        const double w = v + law.sample(rng);
        if (w < 0.0) {
          v = w;
          break;
        }
        ++theta_plus;
        area += w;
        v = w;
      }
      double xi = area;
      if (!censored_cycle) {
        xi += v;  // first negative value
        long long neg_steps = 1;
        while (xi >= a_min) {
          if (neg_steps > cycle_cap) {
            censored_cycle = true;
            break;
          }
          const double w = v + law.sample(rng);
          if (w > 0.0) break;  // cycle complete, xi exact
          xi += w;
          v = w;
          ++neg_steps;
        }
      }
      if (censored_cycle) {
        ++h.censored;
        continue;
      }
      std::size_t bx = 0, by = 0;
      while (bx < grid_size && xi > rep.xi_thresholds[bx]) ++bx;
      while (by < grid_size && static_cast<double>(theta_plus) > rep.theta_thresholds[by]) ++by;
      ++h.counts[bx * nb + by];
    }
    return h;
  });
  std::vector<std::uint64_t> counts(nb * nb, 0);
  for (const auto& p : partials) {
    rep.censored += p.censored;
    for (std::size_t k = 0; k < counts.size(); ++k) counts[k] += p.counts[k];
  }
  std::uint64_t n_used = 0;
  for (auto c : counts) n_used += c;
  rep.n_used = n_used;
  if (n_used == 0) fail(errc::insufficient_data, "all cycles censored");

  // Cumulative tail counts: tail[i][j] = #{bx >= i and by >= j}.
  std::vector<std::uint64_t> tail((nb + 1) * (nb + 1), 0);
  for (std::size_t i = nb; i-- > 0;) {
    for (std::size_t j = nb; j-- > 0;) {
      tail[i * (nb + 1) + j] = counts[i * nb + j] + tail[(i + 1) * (nb + 1) + j] +
                               tail[i * (nb + 1) + j + 1] - tail[(i + 1) * (nb + 1) + j + 1];
    }
  }
  const double n = static_cast<double>(n_used);
  for (std::size_t i = 1; i <= grid_size; ++i) {
    for (std::size_t j = 1; j <= grid_size; ++j) {
      const double q11 = static_cast<double>(tail[i * (nb + 1) + j]) / n;
      const double pa = static_cast<double>(tail[i * (nb + 1)]) / n;
      const double pb = static_cast<double>(tail[j]) / n;
      AssociationCell cell;
      cell.a = rep.xi_thresholds[i - 1];
      cell.b = rep.theta_thresholds[j - 1];
      cell.cov = q11 - pa * pb;
      // Var[(I-pa)(J-pb)] from the four joint cells.
      const double p10 = pa - q11, p01 = pb - q11, p00 = 1.0 - pa - pb + q11;
      const double m2 = q11 * (1 - pa) * (1 - pa) * (1 - pb) * (1 - pb) +
                        p10 * (1 - pa) * (1 - pa) * pb * pb +
                        p01 * pa * pa * (1 - pb) * (1 - pb) + p00 * pa * pa * pb * pb;
      const double var = std::max(0.0, m2 - cell.cov * cell.cov);
      cell.stderr_ = std::sqrt(var / n);
      if (cell.stderr_ > 0 && cell.cov < -5.0 * cell.stderr_) ++rep.violations;
      rep.cells.push_back(cell);
    }
  }
  return rep;
}

ChainReport chain_checks(const IncrementLaw& law, long long horizon, std::uint64_t reps,
                         std::uint64_t seed, unsigned workers, long long cycle_cap) {
  if (horizon < 4) fail(errc::parse_error, "horizon must be >= 4");
  auto cls = classify(law);
  // Sampling fresh overshoot-law cycles reproduces the walk's own cycle
  // sequence only when the overshoot is memoryless.
  if (!cls.upper_exponential && !cls.upper_geometric && !cls.right_continuous)
    fail(errc::hypothesis_not_met,
         "chain checks need a memoryless overshoot (exponential, geometric, or unit)");
  PositiveLaw overshoot = law.overshoot_law();
  const long long sqrt_n = static_cast<long long>(std::floor(std::sqrt(
      static_cast<double>(horizon))));

  ChainReport rep;
  rep.horizon = horizon;

  rep.upper.lhs = mc_p(law, horizon, reps, true, seed, workers);
  rep.upper.lhs.description = "p~_N";

  // P{tau_nu > N} on overshoot cycles.
  auto tau_tally = bernoulli_reduce(reps, seed, 400, workers, [&](Rng& rng) -> std::optional<bool> {
    long long total_theta = 0;
    double prefix_xi = 0.0;
    for (;;) {
      double v = overshoot.sample(rng);
      long long theta = 1;
      double xi = v;
      bool negative_phase = false;
      for (;;) {
        if (total_theta + theta > horizon) return true;
        const double w = v + law.sample(rng);
        if (!negative_phase) {
          negative_phase = w < 0.0;
          xi += w;
        } else if (w > 0.0) {
          break;
        } else {
          xi += w;
        }
        v = w;
        ++theta;
      }
      total_theta += theta;
      prefix_xi += xi;
      if (prefix_xi < 0.0) return false;  // tau_nu = total_theta <= horizon
    }
  });
  rep.upper.rhs = to_estimate(tau_tally, seed, "P{tau_nu > N}");
  {
    const double sigma = std::hypot(rep.upper.lhs.stderr_, rep.upper.rhs.stderr_);
    rep.upper.margin_sigmas =
        sigma > 0 ? (rep.upper.rhs.value - rep.upper.lhs.value) / sigma : 0.0;
    rep.upper.ok = rep.upper.lhs.value <= rep.upper.rhs.value + 3.0 * sigma;
  }

  // Lower chain pieces.
  auto min_xi_tally =
      bernoulli_reduce(reps, seed, 401, workers, [&](Rng& rng) -> std::optional<bool> {
        double prefix = 0.0;
        for (long long k = 0; k < sqrt_n; ++k) {
          auto draw = cycle_draw(law, overshoot, cycle_cap, rng);
          if (!draw) return std::nullopt;
          prefix += draw->xi;
          if (prefix < 0.0) return false;
        }
        return true;
      });
  rep.min_xi_prefix = to_estimate(min_xi_tally, seed, "P{min prefix xi >= 0, k <= sqrt(N)}");
  rep.censored_reps += min_xi_tally.censored;

  auto theta_sum_tally =
      bernoulli_reduce(reps, seed, 402, workers, [&](Rng& rng) -> std::optional<bool> {
        long long total = 0;
        for (long long k = 0; k < sqrt_n; ++k) {
          double v = overshoot.sample(rng);
          long long run = 1;
          for (;;) {
            if (total + run > horizon) return true;
            const double w = v + law.sample(rng);
            if (w < 0.0) break;
            v = w;
            ++run;
          }
          total += run;
        }
        return total > horizon;
      });
  rep.theta_sum_tail = to_estimate(theta_sum_tally, seed, "P{sum theta+ > N, sqrt(N) cycles}");

  rep.product = rep.min_xi_prefix.value * rep.theta_sum_tail.value;
  rep.product_se = std::hypot(rep.min_xi_prefix.value * rep.theta_sum_tail.stderr_,
                              rep.theta_sum_tail.value * rep.min_xi_prefix.stderr_);
  rep.lower.lhs = MCEstimate{rep.product, rep.product_se, reps, seed, "product bound"};
  rep.lower.rhs = rep.upper.lhs;
  {
    const double sigma = std::hypot(rep.product_se, rep.upper.lhs.stderr_);
    rep.lower.margin_sigmas =
        sigma > 0 ? (rep.upper.lhs.value - rep.product) / sigma : 0.0;
    rep.lower.ok = rep.product <= rep.upper.lhs.value + 3.0 * sigma;
  }

  if (law.integer_valued()) {
    InequalityCheck zero;
    zero.lhs = mc_p(law, horizon, reps, false, seed, workers);
    zero.lhs.description = "p_N";
    auto tau0_tally =
        bernoulli_reduce(reps, seed, 403, workers, [&](Rng& rng) -> std::optional<bool> {
          long long total_theta = 0;
          double prefix_xi = 0.0;
          for (;;) {
            long long v = 0, theta = 0;
            double xi = 0.0;
            for (;;) {
              if (total_theta + theta + 1 > horizon) return true;
              const long long x = static_cast<long long>(law.sample(rng));
              v += x;
              ++theta;
              xi += static_cast<double>(v);
              if (v == 0 && x != 0) break;
            }
            total_theta += theta;
            prefix_xi += xi;
            if (prefix_xi < 0.0) return false;
          }
        });
    zero.rhs = to_estimate(tau0_tally, seed, "P{tau0_nu0 > N}");
    const double sigma = std::hypot(zero.lhs.stderr_, zero.rhs.stderr_);
    zero.margin_sigmas = sigma > 0 ? (zero.rhs.value - zero.lhs.value) / sigma : 0.0;
    zero.ok = zero.lhs.value <= zero.rhs.value + 3.0 * sigma;
    rep.upper_zero = zero;
  }

  // Partial sums of sum_n (1/n)(P{xi_1+...+xi_n > 0} - 1/2), tabulated as a
  // diagnostic; no convergence claim is attached.
  {
    const long long n_max = 32;
    const std::uint64_t reps_e = std::min<std::uint64_t>(reps, 30'000);
    ChunkPlan plan{static_cast<std::size_t>(reps_e), 1024};
    auto partials = run_chunks<std::vector<std::uint64_t>>(
        plan.count(), workers, [&](std::size_t c) {
          Rng rng(seed, 404 * 0x100000000ULL + c);
          std::vector<std::uint64_t> pos(n_max + 1, 0);  // [0] = completed reps
          for (std::size_t i = plan.begin(c); i < plan.end(c); ++i) {
            double prefix = 0.0;
            std::vector<double> prefixes;
            bool censored = false;
            for (long long k = 1; k <= n_max; ++k) {
              auto draw = cycle_draw(law, overshoot, 10'000, rng);
              if (!draw) {
                censored = true;
                break;
              }
              prefix += draw->xi;
              prefixes.push_back(prefix);
            }
            if (censored) continue;
            ++pos[0];
            for (long long k = 1; k <= n_max; ++k)
              if (prefixes[k - 1] > 0.0) ++pos[k];
          }
          return pos;
        });
    std::vector<std::uint64_t> pos(n_max + 1, 0);
    for (const auto& p : partials)
      for (long long k = 0; k <= n_max; ++k) pos[k] += p[k];
    double acc = 0.0;
    if (pos[0] > 0) {
      for (long long k = 1; k <= n_max; ++k) {
        const double pk = static_cast<double>(pos[k]) / static_cast<double>(pos[0]);
        acc += (pk - 0.5) / static_cast<double>(k);
        rep.egorov_partial_sums.push_back(acc);
      }
    }
  }
  return rep;
}

}  // namespace pw
