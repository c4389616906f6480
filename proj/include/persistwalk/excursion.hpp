#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "persistwalk/rng.hpp"

namespace pw {

// Discretized standard Brownian excursion on {0, 1/m, ..., 1}: a Brownian
// bridge rotated at its minimum (Vervaat construction). `area` is the
// trapezoid integral, which for a rotation equals the bridge mean minus the
// bridge minimum.
struct ExcursionSample {
  std::size_t mesh = 0;
  std::vector<double> values;  // mesh+1 points, endpoints 0, all >= 0
  double area = 0.0;
};

ExcursionSample sample_excursion(std::size_t mesh, Rng& rng);

// Area-only draw; identical in law to sample_excursion(mesh, rng).area.
double sample_xi_ex(std::size_t mesh, Rng& rng);

// `count` areas from substreams of (seed); deterministic for any worker
// count.
std::vector<double> sample_xi_ex_bulk(std::size_t mesh, std::size_t count, std::uint64_t seed,
                                      unsigned workers);

struct FEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

// F(x) = E min{x^{-1/3} xi_ex^{1/3}, 1} over a fixed sample set; F(0) = 1
// exactly. errc::empty_sample if the set is empty.
FEstimate f_eval(double x, std::span<const double> xi_ex_samples);

struct FCurve {
  std::vector<double> x;
  std::vector<double> f;
  std::vector<double> stderr_;
  std::size_t n_samples = 0;
  std::size_t mesh = 0;
};

// Evaluates F on a sorted grid over one common sample set, so F is
// nonincreasing and x^{1/3} F(x) nondecreasing deterministically.
FCurve f_curve(std::span<const double> xs, std::span<const double> xi_ex_samples,
               std::size_t mesh);

}  // namespace pw
