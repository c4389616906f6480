#include "persistwalk/excursion.hpp"

#include <algorithm>
#include <cmath>

#include "persistwalk/errors.hpp"
#include "persistwalk/parallel.hpp"

namespace pw {

namespace {

// Bridge values B_1..B_m at j/m (B_0 = 0, B_m = 0 after the drift removal),
// written into `bridge` which has size m.
void fill_bridge(std::vector<double>& bridge, Rng& rng) {
  const std::size_t m = bridge.size();
  const double step_sd = std::sqrt(1.0 / static_cast<double>(m));
  double w = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    w += step_sd * rng.normal();
    bridge[j] = w;
  }
  const double end = bridge[m - 1];
  for (std::size_t j = 0; j + 1 < m; ++j)
    bridge[j] -= end * static_cast<double>(j + 1) / static_cast<double>(m);
  bridge[m - 1] = 0.0;
}

}  // namespace

ExcursionSample sample_excursion(std::size_t mesh, Rng& rng) {
  if (mesh < 2) fail(errc::parse_error, "mesh must be >= 2");
  std::vector<double> bridge(mesh);  // bridge[i] = B_{(i+1)/m}; bridge[m-1] = 0
  fill_bridge(bridge, rng);
  // B_0 = B_m = 0 participate in the minimum through minv's initial value.
  std::size_t rho = 0;  // grid index of the argmin
  double minv = 0.0;
  for (std::size_t j = 0; j + 1 < mesh; ++j) {
    if (bridge[j] < minv) {
      minv = bridge[j];
      rho = j + 1;
    }
  }
  auto grid_value = [&](std::size_t g) { return g == 0 ? 0.0 : bridge[g - 1]; };
  ExcursionSample out;
  out.mesh = mesh;
  out.values.resize(mesh + 1);
  out.values[0] = 0.0;
  out.values[mesh] = 0.0;
  // Rotation at the minimum: V_j = B_{(rho+j) mod m} - B_rho on the bridge's
  // periodic extension.
  for (std::size_t j = 1; j < mesh; ++j)
    out.values[j] = grid_value((rho + j) % mesh) - minv;
  double sum = 0.0;
  for (std::size_t j = 1; j < mesh; ++j) sum += out.values[j];
  out.area = sum / static_cast<double>(mesh);
  return out;
}

double sample_xi_ex(std::size_t mesh, Rng& rng) {
  if (mesh < 2) fail(errc::parse_error, "mesh must be >= 2");
  thread_local std::vector<double> bridge;
  bridge.resize(mesh);
  fill_bridge(bridge, rng);
  // Trapezoid area of the rotated path: mean of the bridge minus its minimum
  // (the sum over a full rotation period is shift-invariant).
  double sum = 0.0, minv = 0.0;
  for (std::size_t j = 0; j < mesh; ++j) {
    sum += bridge[j];
    if (bridge[j] < minv) minv = bridge[j];
  }
  return sum / static_cast<double>(mesh) - minv;
}

std::vector<double> sample_xi_ex_bulk(std::size_t mesh, std::size_t count, std::uint64_t seed,
                                      unsigned workers) {
  constexpr std::size_t kChunk = 4096;
  ChunkPlan plan{count, kChunk};
  auto partials = run_chunks<std::vector<double>>(
      plan.count(), workers, [&](std::size_t c) {
        Rng rng(seed, c);
        std::vector<double> out;
        out.reserve(plan.end(c) - plan.begin(c));
        for (std::size_t i = plan.begin(c); i < plan.end(c); ++i)
          out.push_back(sample_xi_ex(mesh, rng));
        return out;
      });
  std::vector<double> all;
  all.reserve(count);
  for (auto& part : partials) all.insert(all.end(), part.begin(), part.end());
  return all;
}

FEstimate f_eval(double x, std::span<const double> xi_ex_samples) {
  if (xi_ex_samples.empty()) fail(errc::empty_sample, "no excursion areas given");
  if (x < 0) fail(errc::parse_error, "F is defined for x >= 0");
  if (x == 0.0) return {1.0, 0.0};
  const double scale = std::pow(x, -1.0 / 3.0);
  double sum = 0.0, sumsq = 0.0;
  for (double xi : xi_ex_samples) {
    const double v = std::min(scale * std::cbrt(xi), 1.0);
    sum += v;
    sumsq += v * v;
  }
  const double n = static_cast<double>(xi_ex_samples.size());
  const double mean = sum / n;
  const double var = std::max(0.0, sumsq / n - mean * mean);
  return {mean, std::sqrt(var / n)};
}

FCurve f_curve(std::span<const double> xs, std::span<const double> xi_ex_samples,
               std::size_t mesh) {
  FCurve curve;
  curve.n_samples = xi_ex_samples.size();
  curve.mesh = mesh;
  curve.x.assign(xs.begin(), xs.end());
  std::sort(curve.x.begin(), curve.x.end());
  for (double x : curve.x) {
    auto est = f_eval(x, xi_ex_samples);
    curve.f.push_back(est.value);
    curve.stderr_.push_back(est.stderr_);
  }
  return curve;
}

}  // namespace pw
