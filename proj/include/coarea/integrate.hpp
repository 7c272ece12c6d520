#pragma once

// The two sides of the band identity, computed through routes that share no
// quadrature machinery:
//
//   lhs: volume integral of g over f^-1[a,b], by Monte Carlo or a midpoint
//        tensor grid with the band indicator;
//   rhs: composite Simpson over t of the per-level surface integrals
//        int_U g(Phi) |N_t(u)| / |grad f(Phi)| du on transported charts.
//
// Monte Carlo uses fixed-size batches with per-batch counter-seeded
// generators, so results are bit-identical for a given seed regardless of
// how batches are scheduled.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "coarea/chart.hpp"
#include "coarea/errors.hpp"
#include "coarea/flow.hpp"
#include "coarea/parallel.hpp"
#include "coarea/scalar_field.hpp"
#include "coarea/vec.hpp"

namespace coarea {

enum class VolumeMethod { MonteCarlo, TensorGrid };

struct QuadratureSpec {
  int t_nodes = 33;                 // Simpson nodes over [a,b]; odd, >= 3
  std::vector<int> u_grid;          // per-axis chart resolution (seeding helper)
  VolumeMethod method = VolumeMethod::MonteCarlo;
  long long mc_samples = 1'000'000;
  std::uint64_t rng_seed = 42;
  int grid_nodes_per_axis = 512;    // tensor-grid resolution
  std::vector<std::pair<double, double>> bounding_box;  // per-axis [lo, hi]
  double pass_rel_tol = 1e-2;       // report PASS threshold
};

namespace detail {

// SplitMix64; used to derive independent per-batch streams from one seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// xoshiro-style uniform in [0,1): 53 mantissa bits of a counter-hashed
// stream. Self-contained so results do not depend on the standard library's
// distribution implementation.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : state_(seed) {}
  double next() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

constexpr long long kMcBatch = 1 << 16;

}  // namespace detail

struct VolumeIntegralResult {
  double value = 0.0;
  // Monte Carlo extras (zero/empty for tensor grids)
  double std_error = 0.0;
  long long accepted = 0;
  double min_grad_norm_accepted = std::numeric_limits<double>::infinity();
};

// Volume integral of g over the band {a <= f <= b} inside the bounding box.
// `track_grad` additionally samples |grad f| on accepted Monte Carlo points
// (band validation support).
inline VolumeIntegralResult lhs_volume_integral_detail(
    const ScalarField& f, const ScalarField& g, double a, double b,
    const QuadratureSpec& spec, bool track_grad = false) {
  const int dim = f.dim();
  if (static_cast<int>(spec.bounding_box.size()) != dim)
    throw Error("bounding box must have one [lo,hi] pair per axis");
  if (a > b) throw Error("band must satisfy a <= b");
  VolumeIntegralResult out;
  if (a == b) return out;

  double box_volume = 1.0;
  for (auto [lo, hi] : spec.bounding_box) {
    if (!(hi > lo)) throw Error("bounding box axis range must be increasing");
    box_volume *= hi - lo;
  }

  if (spec.method == VolumeMethod::MonteCarlo) {
    if (spec.mc_samples < 1) throw Error("mc_samples must be >= 1");
    // Stratified jittered sampling: the first m^dim samples take one uniform
    // draw inside their own cell of an m-per-axis partition of the box (m as
    // large as the budget allows); the remainder is plain uniform. The
    // estimator is still box_volume * mean(g * indicator); stratification
    // only shrinks its variance. Each sample is a pure function of
    // (seed, sample index), so batching does not affect the result.
    long long m = 1;
    {
      auto pow_dim_fits = [&](long long base) {
        long long p = 1;
        for (int d = 0; d < dim; ++d) {
          if (p > spec.mc_samples / base) return false;
          p *= base;
        }
        return p <= spec.mc_samples;
      };
      while (pow_dim_fits(m + 1)) ++m;
    }
    long long strata_total = 1;
    for (int d = 0; d < dim; ++d) strata_total *= m;

    const long long n_batches =
        (spec.mc_samples + detail::kMcBatch - 1) / detail::kMcBatch;
    struct BatchResult {
      double sum = 0.0, sum_sq = 0.0;
      long long accepted = 0;
      double min_grad = std::numeric_limits<double>::infinity();
    };
    std::vector<BatchResult> batches(static_cast<std::size_t>(n_batches));
    parallel_for(0, static_cast<int>(n_batches), [&](int bi) {
      detail::UniformStream rng(
          detail::splitmix64(spec.rng_seed ^ static_cast<std::uint64_t>(bi)));
      long long begin = static_cast<long long>(bi) * detail::kMcBatch;
      long long count = std::min<long long>(detail::kMcBatch, spec.mc_samples - begin);
      BatchResult& br = batches[static_cast<std::size_t>(bi)];
      KahanSum sum, sum_sq;
      Vec x(static_cast<std::size_t>(dim));
      for (long long s = 0; s < count; ++s) {
        long long global = begin + s;
        if (global < strata_total) {
          long long cell = global;
          for (int d = dim - 1; d >= 0; --d) {
            auto [lo, hi] = spec.bounding_box[static_cast<std::size_t>(d)];
            long long idx = cell % m;
            cell /= m;
            x[static_cast<std::size_t>(d)] =
                lo + (hi - lo) * ((static_cast<double>(idx) + rng.next()) /
                                  static_cast<double>(m));
          }
        } else {
          for (int d = 0; d < dim; ++d) {
            auto [lo, hi] = spec.bounding_box[static_cast<std::size_t>(d)];
            x[static_cast<std::size_t>(d)] = lo + (hi - lo) * rng.next();
          }
        }
        double fx = f.eval(x);
        if (fx >= a && fx <= b) {
          double gx = g.eval(x);
          sum.add(gx);
          sum_sq.add(gx * gx);
          ++br.accepted;
          if (track_grad) {
            double gn = f.grad_norm(x);
            if (gn < br.min_grad) br.min_grad = gn;
          }
        }
      }
      br.sum = sum.value();
      br.sum_sq = sum_sq.value();
    });
    KahanSum total, total_sq;
    long long accepted = 0;
    double min_grad = std::numeric_limits<double>::infinity();
    for (const BatchResult& br : batches) {  // fixed batch order
      total.add(br.sum);
      total_sq.add(br.sum_sq);
      accepted += br.accepted;
      if (br.min_grad < min_grad) min_grad = br.min_grad;
    }
    double n = static_cast<double>(spec.mc_samples);
    double mean = total.value() / n;
    double mean_sq = total_sq.value() / n;
    // iid variance formula: an upper bound under stratification.
    double var = std::max(0.0, mean_sq - mean * mean);
    out.value = box_volume * mean;
    out.std_error = box_volume * std::sqrt(var / n);
    out.accepted = accepted;
    out.min_grad_norm_accepted = min_grad;
    return out;
  }

  // Tensor grid: midpoint rule with the band indicator.
  const int m = spec.grid_nodes_per_axis;
  if (m < 1) throw Error("grid_nodes_per_axis must be >= 1");
  Vec x(static_cast<std::size_t>(dim));
  std::vector<int> ix(static_cast<std::size_t>(dim), 0);
  double cell = box_volume;
  for (int d = 0; d < dim; ++d) cell /= m;
  KahanSum sum;
  for (;;) {
    for (int d = 0; d < dim; ++d) {
      auto [lo, hi] = spec.bounding_box[static_cast<std::size_t>(d)];
      x[static_cast<std::size_t>(d)] =
          lo + (hi - lo) * ((ix[static_cast<std::size_t>(d)] + 0.5) / m);
    }
    double fx = f.eval(x);
    if (fx >= a && fx <= b) sum.add(g.eval(x));
    int d = dim - 1;
    for (; d >= 0; --d) {
      if (++ix[static_cast<std::size_t>(d)] < m) break;
      ix[static_cast<std::size_t>(d)] = 0;
    }
    if (d < 0) break;
  }
  out.value = cell * sum.value();
  return out;
}

inline double lhs_volume_integral(const ScalarField& f, const ScalarField& g,
                                  double a, double b,
                                  const QuadratureSpec& spec) {
  return lhs_volume_integral_detail(f, g, a, b, spec).value;
}

// int_U g(Phi) |N_t| / |grad f| du at level index k, by the grid's
// rectangle/trapezoid weights in fixed node order.
inline double level_surface_integral(const TransportedMesh& mesh,
                                     const ScalarField& g, int k) {
  const int J = mesh.nodes();
  const int rank = mesh.grid.rank();
  std::vector<int> ix(static_cast<std::size_t>(rank));
  KahanSum sum;
  for (int j = 0; j < J; ++j) {
    mesh.grid.unflatten(j, ix);
    double w = mesh.grid.weight(ix);
    double nn = norm(mesh.normal(k, j));
    if (nn == 0.0) continue;  // polar rows contribute nothing
    double gn = mesh.grad_norm(k, j);
    double gx = g.eval(mesh.position(k, j));
    sum.add(w * gx * nn / gn);
  }
  return sum.value();
}

struct LevelEntry {
  double t = 0.0;
  double integral = 0.0;  // sum over charts of int g/|grad f| dsigma at t
};

struct RhsResult {
  double value = 0.0;
  std::vector<LevelEntry> per_level;
  std::vector<TransportedMesh> meshes;  // one per chart
  // Richardson-style Simpson refinement estimate (conservative, factor 4);
  // unset when the node count does not admit a half-resolution rule.
  std::optional<double> t_error_estimate;
};

namespace detail {

// Composite Simpson weights for `count` nodes spanning length `len`.
inline double simpson_weight(int i, int count, double len) {
  if (count == 1) return 0.0;
  double h = len / (count - 1);
  if (i == 0 || i == count - 1) return h / 3.0;
  return (i % 2 == 1) ? 4.0 * h / 3.0 : 2.0 * h / 3.0;
}

}  // namespace detail

// Right-hand side of the identity: transport each chart, sum per-level
// surface integrals over charts, Simpson over t.
inline RhsResult rhs_coarea_integral(const ChartSet& charts, const ScalarField& f,
                                     const ScalarField& g, double a, double b,
                                     const QuadratureSpec& spec,
                                     const FlowConfig& cfg) {
  if (charts.charts.empty()) throw Error("chart set is empty");
  if (a != b) {
    if (spec.t_nodes < 3 || spec.t_nodes % 2 == 0)
      throw Error("t_nodes must be odd and >= 3");
  }

  RhsResult out;
  for (const Chart& chart : charts.charts)
    out.meshes.push_back(transport_chart(chart, f, a, b, spec.t_nodes, cfg));

  const int K = out.meshes.front().level_count();
  out.per_level.resize(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    out.per_level[static_cast<std::size_t>(k)].t =
        out.meshes.front().levels[static_cast<std::size_t>(k)];
    KahanSum sum;
    for (const TransportedMesh& mesh : out.meshes)
      sum.add(level_surface_integral(mesh, g, k));
    out.per_level[static_cast<std::size_t>(k)].integral = sum.value();
  }

  if (a == b) return out;  // zero-measure band

  KahanSum simpson;
  for (int k = 0; k < K; ++k)
    simpson.add(detail::simpson_weight(k, K, b - a) *
                out.per_level[static_cast<std::size_t>(k)].integral);
  out.value = simpson.value();

  // Half-resolution rule on every other node, when that is again a valid
  // Simpson node count.
  if ((K - 1) % 4 == 0 && K >= 5) {
    int Kh = (K - 1) / 2 + 1;
    KahanSum half;
    for (int k = 0; k < Kh; ++k)
      half.add(detail::simpson_weight(k, Kh, b - a) *
               out.per_level[static_cast<std::size_t>(2 * k)].integral);
    out.t_error_estimate = 4.0 * std::fabs(out.value - half.value()) / 15.0;
  }
  return out;
}

}  // namespace coarea
