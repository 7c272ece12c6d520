#pragma once

// Parametrizations of level surfaces and their transport through a band.
//
// A Chart samples a seed map u -> phi(u) on f^-1(a) over a rectangular
// parameter grid. transport_chart() pushes every sample to each requested
// level with the gradient flow and fills in the normal field
//
//   N_t(u) = ( +det d(Phi^2..Phi^n)/du, ..., (-1)^(n+1) det d(Phi^1..Phi^(n-1))/du ),
//
// the vector of signed maximal minors of the tangent matrix (a generalized
// cross product). Tangents come from finite differences on the parameter
// grid: 4th-order central stencils where five nodes are available, matching
// one-sided stencils at bounded-axis edges, lower order on very small grids.
//
// Latitude-longitude charts in R^3 carry rows at the exact poles. Minors
// degenerate there (the area element vanishes like sin(theta)), so polar
// rows take the adjacent ring's normal scaled by sin(theta)/sin(theta_adj),
// which is zero at the pole itself; their quadrature contribution vanishes
// accordingly.

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "coarea/errors.hpp"
#include "coarea/flow.hpp"
#include "coarea/grid.hpp"
#include "coarea/parallel.hpp"
#include "coarea/scalar_field.hpp"
#include "coarea/vec.hpp"

namespace coarea {

struct Chart {
  int dim = 0;          // ambient n
  GridSpec grid;        // n-1 axes
  double level = 0.0;   // a
  std::vector<double> points;  // node_count * dim, row-major over the grid
  std::string id;
  bool pole_lo = false;  // axis-0 row 0 sits at a lat-long pole
  bool pole_hi = false;  // axis-0 last row sits at a lat-long pole
  std::optional<Vec> center;  // star-shape anchor for radially seeded charts

  int nodes() const { return grid.node_count(); }
  std::span<const double> point(int j) const {
    return {points.data() + static_cast<std::size_t>(j) * dim,
            static_cast<std::size_t>(dim)};
  }
};

struct ChartSet {
  std::vector<Chart> charts;
};

class TransportedMesh {
 public:
  int dim = 0;
  GridSpec grid;
  bool pole_lo = false, pole_hi = false;
  std::vector<double> levels;
  std::vector<double> positions;   // levels * nodes * dim
  std::vector<double> normals;     // levels * nodes * dim
  std::vector<double> grad_norms;  // levels * nodes

  // diagnostics collected at build time
  double max_level_error = 0.0;
  double min_grad_norm = std::numeric_limits<double>::infinity();
  double min_normal_norm_interior = std::numeric_limits<double>::infinity();

  int nodes() const { return grid.node_count(); }
  int level_count() const { return static_cast<int>(levels.size()); }

  std::span<const double> position(int k, int j) const {
    return {positions.data() +
                (static_cast<std::size_t>(k) * nodes() + j) * dim,
            static_cast<std::size_t>(dim)};
  }
  std::span<const double> normal(int k, int j) const {
    return {normals.data() + (static_cast<std::size_t>(k) * nodes() + j) * dim,
            static_cast<std::size_t>(dim)};
  }
  double grad_norm(int k, int j) const {
    return grad_norms[static_cast<std::size_t>(k) * nodes() + j];
  }
};

namespace detail {

// Finite-difference derivative of the position field along grid axis `axis`
// at multi-index `ix`, written into out[0..dim).
inline void fd_tangent(std::span<const double> level_positions,
                       const GridSpec& grid, int dim, std::span<const int> ix,
                       int axis, double* out) {
  const GridAxis& ax = grid.axes[static_cast<std::size_t>(axis)];
  const int c = ax.count;
  const double h = ax.step();
  std::vector<int> nb(ix.begin(), ix.end());

  auto at = [&](int offset) {
    int i = ix[static_cast<std::size_t>(axis)] + offset;
    if (ax.periodic) i = ((i % c) + c) % c;
    nb[static_cast<std::size_t>(axis)] = i;
    int flat = grid.flatten(nb);
    return level_positions.subspan(static_cast<std::size_t>(flat) * dim,
                                   static_cast<std::size_t>(dim));
  };
  auto combine = [&](std::initializer_list<std::pair<double, int>> terms,
                     double denom) {
    for (int d = 0; d < dim; ++d) out[d] = 0.0;
    for (auto [coef, off] : terms) {
      auto p = at(off);
      for (int d = 0; d < dim; ++d) out[d] += coef * p[static_cast<std::size_t>(d)];
    }
    for (int d = 0; d < dim; ++d) out[d] /= denom;
  };

  const int i = ix[static_cast<std::size_t>(axis)];
  if (ax.periodic) {
    if (c >= 5) {
      combine({{-1.0, 2}, {8.0, 1}, {-8.0, -1}, {1.0, -2}}, 12.0 * h);
    } else if (c >= 3) {
      combine({{1.0, 1}, {-1.0, -1}}, 2.0 * h);
    } else {
      combine({{1.0, 1}, {-1.0, 0}}, h);
    }
    return;
  }
  if (c >= 5) {
    if (i >= 2 && i <= c - 3) {
      combine({{-1.0, 2}, {8.0, 1}, {-8.0, -1}, {1.0, -2}}, 12.0 * h);
    } else if (i == 0) {
      combine({{-25.0, 0}, {48.0, 1}, {-36.0, 2}, {16.0, 3}, {-3.0, 4}}, 12.0 * h);
    } else if (i == 1) {
      combine({{-3.0, -1}, {-10.0, 0}, {18.0, 1}, {-6.0, 2}, {1.0, 3}}, 12.0 * h);
    } else if (i == c - 2) {
      combine({{3.0, 1}, {10.0, 0}, {-18.0, -1}, {6.0, -2}, {-1.0, -3}}, 12.0 * h);
    } else {  // i == c - 1
      combine({{25.0, 0}, {-48.0, -1}, {36.0, -2}, {-16.0, -3}, {3.0, -4}}, 12.0 * h);
    }
    return;
  }
  if (c >= 3) {
    if (i == 0)
      combine({{-3.0, 0}, {4.0, 1}, {-1.0, 2}}, 2.0 * h);
    else if (i == c - 1)
      combine({{3.0, 0}, {-4.0, -1}, {1.0, -2}}, 2.0 * h);
    else
      combine({{1.0, 1}, {-1.0, -1}}, 2.0 * h);
    return;
  }
  // c == 2
  combine(i == 0 ? std::initializer_list<std::pair<double, int>>{{1.0, 1}, {-1.0, 0}}
                 : std::initializer_list<std::pair<double, int>>{{1.0, 0}, {-1.0, -1}},
          h);
}

// Signed maximal minors of the n x (n-1) tangent matrix (columns = tangents).
inline Vec minors_normal(const std::vector<double>& tangents, int dim) {
  const int m = dim - 1;
  Vec nvec(static_cast<std::size_t>(dim));
  std::vector<double> minor(static_cast<std::size_t>(m) * m);
  for (int skip = 0; skip < dim; ++skip) {
    int r = 0;
    for (int row = 0; row < dim; ++row) {
      if (row == skip) continue;
      for (int col = 0; col < m; ++col)
        minor[static_cast<std::size_t>(r) * m + col] =
            tangents[static_cast<std::size_t>(col) * dim + row];
      ++r;
    }
    double dmin = m == 0 ? 1.0 : det(minor, m);
    nvec[static_cast<std::size_t>(skip)] = (skip % 2 == 0) ? dmin : -dmin;
  }
  return nvec;
}

}  // namespace detail

// Normal vector at u-node j of a single-level slab of positions
// (nodes * dim, row-major over the grid). Throws DegenerateChart when the
// minors collapse.
inline Vec normal_vector(std::span<const double> level_positions,
                         const GridSpec& grid, int dim, int j) {
  const int rank = grid.rank();
  std::vector<int> ix(static_cast<std::size_t>(rank));
  grid.unflatten(j, ix);
  std::vector<double> tangents(static_cast<std::size_t>(rank) * dim);
  for (int axis = 0; axis < rank; ++axis)
    detail::fd_tangent(level_positions, grid, dim, ix, axis,
                       tangents.data() + static_cast<std::size_t>(axis) * dim);
  Vec n = detail::minors_normal(tangents, dim);
  if (norm(n) < 1e-12)
    throw DegenerateChart("normal vector degenerate at u-node " +
                          std::to_string(j) + " (|N| < 1e-12, rank < n-1)");
  return n;
}

struct RadialSeedOptions {
  double r_max = 1e3;   // search radius along each ray
  int scan_steps = 256; // bracketing scan resolution
};

namespace detail {

inline Vec ray_direction(int dim, std::span<const double> u) {
  if (dim == 2) return {std::cos(u[0]), std::sin(u[0])};
  // dim == 3, u = (theta, psi) colatitude-longitude
  double st = std::sin(u[0]);
  return {st * std::cos(u[1]), st * std::sin(u[1]), std::cos(u[0])};
}

// Root of f(center + r*omega) = a for r in (0, r_max]: bracketing scan,
// bisection, Newton polish. `hint` warm-starts from the neighbouring ray.
inline double radial_root(const ScalarField& f, double a,
                          std::span<const double> center,
                          std::span<const double> omega, const FlowConfig& cfg,
                          const RadialSeedOptions& opt, double hint) {
  const int dim = f.dim();
  Vec x(static_cast<std::size_t>(dim));
  auto point_at = [&](double r) -> const Vec& {
    for (int d = 0; d < dim; ++d) x[static_cast<std::size_t>(d)] = center[d] + r * omega[d];
    return x;
  };
  auto F = [&](double r) { return f.eval(point_at(r)) - a; };
  auto dF = [&](double r) {
    Vec g = f.grad(point_at(r));
    return dot(g, omega);
  };
  auto newton_polish = [&](double r0, double lo, double hi) -> double {
    double r = r0;
    for (int it = 0; it < 50; ++it) {
      double fr = F(r);
      if (std::fabs(fr) <= cfg.projection_tol) return r;
      double d = dF(r);
      if (d == 0.0) break;
      double rn = r - fr / d;
      if (!(rn > lo && rn < hi)) {
        // bisect instead, keeping the sign change
        double flo = F(lo);
        if ((flo < 0) == (fr < 0)) lo = r; else hi = r;
        rn = 0.5 * (lo + hi);
      }
      r = rn;
    }
    if (std::fabs(F(r)) <= cfg.projection_tol) return r;
    throw NonConvergence("radial root polish did not reach tolerance",
                         Vec(point_at(r)), F(r));
  };

  // Fast path: Newton from the neighbouring ray's radius.
  if (hint > 0.0 && hint <= opt.r_max) {
    double r = hint;
    bool ok = true;
    try {
      for (int it = 0; it < 12 && ok; ++it) {
        double fr = F(r);
        if (std::fabs(fr) <= cfg.projection_tol) return r;
        double d = dF(r);
        if (d == 0.0 || !std::isfinite(d)) { ok = false; break; }
        double rn = r - fr / d;
        if (!(rn > 0.0) || rn > opt.r_max || !std::isfinite(rn)) { ok = false; break; }
        r = rn;
      }
    } catch (const DomainError&) {
      ok = false;
    }
    if (ok && std::fabs(F(r)) <= cfg.projection_tol) return r;
  }

  // Scan for the first sign change of F along the ray.
  double r_prev = 0.0;
  bool prev_valid = true;
  double f_prev;
  try {
    f_prev = F(0.0);
  } catch (const DomainError&) {
    prev_valid = false;
    f_prev = 0.0;
  }
  for (int jstep = 1; jstep <= opt.scan_steps; ++jstep) {
    double r = opt.r_max * (static_cast<double>(jstep) / opt.scan_steps);
    double fr;
    bool valid = true;
    try {
      fr = F(r);
    } catch (const DomainError&) {
      valid = false;
      fr = 0.0;
    }
    if (valid && fr == 0.0) return r;
    if (prev_valid && valid && ((f_prev < 0.0) != (fr < 0.0))) {
      // bisection inside [r_prev, r]
      double lo = r_prev, hi = r, flo = f_prev;
      for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = F(mid);
        if (fm == 0.0) return mid;
        if ((flo < 0.0) == (fm < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      return newton_polish(0.5 * (lo + hi), r_prev, r);
    }
    r_prev = r;
    prev_valid = valid;
    f_prev = fr;
  }
  throw NoBracket("no sign change of f - " + std::to_string(a) +
                  " along ray within search radius " + std::to_string(opt.r_max));
}

inline void rethrow_annotated(const Error& e, int k, int j) {
  std::string note = std::string(e.what()) + " (t-node " + std::to_string(k) +
                     ", u-node " + std::to_string(j) + ")";
  if (auto* c = dynamic_cast<const CriticalPointDetected*>(&e))
    throw CriticalPointDetected(note, c->point(), c->grad_norm());
  if (auto* nc = dynamic_cast<const NonConvergence*>(&e))
    throw NonConvergence(note, nc->last_point(), nc->residual());
  if (dynamic_cast<const DegenerateChart*>(&e)) throw DegenerateChart(note);
  if (auto* d = dynamic_cast<const DomainError*>(&e))
    throw DomainError(note + "; failing", d->subexpr());
  throw Error(note);
}

}  // namespace detail

// Builds a chart of f^-1(a) for a level set star-shaped about `center`.
// n = 2: u = angle theta; n = 3: u = (theta, psi) colatitude-longitude.
inline Chart seed_radial(const ScalarField& f, double a, const Vec& center,
                         const GridSpec& grid, const FlowConfig& cfg,
                         const RadialSeedOptions& opt = {}) {
  const int dim = f.dim();
  if (dim != 2 && dim != 3)
    throw Error("seed_radial supports n in {2,3}; use seed_from_samples otherwise");
  if (static_cast<int>(center.size()) != dim)
    throw Error("center dimension mismatch");
  grid.validate();
  if (grid.rank() != dim - 1) throw Error("grid rank must be n-1");

  Chart chart;
  chart.dim = dim;
  chart.grid = grid;
  chart.level = a;
  chart.center = center;
  chart.points.resize(static_cast<std::size_t>(grid.node_count()) * dim);
  if (dim == 3) {
    chart.pole_lo = std::fabs(grid.axes[0].lo) <= 1e-12;
    chart.pole_hi = std::fabs(grid.axes[0].hi - std::numbers::pi) <= 1e-12;
  }

  const int total = grid.node_count();
  std::vector<int> ix(static_cast<std::size_t>(grid.rank()));
  double hint = 0.0;
  for (int j = 0; j < total; ++j) {
    grid.unflatten(j, ix);
    Vec u = grid.coords(ix);
    Vec omega = detail::ray_direction(dim, u);
    double r = detail::radial_root(f, a, center, omega, cfg, opt, hint);
    hint = r;
    for (int d = 0; d < dim; ++d)
      chart.points[static_cast<std::size_t>(j) * dim + d] = center[d] + r * omega[d];
  }
  return chart;
}

// Wraps user-supplied (u, x) samples, in row-major grid order, into a chart.
inline Chart seed_from_samples(const std::vector<std::pair<Vec, Vec>>& samples,
                               const GridSpec& grid, const ScalarField& f,
                               double a, double projection_tol = 1e-9) {
  grid.validate();
  const int dim = f.dim();
  if (grid.rank() != dim - 1) throw Error("grid rank must be n-1");
  if (static_cast<int>(samples.size()) != grid.node_count())
    throw Error("sample count " + std::to_string(samples.size()) +
                " does not match grid node count " +
                std::to_string(grid.node_count()));

  Chart chart;
  chart.dim = dim;
  chart.grid = grid;
  chart.level = a;
  chart.points.resize(static_cast<std::size_t>(grid.node_count()) * dim);

  std::vector<int> ix(static_cast<std::size_t>(grid.rank()));
  for (int j = 0; j < grid.node_count(); ++j) {
    const auto& [u, x] = samples[static_cast<std::size_t>(j)];
    if (static_cast<int>(u.size()) != grid.rank() ||
        static_cast<int>(x.size()) != dim)
      throw Error("sample " + std::to_string(j) + " has wrong dimensions");
    grid.unflatten(j, ix);
    Vec ug = grid.coords(ix);
    for (int aix = 0; aix < grid.rank(); ++aix) {
      double scale = std::max(1.0, std::fabs(ug[static_cast<std::size_t>(aix)]));
      if (std::fabs(u[static_cast<std::size_t>(aix)] - ug[static_cast<std::size_t>(aix)]) >
          1e-9 * scale)
        throw Error("sample " + std::to_string(j) +
                    " is not at its row-major grid coordinate");
    }
    double fx = f.eval(x);
    if (std::fabs(fx - a) > 10.0 * projection_tol)
      throw LevelMismatch("sample " + std::to_string(j) + " has f = " +
                          std::to_string(fx) + ", expected level " +
                          std::to_string(a));
    std::copy(x.begin(), x.end(),
              chart.points.begin() + static_cast<std::size_t>(j) * dim);
  }
  return chart;
}

// Text format: header "n k d1 ... dk", then one line per sample,
// "u1 ... u_{n-1} x1 ... xn", row-major over the grid. Axis ranges are read
// off the sample coordinates; spacing must be uniform.
inline Chart load_chart_samples(std::istream& in, const ScalarField& f,
                                double a, double projection_tol = 1e-9) {
  int n = 0, k = 0;
  if (!(in >> n >> k)) throw Error("samples file: cannot read header");
  if (n != f.dim()) throw Error("samples file: dimension mismatch with field");
  if (k != n - 1) throw Error("samples file: expected k = n-1 parameter axes");
  std::vector<int> counts(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i)
    if (!(in >> counts[static_cast<std::size_t>(i)]) || counts[static_cast<std::size_t>(i)] < 2)
      throw Error("samples file: bad axis count");

  int total = 1;
  for (int c : counts) total *= c;
  std::vector<std::pair<Vec, Vec>> samples;
  samples.reserve(static_cast<std::size_t>(total));
  for (int j = 0; j < total; ++j) {
    Vec u(static_cast<std::size_t>(k)), x(static_cast<std::size_t>(n));
    for (int i = 0; i < k; ++i)
      if (!(in >> u[static_cast<std::size_t>(i)]))
        throw Error("samples file: truncated at sample " + std::to_string(j));
    for (int i = 0; i < n; ++i)
      if (!(in >> x[static_cast<std::size_t>(i)]))
        throw Error("samples file: truncated at sample " + std::to_string(j));
    samples.emplace_back(std::move(u), std::move(x));
  }

  // Reconstruct axis ranges from the row-major layout.
  GridSpec grid;
  grid.axes.resize(static_cast<std::size_t>(k));
  std::vector<int> strides(static_cast<std::size_t>(k), 1);
  for (int aix = k - 2; aix >= 0; --aix)
    strides[static_cast<std::size_t>(aix)] =
        strides[static_cast<std::size_t>(aix) + 1] * counts[static_cast<std::size_t>(aix) + 1];
  for (int aix = 0; aix < k; ++aix) {
    int c = counts[static_cast<std::size_t>(aix)];
    int stride = strides[static_cast<std::size_t>(aix)];
    double lo = samples[0].first[static_cast<std::size_t>(aix)];
    double hi = samples[static_cast<std::size_t>(stride) * (c - 1)].first[static_cast<std::size_t>(aix)];
    if (!(hi > lo)) throw Error("samples file: axis " + std::to_string(aix) +
                                " is not increasing");
    double h = (hi - lo) / (c - 1);
    for (int i = 1; i + 1 < c; ++i) {
      double v = samples[static_cast<std::size_t>(stride) * i].first[static_cast<std::size_t>(aix)];
      if (std::fabs(v - (lo + h * i)) > 1e-9 * std::max(1.0, std::fabs(hi)))
        throw Error("samples file: axis " + std::to_string(aix) +
                    " spacing is not uniform");
    }
    grid.axes[static_cast<std::size_t>(aix)] = {c, lo, hi, false};
  }
  return seed_from_samples(samples, grid, f, a, projection_tol);
}

// Transports every chart node to each of `t_nodes` levels spanning [a, b]
// and fills normals and gradient norms. Columns run independently (and may
// run concurrently); all derived reductions use fixed node order.
inline TransportedMesh transport_chart(const Chart& chart, const ScalarField& f,
                                       double a, double b, int t_nodes,
                                       const FlowConfig& cfg) {
  chart.grid.validate();
  if (chart.dim != f.dim()) throw Error("chart/field dimension mismatch");

  // Band validation first: a critical point inside f^-1[a,b] voids the
  // transport regardless of how the chart was seeded. The star-shape anchor
  // is the one interior point we know; check it.
  if (chart.center) {
    double fc = f.eval(*chart.center);
    if (fc >= std::min(a, b) - cfg.projection_tol &&
        fc <= std::max(a, b) + cfg.projection_tol) {
      double gn = f.grad_norm(*chart.center);
      if (gn < cfg.grad_floor)
        throw CriticalPointDetected(
            "chart center lies in the band and |grad f| = " +
                std::to_string(gn) + " there",
            *chart.center, gn);
    }
  }

  if (std::fabs(chart.level - a) > 10.0 * cfg.projection_tol)
    throw LevelMismatch("chart is seeded at level " + std::to_string(chart.level) +
                        ", band starts at " + std::to_string(a));

  TransportedMesh mesh;
  mesh.dim = chart.dim;
  mesh.grid = chart.grid;
  mesh.pole_lo = chart.pole_lo;
  mesh.pole_hi = chart.pole_hi;
  if (a == b) {
    mesh.levels = {a};
  } else {
    if (t_nodes < 2) throw Error("t_nodes must be >= 2 for a non-degenerate band");
    mesh.levels.resize(static_cast<std::size_t>(t_nodes));
    for (int kk = 0; kk < t_nodes; ++kk)
      mesh.levels[static_cast<std::size_t>(kk)] =
          a + (b - a) * (static_cast<double>(kk) / (t_nodes - 1));
  }

  const int K = mesh.level_count();
  const int J = mesh.nodes();
  const int dim = mesh.dim;
  mesh.positions.resize(static_cast<std::size_t>(K) * J * dim);
  mesh.normals.assign(static_cast<std::size_t>(K) * J * dim, 0.0);
  mesh.grad_norms.resize(static_cast<std::size_t>(K) * J);

  std::vector<double> level_err(static_cast<std::size_t>(K) * J);

  parallel_for(0, J, [&](int j) {
    Vec x(chart.point(j).begin(), chart.point(j).end());
    double from = chart.level;
    for (int kk = 0; kk < K; ++kk) {
      try {
        FlowPoint fp = transport(f, x, from, mesh.levels[static_cast<std::size_t>(kk)], cfg);
        x = std::move(fp.position);
      } catch (const Error& e) {
        detail::rethrow_annotated(e, kk, j);
      }
      from = mesh.levels[static_cast<std::size_t>(kk)];
      std::size_t base = (static_cast<std::size_t>(kk) * J + j) * dim;
      std::copy(x.begin(), x.end(), mesh.positions.begin() + base);
      Vec g = f.grad(x);
      mesh.grad_norms[static_cast<std::size_t>(kk) * J + j] = norm(g);
      level_err[static_cast<std::size_t>(kk) * J + j] =
          std::fabs(f.eval(x) - mesh.levels[static_cast<std::size_t>(kk)]);
    }
  });

  for (double le : level_err)
    if (le > mesh.max_level_error) mesh.max_level_error = le;
  for (double gn : mesh.grad_norms)
    if (gn < mesh.min_grad_norm) mesh.min_grad_norm = gn;

  // Normals: minors everywhere except polar rows, which copy the adjacent
  // ring scaled by the analytic sin factor.
  const GridAxis& ax0 = mesh.grid.axes[0];
  const int row_stride = J / ax0.count;  // nodes per axis-0 row
  auto row_of = [&](int j) { return j / row_stride; };
  std::vector<int> ix(static_cast<std::size_t>(mesh.grid.rank()));

  for (int kk = 0; kk < K; ++kk) {
    std::span<const double> slab(mesh.positions.data() +
                                     static_cast<std::size_t>(kk) * J * dim,
                                 static_cast<std::size_t>(J) * dim);
    for (int j = 0; j < J; ++j) {
      int row = row_of(j);
      bool polar = (mesh.pole_lo && row == 0) || (mesh.pole_hi && row == ax0.count - 1);
      if (polar) continue;
      Vec nv;
      try {
        nv = normal_vector(slab, mesh.grid, dim, j);
      } catch (const Error& e) {
        detail::rethrow_annotated(e, kk, j);
      }
      std::copy(nv.begin(), nv.end(),
                mesh.normals.begin() + (static_cast<std::size_t>(kk) * J + j) * dim);

      mesh.grid.unflatten(j, ix);
      bool interior = true;
      for (int aix = 0; aix < mesh.grid.rank(); ++aix) {
        const GridAxis& ax = mesh.grid.axes[static_cast<std::size_t>(aix)];
        if (!ax.periodic && (ix[static_cast<std::size_t>(aix)] == 0 ||
                             ix[static_cast<std::size_t>(aix)] == ax.count - 1))
          interior = false;
      }
      if (interior) {
        double nn = norm(nv);
        if (nn < mesh.min_normal_norm_interior) mesh.min_normal_norm_interior = nn;
      }
    }
    for (int j = 0; j < J; ++j) {
      int row = row_of(j);
      int adj_row = -1;
      if (mesh.pole_lo && row == 0) adj_row = 1;
      if (mesh.pole_hi && row == ax0.count - 1) adj_row = ax0.count - 2;
      if (adj_row < 0) continue;
      double scale = std::sin(ax0.node(row)) / std::sin(ax0.node(adj_row));
      int adj = adj_row * row_stride + (j % row_stride);
      std::size_t dst = (static_cast<std::size_t>(kk) * J + j) * dim;
      std::size_t src = (static_cast<std::size_t>(kk) * J + adj) * dim;
      for (int d = 0; d < dim; ++d)
        mesh.normals[dst + d] = scale * mesh.normals[src + d];
    }
  }
  return mesh;
}

// |det Phi'(t,u)| at a mesh node, computed as |N_t(u)| / |grad f(Phi(t,u))|.
inline double coarea_jacobian(const ScalarField& f, const TransportedMesh& mesh,
                              int k, int j, double grad_floor = 1e-8) {
  auto nv = mesh.normal(k, j);
  double nn = norm(nv);
  if (nn < 1e-12)
    throw DegenerateChart("normal vector degenerate at node (" +
                          std::to_string(k) + ", " + std::to_string(j) + ")");
  auto pos = mesh.position(k, j);
  Vec g = f.grad(pos);
  double gn = norm(g);
  if (gn < grad_floor)
    throw CriticalPointDetected("|grad f| below floor at mesh node",
                                Vec(pos.begin(), pos.end()), gn);
  return nn / gn;
}

// Splits the first parameter axis of `grid` into `parts` contiguous,
// interiorly disjoint sub-ranges (used for multi-chart decompositions).
inline std::vector<GridSpec> split_first_axis(const GridSpec& grid, int parts) {
  grid.validate();
  if (parts < 1) throw Error("parts must be >= 1");
  if (parts == 1) return {grid};
  const GridAxis& ax = grid.axes[0];
  int panels = ax.periodic ? ax.count : ax.count - 1;
  if (panels < parts) throw Error("axis too coarse to split");
  std::vector<GridSpec> out;
  for (int p = 0; p < parts; ++p) {
    int lo_panel = panels * p / parts;
    int hi_panel = panels * (p + 1) / parts;
    GridSpec g = grid;
    g.axes[0].periodic = false;
    g.axes[0].lo = ax.lo + (ax.hi - ax.lo) * lo_panel / panels;
    g.axes[0].hi = ax.lo + (ax.hi - ax.lo) * hi_panel / panels;
    g.axes[0].count = hi_panel - lo_panel + 1;
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace coarea
