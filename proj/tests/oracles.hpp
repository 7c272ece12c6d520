#pragma once

// Test-side oracles, kept independent of the library paths they check:
// central finite differences for gradients, hand-rolled small determinants,
// and the n x n finite-difference Jacobian of Phi (time column by flowing
// +-dt, parameter columns by grid stencils written out here).

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "coarea/chart.hpp"
#include "coarea/flow.hpp"
#include "coarea/scalar_field.hpp"

namespace oracles {

inline std::vector<double> fd_gradient(const coarea::ScalarField& f,
                                       std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) {
    double keep = x[d];
    x[d] = keep + h;
    double fp = f.eval(x);
    x[d] = keep - h;
    double fm = f.eval(x);
    x[d] = keep;
    g[d] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// Cofactor-expansion determinants for n <= 4.
inline double det_small(const std::vector<double>& m, int n) {
  if (n == 1) return m[0];
  if (n == 2) return m[0] * m[3] - m[1] * m[2];
  if (n == 3)
    return m[0] * (m[4] * m[8] - m[5] * m[7]) -
           m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
  if (n == 4) {
    double d = 0.0;
    for (int c = 0; c < 4; ++c) {
      std::vector<double> sub(9);
      int k = 0;
      for (int r = 1; r < 4; ++r)
        for (int cc = 0; cc < 4; ++cc) {
          if (cc == c) continue;
          sub[static_cast<std::size_t>(k++)] = m[static_cast<std::size_t>(r * 4 + cc)];
        }
      double term = m[static_cast<std::size_t>(c)] * det_small(sub, 3);
      d += (c % 2 == 0) ? term : -term;
    }
    return d;
  }
  throw std::runtime_error("det_small supports n <= 4");
}

// 4th-order central difference of mesh positions along a grid axis,
// written out independently of the library stencil code. Callers pick
// nodes far enough from bounded-axis edges.
inline std::vector<double> grid_tangent(const coarea::TransportedMesh& mesh,
                                        int k, int j, int axis) {
  const auto& ax = mesh.grid.axes[static_cast<std::size_t>(axis)];
  const int rank = mesh.grid.rank();
  std::vector<int> ix(static_cast<std::size_t>(rank));
  mesh.grid.unflatten(j, ix);
  const int c = ax.count;
  auto shifted = [&](int off) {
    std::vector<int> nb = ix;
    int i = ix[static_cast<std::size_t>(axis)] + off;
    if (ax.periodic) i = ((i % c) + c) % c;
    if (i < 0 || i >= c) throw std::runtime_error("stencil out of range");
    nb[static_cast<std::size_t>(axis)] = i;
    return mesh.position(k, mesh.grid.flatten(nb));
  };
  auto p2 = shifted(2), p1 = shifted(1), m1 = shifted(-1), m2 = shifted(-2);
  std::vector<double> t(static_cast<std::size_t>(mesh.dim));
  double h = ax.step();
  for (int d = 0; d < mesh.dim; ++d)
    t[static_cast<std::size_t>(d)] =
        (-p2[static_cast<std::size_t>(d)] + 8.0 * p1[static_cast<std::size_t>(d)] -
         8.0 * m1[static_cast<std::size_t>(d)] + m2[static_cast<std::size_t>(d)]) /
        (12.0 * h);
  return t;
}

// |det [d_t Phi | d_u Phi]| with the time column from flowing +-dt and the
// parameter columns from grid_tangent().
inline double fd_jacobian_det(const coarea::ScalarField& f,
                              const coarea::TransportedMesh& mesh, int k, int j,
                              const coarea::FlowConfig& cfg, double dt) {
  const int n = mesh.dim;
  auto pos = mesh.position(k, j);
  std::vector<double> x(pos.begin(), pos.end());
  double t = mesh.levels[static_cast<std::size_t>(k)];
  coarea::FlowPoint fwd = coarea::transport(f, x, t, t + dt, cfg);
  coarea::FlowPoint bwd = coarea::transport(f, x, t, t - dt, cfg);

  std::vector<double> jac(static_cast<std::size_t>(n) * n);
  for (int d = 0; d < n; ++d)
    jac[static_cast<std::size_t>(d) * n] =
        (fwd.position[static_cast<std::size_t>(d)] -
         bwd.position[static_cast<std::size_t>(d)]) /
        (2.0 * dt);
  for (int axis = 0; axis < n - 1; ++axis) {
    std::vector<double> tan = grid_tangent(mesh, k, j, axis);
    for (int d = 0; d < n; ++d)
      jac[static_cast<std::size_t>(d) * n + axis + 1] = tan[static_cast<std::size_t>(d)];
  }
  return std::fabs(det_small(jac, n));
}

// Deterministic uniform stream for test point sampling (independent of the
// library's stream).
class TestRng {
 public:
  explicit TestRng(std::uint64_t seed) : s_(seed * 2654435761u + 1) {}
  double uniform(double lo, double hi) {
    s_ ^= s_ << 13;
    s_ ^= s_ >> 7;
    s_ ^= s_ << 17;
    return lo + (hi - lo) * (static_cast<double>(s_ >> 11) * 0x1.0p-53);
  }

 private:
  std::uint64_t s_;
};

}  // namespace oracles
