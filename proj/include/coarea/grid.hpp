#pragma once

// Rectangular parameter grids over U in R^(n-1). A periodic axis places
// `count` nodes on [lo, hi) and wraps; a bounded axis places them on
// [lo, hi] inclusive. Quadrature weights are the matching rectangle /
// trapezoid rules.

#include <cstddef>
#include <span>
#include <vector>

#include "coarea/errors.hpp"
#include "coarea/vec.hpp"

namespace coarea {

struct GridAxis {
  int count = 0;
  double lo = 0.0;
  double hi = 0.0;
  bool periodic = false;

  double step() const {
    return periodic ? (hi - lo) / count : (hi - lo) / (count - 1);
  }
  double node(int i) const {
    if (periodic) return lo + (hi - lo) * (static_cast<double>(i) / count);
    return lo + (hi - lo) * (static_cast<double>(i) / (count - 1));
  }
  double weight(int i) const {
    double h = step();
    if (periodic) return h;
    return (i == 0 || i == count - 1) ? 0.5 * h : h;
  }
};

struct GridSpec {
  std::vector<GridAxis> axes;

  int rank() const { return static_cast<int>(axes.size()); }

  int node_count() const {
    int n = 1;
    for (const auto& ax : axes) n *= ax.count;
    return n;
  }

  void validate() const {
    if (axes.empty()) throw Error("grid needs at least one axis");
    for (const auto& ax : axes) {
      if (ax.count < 2) throw Error("grid axis needs at least 2 nodes");
      if (!(ax.hi > ax.lo)) throw Error("grid axis range must be increasing");
    }
  }

  // Row-major index <-> per-axis indices.
  void unflatten(int idx, std::span<int> out) const {
    for (int a = rank() - 1; a >= 0; --a) {
      out[static_cast<std::size_t>(a)] = idx % axes[static_cast<std::size_t>(a)].count;
      idx /= axes[static_cast<std::size_t>(a)].count;
    }
  }

  int flatten(std::span<const int> ix) const {
    int idx = 0;
    for (int a = 0; a < rank(); ++a)
      idx = idx * axes[static_cast<std::size_t>(a)].count + ix[static_cast<std::size_t>(a)];
    return idx;
  }

  Vec coords(std::span<const int> ix) const {
    Vec u(axes.size());
    for (std::size_t a = 0; a < axes.size(); ++a) u[a] = axes[a].node(ix[a]);
    return u;
  }

  double weight(std::span<const int> ix) const {
    double w = 1.0;
    for (std::size_t a = 0; a < axes.size(); ++a) w *= axes[a].weight(ix[a]);
    return w;
  }
};

}  // namespace coarea
