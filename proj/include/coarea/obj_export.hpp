#pragma once

// Wavefront OBJ export of one level slice of a transported mesh (3-D only).
// Vertices are the grid samples Phi(t,u), faces split each grid quad into
// two triangles (wrapping periodic axes), and per-vertex normals are
// N_t/|N_t|. Polar rows reuse the adjacent ring's direction, since their
// own normal has vanishing length by construction.

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>

#include "coarea/chart.hpp"
#include "coarea/errors.hpp"
#include "coarea/vec.hpp"

namespace coarea {

namespace detail {

inline void write_number(std::ostream& os, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  os.write(buf, res.ptr - buf);
}

}  // namespace detail

inline void write_obj(std::ostream& os, const TransportedMesh& mesh, int k) {
  if (mesh.dim != 3) throw Error("OBJ export requires n = 3");
  if (mesh.grid.rank() != 2) throw Error("OBJ export requires a 2-D parameter grid");
  const GridAxis& ax0 = mesh.grid.axes[0];
  const GridAxis& ax1 = mesh.grid.axes[1];
  const int c0 = ax0.count, c1 = ax1.count;
  auto flat = [&](int i, int jj) { return i * c1 + jj; };

  os << "# level t = ";
  detail::write_number(os, mesh.levels[static_cast<std::size_t>(k)]);
  os << "\n";

  for (int i = 0; i < c0; ++i) {
    for (int jj = 0; jj < c1; ++jj) {
      auto p = mesh.position(k, flat(i, jj));
      os << "v ";
      detail::write_number(os, p[0]);
      os << " ";
      detail::write_number(os, p[1]);
      os << " ";
      detail::write_number(os, p[2]);
      os << "\n";
    }
  }
  for (int i = 0; i < c0; ++i) {
    bool polar = (mesh.pole_lo && i == 0) || (mesh.pole_hi && i == c0 - 1);
    int src_row = polar ? (i == 0 ? 1 : c0 - 2) : i;
    for (int jj = 0; jj < c1; ++jj) {
      auto nvec = mesh.normal(k, flat(src_row, jj));
      double nn = norm(nvec);
      os << "vn ";
      if (nn > 0.0) {
        detail::write_number(os, nvec[0] / nn);
        os << " ";
        detail::write_number(os, nvec[1] / nn);
        os << " ";
        detail::write_number(os, nvec[2] / nn);
      } else {
        os << "0 0 1";
      }
      os << "\n";
    }
  }

  // Quads between consecutive axis-0 rows; axis 1 wraps when periodic.
  const int bands1 = ax1.periodic ? c1 : c1 - 1;
  for (int i = 0; i + 1 < c0; ++i) {
    for (int jj = 0; jj < bands1; ++jj) {
      int jn = (jj + 1) % c1;
      int v00 = flat(i, jj) + 1;  // OBJ indices are 1-based
      int v10 = flat(i + 1, jj) + 1;
      int v11 = flat(i + 1, jn) + 1;
      int v01 = flat(i, jn) + 1;
      os << "f " << v00 << "//" << v00 << " " << v10 << "//" << v10 << " "
         << v11 << "//" << v11 << "\n";
      os << "f " << v00 << "//" << v00 << " " << v11 << "//" << v11 << " "
         << v01 << "//" << v01 << "\n";
    }
  }
}

}  // namespace coarea
