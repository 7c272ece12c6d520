// Minimal library tour: parse a field, flow a seed circle outward, and
// compare both sides of the band identity.

#include <cstdio>
#include <numbers>

#include "coarea/coarea.hpp"

int main() {
  using namespace coarea;

  ScalarField f("x^2+y^2", 2);
  ScalarField g("1+x^2", 2);
  FlowConfig cfg;

  // One point, transported from level 1 to level 4.
  FlowPoint fp = transport(f, {1.0, 0.0}, 1.0, 4.0, cfg);
  std::printf("transport (1,0): level 1 -> 4 lands at (%.9f, %.9f)\n",
              fp.position[0], fp.position[1]);

  // A full chart of the unit circle, pushed through the band.
  GridSpec grid{{{256, 0.0, 2 * std::numbers::pi, true}}};
  Chart chart = seed_radial(f, 1.0, {0.0, 0.0}, grid, cfg);

  QuadratureSpec spec;
  spec.t_nodes = 33;
  spec.method = VolumeMethod::TensorGrid;
  spec.grid_nodes_per_axis = 1024;
  spec.bounding_box = {{-2.5, 2.5}, {-2.5, 2.5}};

  CoareaReport report = verify(f, g, 1.0, 4.0, ChartSet{{chart}}, spec, cfg);
  std::printf("lhs = %.8f, rhs = %.8f, rel_error = %.3e, pass = %s\n",
              *report.lhs, *report.rhs, *report.rel_error,
              report.pass ? "yes" : "no");
  return report.pass ? 0 : 1;
}
