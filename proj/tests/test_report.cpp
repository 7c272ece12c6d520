#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <doctest.h>

#include "coarea/report.hpp"

using namespace coarea;

namespace {

constexpr double kPi = std::numbers::pi;

struct SuiteCase {
  const char* name;
  const char* f;
  const char* g;
  int n;
  Vec center;
  std::vector<std::pair<double, double>> box;
};

// The bundled analytic suite: every band is [1, 4].
const SuiteCase kSuite[] = {
    {"circle", "x^2+y^2", "1", 2, {0.0, 0.0}, {{-2.5, 2.5}, {-2.5, 2.5}}},
    {"sphere", "x^2+y^2+z^2", "1", 3, {0.0, 0.0, 0.0},
     {{-2.5, 2.5}, {-2.5, 2.5}, {-2.5, 2.5}}},
    {"ellipse", "x^2/4+y^2", "1", 2, {0.0, 0.0}, {{-4.5, 4.5}, {-2.5, 2.5}}},
    {"shifted", "(x-1)^2+2*y^2", "1", 2, {1.0, 0.0}, {{-1.5, 3.5}, {-1.6, 1.6}}},
    {"density", "x^2+y^2", "1+x^2", 2, {0.0, 0.0}, {{-2.5, 2.5}, {-2.5, 2.5}}},
};

CoareaReport run_case(const SuiteCase& sc, int scale) {
  FlowConfig cfg;
  ScalarField f(sc.f, sc.n);
  ScalarField g(sc.g, sc.n);
  GridSpec grid;
  if (sc.n == 2) {
    grid.axes = {{256 * scale, 0.0, 2 * kPi, true}};
  } else {
    grid.axes = {{64 * scale, 0.0, kPi, false}, {128 * scale, 0.0, 2 * kPi, true}};
  }
  ChartSet charts{{seed_radial(f, 1.0, sc.center, grid, cfg)}};
  QuadratureSpec spec;
  spec.t_nodes = 32 * scale + 1;
  spec.method = VolumeMethod::TensorGrid;
  spec.grid_nodes_per_axis = sc.n == 2 ? 1024 * scale : 192 * scale;
  spec.bounding_box = sc.box;
  return verify(f, g, 1.0, 4.0, charts, spec, cfg);
}

}  // namespace

TEST_CASE("analytic suite verifies at default resolution") {
  for (const SuiteCase& sc : kSuite) {
    CAPTURE(sc.name);
    CoareaReport rep = run_case(sc, 1);
    REQUIRE(rep.valid);
    CHECK(*rep.rel_error <= 1e-2);
    CHECK(rep.pass);
    CHECK(rep.diagnostics.max_level_error <= 1e-9);
    CHECK(rep.diagnostics.min_grad_norm_mesh > 1e-8);
  }
}

TEST_CASE("analytic suite tightens at doubled resolution") {
  for (const SuiteCase& sc : kSuite) {
    CAPTURE(sc.name);
    CoareaReport rep = run_case(sc, 2);
    REQUIRE(rep.valid);
    CHECK(*rep.rel_error <= 1e-3);
  }
}

TEST_CASE("the identity holds on a non-quadratic perturbed field") {
  // No closed form here: the two independent routes check each other.
  FlowConfig cfg;
  ScalarField f("x^2+y^2 + 0.25*sin(x)*sin(y)", 2);
  ScalarField g("1+0.5*x", 2);
  GridSpec grid{{{256, 0.0, 2 * kPi, true}}};
  ChartSet charts{{seed_radial(f, 1.0, {0.0, 0.0}, grid, cfg)}};
  QuadratureSpec spec;
  spec.t_nodes = 33;
  spec.method = VolumeMethod::TensorGrid;
  spec.grid_nodes_per_axis = 1024;
  spec.bounding_box = {{-2.5, 2.5}, {-2.5, 2.5}};
  CoareaReport rep = verify(f, g, 1.0, 4.0, charts, spec, cfg);
  REQUIRE(rep.valid);
  CHECK(*rep.rel_error <= 1e-3);
  CHECK(rep.diagnostics.max_level_error <= 1e-9);
}

TEST_CASE("a critical band yields an invalid report") {
  FlowConfig cfg;
  ScalarField f("x^2+y^2", 2), g("1", 2);
  GridSpec grid{{{64, 0.0, 2 * kPi, true}}};
  Chart chart = seed_radial(f, 1.0, {0.0, 0.0}, grid, cfg);
  QuadratureSpec spec;
  spec.bounding_box = {{-2.0, 2.0}, {-2.0, 2.0}};
  // Band [-1, 1] contains the critical origin; the chart center check fires.
  CoareaReport rep = verify(f, g, -1.0, 1.0, ChartSet{{chart}}, spec, cfg);
  CHECK(!rep.valid);
  CHECK(!rep.pass);
  CHECK(rep.error_kind == "CriticalPointDetected");
  CHECK(!rep.lhs.has_value());
}

TEST_CASE("domain errors in g surface as an invalid report") {
  FlowConfig cfg;
  ScalarField f("x^2+y^2", 2);
  ScalarField g("sqrt(x)", 2);  // undefined on half the box
  GridSpec grid{{{64, 0.0, 2 * kPi, true}}};
  ChartSet charts{{seed_radial(f, 1.0, {0.0, 0.0}, grid, cfg)}};
  QuadratureSpec spec;
  spec.t_nodes = 5;
  spec.mc_samples = 10000;
  spec.bounding_box = {{-2.0, 2.0}, {-2.0, 2.0}};
  CoareaReport rep = verify(f, g, 1.0, 4.0, charts, spec, cfg);
  CHECK(!rep.valid);
  CHECK(rep.error_kind == "DomainError");
  CHECK(rep.error_message.find("sqrt") != std::string::npos);
}

TEST_CASE("reports serialize deterministically") {
  FlowConfig cfg;
  ScalarField f("x^2+y^2", 2), g("1", 2);
  GridSpec grid{{{64, 0.0, 2 * kPi, true}}};
  ChartSet charts{{seed_radial(f, 1.0, {0.0, 0.0}, grid, cfg)}};
  QuadratureSpec spec;
  spec.t_nodes = 5;
  spec.mc_samples = 20000;
  spec.bounding_box = {{-2.0, 2.0}, {-2.0, 2.0}};

  CoareaReport r1 = verify(f, g, 1.0, 4.0, charts, spec, cfg);
  CoareaReport r2 = verify(f, g, 1.0, 4.0, charts, spec, cfg);
  std::string j1 = report_to_json(r1).dump(2);
  std::string j2 = report_to_json(r2).dump(2);
  CHECK(j1 == j2);

  auto doc = report_to_json(r1);
  CHECK(doc.contains("lhs"));
  CHECK(doc.contains("rhs"));
  CHECK(doc.contains("abs_error"));
  CHECK(doc.contains("rel_error"));
  CHECK(doc.contains("per_level"));
  CHECK(doc.contains("diagnostics"));
  CHECK(doc.contains("pass"));
  CHECK(doc["per_level"].size() == 5);
  CHECK(doc["per_level"][0].contains("t"));
  CHECK(doc["per_level"][0].contains("I"));
  double rel = doc["rel_error"].get<double>();
  double lhs = doc["lhs"].get<double>();
  double rhs = doc["rhs"].get<double>();
  CHECK(rel ==
        doctest::Approx(std::fabs(lhs - rhs) /
                        std::max({std::fabs(lhs), std::fabs(rhs), 1e-300})));
}

TEST_CASE("verify flags rel_error above the pass threshold") {
  FlowConfig cfg;
  ScalarField f("x^2+y^2", 2), g("1", 2);
  GridSpec grid{{{64, 0.0, 2 * kPi, true}}};
  ChartSet charts{{seed_radial(f, 1.0, {0.0, 0.0}, grid, cfg)}};
  QuadratureSpec spec;
  spec.t_nodes = 5;
  spec.mc_samples = 50000;
  spec.bounding_box = {{-2.0, 2.0}, {-2.0, 2.0}};
  spec.pass_rel_tol = 1e-12;  // unattainable with Monte Carlo noise
  CoareaReport rep = verify(f, g, 1.0, 4.0, charts, spec, cfg);
  CHECK(rep.valid);
  CHECK(!rep.pass);
}
