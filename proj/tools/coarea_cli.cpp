// Command-line front end: band-identity verification, flow transport,
// mesh export, gradient checking.
//
// Exit codes: 0 pass, 1 verification FAIL, 2 validation error
// (critical point, level mismatch, bad expression, ...), 64 flag errors.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "coarea/coarea.hpp"

namespace {

using namespace coarea;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitUsage = 64;

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct CommonOptions {
  std::string f_expr;
  std::string g_expr = "1";
  int n = 0;
  double a = 0.0, b = 0.0;
  std::vector<double> center;
  std::vector<int> u_grid;
  int t_nodes = 33;
  int ode_steps = 64;
  double tol = 1e-9;
  double grad_floor = 1e-8;
  long long mc_samples = 1'000'000;
  std::uint64_t seed = 42;
  int grid_nodes = 512;
  std::string volume_method;  // "", "mc", "grid"
  std::vector<double> box;           // lo,hi uniform
  std::vector<double> box_per_axis;  // lo1,hi1,lo2,hi2,...
  int charts = 1;
  std::string samples_file;
  std::string out;
  double pass_tol = 1e-2;
  double r_max = 1e3;
};

FlowConfig flow_config(const CommonOptions& o) {
  FlowConfig cfg;
  cfg.ode_steps_per_unit_t = o.ode_steps;
  cfg.projection_tol = o.tol;
  cfg.grad_floor = o.grad_floor;
  return cfg;
}

std::vector<std::pair<double, double>> bounding_box(const CommonOptions& o) {
  std::vector<std::pair<double, double>> bb;
  if (!o.box_per_axis.empty()) {
    if (static_cast<int>(o.box_per_axis.size()) != 2 * o.n)
      throw Error("--box-per-axis needs 2*n values");
    for (int d = 0; d < o.n; ++d)
      bb.emplace_back(o.box_per_axis[2 * d], o.box_per_axis[2 * d + 1]);
    return bb;
  }
  if (o.box.size() != 2) throw Error("--box needs lo,hi");
  for (int d = 0; d < o.n; ++d) bb.emplace_back(o.box[0], o.box[1]);
  return bb;
}

GridSpec default_grid(const CommonOptions& o) {
  std::vector<int> counts = o.u_grid;
  if (counts.empty()) {
    if (o.n == 2) counts = {256};
    else counts = {64, 128};
  }
  if (static_cast<int>(counts.size()) != o.n - 1)
    throw Error("--u-grid needs n-1 axis counts");
  GridSpec grid;
  if (o.n == 2) {
    grid.axes = {{counts[0], 0.0, 2 * std::numbers::pi, true}};
  } else if (o.n == 3) {
    grid.axes = {{counts[0], 0.0, std::numbers::pi, false},
                 {counts[1], 0.0, 2 * std::numbers::pi, true}};
  } else {
    throw Error("built-in charts support n in {2,3}; use --samples-file");
  }
  return grid;
}

// Band validation shared by chart-building commands: a critical point that
// sits inside f^-1[a,b] invalidates the run before any seeding is tried.
void check_center_in_band(const ScalarField& f, const Vec& center, double a,
                          double b, const FlowConfig& cfg) {
  double fc = f.eval(center);
  if (fc >= std::min(a, b) - cfg.projection_tol &&
      fc <= std::max(a, b) + cfg.projection_tol) {
    double gn = f.grad_norm(center);
    if (gn < cfg.grad_floor)
      throw CriticalPointDetected(
          "center lies in the band f^-1[" + std::to_string(std::min(a, b)) +
              "," + std::to_string(std::max(a, b)) + "] and |grad f| = " +
              std::to_string(gn) + " there (critical point)",
          center, gn);
  }
}

ChartSet build_charts(const ScalarField& f, const CommonOptions& o,
                      const FlowConfig& cfg) {
  ChartSet set;
  if (!o.samples_file.empty()) {
    std::ifstream in(o.samples_file);
    if (!in) throw Error("cannot open samples file '" + o.samples_file + "'");
    set.charts.push_back(load_chart_samples(in, f, o.a, cfg.projection_tol));
    return set;
  }
  if (static_cast<int>(o.center.size()) != o.n)
    throw Error("--center needs n values (or pass --samples-file)");
  Vec center = o.center;
  check_center_in_band(f, center, o.a, o.b, cfg);
  RadialSeedOptions seed_opt;
  seed_opt.r_max = o.r_max;
  GridSpec base = default_grid(o);
  std::vector<GridSpec> grids = split_first_axis(base, o.charts);
  int idx = 0;
  for (const GridSpec& grid : grids) {
    Chart chart = seed_radial(f, o.a, center, grid, cfg, seed_opt);
    chart.id = "chart" + std::to_string(idx++);
    set.charts.push_back(std::move(chart));
  }
  return set;
}

void emit_report(const CoareaReport& report, const std::string& out_path) {
  std::string doc = report_to_json(report).dump(2);
  doc += "\n";
  std::fputs(doc.c_str(), stdout);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    out << doc;
  }
}

int run_verify(const CommonOptions& o) {
  CoareaReport report;
  report.pass = false;
  report.valid = false;
  try {
    ScalarField f(o.f_expr, o.n);
    ScalarField g(o.g_expr, o.n);
    if (o.b < o.a) throw Error("band must satisfy a <= b");
    FlowConfig cfg = flow_config(o);

    QuadratureSpec spec;
    spec.t_nodes = o.t_nodes;
    spec.u_grid = o.u_grid;
    spec.mc_samples = o.mc_samples;
    spec.rng_seed = o.seed;
    spec.grid_nodes_per_axis = o.grid_nodes;
    spec.pass_rel_tol = o.pass_tol;
    spec.bounding_box = bounding_box(o);
    if (o.volume_method.empty() || o.volume_method == "mc")
      spec.method = VolumeMethod::MonteCarlo;
    else if (o.volume_method == "grid")
      spec.method = VolumeMethod::TensorGrid;
    else
      throw Error("--volume-method must be 'mc' or 'grid'");

    ChartSet charts = build_charts(f, o, cfg);
    std::fprintf(stderr, "verifying with %zu chart(s), t_nodes=%d\n",
                 charts.charts.size(), spec.t_nodes);
    report = verify(f, g, o.a, o.b, charts, spec, cfg);
  } catch (const Error& e) {
    report.error_kind = coarea::detail::error_kind_of(e);
    report.error_message = e.what();
  }
  emit_report(report, o.out);
  if (!report.valid) {
    if (!report.error_message.empty())
      std::fprintf(stderr, "error: %s\n", report.error_message.c_str());
    return kExitInvalid;
  }
  return report.pass ? kExitPass : kExitFail;
}

int run_transport(const CommonOptions& o, const std::vector<double>& p) {
  try {
    ScalarField f(o.f_expr, o.n);
    if (static_cast<int>(p.size()) != o.n) throw Error("--p needs n values");
    FlowConfig cfg = flow_config(o);
    double fp = f.eval(p);
    if (std::fabs(fp - o.a) > 10.0 * cfg.projection_tol)
      throw LevelMismatch("f(p) = " + std::to_string(fp) +
                          " is not on level a = " + std::to_string(o.a));
    int nodes = o.a == o.b ? 1 : std::max(2, o.t_nodes);
    Vec x(p.begin(), p.end());
    double from = o.a;
    for (int k = 0; k < nodes; ++k) {
      double t = nodes == 1
                     ? o.a
                     : o.a + (o.b - o.a) * (static_cast<double>(k) / (nodes - 1));
      FlowPoint fpnt = transport(f, x, from, t, cfg);
      x = std::move(fpnt.position);
      from = t;
      std::string line = format_g17(t);
      for (double xi : x) line += " " + format_g17(xi);
      std::puts(line.c_str());
    }
    return kExitPass;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInvalid;
  }
}

int run_mesh(const CommonOptions& o) {
  try {
    ScalarField f(o.f_expr, o.n);
    if (o.n != 3) throw Error("OBJ export requires n = 3");
    FlowConfig cfg = flow_config(o);
    ChartSet charts = build_charts(f, o, cfg);
    if (charts.charts.size() != 1)
      throw Error("mesh export expects a single chart");
    int nodes = o.a == o.b ? 1 : std::max(2, o.t_nodes);
    TransportedMesh mesh =
        transport_chart(charts.charts[0], f, o.a, o.b, nodes, cfg);
    std::string prefix = o.out.empty() ? "mesh" : o.out;
    for (int k = 0; k < mesh.level_count(); ++k) {
      std::string path = prefix + "_t" + std::to_string(k) + ".obj";
      std::ofstream out(path);
      if (!out) throw Error("cannot open '" + path + "' for writing");
      write_obj(out, mesh, k);
      std::fprintf(stderr, "wrote %s (t = %s)\n", path.c_str(),
                   format_g17(mesh.levels[static_cast<std::size_t>(k)]).c_str());
    }
    return kExitPass;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInvalid;
  }
}

int run_grad_check(const CommonOptions& o, int points, double h, double tol_rel) {
  try {
    ScalarField f(o.f_expr, o.n);
    double lo = -1.0, hi = 1.0;
    if (o.box.size() == 2) {
      lo = o.box[0];
      hi = o.box[1];
    }
    int checked = 0, skipped = 0;
    double worst = 0.0;
    Vec x(static_cast<std::size_t>(o.n)), xp(x), xm(x);
    for (int i = 0; i < points; ++i) {
      coarea::detail::UniformStream rng(
          coarea::detail::splitmix64(o.seed ^ static_cast<std::uint64_t>(i)));
      for (int d = 0; d < o.n; ++d) x[static_cast<std::size_t>(d)] = lo + (hi - lo) * rng.next();
      try {
        Vec g = f.grad(x);
        double err = 0.0, scale = 1.0;
        xp = x;
        xm = x;
        for (int d = 0; d < o.n; ++d) {
          xp[static_cast<std::size_t>(d)] = x[static_cast<std::size_t>(d)] + h;
          xm[static_cast<std::size_t>(d)] = x[static_cast<std::size_t>(d)] - h;
          double fd = (f.eval(xp) - f.eval(xm)) / (2.0 * h);
          err = std::max(err, std::fabs(fd - g[static_cast<std::size_t>(d)]));
          scale = std::max(scale, 1.0 + std::fabs(g[static_cast<std::size_t>(d)]));
          xp[static_cast<std::size_t>(d)] = x[static_cast<std::size_t>(d)];
          xm[static_cast<std::size_t>(d)] = x[static_cast<std::size_t>(d)];
        }
        worst = std::max(worst, err / scale);
        ++checked;
      } catch (const DomainError&) {
        ++skipped;
      }
    }
    std::printf("checked %d points (%d skipped), max relative deviation %.3e\n",
                checked, skipped, worst);
    if (checked == 0) {
      std::fprintf(stderr, "error: every sample point hit a domain error\n");
      return kExitInvalid;
    }
    return worst <= tol_rel ? kExitPass : kExitFail;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInvalid;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"level-band transport and coarea-identity verification"};
  app.require_subcommand(1);

  CommonOptions o;
  std::vector<double> p;
  int points = 100;
  double fd_h = 1e-5;
  double tol_rel = 1e-6;

  auto add_field_flags = [&](CLI::App* cmd, bool need_g) {
    cmd->add_option("--f", o.f_expr, "scalar field expression")->required();
    if (need_g) cmd->add_option("--g", o.g_expr, "density expression (default 1)");
    cmd->add_option("--n", o.n, "ambient dimension")->required();
  };
  auto add_band_flags = [&](CLI::App* cmd) {
    cmd->add_option("--a", o.a, "band start level")->required();
    cmd->add_option("--b", o.b, "band end level")->required();
  };
  auto add_flow_flags = [&](CLI::App* cmd) {
    cmd->add_option("--ode-steps", o.ode_steps, "RK4 steps per unit level");
    cmd->add_option("--tol", o.tol, "projection tolerance");
    cmd->add_option("--grad-floor", o.grad_floor, "critical-point threshold");
  };
  auto add_chart_flags = [&](CLI::App* cmd) {
    cmd->add_option("--center", o.center, "star-shape center (comma separated)")
        ->delimiter(',');
    cmd->add_option("--u-grid", o.u_grid, "chart grid sizes (comma separated)")
        ->delimiter(',');
    cmd->add_option("--charts", o.charts, "split the seed surface into L charts");
    cmd->add_option("--samples-file", o.samples_file,
                    "chart samples file (header 'n k dims', rows 'u x')");
    cmd->add_option("--r-max", o.r_max, "radial search radius");
  };

  CLI::App* verify_cmd = app.add_subcommand("verify", "check the band identity");
  add_field_flags(verify_cmd, true);
  add_band_flags(verify_cmd);
  add_flow_flags(verify_cmd);
  add_chart_flags(verify_cmd);
  verify_cmd->add_option("--t-nodes", o.t_nodes, "Simpson nodes over [a,b] (odd)");
  verify_cmd->add_option("--mc-samples", o.mc_samples, "Monte Carlo sample count");
  verify_cmd->add_option("--seed", o.seed, "Monte Carlo seed");
  verify_cmd->add_option("--grid-nodes", o.grid_nodes, "tensor-grid nodes per axis");
  verify_cmd->add_option("--volume-method", o.volume_method, "mc | grid");
  verify_cmd->add_option("--box", o.box, "bounding box lo,hi (uniform per axis)")
      ->delimiter(',');
  verify_cmd
      ->add_option("--box-per-axis", o.box_per_axis, "bounding box lo1,hi1,...")
      ->delimiter(',');
  verify_cmd->add_option("--pass-tol", o.pass_tol, "PASS threshold on rel_error");
  verify_cmd->add_option("--out", o.out, "also write the JSON report here");

  CLI::App* transport_cmd =
      app.add_subcommand("transport", "flow a point across the band");
  add_field_flags(transport_cmd, false);
  add_band_flags(transport_cmd);
  add_flow_flags(transport_cmd);
  transport_cmd->add_option("--p", p, "start point (comma separated)")
      ->delimiter(',')
      ->required();
  transport_cmd->add_option("--t-nodes", o.t_nodes, "rows to print");

  CLI::App* mesh_cmd =
      app.add_subcommand("mesh", "export transported level surfaces as OBJ");
  add_field_flags(mesh_cmd, false);
  add_band_flags(mesh_cmd);
  add_flow_flags(mesh_cmd);
  add_chart_flags(mesh_cmd);
  mesh_cmd->add_option("--t-nodes", o.t_nodes, "levels to export");
  mesh_cmd->add_option("--out", o.out, "output file prefix (default 'mesh')");

  CLI::App* grad_cmd =
      app.add_subcommand("grad-check", "compare gradients to central differences");
  add_field_flags(grad_cmd, false);
  grad_cmd->add_option("--points", points, "number of random points");
  grad_cmd->add_option("--seed", o.seed, "sampling seed");
  grad_cmd->add_option("--box", o.box, "sampling box lo,hi")->delimiter(',');
  grad_cmd->add_option("--fd-h", fd_h, "finite-difference step");
  grad_cmd->add_option("--tol-rel", tol_rel, "acceptance threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "%s\n\n%s", e.what(), app.help().c_str());
    return kExitUsage;
  }

  // t-nodes defaults differ per command.
  if (transport_cmd->parsed() && !transport_cmd->count("--t-nodes")) o.t_nodes = 9;
  if (mesh_cmd->parsed() && !mesh_cmd->count("--t-nodes")) o.t_nodes = 5;

  if (verify_cmd->parsed()) return run_verify(o);
  if (transport_cmd->parsed()) return run_transport(o, p);
  if (mesh_cmd->parsed()) return run_mesh(o);
  if (grad_cmd->parsed()) return run_grad_check(o, points, fd_h, tol_rel);
  return kExitUsage;
}
