#pragma once

// verify() runs both routes and assembles a CoareaReport. Any typed error
// raised mid-run is captured into a partial report labeled invalid instead
// of propagating, so callers always get diagnostics. Serialization is
// nlohmann-json with a fixed key order; identical inputs (including the
// Monte Carlo seed) produce byte-identical documents.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "coarea/chart.hpp"
#include "coarea/errors.hpp"
#include "coarea/flow.hpp"
#include "coarea/integrate.hpp"
#include "coarea/scalar_field.hpp"

namespace coarea {

struct CoareaReport {
  std::optional<double> lhs;
  std::optional<double> rhs;
  std::optional<double> abs_error;
  std::optional<double> rel_error;
  std::vector<LevelEntry> per_level;

  struct Diagnostics {
    double min_grad_norm_mesh = std::numeric_limits<double>::infinity();
    double min_normal_norm_interior = std::numeric_limits<double>::infinity();
    double max_level_error = 0.0;
    std::optional<double> mc_std_error;
    std::optional<long long> mc_accepted;
    std::optional<double> mc_min_grad_norm;
    std::optional<double> t_error_estimate;
    std::string lhs_method;
    int charts = 0;
    int mesh_nodes = 0;
    int t_nodes = 0;
  } diagnostics;

  bool pass = false;
  bool valid = false;
  std::string error_kind;     // empty when valid
  std::string error_message;  // empty when valid
};

inline double relative_error(double lhs, double rhs) {
  return std::fabs(lhs - rhs) /
         std::max({std::fabs(lhs), std::fabs(rhs), 1e-300});
}

namespace detail {

inline std::string error_kind_of(const Error& e) {
  if (dynamic_cast<const CriticalPointDetected*>(&e)) return "CriticalPointDetected";
  if (dynamic_cast<const NonConvergence*>(&e)) return "NonConvergence";
  if (dynamic_cast<const DegenerateChart*>(&e)) return "DegenerateChart";
  if (dynamic_cast<const NoBracket*>(&e)) return "NoBracket";
  if (dynamic_cast<const LevelMismatch*>(&e)) return "LevelMismatch";
  if (dynamic_cast<const DomainError*>(&e)) return "DomainError";
  if (dynamic_cast<const ParseError*>(&e)) return "ParseError";
  return "Error";
}

}  // namespace detail

// Evaluates both sides of the identity over the charts and reports the
// discrepancy plus band-validation diagnostics.
inline CoareaReport verify(const ScalarField& f, const ScalarField& g, double a,
                           double b, const ChartSet& charts,
                           const QuadratureSpec& spec, const FlowConfig& cfg) {
  CoareaReport report;
  report.diagnostics.charts = static_cast<int>(charts.charts.size());
  report.diagnostics.t_nodes = spec.t_nodes;
  report.diagnostics.lhs_method =
      spec.method == VolumeMethod::MonteCarlo ? "monte_carlo" : "tensor_grid";
  try {
    if (b < a) throw Error("band must satisfy a <= b");

    RhsResult rhs = rhs_coarea_integral(charts, f, g, a, b, spec, cfg);
    report.per_level = rhs.per_level;
    report.rhs = rhs.value;
    report.diagnostics.t_error_estimate = rhs.t_error_estimate;
    for (const TransportedMesh& mesh : rhs.meshes) {
      report.diagnostics.mesh_nodes += mesh.nodes() * mesh.level_count();
      if (mesh.min_grad_norm < report.diagnostics.min_grad_norm_mesh)
        report.diagnostics.min_grad_norm_mesh = mesh.min_grad_norm;
      if (mesh.min_normal_norm_interior < report.diagnostics.min_normal_norm_interior)
        report.diagnostics.min_normal_norm_interior = mesh.min_normal_norm_interior;
      if (mesh.max_level_error > report.diagnostics.max_level_error)
        report.diagnostics.max_level_error = mesh.max_level_error;
    }

    bool mc = spec.method == VolumeMethod::MonteCarlo;
    VolumeIntegralResult lhs =
        lhs_volume_integral_detail(f, g, a, b, spec, /*track_grad=*/mc);
    report.lhs = lhs.value;
    if (mc) {
      report.diagnostics.mc_std_error = lhs.std_error;
      report.diagnostics.mc_accepted = lhs.accepted;
      if (lhs.accepted > 0)
        report.diagnostics.mc_min_grad_norm = lhs.min_grad_norm_accepted;
      if (lhs.accepted > 0 && lhs.min_grad_norm_accepted < cfg.grad_floor)
        throw CriticalPointDetected(
            "volume sample inside the band with |grad f| = " +
                std::to_string(lhs.min_grad_norm_accepted) + " below floor",
            {}, lhs.min_grad_norm_accepted);
    }

    report.abs_error = std::fabs(*report.lhs - *report.rhs);
    report.rel_error = relative_error(*report.lhs, *report.rhs);
    report.pass = *report.rel_error <= spec.pass_rel_tol;
    report.valid = true;
  } catch (const Error& e) {
    report.valid = false;
    report.pass = false;
    report.error_kind = detail::error_kind_of(e);
    report.error_message = e.what();
  }
  return report;
}

inline nlohmann::ordered_json report_to_json(const CoareaReport& r) {
  nlohmann::ordered_json j;
  auto opt = [](const auto& v) -> nlohmann::ordered_json {
    if (v.has_value()) return *v;
    return nullptr;
  };
  auto finite_or_null = [](double v) -> nlohmann::ordered_json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  j["lhs"] = opt(r.lhs);
  j["rhs"] = opt(r.rhs);
  j["abs_error"] = opt(r.abs_error);
  j["rel_error"] = opt(r.rel_error);
  nlohmann::ordered_json levels = nlohmann::ordered_json::array();
  for (const LevelEntry& e : r.per_level)
    levels.push_back({{"t", e.t}, {"I", e.integral}});
  j["per_level"] = levels;
  nlohmann::ordered_json d;
  d["min_grad_norm_mesh"] = finite_or_null(r.diagnostics.min_grad_norm_mesh);
  d["min_normal_norm_interior"] =
      finite_or_null(r.diagnostics.min_normal_norm_interior);
  d["max_level_error"] = r.diagnostics.max_level_error;
  d["mc_std_error"] = opt(r.diagnostics.mc_std_error);
  d["mc_accepted"] = opt(r.diagnostics.mc_accepted);
  d["mc_min_grad_norm"] = opt(r.diagnostics.mc_min_grad_norm);
  d["t_error_estimate"] = opt(r.diagnostics.t_error_estimate);
  d["lhs_method"] = r.diagnostics.lhs_method;
  d["charts"] = r.diagnostics.charts;
  d["mesh_nodes"] = r.diagnostics.mesh_nodes;
  d["t_nodes"] = r.diagnostics.t_nodes;
  j["diagnostics"] = d;
  j["pass"] = r.pass;
  j["valid"] = r.valid;
  if (!r.valid) {
    j["error_kind"] = r.error_kind;
    j["error_message"] = r.error_message;
  }
  return j;
}

}  // namespace coarea
