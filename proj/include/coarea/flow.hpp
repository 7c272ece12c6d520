#pragma once

// Transport along the normalized gradient flow x' = grad f / |grad f|^2,
// which moves the level value f(x(t)) at unit rate. Integration is classical
// fixed-step RK4; after every step a Newton projection pins f(x) back onto
// the linear level ramp, so the level identity f(x(t)) = t holds to
// projection_tol regardless of the ODE error. Backward bands (t1 < t0) just
// flip the sign of the step.

#include <cmath>
#include <cstdlib>
#include <span>
#include <string>

#include "coarea/errors.hpp"
#include "coarea/scalar_field.hpp"
#include "coarea/vec.hpp"

namespace coarea {

struct FlowConfig {
  int ode_steps_per_unit_t = 64;    // RK4 steps per unit of level value
  double projection_tol = 1e-9;     // |f(x) - t| after projection
  int max_projection_iters = 100;
  double grad_floor = 1e-8;         // epsilon: minimum |grad f| allowed

  void validate() const {
    if (ode_steps_per_unit_t < 1) throw Error("ode_steps_per_unit_t must be >= 1");
    if (!(projection_tol > 0.0)) throw Error("projection_tol must be > 0");
    if (max_projection_iters < 1) throw Error("max_projection_iters must be >= 1");
    if (!(grad_floor > 0.0)) throw Error("grad_floor must be > 0");
  }
};

struct FlowPoint {
  Vec position;
  double level = 0.0;
};

struct TransportStats {
  double max_pre_projection_drift = 0.0;  // max |f(x) - ramp| before projection
  int steps = 0;
};

// grad f / |grad f|^2 at x. Throws if |grad f| < grad_floor.
inline Vec velocity(const ScalarField& f, std::span<const double> x,
                    const FlowConfig& cfg) {
  cfg.validate();
  Vec g = f.grad(x);
  double n2 = dot(g, g);
  double n = std::sqrt(n2);
  if (n < cfg.grad_floor)
    throw CriticalPointDetected(
        "|grad f| = " + std::to_string(n) + " below floor " +
            std::to_string(cfg.grad_floor),
        Vec(x.begin(), x.end()), n);
  for (double& gi : g) gi /= n2;
  return g;
}

// Newton iteration x <- x - (f(x)-t) grad f / |grad f|^2 until
// |f(x)-t| <= projection_tol. Returns x unchanged if already on level.
inline Vec project_to_level(const ScalarField& f, Vec x, double t,
                            const FlowConfig& cfg) {
  cfg.validate();
  for (int it = 0; it <= cfg.max_projection_iters; ++it) {
    double fx = f.eval(x);
    double r = fx - t;
    if (std::fabs(r) <= cfg.projection_tol) return x;
    if (it == cfg.max_projection_iters) {
      throw NonConvergence("projection to level " + std::to_string(t) +
                               " did not converge after " +
                               std::to_string(cfg.max_projection_iters) +
                               " iterations (residual " + std::to_string(r) +
                               ")",
                           std::move(x), r);
    }
    Vec g = f.grad(x);
    double n2 = dot(g, g);
    double n = std::sqrt(n2);
    if (n < cfg.grad_floor)
      throw CriticalPointDetected("projection hit |grad f| = " +
                                      std::to_string(n) + " below floor",
                                  std::move(x), n);
    axpy(-r / n2, g, x);
  }
  return x;  // unreachable
}

// Move p from level t0 to level t1. The step count scales with the band
// length: |t1-t0| * ode_steps_per_unit_t, at least one step.
inline FlowPoint transport(const ScalarField& f, const Vec& p, double t0,
                           double t1, const FlowConfig& cfg,
                           TransportStats* stats = nullptr) {
  cfg.validate();
  Vec x = p;
  if (std::fabs(f.eval(x) - t0) > cfg.projection_tol)
    x = project_to_level(f, std::move(x), t0, cfg);
  if (t1 == t0) return {std::move(x), t1};

  double span_t = std::fabs(t1 - t0);
  int steps = std::max(
      1, static_cast<int>(std::ceil(span_t * cfg.ode_steps_per_unit_t - 1e-12)));
  double h = (t1 - t0) / steps;
  const std::size_t n = x.size();

  Vec k1, k2, k3, k4, xs(n);
  for (int s = 1; s <= steps; ++s) {
    k1 = velocity(f, x, cfg);
    for (std::size_t i = 0; i < n; ++i) xs[i] = x[i] + 0.5 * h * k1[i];
    k2 = velocity(f, xs, cfg);
    for (std::size_t i = 0; i < n; ++i) xs[i] = x[i] + 0.5 * h * k2[i];
    k3 = velocity(f, xs, cfg);
    for (std::size_t i = 0; i < n; ++i) xs[i] = x[i] + h * k3[i];
    k4 = velocity(f, xs, cfg);
    for (std::size_t i = 0; i < n; ++i)
      x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

    // Target for this step on the linear ramp from t0 to t1.
    double ramp = t0 + (t1 - t0) * (static_cast<double>(s) / steps);
    if (stats) {
      double drift = std::fabs(f.eval(x) - ramp);
      if (drift > stats->max_pre_projection_drift)
        stats->max_pre_projection_drift = drift;
      ++stats->steps;
    }
    x = project_to_level(f, std::move(x), ramp, cfg);
  }
  return {std::move(x), t1};
}

}  // namespace coarea
