#include "nfpe/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nfpe/errors.hpp"

namespace nfpe {

namespace {

void require_config(const EvolutionConfig& cfg) {
  if (!(cfg.T >= 0.0) || !std::isfinite(cfg.T)) throw UsageError("evolution T must be >= 0");
  if (!(cfg.h > 0.0)) throw UsageError("evolution step h must be positive");
  if (cfg.T > 0.0 && cfg.h > cfg.T * (1.0 + 1e-12)) throw UsageError("evolution step h exceeds T");
  if (cfg.record_every < 1) throw UsageError("record_every must be >= 1");
}

DensityField step(const ResolventSolver& solver, const DensityField& u, double lambda,
                  const ResolventConfig& base, std::size_t index) {
  ResolventConfig cfg = base;
  cfg.lambda = lambda;
  try {
    return solver.solve(u, cfg).u;
  } catch (const ConvergenceError& e) {
    throw ConvergenceError("step " + std::to_string(index) + ": " + e.what(), e.history());
  }
}

double max_value(const DensityField& u) {
  double m = 0.0;
  for (double v : u.values) m = std::max(m, v);
  return m;
}

FrameDiagnostics diagnose(const EntropyFunctional& ef, const DensityField& u,
                          const DensityField* prev) {
  FrameDiagnostics d;
  d.mass = discrete_mass(u);
  d.min_value = min_value(u);
  const EnergyReport rep = ef.evaluate(u);
  d.energy = rep.total;
  d.dissipation = rep.dissipation;
  d.gradient_metric_norm_sq = rep.gradient_metric_norm_sq;
  d.gradient_seminorm = gradient_l2_norm(u);
  if (prev != nullptr) {
    d.l1_increment = l1_distance(u, *prev);
    d.hminus_increment = hminus_norm(difference(u, *prev));
  }
  return d;
}

}  // namespace

std::vector<double> step_schedule(double T, double h) {
  if (!(h > 0.0)) throw UsageError("step size must be positive");
  if (T <= 0.0) return {};
  const double ratio = T / h;
  const double whole = std::round(ratio);
  if (whole >= 1.0 && std::abs(ratio - whole) <= 1e-9 * ratio)
    return std::vector<double>(static_cast<std::size_t>(whole), h);
  const auto n = static_cast<std::size_t>(std::floor(ratio));
  std::vector<double> out(n, h);
  out.push_back(T - static_cast<double>(n) * h);
  return out;
}

DensityField propagate(const ResolventSolver& solver, const DensityField& u0, double T, double h,
                       const ResolventConfig& cfg) {
  DensityField u = u0;
  const auto sched = step_schedule(T, h);
  for (std::size_t k = 0; k < sched.size(); ++k) u = step(solver, u, sched[k], cfg, k + 1);
  return u;
}

Trajectory evolve(const ModelSpec& spec, const SpatialGrid& grid, const DensityField& u0,
                  const EvolutionConfig& cfg) {
  require_same_grid(grid, u0.grid);
  require_config(cfg);
  const ResolventSolver solver(spec, grid);
  const EntropyFunctional ef(spec, grid, 10.0 * max_value(u0));
  const auto sched = step_schedule(cfg.T, cfg.h);

  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(u0);
  traj.diagnostics.push_back(diagnose(ef, u0, nullptr));

  DensityField u = u0;
  double t = 0.0;
  for (std::size_t k = 0; k < sched.size(); ++k) {
    u = step(solver, u, sched[k], cfg.resolvent, k + 1);
    const bool last = k + 1 == sched.size();
    t = last ? cfg.T : static_cast<double>(k + 1) * cfg.h;
    if (last || (k + 1) % static_cast<std::size_t>(cfg.record_every) == 0) {
      traj.diagnostics.push_back(diagnose(ef, u, &traj.states.back()));
      traj.times.push_back(t);
      traj.states.push_back(u);
    }
  }
  traj.steps = sched.size();
  return traj;
}

DensityField exp_formula(const ModelSpec& spec, const SpatialGrid& grid, const DensityField& u0,
                         double t, int n, const ResolventConfig& cfg) {
  require_same_grid(grid, u0.grid);
  if (n < 1) throw UsageError("exp_formula needs n >= 1");
  if (!(t >= 0.0)) throw UsageError("exp_formula needs t >= 0");
  if (t == 0.0) return u0;
  const ResolventSolver solver(spec, grid);
  return propagate(solver, u0, t, t / n, cfg);
}

QuasiContraction quasi_contraction_check(const ModelSpec& spec, const SpatialGrid& grid,
                                         const DensityField& u0, const DensityField& v0, double t,
                                         const EvolutionConfig& cfg) {
  require_same_grid(grid, u0.grid);
  require_same_grid(grid, v0.grid);
  if (!(t > 0.0)) throw UsageError("quasi_contraction_check needs t > 0");
  const ResolventSolver solver(spec, grid);
  const DensityField ut = propagate(solver, u0, t, std::min(cfg.h, t), cfg.resolvent);
  const DensityField vt = propagate(solver, v0, t, std::min(cfg.h, t), cfg.resolvent);
  QuasiContraction q;
  q.initial_distance = hminus_norm(difference(u0, v0));
  q.final_distance = hminus_norm(difference(ut, vt));
  q.rate_defined = q.initial_distance > 0.0 && q.final_distance > 0.0;
  if (q.rate_defined) q.rate = std::log(q.final_distance / q.initial_distance) / t;
  return q;
}

SteadyStateResult steady_state(const ModelSpec& spec, const SpatialGrid& grid,
                               const SteadyStateOptions& opts) {
  if (!(opts.tol > 0.0) || !(opts.h > 0.0) || !(opts.T_max > 0.0))
    throw UsageError("steady_state needs positive tol, h and T_max");
  DensityField u = opts.start ? *opts.start : uniform_density(grid);
  require_same_grid(grid, u.grid);
  ResolventConfig rc = opts.resolvent;
  rc.lambda = opts.h;
  // Newton residuals stall near 1e-14 in double precision.
  rc.tol = std::max(std::min(rc.tol, 0.01 * opts.tol * opts.h), 1e-13);
  const ResolventSolver solver(spec, grid);

  SteadyStateResult res;
  const auto max_steps = static_cast<std::size_t>(std::ceil(opts.T_max / opts.h - 1e-9));
  for (std::size_t k = 1; k <= max_steps; ++k) {
    DensityField next = step(solver, u, opts.h, rc, k);
    const double rate = l1_distance(next, u) / opts.h;
    res.decay_history.push_back(rate);
    u = std::move(next);
    if (rate < opts.tol) {
      res.u = std::move(u);
      res.steps = k;
      res.time = static_cast<double>(k) * opts.h;
      return res;
    }
  }
  throw ConvergenceError("steady_state did not settle before T_max", res.decay_history);
}

double derivative_defect(const ModelSpec& spec, const SpatialGrid& grid, const DensityField& u_prev,
                         const DensityField& u_next, double h) {
  require_same_grid(grid, u_prev.grid);
  require_same_grid(grid, u_next.grid);
  const ScalarField Au = apply_A(spec, grid, u_prev);
  ScalarField v(grid);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = (u_next[i] - u_prev[i]) / h + Au[i];
  return hminus_norm(v);
}

}  // namespace nfpe
