#pragma once

#include <optional>
#include <vector>

#include "nfpe/energy.hpp"
#include "nfpe/grid.hpp"
#include "nfpe/model.hpp"
#include "nfpe/resolvent.hpp"

namespace nfpe {

struct EvolutionConfig {
  double T = 1.0;
  double h = 1e-2;
  /// Record every k-th step; the final state is always recorded.
  int record_every = 1;
  ResolventConfig resolvent{};
};

struct FrameDiagnostics {
  double mass = 0.0;
  double min_value = 0.0;
  double energy = 0.0;
  double dissipation = 0.0;
  double gradient_metric_norm_sq = 0.0;
  /// |u_k - u_{k-1}|_1 and |u_k - u_{k-1}|_{-1} between consecutive records (0 at k = 0).
  double l1_increment = 0.0;
  double hminus_increment = 0.0;
  /// |grad_h u|_2; recorded without an acceptance bound.
  double gradient_seminorm = 0.0;
};

/// Recorded frames of u_h(t). times[0] = 0 and times.back() = T.
struct Trajectory {
  std::vector<double> times;
  std::vector<DensityField> states;
  std::vector<FrameDiagnostics> diagnostics;
  /// Total number of resolvent steps taken.
  std::size_t steps = 0;
};

/// Step sizes used for [0, T] with nominal step h: uniform h when T/h is an
/// integer up to 1e-9 relative, otherwise uniform h plus one shorter final step.
std::vector<double> step_schedule(double T, double h);

/// u_h(T) by repeated resolvent steps, without diagnostics.
DensityField propagate(const ResolventSolver& solver, const DensityField& u0, double T, double h,
                       const ResolventConfig& cfg);

/// Implicit Euler trajectory with per-record diagnostics. Throws ConvergenceError
/// naming the failing step index.
Trajectory evolve(const ModelSpec& spec, const SpatialGrid& grid, const DensityField& u0,
                  const EvolutionConfig& cfg);

/// (I + (t/n) A)^{-n} u0; bitwise equal to the final state of evolve with h = t/n, T = t.
DensityField exp_formula(const ModelSpec& spec, const SpatialGrid& grid, const DensityField& u0,
                         double t, int n, const ResolventConfig& cfg = {});

struct QuasiContraction {
  double final_distance = 0.0;    ///< |S(t)u0 - S(t)v0|_{-1}
  double initial_distance = 0.0;  ///< |u0 - v0|_{-1}
  /// log(final / initial) / t; meaningful only when rate_defined.
  double rate = 0.0;
  bool rate_defined = false;
};

QuasiContraction quasi_contraction_check(const ModelSpec& spec, const SpatialGrid& grid,
                                         const DensityField& u0, const DensityField& v0, double t,
                                         const EvolutionConfig& cfg);

struct SteadyStateOptions {
  /// Stop when |u_{j+1} - u_j|_1 / h < tol.
  double tol = 1e-6;
  double h = 0.05;
  double T_max = 100.0;
  /// Uniform density when empty.
  std::optional<DensityField> start;
  ResolventConfig resolvent{};
};

struct SteadyStateResult {
  DensityField u;
  double time = 0.0;
  std::size_t steps = 0;
  /// |u_{j+1} - u_j|_1 / h per step.
  std::vector<double> decay_history;
};

/// Evolves until the L1 increment per unit time falls below tol. Throws
/// ConvergenceError (with the decay history) if T_max is reached first.
SteadyStateResult steady_state(const ModelSpec& spec, const SpatialGrid& grid,
                               const SteadyStateOptions& opts);

/// |(u_next - u_prev)/h + A_h u_prev|_{-1}; vanishes at first order in h along a trajectory.
double derivative_defect(const ModelSpec& spec, const SpatialGrid& grid, const DensityField& u_prev,
                         const DensityField& u_next, double h);

}  // namespace nfpe
