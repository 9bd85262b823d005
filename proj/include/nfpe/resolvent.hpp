#pragma once

#include <vector>

#include "nfpe/grid.hpp"
#include "nfpe/model.hpp"
#include "nfpe/transport.hpp"

namespace nfpe {

enum class ResolventMethod {
  /// Newton with backtracking; damped Picard on the monotone map as fallback.
  newton,
  /// Damped Picard iteration only (mainly for testing the fallback).
  picard,
};

struct ResolventConfig {
  double lambda = 1e-2;
  /// Tolerance on the discrete L1 residual |u + lambda A_h u - f|_1.
  double tol = 1e-10;
  int max_iter = 200;
  /// Initial Newton step length; halved until the L1 residual decreases.
  double damping = 1.0;
  ResolventMethod method = ResolventMethod::newton;
  int picard_max_iter = 50000;
};

struct ResolventResult {
  DensityField u;
  int iterations = 0;
  double final_residual = 0.0;
  /// mass(u) - mass(f).
  double mass_drift = 0.0;
  std::vector<double> residual_history;
  bool used_picard = false;
  /// lambda >= the model's lambda0: solved anyway, monotonicity not guaranteed.
  bool lambda_above_threshold = false;
};

/// Solves (I + lambda A_h) u = f on one grid. Keeps the face data of A_h, so
/// repeated steps on the same (spec, grid) reuse it. `spec` must outlive the solver.
class ResolventSolver {
 public:
  ResolventSolver(const ModelSpec& spec, const SpatialGrid& grid);

  ResolventResult solve(const DensityField& f, const ResolventConfig& cfg) const;

  /// u + lambda A_h(u) - f.
  std::vector<double> residual(std::span<const double> u, std::span<const double> f,
                               double lambda) const;

  const TransportStencil& stencil() const noexcept { return stencil_; }
  const ModelSpec& spec() const noexcept { return *spec_; }
  const SpatialGrid& grid() const noexcept { return grid_; }

 private:
  std::vector<double> newton_direction(std::span<const double> u, std::span<const double> rhs,
                                       double lambda) const;
  bool picard(std::vector<double>& u, std::span<const double> f, const ResolventConfig& cfg,
              std::vector<double>& history, int& iterations) const;

  const ModelSpec* spec_;
  SpatialGrid grid_;
  TransportStencil stencil_;
};

/// One implicit step u = (I + lambda A)^{-1} f.
/// Throws ConvergenceError (with the residual history) when the solve fails.
ResolventResult resolvent_step(const ModelSpec& spec, const SpatialGrid& grid,
                               const DensityField& f, const ResolventConfig& cfg);

struct ContractionSample {
  double solution_distance = 0.0;  ///< |u1 - u2|_1
  double data_distance = 0.0;      ///< |f1 - f2|_1
};

ContractionSample contraction_check(const ModelSpec& spec, const SpatialGrid& grid,
                                    const DensityField& f1, const DensityField& f2,
                                    const ResolventConfig& cfg);

}  // namespace nfpe
