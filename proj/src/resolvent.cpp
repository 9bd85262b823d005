#include "nfpe/resolvent.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

#include "nfpe/errors.hpp"
#include "nfpe/tridiagonal.hpp"

namespace nfpe {

namespace {

double l1(std::span<const double> r, double vol) { return l1_norm(r, vol); }

}  // namespace

ResolventSolver::ResolventSolver(const ModelSpec& spec, const SpatialGrid& grid)
    : spec_(&spec), grid_(grid), stencil_(spec, grid) {}

std::vector<double> ResolventSolver::residual(std::span<const double> u,
                                              std::span<const double> f, double lambda) const {
  const auto Au = stencil_.apply(u, [this](double r) { return spec_->mobility(r); });
  std::vector<double> R(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) R[i] = u[i] + lambda * Au[i] - f[i];
  return R;
}

std::vector<double> ResolventSolver::newton_direction(std::span<const double> u,
                                                      std::span<const double> rhs,
                                                      double lambda) const {
  const auto mob_deriv = [this](double r) { return spec_->mobility_deriv(r); };
  const std::size_t n = u.size();
  if (grid_.dim() == 1) {
    TridiagonalSystem J(n);
    for (std::size_t i = 0; i < n; ++i) J.diag[i] = 1.0;
    stencil_.jacobian(u, mob_deriv,
                      [&](std::size_t r, std::size_t c, double v) { J.add(r, c, lambda * v); });
    return J.solve(rhs);
  }
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(n + 4 * stencil_.faces().size());
  for (std::size_t i = 0; i < n; ++i)
    trip.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i), 1.0);
  stencil_.jacobian(u, mob_deriv, [&](std::size_t r, std::size_t c, double v) {
    trip.emplace_back(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c), lambda * v);
  });
  const auto N = static_cast<Eigen::Index>(n);
  Eigen::SparseMatrix<double> J(N, N);
  J.setFromTriplets(trip.begin(), trip.end());
  J.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(J);
  if (lu.info() != Eigen::Success) throw NumericError("Jacobian factorisation failed", 0);
  const Eigen::Map<const Eigen::VectorXd> b(rhs.data(), N);
  const Eigen::VectorXd x = lu.solve(b);
  return {x.data(), x.data() + N};
}

bool ResolventSolver::picard(std::vector<double>& u, std::span<const double> f,
                             const ResolventConfig& cfg, std::vector<double>& history,
                             int& iterations) const {
  // Fixed point of u <- u - tau K R(u), K = (I - Lap_h)^{-1}: the discrete form
  // of the monotone reformulation G_lambda(u) = K f.
  const double vol = grid_.cell_volume();
  double vmax = 0.0;
  for (const auto& fd : stencil_.faces()) vmax = std::max(vmax, std::abs(fd.velocity));
  const auto& c = spec_->constants;
  const double lip = std::max(1.0, cfg.lambda * c.gamma2) + cfg.lambda * vmax * c.gamma3;
  const double tau = cfg.damping / lip;
  auto R = residual(u, f, cfg.lambda);
  double r = l1(R, vol);
  for (int it = 0; it < cfg.picard_max_iter; ++it) {
    if (r <= cfg.tol) return true;
    const ScalarField KR = solve_helmholtz(ScalarField(grid_, R));
    for (std::size_t i = 0; i < u.size(); ++i) u[i] -= tau * KR[i];
    R = residual(u, f, cfg.lambda);
    r = l1(R, vol);
    history.push_back(r);
    ++iterations;
    if (!std::isfinite(r)) return false;
  }
  return r <= cfg.tol;
}

ResolventResult ResolventSolver::solve(const DensityField& f, const ResolventConfig& cfg) const {
  require_same_grid(grid_, f.grid);
  if (!(cfg.lambda > 0.0)) throw UsageError("resolvent parameter lambda must be positive");
  if (!(cfg.tol > 0.0)) throw UsageError("resolvent tolerance must be positive");
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!std::isfinite(f[i])) throw NumericError("resolvent data is not finite", i);

  ResolventResult res;
  res.lambda_above_threshold = cfg.lambda >= spec_->lambda0;
  const double vol = grid_.cell_volume();
  std::vector<double> u = f.values;
  auto R = residual(u, f.values, cfg.lambda);
  double r = l1(R, vol);
  res.residual_history.push_back(r);

  bool stalled = false;
  if (cfg.method == ResolventMethod::newton) {
    int it = 0;
    while (r > cfg.tol) {
      if (it >= cfg.max_iter) {
        throw ConvergenceError("Newton iteration exceeded max_iter in resolvent_step",
                               res.residual_history);
      }
      std::vector<double> rhs(R.size());
      for (std::size_t i = 0; i < R.size(); ++i) rhs[i] = -R[i];
      const auto delta = newton_direction(u, rhs, cfg.lambda);
      double alpha = cfg.damping;
      bool accepted = false;
      std::vector<double> trial(u.size());
      for (int ls = 0; ls < 40 && !accepted; ++ls, alpha *= 0.5) {
        for (std::size_t i = 0; i < u.size(); ++i) trial[i] = u[i] + alpha * delta[i];
        try {
          auto Rt = residual(trial, f.values, cfg.lambda);
          const double rt = l1(Rt, vol);
          if (rt < r) {
            u.swap(trial);
            R = std::move(Rt);
            r = rt;
            accepted = true;
          }
        } catch (const NumericError&) {
          // treat as a rejected step
        }
      }
      ++it;
      res.iterations = it;
      if (!accepted) {
        stalled = true;
        break;
      }
      res.residual_history.push_back(r);
    }
  }
  if (cfg.method == ResolventMethod::picard || stalled) {
    res.used_picard = true;
    if (!picard(u, f.values, cfg, res.residual_history, res.iterations)) {
      throw ConvergenceError("Picard iteration did not reach the resolvent tolerance",
                             res.residual_history);
    }
    R = residual(u, f.values, cfg.lambda);
    r = l1(R, vol);
  }

  res.u = DensityField(grid_, std::move(u));
  res.final_residual = r;
  res.mass_drift = discrete_mass(res.u) - discrete_mass(f);
  return res;
}

ResolventResult resolvent_step(const ModelSpec& spec, const SpatialGrid& grid,
                               const DensityField& f, const ResolventConfig& cfg) {
  return ResolventSolver(spec, grid).solve(f, cfg);
}

ContractionSample contraction_check(const ModelSpec& spec, const SpatialGrid& grid,
                                    const DensityField& f1, const DensityField& f2,
                                    const ResolventConfig& cfg) {
  const ResolventSolver solver(spec, grid);
  const auto u1 = solver.solve(f1, cfg);
  const auto u2 = solver.solve(f2, cfg);
  return {l1_distance(u1.u, u2.u), l1_distance(f1, f2)};
}

}  // namespace nfpe
