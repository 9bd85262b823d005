#include "nfpe/energy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "nfpe/errors.hpp"
#include "nfpe/semigroup.hpp"
#include "nfpe/transport.hpp"

namespace nfpe {

namespace {

// 5-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 5> kGlNodes{-0.9061798459386640, -0.5384693101056831, 0.0,
                                         0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGlWeights{0.2369268850561891, 0.4786286704993665,
                                           0.5688888888888889, 0.4786286704993665,
                                           0.2369268850561891};

}  // namespace

EtaTable::EtaTable(const ModelSpec& spec, double s_max, double s_min, int nodes)
    : beta_(spec.beta), b_(spec.b) {
  if (!(s_min > 0.0) || !(s_max > 1.0) || nodes < 16)
    throw UsageError("EtaTable needs 0 < s_min < 1 < s_max and at least 16 nodes");
  const double lo = std::log(s_min);
  const double hi = std::log(s_max);
  step_ = (hi - lo) / (nodes - 1);
  first_index_ = static_cast<long>(std::floor(lo / step_));
  const long last_index = static_cast<long>(std::ceil(hi / step_));
  const auto count = static_cast<std::size_t>(last_index - first_index_ + 1);
  s_.resize(count);
  g_.assign(count, 0.0);
  eta_.assign(count, 0.0);
  for (std::size_t k = 0; k < count; ++k)
    s_[k] = std::exp(static_cast<double>(first_index_ + static_cast<long>(k)) * step_);

  const auto zero = static_cast<std::size_t>(-first_index_);  // node with s = 1
  s_[zero] = 1.0;
  g_[zero] = 0.0;
  auto q = [this](std::size_t k) { return static_cast<double>(first_index_ + static_cast<long>(k)) * step_; };
  for (std::size_t k = zero + 1; k < count; ++k) g_[k] = g_[k - 1] + inner(q(k - 1), q(k));
  for (std::size_t k = zero; k-- > 0;) g_[k] = g_[k + 1] - inner(q(k), q(k + 1));

  leading_ = beta_.deriv(0.0) / b_(0.0);
  eta_[0] = s_[0] * (g_[0] - leading_);
  for (std::size_t k = 1; k < count; ++k) eta_[k] = eta_[k - 1] + outer(k - 1, s_[k]);
}

double EtaTable::inner(double q_from, double q_to) const {
  const double half = 0.5 * (q_to - q_from);
  const double mid = 0.5 * (q_to + q_from);
  double acc = 0.0;
  for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
    const double t = std::exp(mid + half * kGlNodes[i]);
    acc += kGlWeights[i] * beta_.deriv(t) / b_(t);
  }
  return acc * half;
}

double EtaTable::outer(std::size_t k, double r) const {
  // int_{s_k}^r g(s) ds in q = log s, split into pieces no longer than one table step.
  const double q0 = std::log(s_[k]);
  const double q1 = std::log(r);
  const int pieces = std::max(1, static_cast<int>(std::ceil((q1 - q0) / step_ - 1e-9)));
  const double dq = (q1 - q0) / pieces;
  double acc = 0.0;
  double g_start = g_[k];
  for (int p = 0; p < pieces; ++p) {
    const double a = q0 + p * dq;
    const double half = 0.5 * dq;
    const double mid = a + half;
    for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
      const double qi = mid + half * kGlNodes[i];
      acc += kGlWeights[i] * half * (g_start + inner(a, qi)) * std::exp(qi);
    }
    g_start += inner(a, a + dq);
  }
  return acc;
}

double EtaTable::eta(double r) const {
  if (r < 0.0 || std::isnan(r)) throw DomainError("eta: argument must be nonnegative");
  if (r == 0.0) return 0.0;
  if (r < s_.front()) {
    const double gr = g_.front() + leading_ * std::log(r / s_.front());
    return r * (gr - leading_);
  }
  if (r >= s_.back()) return eta_.back() + (r == s_.back() ? 0.0 : outer(s_.size() - 1, r));
  auto k = static_cast<std::size_t>(std::floor(std::log(r) / step_) - static_cast<double>(first_index_));
  k = std::min(k, s_.size() - 2);
  while (k > 0 && s_[k] > r) --k;
  while (k + 2 < s_.size() && s_[k + 1] < r) ++k;
  // Cubic Hermite with exact slopes g.
  const double a = s_[k];
  const double w = s_[k + 1] - a;
  const double t = (r - a) / w;
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * eta_[k] + (t3 - 2 * t2 + t) * w * g_[k] +
         (-2 * t3 + 3 * t2) * eta_[k + 1] + (t3 - t2) * w * g_[k + 1];
}

double EtaTable::g(double r) const {
  if (r < 0.0 || std::isnan(r)) throw DomainError("g: argument must be nonnegative");
  if (r == 0.0) return -std::numeric_limits<double>::infinity();
  if (r < s_.front()) return g_.front() + leading_ * std::log(r / s_.front());
  const double q = std::log(r);
  if (r >= s_.back()) {
    const double q0 = std::log(s_.back());
    const int pieces = std::max(1, static_cast<int>(std::ceil((q - q0) / step_)));
    double acc = g_.back();
    for (int p = 0; p < pieces; ++p)
      acc += inner(q0 + (q - q0) * p / pieces, q0 + (q - q0) * (p + 1) / pieces);
    return acc;
  }
  auto k = static_cast<std::size_t>(std::floor(q / step_) - static_cast<double>(first_index_));
  k = std::min(k, s_.size() - 2);
  while (k > 0 && s_[k] > r) --k;
  if (s_[k] == r) return g_[k];
  return g_[k] + inner(std::log(s_[k]), q);
}

double eta(const ModelSpec& spec, double r) {
  if (r < 0.0 || std::isnan(r)) throw DomainError("eta: argument must be nonnegative");
  return EtaTable(spec, std::max(10.0, 10.0 * r)).eta(r);
}

// ---------------------------------------------------------------------------

namespace {

using Faces = std::span<const TransportStencil::FaceData>;

double dissipation_on(const ModelSpec& spec, const SpatialGrid& grid, Faces faces,
                      const DensityField& u) {
  const double h = grid.spacing();
  double acc = 0.0;
  for (const auto& f : faces) {
    const double ubar = 0.5 * (u[f.lo] + u[f.hi]);
    if (ubar < kDensityFloor) continue;
    const double bs = spec.mobility(ubar);
    const double root = std::sqrt(bs);
    const double grad = (u[f.hi] - u[f.lo]) / h;
    const double term = spec.beta.deriv(ubar) * grad / root - f.drift * root;
    acc += term * term;
  }
  return acc * grid.cell_volume();
}

double metric_on(const ModelSpec& spec, const SpatialGrid& grid, Faces faces,
                 const DensityField& u, std::span<const double> face_gradients) {
  double acc = 0.0;
  for (std::size_t k = 0; k < faces.size(); ++k) {
    const auto& f = faces[k];
    const double ubar = 0.5 * (u[f.lo] + u[f.hi]);
    if (ubar < kDensityFloor) continue;
    acc += spec.mobility(ubar) * face_gradients[k] * face_gradients[k];
  }
  return acc * grid.cell_volume();
}

std::vector<double> cell_gradients(const SpatialGrid& grid, Faces faces, const ScalarField& y) {
  const double h = grid.spacing();
  std::vector<double> out(faces.size());
  for (std::size_t k = 0; k < faces.size(); ++k)
    out[k] = (y[faces[k].hi] - y[faces[k].lo]) / h;
  return out;
}

// The floor keeps y finite; faces below it are skipped anyway.
double entropy_arg(double u) { return std::max(u, kDensityFloor); }

}  // namespace

EntropyFunctional::EntropyFunctional(const ModelSpec& spec, const SpatialGrid& grid, double s_max)
    : spec_(&spec), grid_(grid), table_(spec, std::max(10.0, s_max)) {
  phi_.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) phi_[i] = spec.potential.phi(grid.center(i));
}

double EntropyFunctional::energy(const DensityField& u) const {
  require_same_grid(grid_, u.grid);
  double ent = 0.0;
  double pot = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double v = u[i];
    if (v < -1e-10) throw DomainError("energy: density has a negative cell");
    if (v > 0.0) ent += table_.eta(v);
    pot += phi_[i] * v;
  }
  return (ent + pot) * grid_.cell_volume();
}

ScalarField EntropyFunctional::entropy_potential(const DensityField& u) const {
  require_same_grid(grid_, u.grid);
  ScalarField y(grid_);
  for (std::size_t i = 0; i < u.size(); ++i) y[i] = table_.g(entropy_arg(u[i])) + phi_[i];
  return y;
}

EnergyReport EntropyFunctional::evaluate(const DensityField& u) const {
  require_same_grid(grid_, u.grid);
  EnergyReport rep;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double v = u[i];
    if (v < -1e-10) throw DomainError("energy: density has a negative cell");
    if (v > 0.0) rep.entropy_part += table_.eta(v);
    rep.potential_part += phi_[i] * v;
  }
  rep.entropy_part *= grid_.cell_volume();
  rep.potential_part *= grid_.cell_volume();
  rep.total = rep.entropy_part + rep.potential_part;

  const TransportStencil stencil(*spec_, grid_);
  rep.dissipation = dissipation_on(*spec_, grid_, stencil.faces(), u);
  const auto grads = cell_gradients(grid_, stencil.faces(), entropy_potential(u));
  rep.gradient_metric_norm_sq = metric_on(*spec_, grid_, stencil.faces(), u, grads);
  return rep;
}

EnergyReport energy(const ModelSpec& spec, const SpatialGrid& grid, const DensityField& u) {
  require_same_grid(grid, u.grid);
  double umax = 0.0;
  for (double v : u.values) umax = std::max(umax, v);
  return EntropyFunctional(spec, grid, 10.0 * umax).evaluate(u);
}

double dissipation(const ModelSpec& spec, const SpatialGrid& grid, const DensityField& u) {
  require_same_grid(grid, u.grid);
  const TransportStencil stencil(spec, grid);
  return dissipation_on(spec, grid, stencil.faces(), u);
}

ScalarField gradient(const ModelSpec& spec, const SpatialGrid& grid, const DensityField& u) {
  require_same_grid(grid, u.grid);
  const TransportStencil stencil(spec, grid);
  return {grid, stencil.apply(u.values, [&spec](double r) { return b_star(spec, r); })};
}

double metric_norm_sq(const ModelSpec& spec, const SpatialGrid& grid, const DensityField& u,
                      const ScalarField& y) {
  require_same_grid(grid, u.grid);
  require_same_grid(grid, y.grid);
  const TransportStencil stencil(spec, grid);
  const auto faces = stencil.faces();
  const double h = grid.spacing();
  // Gradients are formed only on faces above the floor so that -inf entries of
  // y on empty cells never enter the sum.
  double acc = 0.0;
  for (const auto& f : faces) {
    const double ubar = 0.5 * (u[f.lo] + u[f.hi]);
    if (ubar < kDensityFloor) continue;
    const double gy = (y[f.hi] - y[f.lo]) / h;
    acc += spec.mobility(ubar) * gy * gy;
  }
  return acc * grid.cell_volume();
}

double metric_norm_sq_faces(const ModelSpec& spec, const SpatialGrid& grid, const DensityField& u,
                            std::span<const double> face_gradients) {
  require_same_grid(grid, u.grid);
  if (face_gradients.size() != grid.face_count())
    throw UsageError("metric_norm_sq_faces: one gradient per interior face expected");
  const TransportStencil stencil(spec, grid);
  return metric_on(spec, grid, stencil.faces(), u, face_gradients);
}

std::vector<double> entropy_potential_face_gradients(const ModelSpec& spec,
                                                     const SpatialGrid& grid,
                                                     const DensityField& u) {
  require_same_grid(grid, u.grid);
  const TransportStencil stencil(spec, grid);
  const double h = grid.spacing();
  std::vector<double> out;
  out.reserve(stencil.faces().size());
  for (const auto& f : stencil.faces()) {
    const double ubar = 0.5 * (u[f.lo] + u[f.hi]);
    if (ubar < kDensityFloor) {
      out.push_back(0.0);
      continue;
    }
    const double grad = (u[f.hi] - u[f.lo]) / h;
    out.push_back(spec.beta.deriv(ubar) * grad / spec.mobility(ubar) - f.drift);
  }
  return out;
}

// ---------------------------------------------------------------------------

AuditReport gradient_flow_audit(const Trajectory& traj, const ModelSpec& /*spec*/,
                                const SpatialGrid& grid, const AuditOptions& opts) {
  const std::size_t n = traj.times.size();
  if (n < 3) throw UsageError("gradient_flow_audit needs at least 3 records");
  if (!traj.states.empty()) require_same_grid(grid, traj.states.front().grid);
  const double dt = traj.times[1] - traj.times[0];
  for (std::size_t j = 1; j < n; ++j) {
    const double step = traj.times[j] - traj.times[j - 1];
    if (std::abs(step - dt) > 1e-9 * std::max(1.0, dt))
      throw UsageError("gradient_flow_audit needs uniformly spaced records");
  }

  AuditReport rep;
  std::vector<double> mismatches;
  for (std::size_t j = 1; j + 1 < n; ++j) {
    AuditRow row;
    row.t = traj.times[j];
    row.energy = traj.diagnostics[j].energy;
    row.dissipation = traj.diagnostics[j].dissipation;
    row.dE_dt = (traj.diagnostics[j + 1].energy - traj.diagnostics[j - 1].energy) / (2.0 * dt);
    const double rhs = -row.dissipation;
    row.below_floor = std::max(std::abs(row.dE_dt), std::abs(rhs)) < opts.floor;
    row.mismatch_rel = std::abs(row.dE_dt - rhs) / std::max(std::abs(rhs), opts.floor);
    if (!row.below_floor) mismatches.push_back(row.mismatch_rel);
    rep.rows.push_back(row);
  }
  if (!mismatches.empty()) {
    auto mid = mismatches.begin() + static_cast<std::ptrdiff_t>(mismatches.size() / 2);
    std::nth_element(mismatches.begin(), mid, mismatches.end());
    double med = *mid;
    if (mismatches.size() % 2 == 0) {
      const double lower = *std::max_element(mismatches.begin(), mid);
      med = 0.5 * (med + lower);
    }
    rep.median_mismatch = med;
  }
  rep.identity_passed = rep.median_mismatch <= opts.mismatch_tolerance;

  const double e0 = traj.diagnostics.front().energy;
  const double slack = opts.energy_slack_rel * (1.0 + std::abs(e0));
  double dissipated = 0.0;
  double excess = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j < n; ++j) {
    dissipated += traj.diagnostics[j].dissipation * dt;
    excess = std::max(excess, traj.diagnostics[j].energy + dissipated - e0 - slack);
  }
  rep.energy_inequality_excess = excess;
  rep.energy_inequality_passed = excess <= 0.0;
  return rep;
}

}  // namespace nfpe
