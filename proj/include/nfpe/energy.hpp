#pragma once

#include <span>
#include <string>
#include <vector>

#include "nfpe/grid.hpp"
#include "nfpe/model.hpp"

namespace nfpe {

/// Faces whose mean density is below this floor contribute nothing to the
/// dissipation and to the metric norm.
inline constexpr double kDensityFloor = 1e-12;

/// Tabulated entropy density
///   g(s)   = int_1^s beta'(t) / (t b(t)) dt,
///   eta(r) = int_0^r g(s) ds.
///
/// Nodes are log-spaced with s = 1 an exact node, so g(1) = 0 exactly. g is
/// integrated in q = log s, where the integrand beta'(e^q)/b(e^q) is smooth.
/// Below the first node g ~ g_1 + c log(s/s_1) with c = beta'(0)/b(0), and the
/// logarithmic leading term is integrated exactly. Between nodes eta is a cubic
/// Hermite interpolant with the exact slopes g; above the table it is
/// integrated directly.
class EtaTable {
 public:
  static constexpr int kDefaultNodes = 4096;
  static constexpr double kDefaultMin = 1e-14;

  EtaTable(const ModelSpec& spec, double s_max, double s_min = kDefaultMin,
           int nodes = kDefaultNodes);

  /// eta(r) for r >= 0; throws DomainError for r < 0.
  double eta(double r) const;
  /// g(r) = eta'(r) for r > 0 (-inf at 0).
  double g(double r) const;

  double s_min() const noexcept { return s_.front(); }
  double s_max() const noexcept { return s_.back(); }
  std::size_t node_count() const noexcept { return s_.size(); }

 private:
  double inner(double q_from, double q_to) const;   // int beta'(e^p)/b(e^p) dp
  double outer(std::size_t k, double r) const;      // int_{s_k}^r g(s) ds

  CoefficientFn beta_;
  CoefficientFn b_;
  double step_ = 0.0;
  long first_index_ = 0;
  double leading_ = 1.0;
  std::vector<double> s_;
  std::vector<double> g_;
  std::vector<double> eta_;
};

/// eta(r) by quadrature. Throws DomainError for r < 0.
double eta(const ModelSpec& spec, double r);

struct EnergyReport {
  double entropy_part = 0.0;
  double potential_part = 0.0;
  double total = 0.0;
  double dissipation = 0.0;
  /// |grad E_u|_u^2 = int b*(u) |grad y_u|^2 with y_u differenced at cell centres.
  double gradient_metric_norm_sq = 0.0;
};

/// Entropy functional bound to one (spec, grid). Builds its eta table once.
class EntropyFunctional {
 public:
  /// Table covers [1e-14, max(s_max, 10)]; larger densities fall back to direct quadrature.
  EntropyFunctional(const ModelSpec& spec, const SpatialGrid& grid, double s_max = 10.0);

  EnergyReport evaluate(const DensityField& u) const;
  double energy(const DensityField& u) const;
  /// y_u = g(max(u, floor)) + Phi at cell centres.
  ScalarField entropy_potential(const DensityField& u) const;
  const EtaTable& table() const noexcept { return table_; }

 private:
  const ModelSpec* spec_;
  SpatialGrid grid_;
  EtaTable table_;
  std::vector<double> phi_;
};

/// Full report for u (E parts, dissipation and gradient metric norm).
EnergyReport energy(const ModelSpec& spec, const SpatialGrid& grid, const DensityField& u);

/// Psi(u) = int |beta'(u) grad u / sqrt(b*(u)) - D sqrt(b*(u))|^2, face-centred with
/// the face mean of u and D at the face centre; faces below kDensityFloor contribute 0.
double dissipation(const ModelSpec& spec, const SpatialGrid& grid, const DensityField& u);

/// -Lap_h beta(u) + div_h(D b*(u)) on the stencil of apply_A (b*(r) = b(r) r).
ScalarField gradient(const ModelSpec& spec, const SpatialGrid& grid, const DensityField& u);

/// sum over faces b*(u_face) |grad_h y|^2 h^d, squared norm of z = -div(b*(u) grad y).
double metric_norm_sq(const ModelSpec& spec, const SpatialGrid& grid, const DensityField& u,
                      const ScalarField& y);

/// Same quadrature with face gradients of y given directly (one per interior face).
double metric_norm_sq_faces(const ModelSpec& spec, const SpatialGrid& grid,
                            const DensityField& u, std::span<const double> face_gradients);

/// Chain-rule face gradient of the entropy potential:
/// beta'(u_face) grad_h u / b*(u_face) - D(face). Zero on faces below the floor.
std::vector<double> entropy_potential_face_gradients(const ModelSpec& spec,
                                                     const SpatialGrid& grid,
                                                     const DensityField& u);

// ---------------------------------------------------------------------------
// Gradient-flow audit

struct Trajectory;

struct AuditRow {
  double t = 0.0;
  double energy = 0.0;
  double dissipation = 0.0;
  double dE_dt = 0.0;
  double mismatch_rel = 0.0;
  bool below_floor = false;
};

struct AuditReport {
  std::vector<AuditRow> rows;
  double median_mismatch = 0.0;
  bool identity_passed = false;
  /// max_j [E_j + sum_{k=1..j} Psi_k dt - E_0] - slack; <= 0 when the inequality holds.
  double energy_inequality_excess = 0.0;
  bool energy_inequality_passed = false;
};

struct AuditOptions {
  double mismatch_tolerance = 0.05;
  /// Rows with max(|dE/dt|, Psi) below this are flagged and excluded from the median.
  double floor = 1e-8;
  /// Energy inequality slack: rel * (1 + |E_0|).
  double energy_slack_rel = 1e-3;
};

/// Compares the centred dE/dt with -Psi at interior records and checks the
/// discrete energy inequality. Throws UsageError with fewer than 3 records or
/// non-uniform record spacing.
AuditReport gradient_flow_audit(const Trajectory& traj, const ModelSpec& spec,
                                const SpatialGrid& grid, const AuditOptions& opts = {});

}  // namespace nfpe
