#include "nfpe/transport.hpp"

#include <array>
#include <cmath>

#include "nfpe/errors.hpp"

namespace nfpe {

double fitted_velocity(double potential_jump, double h) {
  if (potential_jump == 0.0) return 0.0;
  const double mag = std::expm1(std::abs(potential_jump)) / h;
  return potential_jump > 0.0 ? -mag : mag;
}

TransportStencil::TransportStencil(const ModelSpec& spec, const SpatialGrid& grid)
    : spec_(&spec), grid_(grid) {
  // 3-point Gauss-Legendre on the segment joining the two cell centres.
  static constexpr std::array<double, 3> nodes{-0.7745966692414834, 0.0, 0.7745966692414834};
  static constexpr std::array<double, 3> weights{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  const double h = grid.spacing();
  const auto raw = grid.faces();
  faces_.reserve(raw.size());
  for (const auto& f : raw) {
    const Point n = f.axis == 0 ? Point{1.0, 0.0} : Point{0.0, 1.0};
    double integral = 0.0;
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      const Point x = f.center + (0.5 * h * nodes[q]) * n;
      integral += weights[q] * dot(spec.drift(x), n);
    }
    const double w = -0.5 * h * integral;
    const double d = dot(spec.drift(f.center), n);
    faces_.push_back({f.lo, f.hi, f.axis, f.center, d, fitted_velocity(w, h), w});
  }
}

std::vector<double> TransportStencil::fluxes(std::span<const double> u,
                                             const Mobility& mobility) const {
  const double h = grid_.spacing();
  std::vector<double> F(faces_.size());
  for (std::size_t k = 0; k < faces_.size(); ++k) {
    const auto& f = faces_[k];
    const double up = f.velocity > 0.0 ? u[f.lo] : u[f.hi];
    F[k] = (spec_->beta(u[f.hi]) - spec_->beta(u[f.lo])) / h - f.velocity * mobility(up);
  }
  return F;
}

std::vector<double> TransportStencil::apply(std::span<const double> u,
                                            const Mobility& mobility) const {
  const double h = grid_.spacing();
  const auto F = fluxes(u, mobility);
  std::vector<double> out(u.size(), 0.0);
  for (std::size_t k = 0; k < faces_.size(); ++k) {
    out[faces_[k].lo] -= F[k] / h;
    out[faces_[k].hi] += F[k] / h;
  }
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!std::isfinite(out[i])) throw NumericError("transport operator produced a non-finite value", i);
  return out;
}

ScalarField apply_A(const ModelSpec& spec, const SpatialGrid& grid, const DensityField& u) {
  require_same_grid(grid, u.grid);
  const TransportStencil stencil(spec, grid);
  return {grid, stencil.apply(u.values, [&spec](double r) { return spec.b(r) * r; })};
}

}  // namespace nfpe
