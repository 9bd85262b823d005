#pragma once

#include <functional>
#include <span>
#include <vector>

#include "nfpe/grid.hpp"
#include "nfpe/model.hpp"

namespace nfpe {

/// Precomputed face data for the drift-diffusion flux on one grid.
///
/// For a face between cells lo and hi with unit normal n along `axis`:
///   F = (beta(u_hi) - beta(u_lo)) / h - V * m(u_up),  up = lo if V > 0 else hi,
/// where m is the mobility (b(u) u) and V is the fitted face velocity
///   V = sign(-w) expm1(|w|) / h,  w = -int_{x_lo}^{x_hi} D . n ds.
/// The fitted velocity keeps the upwind M-matrix structure and makes
/// exp(-Phi(x_i)) an exact discrete equilibrium when beta = id and b = 1.
class TransportStencil {
 public:
  struct FaceData {
    std::size_t lo;
    std::size_t hi;
    int axis;
    Point center;
    /// D(face centre) . n, the drift used by the dissipation functional.
    double drift;
    /// Fitted velocity V used by the flux.
    double velocity;
    /// Potential jump w = Phi(x_hi) - Phi(x_lo) (line integral of -D . n).
    double potential_jump;
  };

  using Mobility = std::function<double(double)>;

  TransportStencil(const ModelSpec& spec, const SpatialGrid& grid);

  const SpatialGrid& grid() const noexcept { return grid_; }
  std::span<const FaceData> faces() const noexcept { return faces_; }

  /// -div_h F for the given mobility. Throws NumericError on non-finite output.
  std::vector<double> apply(std::span<const double> u, const Mobility& mobility) const;

  /// Face fluxes F (one per interior face).
  std::vector<double> fluxes(std::span<const double> u, const Mobility& mobility) const;

  /// Visits the Jacobian entries of u -> -div_h F(u) as (row, col, value) triples.
  template <class Sink>
  void jacobian(std::span<const double> u, const Mobility& mobility_deriv, Sink&& sink) const {
    const double h = grid_.spacing();
    for (const auto& f : faces_) {
      double d_hi = spec_->beta.deriv(u[f.hi]) / h;
      double d_lo = -spec_->beta.deriv(u[f.lo]) / h;
      if (f.velocity > 0.0) {
        d_lo -= f.velocity * mobility_deriv(u[f.lo]);
      } else {
        d_hi -= f.velocity * mobility_deriv(u[f.hi]);
      }
      // out_lo -= F / h, out_hi += F / h
      sink(f.lo, f.lo, -d_lo / h);
      sink(f.lo, f.hi, -d_hi / h);
      sink(f.hi, f.lo, d_lo / h);
      sink(f.hi, f.hi, d_hi / h);
    }
  }

 private:
  const ModelSpec* spec_;
  SpatialGrid grid_;
  std::vector<FaceData> faces_;
};

/// Fitted velocity for a potential jump w across a face of width h.
double fitted_velocity(double potential_jump, double h);

}  // namespace nfpe
