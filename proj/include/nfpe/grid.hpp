#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "nfpe/model.hpp"

namespace nfpe {

/// Uniform cell-centred grid on [-L, L]^dim with no-flux boundary.
///
/// Cells are indexed i + N j (j = 0 in 1D). Interior faces join two adjacent
/// cells along one axis; boundary faces carry no flux and are never visited.
class SpatialGrid {
 public:
  SpatialGrid() = default;
  /// dim in {1, 2}, half_width > 0, cells_per_axis >= 8. Throws UsageError otherwise.
  SpatialGrid(int dim, double half_width, int cells_per_axis);

  int dim() const noexcept { return dim_; }
  double half_width() const noexcept { return half_width_; }
  int cells_per_axis() const noexcept { return cells_; }
  double spacing() const noexcept { return spacing_; }
  std::size_t size() const noexcept;
  double cell_volume() const noexcept;

  std::size_t index(int i, int j = 0) const noexcept {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(cells_) * static_cast<std::size_t>(j);
  }
  double coordinate(int i) const noexcept { return -half_width_ + (i + 0.5) * spacing_; }
  Point center(std::size_t cell) const noexcept;

  struct Face {
    std::size_t lo;  // cell on the negative side
    std::size_t hi;  // cell on the positive side
    int axis;        // 0 = x, 1 = y
    Point center;
  };

  std::size_t face_count() const noexcept;
  std::vector<Face> faces() const;

  friend bool operator==(const SpatialGrid&, const SpatialGrid&) = default;

 private:
  int dim_ = 1;
  double half_width_ = 1.0;
  int cells_ = 8;
  double spacing_ = 0.25;
};

struct DensityTag {};
struct ScalarTag {};

/// Per-cell values on a grid. DensityField holds cell averages of a density,
/// ScalarField holds potentials, operator outputs and test functions.
template <class Tag>
struct Field {
  SpatialGrid grid;
  std::vector<double> values;

  Field() = default;
  explicit Field(const SpatialGrid& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}
  Field(const SpatialGrid& g, std::vector<double> v) : grid(g), values(std::move(v)) {}

  std::size_t size() const noexcept { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

using DensityField = Field<DensityTag>;
using ScalarField = Field<ScalarTag>;

inline ScalarField as_scalar(const DensityField& u) { return {u.grid, u.values}; }
inline DensityField as_density(const ScalarField& v) { return {v.grid, v.values}; }

/// Throws UsageError when the grids differ.
void require_same_grid(const SpatialGrid& a, const SpatialGrid& b);

// ---------------------------------------------------------------------------
// Norms and integrals (all weighted by the cell volume).

template <class Tag>
double discrete_mass(const Field<Tag>& u) {
  double s = 0.0;
  for (double v : u.values) s += v;
  return s * u.grid.cell_volume();
}

double l1_norm(std::span<const double> v, double cell_volume);
double l1_distance(const DensityField& a, const DensityField& b);
double l2_norm(const ScalarField& v);
double min_value(const DensityField& u);
/// Discrete H^1 seminorm sqrt(sum over faces |grad_h u|^2 h^d).
double gradient_l2_norm(const DensityField& u);

/// Difference a - b as a scalar field (grids must match).
ScalarField difference(const DensityField& a, const DensityField& b);

// ---------------------------------------------------------------------------
// Helmholtz problem and the discrete H^-1 norm.

/// Neumann Laplacian: (Lap_h w)_i = sum over interior neighbours (w_n - w_i) / h^2.
ScalarField neumann_laplacian(const ScalarField& w);
/// Solves (I - Lap_h) w = v with homogeneous Neumann boundary.
/// Tridiagonal in 1D, sparse Cholesky in 2D; throws NumericError if the residual exceeds 1e-12 |v|.
ScalarField solve_helmholtz(const ScalarField& v);
/// ((I - Lap_h)^{-1} a, b) weighted by the cell volume.
double hminus_inner(const ScalarField& a, const ScalarField& b);
double hminus_norm(const ScalarField& v);

// ---------------------------------------------------------------------------
// Density builders. All return unit-mass fields.

/// Cell averages of the Gaussian N(mean, variance I), renormalised to unit discrete mass.
DensityField gaussian_density(const SpatialGrid& grid, Point mean, double variance);
DensityField uniform_density(const SpatialGrid& grid);
/// Random mixture of one to three Gaussians with centres in [-3, 3]^d and
/// variances in [0.09, 2.25]. Uses only raw generator output so the corpus is
/// reproducible across standard libraries.
DensityField random_mixture_density(const SpatialGrid& grid, std::mt19937_64& rng);
/// Random nonnegative cell values (white noise), unit mass.
DensityField random_noise_density(const SpatialGrid& grid, std::mt19937_64& rng);
/// u shifted by `cells` along x with zero fill, renormalised.
DensityField translate_cells(const DensityField& u, int cells);
/// Scales to unit discrete mass. Throws DomainError if the mass is not positive.
DensityField normalized(DensityField u);

/// Uniform double in [0, 1) from the top 53 bits of a raw 64-bit draw.
inline double unit_uniform(std::uint64_t raw) {
  return static_cast<double>(raw >> 11) * 0x1.0p-53;
}

// ---------------------------------------------------------------------------
// The transport operator A = -Laplace beta(u) + div(D b(u) u).

/// Conservative finite-volume discretisation of A: face flux
/// F = grad_h beta(u) - V_f b(u_up) u_up with centred differences for beta and the
/// drift upwinded on the sign of the fitted face velocity V_f; zero flux on the
/// boundary. Returns -div_h F. Throws NumericError on non-finite values.
ScalarField apply_A(const ModelSpec& spec, const SpatialGrid& grid, const DensityField& u);

}  // namespace nfpe
