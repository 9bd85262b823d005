#include "nfpe/grid.hpp"

#include <algorithm>
#include <cmath>

#include "nfpe/errors.hpp"

namespace nfpe {

SpatialGrid::SpatialGrid(int dim, double half_width, int cells_per_axis)
    : dim_(dim), half_width_(half_width), cells_(cells_per_axis) {
  if (dim != 1 && dim != 2) throw UsageError("grid dimension must be 1 or 2");
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw UsageError("grid half width must be positive");
  if (cells_per_axis < 8) throw UsageError("grid needs at least 8 cells per axis");
  spacing_ = 2.0 * half_width / cells_per_axis;
}

std::size_t SpatialGrid::size() const noexcept {
  const auto n = static_cast<std::size_t>(cells_);
  return dim_ == 1 ? n : n * n;
}

double SpatialGrid::cell_volume() const noexcept {
  return dim_ == 1 ? spacing_ : spacing_ * spacing_;
}

Point SpatialGrid::center(std::size_t cell) const noexcept {
  const auto n = static_cast<std::size_t>(cells_);
  if (dim_ == 1) return {coordinate(static_cast<int>(cell)), 0.0};
  return {coordinate(static_cast<int>(cell % n)), coordinate(static_cast<int>(cell / n))};
}

std::size_t SpatialGrid::face_count() const noexcept {
  const auto n = static_cast<std::size_t>(cells_);
  return dim_ == 1 ? n - 1 : 2 * n * (n - 1);
}

std::vector<SpatialGrid::Face> SpatialGrid::faces() const {
  std::vector<Face> out;
  out.reserve(face_count());
  const int n = cells_;
  if (dim_ == 1) {
    for (int i = 0; i + 1 < n; ++i)
      out.push_back({index(i), index(i + 1), 0, {-half_width_ + (i + 1) * spacing_, 0.0}});
    return out;
  }
  for (int j = 0; j < n; ++j)
    for (int i = 0; i + 1 < n; ++i)
      out.push_back({index(i, j), index(i + 1, j), 0,
                     {-half_width_ + (i + 1) * spacing_, coordinate(j)}});
  for (int j = 0; j + 1 < n; ++j)
    for (int i = 0; i < n; ++i)
      out.push_back({index(i, j), index(i, j + 1), 1,
                     {coordinate(i), -half_width_ + (j + 1) * spacing_}});
  return out;
}

void require_same_grid(const SpatialGrid& a, const SpatialGrid& b) {
  if (!(a == b)) throw UsageError("fields live on different grids");
}

double l1_norm(std::span<const double> v, double cell_volume) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s * cell_volume;
}

double l1_distance(const DensityField& a, const DensityField& b) {
  require_same_grid(a.grid, b.grid);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s * a.grid.cell_volume();
}

double l2_norm(const ScalarField& v) {
  double s = 0.0;
  for (double x : v.values) s += x * x;
  return std::sqrt(s * v.grid.cell_volume());
}

double min_value(const DensityField& u) {
  return u.values.empty() ? 0.0 : *std::min_element(u.values.begin(), u.values.end());
}

double gradient_l2_norm(const DensityField& u) {
  const double h = u.grid.spacing();
  double s = 0.0;
  for (const auto& f : u.grid.faces()) {
    const double g = (u[f.hi] - u[f.lo]) / h;
    s += g * g;
  }
  return std::sqrt(s * u.grid.cell_volume());
}

ScalarField difference(const DensityField& a, const DensityField& b) {
  require_same_grid(a.grid, b.grid);
  ScalarField d(a.grid);
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

// ---------------------------------------------------------------------------

namespace {

double erf_cell_mass(double lo, double hi, double mean, double sd) {
  const double s = sd * std::sqrt(2.0);
  return 0.5 * (std::erf((hi - mean) / s) - std::erf((lo - mean) / s));
}

std::vector<double> axis_gaussian(const SpatialGrid& g, double mean, double variance) {
  const double sd = std::sqrt(variance);
  const double h = g.spacing();
  std::vector<double> w(static_cast<std::size_t>(g.cells_per_axis()));
  for (int i = 0; i < g.cells_per_axis(); ++i) {
    const double lo = -g.half_width() + i * h;
    w[static_cast<std::size_t>(i)] = erf_cell_mass(lo, lo + h, mean, sd) / h;
  }
  return w;
}

}  // namespace

DensityField normalized(DensityField u) {
  const double m = discrete_mass(u);
  if (!(m > 0.0) || !std::isfinite(m)) throw DomainError("cannot normalise a field without positive mass");
  for (double& v : u.values) v /= m;
  return u;
}

DensityField gaussian_density(const SpatialGrid& grid, Point mean, double variance) {
  if (!(variance > 0.0)) throw DomainError("gaussian_density: variance must be positive");
  DensityField u(grid);
  const auto wx = axis_gaussian(grid, mean.x, variance);
  if (grid.dim() == 1) {
    u.values = wx;
  } else {
    const auto wy = axis_gaussian(grid, mean.y, variance);
    const int n = grid.cells_per_axis();
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        u[grid.index(i, j)] = wx[static_cast<std::size_t>(i)] * wy[static_cast<std::size_t>(j)];
  }
  return normalized(std::move(u));
}

DensityField uniform_density(const SpatialGrid& grid) {
  const double total = std::pow(2.0 * grid.half_width(), grid.dim());
  return DensityField(grid, 1.0 / total);
}

DensityField random_mixture_density(const SpatialGrid& grid, std::mt19937_64& rng) {
  const int components = 1 + static_cast<int>(unit_uniform(rng()) * 3.0);
  DensityField u(grid);
  for (int c = 0; c < components; ++c) {
    const Point mean{-3.0 + 6.0 * unit_uniform(rng()), -3.0 + 6.0 * unit_uniform(rng())};
    const double sd = 0.3 + 1.2 * unit_uniform(rng());
    const double weight = 0.2 + unit_uniform(rng());
    const auto g = gaussian_density(grid, grid.dim() == 1 ? Point{mean.x, 0.0} : mean, sd * sd);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += weight * g[i];
  }
  return normalized(std::move(u));
}

DensityField random_noise_density(const SpatialGrid& grid, std::mt19937_64& rng) {
  DensityField u(grid);
  for (double& v : u.values) v = unit_uniform(rng());
  return normalized(std::move(u));
}

DensityField translate_cells(const DensityField& u, int cells) {
  const auto& g = u.grid;
  const int n = g.cells_per_axis();
  DensityField out(g);
  const int rows = g.dim() == 1 ? 1 : n;
  for (int j = 0; j < rows; ++j)
    for (int i = 0; i < n; ++i) {
      const int src = i - cells;
      if (src >= 0 && src < n) out[g.index(i, j)] = u[g.index(src, j)];
    }
  return normalized(std::move(out));
}

}  // namespace nfpe
