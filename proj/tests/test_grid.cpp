#include <doctest.h>

#include <cmath>
#include <random>

#include "nfpe/errors.hpp"
#include "nfpe/grid.hpp"
#include "oracles.hpp"

using namespace nfpe;

namespace {

ModelSpec zero_drift(const std::string& base) {
  ModelSpec spec = preset(base);
  spec.drift_override = [](const Point&) { return Point{0.0, 0.0}; };
  return spec;
}

DensityField random_field(const SpatialGrid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(0.0, 2.0);
  DensityField u(g);
  for (auto& v : u.values) v = d(rng);
  return u;
}

}  // namespace

TEST_CASE("grid geometry") {
  const SpatialGrid g(1, 8.0, 400);
  CHECK(std::abs(g.spacing() * 400 - 16.0) <= 16.0 * std::numeric_limits<double>::epsilon());
  CHECK(g.cell_volume() > 0.0);
  CHECK(g.center(0).x == doctest::Approx(-8.0 + 0.02));
  const SpatialGrid g2(2, 1.0, 8);
  CHECK(g2.size() == 64);
  CHECK(g2.face_count() == 2 * 7 * 8);
  CHECK(g2.cell_volume() == doctest::Approx(0.0625));
  CHECK_THROWS_AS(SpatialGrid(3, 1.0, 8), UsageError);
  CHECK_THROWS_AS(SpatialGrid(1, 0.0, 8), UsageError);
  CHECK_THROWS_AS(SpatialGrid(1, 1.0, 7), UsageError);
}

TEST_CASE("norms on simple fields") {
  const SpatialGrid g(1, 3.0, 60);
  const DensityField u = uniform_density(g);
  CHECK(discrete_mass(u) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(u[0] == doctest::Approx(1.0 / 6.0));
  CHECK(l1_distance(u, u) == 0.0);
  DensityField a(g), b(g);
  for (int i = 0; i < 30; ++i) a[static_cast<std::size_t>(i)] = 1.0 / 3.0;
  for (int i = 30; i < 60; ++i) b[static_cast<std::size_t>(i)] = 1.0 / 3.0;
  CHECK(l1_distance(a, b) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS(l1_distance(u, uniform_density(SpatialGrid(1, 3.0, 64))), UsageError);
}

TEST_CASE("apply_A annihilates constants without drift") {
  for (int dim : {1, 2}) {
    const SpatialGrid g(dim, 2.0, 16);
    for (const auto& id : preset_ids()) {
      const ModelSpec spec = zero_drift(id);
      const ScalarField out = apply_A(spec, g, DensityField(g, 0.7));
      for (double v : out.values) CHECK(std::abs(v) <= 1e-13);
    }
  }
}

TEST_CASE("apply_A is conservative") {
  std::mt19937_64 rng(5);
  for (int dim : {1, 2}) {
    const SpatialGrid g(dim, 4.0, dim == 1 ? 128 : 32);
    for (const auto& id : preset_ids()) {
      const ModelSpec spec = preset(id);
      for (int k = 0; k < 10; ++k) {
        const ScalarField out = apply_A(spec, g, random_field(g, rng));
        CHECK(std::abs(discrete_mass(out)) <= 1e-12 * g.cells_per_axis());
      }
    }
  }
}

TEST_CASE("apply_A residual on the stationary Gaussian shrinks with h") {
  const ModelSpec ou = preset("linear-ou");
  double prev = 0.0;
  for (int n : {100, 200, 400, 800}) {
    const SpatialGrid g(1, 8.0, n);
    const DensityField u = normalized(DensityField(g, oracle::gaussian_cells_1d(g, 0.0, 1.0)));
    const double res = l1_norm(apply_A(ou, g, u).values, g.cell_volume());
    CHECK(res <= g.spacing());
    if (prev > 0.0) CHECK(prev / res >= 1.7);
    prev = res;
  }
}

TEST_CASE("hminus_norm of zero and of an impulse") {
  const SpatialGrid g(1, 1.0, 16);
  CHECK(hminus_norm(ScalarField(g)) == 0.0);
  ScalarField v(g);
  v[5] = 1.0;
  CHECK(std::abs(hminus_norm(v) - oracle::hminus_norm_1d(v.values, g.spacing())) <= 1e-10);
}

TEST_CASE("hminus_norm is a norm bounded by the L2 norm") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (int dim : {1, 2}) {
    const SpatialGrid g(dim, 2.0, dim == 1 ? 64 : 16);
    auto rnd = [&] {
      ScalarField v(g);
      for (auto& x : v.values) x = nd(rng);
      return v;
    };
    for (int k = 0; k < 100; ++k) {
      const ScalarField a = rnd();
      CHECK(hminus_norm(a) <= l2_norm(a) * (1 + 1e-12));
    }
    for (int k = 0; k < 20; ++k) {
      const ScalarField a = rnd(), b = rnd();
      ScalarField s(g), sc(g);
      for (std::size_t i = 0; i < s.size(); ++i) {
        s[i] = a[i] + b[i];
        sc[i] = -2.5 * a[i];
      }
      CHECK(hminus_norm(s) <= hminus_norm(a) + hminus_norm(b) + 1e-10);
      CHECK(std::abs(hminus_norm(sc) - 2.5 * hminus_norm(a)) <= 1e-10);
    }
  }
}

TEST_CASE("Neumann Laplacian is symmetric") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  for (int dim : {1, 2}) {
    const SpatialGrid g(dim, 1.0, 16);
    for (int k = 0; k < 20; ++k) {
      ScalarField a(g), b(g);
      for (auto& x : a.values) x = nd(rng);
      for (auto& x : b.values) x = nd(rng);
      const ScalarField la = neumann_laplacian(a), lb = neumann_laplacian(b);
      double ab = 0.0, ba = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        ab += la[i] * b[i];
        ba += a[i] * lb[i];
      }
      CHECK(std::abs(ab - ba) * g.cell_volume() <= 1e-12 * std::max(1.0, std::abs(ab) * g.cell_volume()));
    }
  }
}

TEST_CASE("Helmholtz solve residual in 2D") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> nd;
  const SpatialGrid g(2, 3.0, 40);
  ScalarField v(g);
  for (auto& x : v.values) x = nd(rng);
  const ScalarField w = solve_helmholtz(v);
  const ScalarField lw = neumann_laplacian(w);
  double err = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) err = std::max(err, std::abs(w[i] - lw[i] - v[i]));
  CHECK(err <= 1e-9);
}

TEST_CASE("gaussian_density matches erf cell averages") {
  const SpatialGrid g(1, 8.0, 400);
  const DensityField u = gaussian_density(g, {1.0, 0.0}, 0.25);
  const auto ref = oracle::gaussian_cells_1d(g, 1.0, 0.25);
  double err = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) err += std::abs(u[i] - ref[i]) * g.spacing();
  CHECK(err <= 1e-12);
  CHECK(discrete_mass(u) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("random densities are unit-mass and nonnegative") {
  std::mt19937_64 rng(1);
  for (int dim : {1, 2}) {
    const SpatialGrid g(dim, 6.0, dim == 1 ? 200 : 40);
    for (int k = 0; k < 10; ++k) {
      const DensityField a = random_mixture_density(g, rng);
      const DensityField b = random_noise_density(g, rng);
      CHECK(discrete_mass(a) == doctest::Approx(1.0).epsilon(1e-13));
      CHECK(discrete_mass(b) == doctest::Approx(1.0).epsilon(1e-13));
      CHECK(min_value(a) >= 0.0);
      CHECK(min_value(b) >= 0.0);
    }
  }
}
