#include <doctest.h>

#include <cmath>
#include <random>

#include "nfpe/energy.hpp"
#include "nfpe/errors.hpp"
#include "nfpe/semigroup.hpp"
#include "oracles.hpp"

using namespace nfpe;

TEST_CASE("eta closed form for beta = id, b = 1") {
  const ModelSpec ou = preset("linear-ou");
  CHECK(eta(ou, 0.0) == 0.0);
  CHECK(eta(ou, 1.0) == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(std::abs(eta(ou, std::exp(1.0))) <= 1e-10);
  CHECK(eta(ou, 2.0) == doctest::Approx(2 * std::log(2.0) - 2).epsilon(1e-10));
  CHECK(eta(ou, 2.0) == doctest::Approx(oracle::eta(ou, 2.0)).epsilon(1e-9));
  CHECK_THROWS_AS(eta(ou, -1e-3), DomainError);
}

TEST_CASE("eta table against quadrature oracle") {
  for (const auto& id : preset_ids()) {
    const ModelSpec spec = preset(id);
    const EtaTable table(spec, 10.0);
    CHECK(table.g(1.0) == 0.0);
    CHECK(table.eta(0.0) == 0.0);
    for (double r : {1e-13, 1e-9, 1e-5, 1e-3, 0.05, 0.3, 0.9, 1.0, 1.7, 4.2, 9.9, 25.0}) {
      const double ref = oracle::eta(spec, r);
      CHECK_MESSAGE(std::abs(table.eta(r) - ref) <= 1e-10 * std::max(1.0, std::abs(ref)),
                    id << " r=" << r);
      CHECK(table.g(r) == doctest::Approx(oracle::g(spec, r)).epsilon(1e-10));
    }
  }
}

TEST_CASE("eta is convex on the table") {
  for (const auto& id : preset_ids()) {
    const EtaTable table(preset(id), 10.0);
    const double h = 1e-3;
    for (double r = h; r < 10.0 - h; r += 0.0137) {
      const double second = table.eta(r + h) - 2 * table.eta(r) + table.eta(r - h);
      CHECK(second >= -1e-10);
    }
  }
}

TEST_CASE("energy of zero, uniform and Gibbs densities") {
  const SpatialGrid g(1, 8.0, 400);
  const ModelSpec ou = preset("linear-ou");
  CHECK(energy(ou, g, DensityField(g, 0.0)).total == 0.0);

  const DensityField uni = uniform_density(g);
  const auto rep = energy(ou, g, uni);
  CHECK(rep.entropy_part == doctest::Approx(16.0 * eta(ou, 1.0 / 16.0)).epsilon(1e-12));
  CHECK(rep.total == doctest::Approx(rep.entropy_part + rep.potential_part));

  const DensityField gibbs = gaussian_density(g, {0.0, 0.0}, 1.0);
  const double ref = oracle::midpoint(
      [](double x) {
        const double u = oracle::gaussian_pdf(x, 0.0, 1.0);
        return u * std::log(u) - u + (1.0 + 0.5 * x * x) * u;
      },
      -8.0, 8.0, 1000000);
  CHECK(std::abs(energy(ou, g, gibbs).total - ref) <= 1e-3);
  CHECK(ref == doctest::Approx(-0.5 * std::log(2 * std::numbers::pi)).epsilon(1e-6));
}

TEST_CASE("dissipation vanishes at equilibrium and for flat states") {
  const SpatialGrid g(1, 8.0, 400);
  const ModelSpec ou = preset("linear-ou");
  CHECK(dissipation(ou, g, gaussian_density(g, {0.0, 0.0}, 1.0)) <= 1e-4);
  ModelSpec flat = ou;
  flat.drift_override = [](const Point&) { return Point{}; };
  CHECK(dissipation(flat, g, uniform_density(g)) == 0.0);
}

TEST_CASE("dissipation converges under grid refinement") {
  const ModelSpec sc = preset("soft-confinement");
  const SpatialGrid coarse(1, 6.0, 120);
  const SpatialGrid fine(1, 6.0, 1200);
  const double a = dissipation(sc, coarse, gaussian_density(coarse, {0.0, 0.0}, 1.0));
  const double b = dissipation(sc, fine, gaussian_density(fine, {0.0, 0.0}, 1.0));
  CHECK(std::abs(a - b) <= 0.02 * b);
}

TEST_CASE("gradient equals apply_A") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> d(0.0, 3.0);
  for (int dim : {1, 2}) {
    const SpatialGrid g(dim, 4.0, dim == 1 ? 80 : 16);
    for (const auto& id : preset_ids()) {
      const ModelSpec spec = preset(id);
      DensityField u(g);
      for (auto& v : u.values) v = d(rng);
      const ScalarField a = gradient(spec, g, u);
      const ScalarField b = apply_A(spec, g, u);
      for (std::size_t i = 0; i < u.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-12);
      CHECK(std::abs(discrete_mass(a)) <= 1e-12 * g.cells_per_axis());
    }
  }
}

TEST_CASE("metric norm of constant potential and of the zero density") {
  const SpatialGrid g(1, 4.0, 80);
  const ModelSpec sc = preset("soft-confinement");
  const DensityField u = gaussian_density(g, {0.0, 0.0}, 1.0);
  CHECK(metric_norm_sq(sc, g, u, ScalarField(g, 3.0)) == 0.0);
  ScalarField y(g);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::sin(g.center(i).x);
  CHECK(metric_norm_sq(sc, g, DensityField(g, 0.0), y) == 0.0);
}

TEST_CASE("metric norm of the entropy potential equals the dissipation") {
  std::mt19937_64 rng(77);
  const SpatialGrid g(1, 8.0, 400);
  for (const auto& id : preset_ids()) {
    const ModelSpec spec = preset(id);
    const EntropyFunctional ef(spec, g, 20.0);
    for (int k = 0; k < 5; ++k) {
      const DensityField u = random_mixture_density(g, rng);
      const double psi = dissipation(spec, g, u);
      const double matched =
          metric_norm_sq_faces(spec, g, u, entropy_potential_face_gradients(spec, g, u));
      CHECK(std::abs(matched - psi) <= 1e-10 * std::max(1.0, psi));
      const double independent = metric_norm_sq(spec, g, u, ef.entropy_potential(u));
      CHECK(std::abs(independent - psi) <= 0.01 * psi);
    }
  }
}

TEST_CASE("audit needs three uniformly spaced records") {
  const SpatialGrid g(1, 6.0, 60);
  const ModelSpec ou = preset("linear-ou");
  EvolutionConfig cfg;
  cfg.T = 0.1;
  cfg.h = 0.1;
  const Trajectory two = evolve(ou, g, gaussian_density(g, {1.0, 0.0}, 0.25), cfg);
  CHECK_THROWS_AS(gradient_flow_audit(two, ou, g), UsageError);
}

TEST_CASE("audit flags stationary rows below the floor") {
  const SpatialGrid g(1, 8.0, 200);
  const ModelSpec ou = preset("linear-ou");
  SteadyStateOptions ss;
  ss.tol = 1e-8;
  const DensityField u = steady_state(ou, g, ss).u;
  EvolutionConfig cfg;
  cfg.T = 0.05;
  cfg.h = 0.01;
  AuditOptions ao;
  ao.floor = 1e-5;
  const AuditReport rep = gradient_flow_audit(evolve(ou, g, u, cfg), ou, g, ao);
  REQUIRE_FALSE(rep.rows.empty());
  for (const auto& row : rep.rows) CHECK(row.below_floor);
  CHECK(rep.identity_passed);
}

TEST_CASE("linear-ou audit at reference resolution") {
  const SpatialGrid g(1, 8.0, 400);
  const ModelSpec ou = preset("linear-ou");
  EvolutionConfig cfg;
  cfg.T = 1.0;
  cfg.h = 1e-3;
  cfg.record_every = 10;
  const AuditReport rep =
      gradient_flow_audit(evolve(ou, g, gaussian_density(g, {1.0, 0.0}, 0.25), cfg), ou, g);
  CHECK(rep.median_mismatch <= 0.05);
  CHECK(rep.energy_inequality_passed);
}
