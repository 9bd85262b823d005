#include <doctest.h>

#include <cmath>
#include <random>

#include "nfpe/errors.hpp"
#include "nfpe/semigroup.hpp"
#include "oracles.hpp"

using namespace nfpe;

namespace {

EvolutionConfig config(double T, double h, int record_every = 1) {
  EvolutionConfig c;
  c.T = T;
  c.h = h;
  c.record_every = record_every;
  return c;
}

}  // namespace

TEST_CASE("step schedule") {
  CHECK(step_schedule(0.0, 0.1).empty());
  CHECK(step_schedule(1.0, 0.1).size() == 10);
  const auto s = step_schedule(0.25, 0.1);
  REQUIRE(s.size() == 3);
  CHECK(s.back() == doctest::Approx(0.05));
}

TEST_CASE("T = 0 keeps u0") {
  const SpatialGrid g(1, 6.0, 60);
  const DensityField u0 = gaussian_density(g, {0.0, 0.0}, 1.0);
  const Trajectory tr = evolve(preset("linear-ou"), g, u0, config(0.0, 0.1));
  REQUIRE(tr.states.size() == 1);
  CHECK(tr.states[0].values == u0.values);
  CHECK(tr.times[0] == 0.0);
}

TEST_CASE("stationary Gibbs state stays put") {
  const SpatialGrid g(1, 6.0, 200);
  const ModelSpec ou = preset("linear-ou");
  const DensityField u0 = normalized(DensityField(g, oracle::gaussian_cells_1d(g, 0.0, 1.0)));
  for (double h : {0.01, 0.5}) {
    const Trajectory tr = evolve(ou, g, u0, config(h, h));
    CHECK(l1_distance(tr.states[1], u0) <= 1e-3);
  }
}

TEST_CASE("linear-ou moments follow the closed form") {
  const SpatialGrid g(1, 8.0, 400);
  const ModelSpec ou = preset("linear-ou");
  const Trajectory tr = evolve(ou, g, gaussian_density(g, {1.0, 0.0}, 0.25), config(1.0, 1e-3, 25));
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    const auto [m, v] = oracle::moments(tr.states[k]);
    const auto [me, ve] = oracle::ou_moments(1.0, 0.25, tr.times[k]);
    CHECK(std::abs(m - me) <= 1e-2);
    CHECK(std::abs(v - ve) <= 2e-2);
  }
}

TEST_CASE("trajectory invariants") {
  const SpatialGrid g(1, 6.0, 150);
  std::mt19937_64 rng(41);
  for (const auto& id : preset_ids()) {
    const Trajectory tr = evolve(preset(id), g, random_mixture_density(g, rng), config(0.5, 0.01, 5));
    CHECK(tr.times.front() == 0.0);
    CHECK(tr.times.back() == 0.5);
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
      if (k) CHECK(tr.times[k] > tr.times[k - 1]);
      CHECK(std::abs(tr.diagnostics[k].mass - 1.0) <= 1e-8);
      CHECK(tr.diagnostics[k].min_value >= -1e-12);
      CHECK(tr.diagnostics[k].dissipation >= 0.0);
      if (k) CHECK(tr.diagnostics[k].energy <= tr.diagnostics[k - 1].energy + 1e-8);
    }
  }
}

TEST_CASE("exp_formula agrees with evolve bitwise") {
  const SpatialGrid g(1, 6.0, 100);
  const DensityField u0 = gaussian_density(g, {1.0, 0.0}, 0.25);
  for (const auto& id : preset_ids()) {
    const ModelSpec spec = preset(id);
    const Trajectory tr = evolve(spec, g, u0, config(0.6, 0.6 / 7, 100));
    CHECK(exp_formula(spec, g, u0, 0.6, 7).values == tr.states.back().values);
    const double lambda = 0.03;
    ResolventConfig rc;
    rc.lambda = lambda;
    CHECK(exp_formula(spec, g, u0, lambda, 1).values == resolvent_step(spec, g, u0, rc).u.values);
    CHECK(exp_formula(spec, g, u0, 0.0, 3).values == u0.values);
  }
  CHECK_THROWS_AS(exp_formula(preset("linear-ou"), g, u0, 1.0, 0), UsageError);
}

TEST_CASE("semigroup property on a shared step grid") {
  const SpatialGrid g(1, 6.0, 120);
  const DensityField u0 = gaussian_density(g, {1.0, 0.0}, 0.25);
  for (const auto& id : preset_ids()) {
    const ModelSpec spec = preset(id);
    const DensityField s = evolve(spec, g, u0, config(0.3, 0.01, 1000)).states.back();
    const DensityField st = evolve(spec, g, s, config(0.2, 0.01, 1000)).states.back();
    const DensityField direct = evolve(spec, g, u0, config(0.5, 0.01, 1000)).states.back();
    CHECK(l1_distance(st, direct) <= 1e-9);
  }
}

TEST_CASE("Crandall-Liggett self-convergence") {
  const SpatialGrid g(1, 6.0, 150);
  const DensityField u0 = gaussian_density(g, {1.0, 0.0}, 0.25);
  for (const auto& id : preset_ids()) {
    const ModelSpec spec = preset(id);
    std::vector<DensityField> u;
    for (int n : {25, 50, 100}) u.push_back(exp_formula(spec, g, u0, 1.0, n));
    const double ratio = l1_distance(u[0], u[1]) / l1_distance(u[1], u[2]);
    CHECK(ratio >= 1.6);
    CHECK(ratio <= 2.4);
  }
}

TEST_CASE("quasi-contraction of identical data has no rate") {
  const SpatialGrid g(1, 6.0, 100);
  const DensityField u0 = gaussian_density(g, {0.0, 0.0}, 1.0);
  const auto q = quasi_contraction_check(preset("linear-ou"), g, u0, u0, 0.5, config(0.5, 0.01));
  CHECK(q.initial_distance == 0.0);
  CHECK(q.final_distance == 0.0);
  CHECK_FALSE(q.rate_defined);
}

TEST_CASE("linear-ou contracts two Gaussians in H^-1") {
  const SpatialGrid g(1, 8.0, 400);
  const auto q = quasi_contraction_check(preset("linear-ou"), g, gaussian_density(g, {1.0, 0.0}, 0.25),
                                         gaussian_density(g, {-1.0, 0.0}, 0.5), 0.5, config(0.5, 0.01));
  CHECK(q.rate_defined);
  CHECK(q.final_distance <= q.initial_distance);
}

TEST_CASE("steady state of linear-ou") {
  const SpatialGrid g(1, 8.0, 400);
  const ModelSpec ou = preset("linear-ou");
  SteadyStateOptions opts;
  opts.tol = 1e-5;
  const auto ss = steady_state(ou, g, opts);
  const DensityField gibbs = gaussian_density(g, {0.0, 0.0}, 1.0);
  CHECK(l1_distance(ss.u, gibbs) <= 1e-3);
  CHECK(l1_norm(apply_A(ou, g, ss.u).values, g.cell_volume()) <= 10 * opts.tol);
  opts.start = gaussian_density(g, {2.0, 0.0}, 0.3);
  const auto other = steady_state(ou, g, opts);
  CHECK(l1_distance(ss.u, other.u) <= 2 * opts.tol);
}

TEST_CASE("steady state failure carries the decay history") {
  const SpatialGrid g(1, 8.0, 100);
  SteadyStateOptions opts;
  opts.tol = 1e-12;
  opts.T_max = 0.5;
  try {
    steady_state(preset("soft-confinement"), g, opts);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.history().size() == 10);
  }
}

TEST_CASE("derivative defect is first order in h") {
  const SpatialGrid g(1, 6.0, 200);
  const ModelSpec sc = preset("soft-confinement");
  const DensityField u0 = gaussian_density(g, {1.0, 0.0}, 0.25);
  auto defect = [&](double h) {
    ResolventConfig rc;
    rc.lambda = h;
    return derivative_defect(sc, g, u0, resolvent_step(sc, g, u0, rc).u, h);
  };
  const double ratio = defect(0.02) / defect(0.01);
  CHECK(ratio >= 1.6);
  CHECK(ratio <= 2.4);
}

TEST_CASE("evolution in two dimensions") {
  const SpatialGrid g(2, 5.0, 32);
  const DensityField u0 = gaussian_density(g, {1.0, -0.5}, 0.5);
  for (const auto& id : preset_ids()) {
    const Trajectory tr = evolve(preset(id), g, u0, config(0.2, 0.02, 2));
    for (const auto& d : tr.diagnostics) {
      CHECK(std::abs(d.mass - 1.0) <= 1e-8);
      CHECK(d.min_value >= -1e-12);
    }
    CHECK(tr.diagnostics.back().energy < tr.diagnostics.front().energy);
  }
}
