// Acceptance suite: one pass/fail line per criterion, exit status 1 if any fails.
//
// Usage: nfpe_acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "nfpe/energy.hpp"
#include "nfpe/particles.hpp"
#include "nfpe/semigroup.hpp"
#include "oracles.hpp"

using namespace nfpe;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

EvolutionConfig evolution(double T, double h, int record_every) {
  EvolutionConfig c;
  c.T = T;
  c.h = h;
  c.record_every = record_every;
  return c;
}

const std::vector<std::string>& presets() {
  static const std::vector<std::string> ids = preset_ids();
  return ids;
}

// Shared corpus: per preset, a Gaussian start, the uniform density and five random
// mixtures, evolved to t = 1 with h = 0.01 on N = 200, L = 8, plus a small 2D run.
struct CorpusRun {
  std::string preset;
  Trajectory traj;
};

const std::vector<CorpusRun>& corpus() {
  static const std::vector<CorpusRun> runs = [] {
    std::vector<CorpusRun> out;
    const SpatialGrid g(1, 8.0, 200);
    for (const auto& id : presets()) {
      const ModelSpec spec = preset(id);
      std::mt19937_64 rng(2024);
      std::vector<DensityField> starts{gaussian_density(g, {1.0, 0.0}, 0.25), uniform_density(g)};
      for (int k = 0; k < 5; ++k) starts.push_back(random_mixture_density(g, rng));
      for (const auto& u0 : starts) out.push_back({id, evolve(spec, g, u0, evolution(1.0, 0.01, 5))});
      const SpatialGrid g2(2, 5.0, 32);
      out.push_back({id, evolve(spec, g2, gaussian_density(g2, {1.0, -0.5}, 0.5), evolution(0.5, 0.02, 5))});
    }
    return out;
  }();
  return runs;
}

// Reference-resolution runs: N(1, 0.25), N = 400, L = 8, h = 1e-3, records every 1e-2.
const Trajectory& reference(const std::string& id, bool refined = false) {
  static std::map<std::pair<std::string, bool>, Trajectory> cache;
  const auto key = std::make_pair(id, refined);
  auto it = cache.find(key);
  if (it == cache.end()) {
    const int N = refined ? 800 : 400;
    const double h = refined ? 5e-4 : 1e-3;
    const SpatialGrid g(1, 8.0, N);
    it = cache.emplace(key, evolve(preset(id), g, gaussian_density(g, {1.0, 0.0}, 0.25),
                                   evolution(1.0, h, refined ? 20 : 10)))
             .first;
  }
  return it->second;
}

Outcome criterion1() {
  double worst = 0.0;
  std::size_t records = 0;
  for (const auto& run : corpus())
    for (const auto& d : run.traj.diagnostics) {
      worst = std::max(worst, std::abs(d.mass - 1.0));
      ++records;
    }
  for (const auto& id : presets())
    for (const auto& d : reference(id).diagnostics) worst = std::max(worst, std::abs(d.mass - 1.0));
  return {worst <= 1e-8, fmt("max |mass - 1| = %.3e", worst) + " over " + std::to_string(records) + "+ records"};
}

Outcome criterion2() {
  double lowest = INFINITY;
  for (const auto& run : corpus())
    for (const auto& d : run.traj.diagnostics) lowest = std::min(lowest, d.min_value);
  for (const auto& id : presets())
    for (const auto& d : reference(id).diagnostics) lowest = std::min(lowest, d.min_value);
  return {lowest >= -1e-12, fmt("min cell value = %.3e", lowest)};
}

std::vector<std::pair<DensityField, DensityField>> random_pairs(const SpatialGrid& g, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::pair<DensityField, DensityField>> out;
  for (int k = 0; k < n; ++k) {
    DensityField a = random_mixture_density(g, rng);
    DensityField b = random_mixture_density(g, rng);
    out.emplace_back(std::move(a), std::move(b));
  }
  return out;
}

Outcome criterion3() {
  const SpatialGrid g(1, 6.0, 200);
  double worst = -INFINITY;
  for (const auto& id : presets()) {
    const ModelSpec spec = preset(id);
    const ResolventSolver solver(spec, g);
    for (const auto& [u0, v0] : random_pairs(g, 50, 300)) {
      const double d0 = l1_distance(u0, v0);
      DensityField u = u0, v = v0;
      double t_prev = 0.0;
      for (double t : {0.1, 0.5, 1.0}) {
        u = propagate(solver, u, t - t_prev, 0.01, {});
        v = propagate(solver, v, t - t_prev, 0.01, {});
        t_prev = t;
        worst = std::max(worst, l1_distance(u, v) - d0);
      }
    }
  }
  return {worst <= 1e-8, fmt("max (|S(t)u0-S(t)v0|_1 - |u0-v0|_1) = %.3e", worst) + " over 2x50 pairs, t in {0.1,0.5,1}"};
}

Outcome criterion4() {
  const SpatialGrid g(1, 6.0, 200);
  double worst = -INFINITY;
  for (const auto& id : presets()) {
    const ModelSpec spec = preset(id);
    for (const auto& [u0, v0] : random_pairs(g, 50, 400)) {
      for (double lambda : {1e-3, 1e-2, 5e-2}) {
        ResolventConfig rc;
        rc.lambda = lambda;
        const auto s = contraction_check(spec, g, u0, v0, rc);
        worst = std::max(worst, s.solution_distance - s.data_distance);
      }
    }
  }
  return {worst <= 1e-8, fmt("max (|u1-u2|_1 - |f1-f2|_1) = %.3e", worst) + " over 2x50 pairs x 3 lambdas"};
}

Outcome criterion5() {
  const SpatialGrid g(1, 8.0, 200);
  const DensityField u0 = gaussian_density(g, {1.0, 0.0}, 0.25);
  bool ok = true;
  std::string detail;
  for (const auto& id : presets()) {
    const ModelSpec spec = preset(id);
    std::vector<DensityField> u;
    for (int n : {25, 50, 100, 200}) u.push_back(exp_formula(spec, g, u0, 1.0, n));
    const double d0 = l1_distance(u[0], u[1]), d1 = l1_distance(u[1], u[2]), d2 = l1_distance(u[2], u[3]);
    const double r0 = d0 / d1, r1 = d1 / d2;
    ok = ok && r0 >= 1.6 && r0 <= 2.4 && r1 >= 1.6 && r1 <= 2.4;
    detail += id + fmt(" ratios %.3f", r0) + fmt(", %.3f; ", r1);
  }
  return {ok, detail};
}

Outcome criterion6() {
  const Trajectory& tr = reference("linear-ou");
  const SpatialGrid& g = tr.states.front().grid;
  double mean_err = 0.0, var_err = 0.0, l1 = 0.0;
  for (double t : {0.25, 0.5, 1.0}) {
    const auto k = static_cast<std::size_t>(std::lround(t / 0.01));
    const auto [m, v] = oracle::moments(tr.states[k]);
    const auto [me, ve] = oracle::ou_moments(1.0, 0.25, t);
    mean_err = std::max(mean_err, std::abs(m - me));
    var_err = std::max(var_err, std::abs(v - ve));
    if (t == 1.0) {
      const DensityField exact(g, oracle::gaussian_cells_1d(g, me, ve));
      l1 = l1_distance(tr.states[k], exact);
    }
  }
  return {mean_err <= 1e-2 && var_err <= 2e-2 && l1 <= 5e-3,
          fmt("max mean err %.2e", mean_err) + fmt(", max var err %.2e", var_err) + fmt(", L1 at t=1 %.2e", l1)};
}

Outcome criterion7() {
  const SpatialGrid g(1, 8.0, 400);
  const ModelSpec ou = preset("linear-ou");
  SteadyStateOptions opts;
  opts.tol = 1e-6;
  const DensityField uinf = steady_state(ou, g, opts).u;
  const DensityField gibbs(g, oracle::gaussian_cells_1d(g, 0.0, 1.0));
  const double l1 = l1_distance(uinf, gibbs);
  const double psi = dissipation(ou, g, uinf);

  // Monotone L1 approach on the 1D corpus.
  std::map<std::string, DensityField> limits;
  const SpatialGrid gc(1, 8.0, 200);
  SteadyStateOptions tight = opts;
  tight.tol = 1e-9;
  for (const auto& id : presets()) limits.emplace(id, steady_state(preset(id), gc, tight).u);
  double worst_rise = -INFINITY;
  for (const auto& run : corpus()) {
    if (run.traj.states.front().grid.dim() != 1) continue;
    const DensityField& lim = limits.at(run.preset);
    for (std::size_t k = 1; k < run.traj.states.size(); ++k)
      worst_rise = std::max(worst_rise, l1_distance(run.traj.states[k], lim) -
                                            l1_distance(run.traj.states[k - 1], lim));
  }
  return {l1 <= 1e-3 && psi <= 1e-4 && worst_rise <= 1e-8,
          fmt("L1 to N(0,1) %.2e", l1) + fmt(", Psi %.2e", psi) + fmt(", max rise of |u(t)-u_inf|_1 %.2e", worst_rise)};
}

Outcome criterion8() {
  double worst = -INFINITY;
  auto check = [&](const Trajectory& tr) {
    const double e0 = tr.diagnostics.front().energy;
    double acc = 0.0;
    for (std::size_t j = 1; j < tr.times.size(); ++j) {
      acc += tr.diagnostics[j].dissipation * (tr.times[j] - tr.times[j - 1]);
      worst = std::max(worst, tr.diagnostics[j].energy + acc - e0 - 1e-3 * (1 + std::abs(e0)));
    }
  };
  for (const auto& id : presets()) check(reference(id));
  for (const auto& run : corpus()) check(run.traj);
  return {worst <= 0.0, fmt("max excess over E(u0) + slack = %.3e", worst)};
}

Outcome criterion9() {
  bool ok = true;
  std::string detail;
  for (const auto& id : presets()) {
    const ModelSpec spec = preset(id);
    const Trajectory& coarse = reference(id);
    const Trajectory& fine = reference(id, true);
    const double m0 = gradient_flow_audit(coarse, spec, coarse.states.front().grid).median_mismatch;
    const double m1 = gradient_flow_audit(fine, spec, fine.states.front().grid).median_mismatch;
    ok = ok && m0 <= 0.05 && m1 / m0 <= 0.7;
    detail += id + fmt(" median %.2e", m0) + fmt(" -> %.2e", m1) + fmt(" (ratio %.2f); ", m1 / m0);
  }
  return {ok, detail};
}

Outcome criterion10() {
  const SpatialGrid g(1, 8.0, 400);
  double matched = 0.0, independent = 0.0;
  for (const auto& id : presets()) {
    const ModelSpec spec = preset(id);
    const EntropyFunctional ef(spec, g, 20.0);
    std::mt19937_64 rng(1010);
    for (int k = 0; k < 20; ++k) {
      const DensityField u = random_mixture_density(g, rng);
      const double psi = dissipation(spec, g, u);
      const double a = metric_norm_sq_faces(spec, g, u, entropy_potential_face_gradients(spec, g, u));
      const double b = metric_norm_sq(spec, g, u, ef.entropy_potential(u));
      matched = std::max(matched, std::abs(a - psi) / std::max(1.0, psi));
      independent = std::max(independent, std::abs(b - psi) / psi);
    }
  }
  return {matched <= 1e-10 && independent <= 0.01,
          fmt("matched stencil rel diff %.2e", matched) + fmt(", independent rel diff %.2e", independent)};
}

Outcome criterion11() {
  const SpatialGrid g(1, 8.0, 200);
  bool ok = true;
  std::string detail;
  for (const auto& id : presets()) {
    const ModelSpec spec = preset(id);
    double worst = -INFINITY;
    for (const auto& [u0, v0] : random_pairs(g, 20, 1100)) {
      const auto q = quasi_contraction_check(spec, g, u0, v0, 0.5, evolution(0.5, 0.01, 1));
      if (q.rate_defined) worst = std::max(worst, q.rate);
    }
    ok = ok && worst <= spec.omega_empirical;
    detail += id + fmt(" max rate %.3f", worst) + fmt(" (bound %.1f); ", spec.omega_empirical);
  }
  return {ok, detail};
}

Outcome criterion12() {
  const SpatialGrid g(1, 8.0, 400);
  const DensityField u0 = gaussian_density(g, {1.0, 0.0}, 0.25);
  bool ok = true;
  std::string detail;
  for (const auto& id : presets()) {
    const ModelSpec spec = preset(id);
    ParticleConfig pc;
    pc.count = 100000;
    pc.dt = 1e-3;
    pc.seed = 12;
    EvolutionConfig pde = evolution(0.0, 1e-3, 1);
    const double base = cross_validate(spec, g, u0, pde, pc).distance;
    pde.T = 1.0;
    const double d = cross_validate(spec, g, u0, pde, pc).distance;
    ok = ok && base <= 0.02 && d <= 0.05;
    detail += id + fmt(" T=0 %.4f", base) + fmt(", T=1 %.4f; ", d);
  }
  return {ok, detail};
}

Outcome criterion13() {
  std::mt19937_64 rng(1313);
  std::uniform_real_distribution<double> d(0.0, 3.0);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const int dim = k % 4 == 3 ? 2 : 1;
    const SpatialGrid g(dim, 6.0, dim == 1 ? 200 : 24);
    const ModelSpec spec = preset(presets()[static_cast<std::size_t>(k) % presets().size()]);
    DensityField u(g);
    for (auto& v : u.values) v = d(rng);
    const ScalarField a = gradient(spec, g, u);
    const ScalarField b = apply_A(spec, g, u);
    for (std::size_t i = 0; i < u.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  }
  return {worst <= 1e-12, fmt("max cellwise |gradient - apply_A| = %.3e", worst) + " over 100 fields"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"mass conservation", criterion1},
      {"positivity", criterion2},
      {"L1 semigroup contraction", criterion3},
      {"L1 resolvent contraction", criterion4},
      {"Crandall-Liggett first order", criterion5},
      {"Ornstein-Uhlenbeck analytic oracle", criterion6},
      {"steady state", criterion7},
      {"energy inequality", criterion8},
      {"gradient-flow identity", criterion9},
      {"metric/dissipation factorization", criterion10},
      {"H^-1 quasi-contraction", criterion11},
      {"particle cross-validation", criterion12},
      {"gradient equals apply_A", criterion13},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k + 1);
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %2d %s  %-36s %s [%.1fs]\n", id, o.passed ? "PASS" : "FAIL",
                criteria[k].first.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.passed) ++failures;
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
