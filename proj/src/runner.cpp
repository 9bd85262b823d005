#include "nfpe/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>

#include "nfpe/errors.hpp"
#include "nfpe/io.hpp"
#include "nfpe/svg_plot.hpp"

namespace nfpe {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kMassTol = 1e-8;
constexpr double kPositivityTol = 1e-12;
constexpr double kContractionTol = 1e-8;

struct Context {
  const RunConfig& cfg;
  const RunOptions& opts;
  fs::path root;
  ModelSpec spec;
  SpatialGrid grid;
  json artifacts = json::array();
  std::optional<Trajectory> trajectory;

  std::string write(const std::string& task, const std::string& rel, const std::string& bytes) {
    const std::string sum = io::write_file(root / rel, bytes);
    artifacts.push_back({{"task", task}, {"path", rel}, {"checksum", sum}});
    return rel;
  }
};

/// Outcome of one task: summary numbers plus hard-invariant failures.
struct TaskResult {
  json summary = json::object();
  std::vector<std::string> failures;
};

DensityField initial_density(const RunConfig& cfg, const SpatialGrid& grid) {
  if (cfg.initial.kind == "uniform") return uniform_density(grid);
  if (cfg.initial.kind == "mixture") {
    std::mt19937_64 rng(cfg.seed);
    return random_mixture_density(grid, rng);
  }
  return gaussian_density(grid, cfg.initial.mean, cfg.initial.variance);
}

std::pair<double, double> moments_x(const DensityField& u) {
  const auto& g = u.grid;
  const double vol = g.cell_volume();
  double mass = 0.0, m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double x = g.center(i).x;
    mass += u[i] * vol;
    m1 += x * u[i] * vol;
    m2 += x * x * u[i] * vol;
  }
  const double mean = m1 / mass;
  return {mean, m2 / mass - mean * mean};
}

bool is_linear(const ModelDefinition& def) {
  return def.beta.terms.empty() && def.b.terms.empty() && def.beta.poly.size() == 2 &&
         def.beta.poly[0] == 0.0 && def.beta.poly[1] == 1.0 && def.b.poly.size() == 1 &&
         def.b.poly[0] == 1.0;
}

std::string record_name(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "u_%05zu.csv", k);
  return buf;
}

const Trajectory& ensure_trajectory(Context& ctx, const DensityField& u0) {
  if (!ctx.trajectory) ctx.trajectory = evolve(ctx.spec, ctx.grid, u0, ctx.cfg.evolution);
  return *ctx.trajectory;
}

TaskResult task_validate(Context& ctx) {
  TaskResult r;
  const auto rep = validate_hypotheses(ctx.spec, {0.0, 10.0}, 2001,
                                       {ctx.grid.dim(), ctx.grid.half_width(), 201});
  ctx.write("validate", "validate/validation.json", validation_to_json(rep).dump(2) + "\n");
  r.summary["passed"] = rep.passed;
  r.summary["violations"] = rep.violations.size();
  r.summary["max_drift_norm"] = rep.max_drift_norm;
  return r;
}

TaskResult task_evolve(Context& ctx, const DensityField& u0) {
  TaskResult r;
  const Trajectory& tr = ensure_trajectory(ctx, u0);
  ctx.write("evolve", "evolve/diagnostics.csv", io::diagnostics_csv(tr));
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    if (k % static_cast<std::size_t>(ctx.cfg.snapshot_every) != 0 && k + 1 != tr.states.size())
      continue;
    ctx.write("evolve", "evolve/snapshots/" + record_name(k), io::snapshot_csv(tr.states[k]));
  }
  std::vector<double> E, Psi;
  for (const auto& d : tr.diagnostics) {
    E.push_back(d.energy);
    Psi.push_back(d.dissipation);
  }
  ctx.write("evolve", "evolve/energy.svg",
            svg_panels(ctx.spec.id + ": energy and dissipation", tr.times, {{"E", E}, {"Psi", Psi}}));

  double mass_dev = 0.0, min_val = INFINITY, rise = -INFINITY, e_min = INFINITY;
  for (std::size_t k = 0; k < tr.diagnostics.size(); ++k) {
    const auto& d = tr.diagnostics[k];
    mass_dev = std::max(mass_dev, std::abs(d.mass - 1.0));
    min_val = std::min(min_val, d.min_value);
    e_min = std::min(e_min, d.energy);
    if (k) rise = std::max(rise, d.energy - tr.diagnostics[k - 1].energy);
  }
  const double mass0 = tr.diagnostics.front().mass;
  double mass_drift = 0.0;
  for (const auto& d : tr.diagnostics) mass_drift = std::max(mass_drift, std::abs(d.mass - mass0));
  const auto [mean, var] = moments_x(tr.states.back());
  r.summary = {{"final_time", tr.times.back()},
               {"steps", tr.steps},
               {"records", tr.times.size()},
               {"max_mass_deviation", mass_dev},
               {"max_mass_drift", mass_drift},
               {"min_value", min_val},
               {"E_initial", tr.diagnostics.front().energy},
               {"E_final", tr.diagnostics.back().energy},
               {"E_max_rise", tr.times.size() > 1 ? rise : 0.0},
               {"E_lower_bound_held", e_min >= -ctx.spec.energy_floor_constant},
               {"Psi_final", tr.diagnostics.back().dissipation},
               {"mean_x_final", mean},
               {"variance_x_final", var}};
  if (mass_drift > kMassTol) r.failures.push_back("mass drifted by more than 1e-8");
  if (min_val < -kPositivityTol) r.failures.push_back("negative cell below -1e-12");
  return r;
}

TaskResult task_audit(Context& ctx, const DensityField& u0) {
  TaskResult r;
  const Trajectory& tr = ensure_trajectory(ctx, u0);
  const AuditReport rep = gradient_flow_audit(tr, ctx.spec, ctx.grid, ctx.cfg.audit);
  ctx.write("audit", "audit/audit.csv", io::audit_csv(rep));
  std::size_t flagged = 0;
  for (const auto& row : rep.rows) flagged += row.below_floor ? 1 : 0;
  r.summary = {{"median_mismatch", rep.median_mismatch},
               {"identity_passed", rep.identity_passed},
               {"energy_inequality_excess", rep.energy_inequality_excess},
               {"energy_inequality_passed", rep.energy_inequality_passed},
               {"rows", rep.rows.size()},
               {"below_floor_rows", flagged}};
  return r;
}

TaskResult task_steady(Context& ctx) {
  TaskResult r;
  const SteadyStateResult ss = steady_state(ctx.spec, ctx.grid, ctx.cfg.steady);
  ctx.write("steady", "steady/steady_state.csv", io::snapshot_csv(ss.u));
  std::string decay = "step,rate\n";
  for (std::size_t k = 0; k < ss.decay_history.size(); ++k)
    decay += std::to_string(k + 1) + ',' + io::format_double(ss.decay_history[k]) + '\n';
  ctx.write("steady", "steady/decay.csv", decay);
  const ScalarField Au = apply_A(ctx.spec, ctx.grid, ss.u);
  const EnergyReport er = energy(ctx.spec, ctx.grid, ss.u);
  r.summary = {{"time", ss.time},
               {"steps", ss.steps},
               {"apply_A_l1", l1_norm(Au.values, ctx.grid.cell_volume())},
               {"dissipation", er.dissipation},
               {"energy", er.total},
               {"min_value", min_value(ss.u)},
               {"mass", discrete_mass(ss.u)}};
  if (is_linear(ctx.cfg.model)) {
    DensityField gibbs(ctx.grid);
    for (std::size_t i = 0; i < gibbs.size(); ++i)
      gibbs[i] = std::exp(-ctx.spec.potential.phi(ctx.grid.center(i)));
    r.summary["gibbs_l1"] = l1_distance(ss.u, normalized(gibbs));
  }
  if (std::abs(discrete_mass(ss.u) - 1.0) > kMassTol) r.failures.push_back("steady state lost mass");
  if (min_value(ss.u) < -kPositivityTol) r.failures.push_back("steady state has a negative cell");
  return r;
}

TaskResult task_contraction(Context& ctx) {
  TaskResult r;
  const auto& cc = ctx.cfg.contraction;
  std::vector<double> times = cc.times;
  std::sort(times.begin(), times.end());
  std::mt19937_64 rng(ctx.cfg.seed);
  const ResolventSolver solver(ctx.spec, ctx.grid);
  const auto& rcfg = ctx.cfg.evolution.resolvent;
  std::string csv = "pair,kind,param,d0,d1,excess\n";
  double l1_excess = -INFINITY, res_excess = -INFINITY, max_rate = -INFINITY;
  std::size_t undefined = 0;
  for (int p = 0; p < cc.pairs; ++p) {
    const DensityField u0 = random_mixture_density(ctx.grid, rng);
    const DensityField v0 = random_mixture_density(ctx.grid, rng);
    const double d0 = l1_distance(u0, v0);
    DensityField u = u0, v = v0;
    double t_prev = 0.0;
    for (double t : times) {
      const double span = t - t_prev;
      if (span > 0.0) {
        const double h = std::min(ctx.cfg.evolution.h, span);
        u = propagate(solver, u, span, h, rcfg);
        v = propagate(solver, v, span, h, rcfg);
      }
      t_prev = t;
      const double d1 = l1_distance(u, v);
      l1_excess = std::max(l1_excess, d1 - d0);
      csv += std::to_string(p) + ",semigroup," + io::format_double(t) + ',' + io::format_double(d0) +
             ',' + io::format_double(d1) + ',' + io::format_double(d1 - d0) + '\n';
    }
    for (double lam : cc.lambdas) {
      ResolventConfig rc = rcfg;
      rc.lambda = lam;
      const ContractionSample s = contraction_check(ctx.spec, ctx.grid, u0, v0, rc);
      res_excess = std::max(res_excess, s.solution_distance - s.data_distance);
      csv += std::to_string(p) + ",resolvent," + io::format_double(lam) + ',' +
             io::format_double(s.data_distance) + ',' + io::format_double(s.solution_distance) +
             ',' + io::format_double(s.solution_distance - s.data_distance) + '\n';
    }
    const QuasiContraction q =
        quasi_contraction_check(ctx.spec, ctx.grid, u0, v0, cc.rate_time, ctx.cfg.evolution);
    if (q.rate_defined) {
      max_rate = std::max(max_rate, q.rate);
    } else {
      ++undefined;
    }
    csv += std::to_string(p) + ",hminus," + io::format_double(cc.rate_time) + ',' +
           io::format_double(q.initial_distance) + ',' + io::format_double(q.final_distance) + ',' +
           io::format_double(q.rate) + '\n';
  }
  ctx.write("contraction", "contraction/contraction.csv", csv);
  r.summary = {{"pairs", cc.pairs},
               {"max_l1_excess", l1_excess},
               {"max_resolvent_excess", res_excess},
               {"max_hminus_rate", max_rate},
               {"omega_bound", ctx.spec.omega_empirical},
               {"hminus_rate_within_bound", max_rate <= ctx.spec.omega_empirical},
               {"undefined_rates", undefined}};
  if (l1_excess > kContractionTol) r.failures.push_back("L1 semigroup contraction violated");
  if (res_excess > kContractionTol) r.failures.push_back("L1 resolvent contraction violated");
  return r;
}

TaskResult task_exp_order(Context& ctx, const DensityField& u0) {
  TaskResult r;
  const auto& eo = ctx.cfg.exp_order;
  std::vector<DensityField> us;
  std::vector<double> hs;
  for (int k = 0; k <= eo.levels; ++k) {
    const double h = eo.h / std::pow(2.0, k);
    const int n = static_cast<int>(std::lround(eo.t / h));
    hs.push_back(eo.t / n);
    us.push_back(exp_formula(ctx.spec, ctx.grid, u0, eo.t, n, ctx.cfg.evolution.resolvent));
  }
  std::string csv = "h,diff,ratio\n";
  std::vector<double> diffs;
  for (std::size_t k = 0; k + 1 < us.size(); ++k) diffs.push_back(l1_distance(us[k], us[k + 1]));
  double worst_ratio_gap = 0.0;
  for (std::size_t k = 0; k < diffs.size(); ++k) {
    const double ratio = k + 1 < diffs.size() ? diffs[k] / diffs[k + 1] : NAN;
    csv += io::format_double(hs[k]) + ',' + io::format_double(diffs[k]) + ',' +
           io::format_double(ratio) + '\n';
    r.summary["diff_" + std::to_string(k)] = diffs[k];
    if (k + 1 < diffs.size()) {
      r.summary["ratio_" + std::to_string(k)] = ratio;
      worst_ratio_gap = std::max(worst_ratio_gap, std::abs(ratio - 2.0));
    }
  }
  ctx.write("exp-order", "exp_order/exp_order.csv", csv);
  ctx.write("exp-order", "exp_order/u_finest.csv", io::snapshot_csv(us.back()));
  r.summary["t"] = eo.t;
  r.summary["first_order"] = worst_ratio_gap <= 0.4;
  return r;
}

TaskResult task_particles(Context& ctx, const DensityField& u0) {
  TaskResult r;
  ParticleConfig pc = ctx.cfg.particles;
  pc.threads = ctx.opts.sequential ? 1 : 0;
  const ParticleRun run = simulate_mckean_vlasov(ctx.spec, ctx.grid, u0, pc);
  ctx.write("particles", "particles/ensemble.csv", io::ensemble_csv(run.ensemble));
  ctx.write("particles", "particles/kde.csv", io::snapshot_csv(run.density));
  double mean = 0.0, var = 0.0;
  const auto n = static_cast<double>(run.ensemble.size());
  for (const auto& p : run.ensemble.positions) mean += p.x;
  mean /= n;
  for (const auto& p : run.ensemble.positions) var += (p.x - mean) * (p.x - mean);
  var /= n;
  r.summary = {{"count", run.ensemble.size()},
               {"steps", run.steps},
               {"T", run.ensemble.t},
               {"mean_x", mean},
               {"variance_x", var},
               {"sigma_sq_min", run.sigma_sq_min},
               {"sigma_sq_max", run.sigma_sq_max}};
  return r;
}

TaskResult task_compare(Context& ctx, const DensityField& u0) {
  TaskResult r;
  ParticleConfig pc = ctx.cfg.particles;
  pc.threads = ctx.opts.sequential ? 1 : 0;
  const CrossValidation cv = cross_validate(ctx.spec, ctx.grid, u0, ctx.cfg.evolution, pc);
  const std::string pde = ctx.write("compare", "compare/pde.csv", io::snapshot_csv(cv.pde));
  const std::string kde = ctx.write("compare", "compare/kde.csv", io::snapshot_csv(cv.particles));
  const json report = {{"pde_density", pde},
                       {"particle_density", kde},
                       {"l1_distance", cv.distance},
                       {"T", ctx.cfg.evolution.T},
                       {"particles", pc.count},
                       {"seed", pc.seed}};
  ctx.write("compare", "compare/comparison.json", report.dump(2) + "\n");
  r.summary = {{"l1_distance", cv.distance}, {"T", ctx.cfg.evolution.T}};
  return r;
}

json manifest_header(const Context& ctx) {
  json m;
  m["schema_version"] = kManifestSchemaVersion;
  m["tool"] = "nfpe";
  m["config"] = ctx.cfg.source;
  m["model"] = model_to_json(ctx.cfg.model);
  m["energy_lower_bound"] = -ctx.spec.energy_floor_constant;
  m["grid"] = {{"dim", ctx.grid.dim()}, {"L", ctx.grid.half_width()}, {"N", ctx.grid.cells_per_axis()}};
  return m;
}

RunOutcome finish(Context& ctx, json manifest, bool ok) {
  manifest["artifacts"] = ctx.artifacts;
  manifest["status"] = ok ? "ok" : "failed";
  RunOutcome out;
  out.exit_code = ok ? 0 : 1;
  out.manifest_path = ctx.root / "manifest.json";
  io::write_file(out.manifest_path, manifest.dump(2) + "\n");
  out.manifest = std::move(manifest);
  return out;
}

}  // namespace

fs::path resolve_output_dir(const RunConfig& cfg, const RunOptions& opts) {
  if (cfg.output_dir.is_absolute() || !opts.output_root) return cfg.output_dir;
  return *opts.output_root / cfg.output_dir;
}

RunOutcome run(const RunConfig& cfg, const RunOptions& opts) {
  Context ctx{cfg, opts, resolve_output_dir(cfg, opts), make_model(cfg.model),
              SpatialGrid(cfg.dim, cfg.L, cfg.N), json::array(), std::nullopt};
  json manifest = manifest_header(ctx);
  json tasks = json::object();
  bool ok = true;
  const DensityField u0 = initial_density(cfg, ctx.grid);

  for (Task t : cfg.tasks) {
    const std::string name = task_name(t);
    json entry;
    try {
      TaskResult r;
      switch (t) {
        case Task::validate: r = task_validate(ctx); break;
        case Task::evolve: r = task_evolve(ctx, u0); break;
        case Task::steady: r = task_steady(ctx); break;
        case Task::audit: r = task_audit(ctx, u0); break;
        case Task::contraction: r = task_contraction(ctx); break;
        case Task::exp_order: r = task_exp_order(ctx, u0); break;
        case Task::particles: r = task_particles(ctx, u0); break;
        case Task::compare: r = task_compare(ctx, u0); break;
      }
      entry["summary"] = r.summary;
      entry["hard_invariant_failures"] = r.failures;
      entry["status"] = r.failures.empty() ? "ok" : "failed";
      if (!r.failures.empty()) ok = false;
    } catch (const std::exception& e) {
      entry["status"] = "error";
      entry["error"] = e.what();
      entry["summary"] = json::object();
      ok = false;
    }
    tasks[name] = entry;
  }
  manifest["tasks"] = tasks;
  return finish(ctx, std::move(manifest), ok);
}

RunOutcome validate_only(const RunConfig& cfg, const RunOptions& opts) {
  Context ctx{cfg, opts, resolve_output_dir(cfg, opts), make_model(cfg.model),
              SpatialGrid(cfg.dim, cfg.L, cfg.N), json::array(), std::nullopt};
  json manifest = manifest_header(ctx);
  const auto rep = validate_hypotheses(ctx.spec, {0.0, 10.0}, 2001,
                                       {ctx.grid.dim(), ctx.grid.half_width(), 201});
  manifest["validation"] = validation_to_json(rep);
  manifest["tasks"] = json::object();
  // Hypothesis violations are reported, not fatal.
  return finish(ctx, std::move(manifest), true);
}

json diff_runs(const fs::path& manifest_a, const fs::path& manifest_b) {
  auto load = [](const fs::path& p) {
    json m;
    try {
      m = json::parse(io::read_file(p));
    } catch (const json::parse_error& e) {
      throw UsageError("cannot parse manifest " + p.string() + ": " + e.what());
    }
    if (!m.contains("schema_version") || !m.contains("tasks"))
      throw UsageError(p.string() + " is not a run manifest");
    for (const auto& a : m.value("artifacts", json::array())) {
      const fs::path f = p.parent_path() / a.at("path").get<std::string>();
      if (!fs::exists(f)) throw UsageError("missing artifact " + f.string());
    }
    return m;
  };
  const json a = load(manifest_a);
  const json b = load(manifest_b);
  for (const auto& [name, _] : a.at("tasks").items())
    if (!b.at("tasks").contains(name))
      throw UsageError("task '" + name + "' missing from " + manifest_b.string());
  for (const auto& [name, _] : b.at("tasks").items())
    if (!a.at("tasks").contains(name))
      throw UsageError("task '" + name + "' missing from " + manifest_a.string());

  json report;
  report["schema_version"] = kManifestSchemaVersion;
  report["a"] = manifest_a.string();
  report["b"] = manifest_b.string();
  json tasks = json::object();
  bool all_zero = true;
  for (const auto& [name, ta] : a.at("tasks").items()) {
    const json& sa = ta.value("summary", json::object());
    const json& sb = b.at("tasks").at(name).value("summary", json::object());
    json rows = json::object();
    for (const auto& [key, va] : sa.items()) {
      if (!va.is_number() || !sb.contains(key) || !sb.at(key).is_number()) continue;
      const double x = va.get<double>();
      const double y = sb.at(key).get<double>();
      json row = {{"a", x}, {"b", y}, {"delta", y - x}};
      if (y != 0.0) {
        const double ratio = x / y;
        row["ratio"] = ratio;
        row["first_order"] = ratio >= 1.6 && ratio <= 2.4;
      } else {
        row["ratio"] = nullptr;
        row["first_order"] = false;
      }
      if (y - x != 0.0) all_zero = false;
      rows[key] = row;
    }
    tasks[name] = rows;
  }
  report["tasks"] = tasks;
  report["all_zero"] = all_zero;
  return report;
}

std::string format_diff(const json& report) {
  std::string out = "task key a b delta ratio first_order\n";
  for (const auto& [name, rows] : report.at("tasks").items()) {
    for (const auto& [key, row] : rows.items()) {
      out += name + ' ' + key + ' ' + io::format_double(row.at("a").get<double>()) + ' ' +
             io::format_double(row.at("b").get<double>()) + ' ' +
             io::format_double(row.at("delta").get<double>()) + ' ' +
             (row.at("ratio").is_null() ? std::string("-")
                                         : io::format_double(row.at("ratio").get<double>())) +
             ' ' + (row.at("first_order").get<bool>() ? "yes" : "no") + '\n';
    }
  }
  return out;
}

}  // namespace nfpe
