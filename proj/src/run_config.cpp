#include "nfpe/run_config.hpp"

#include <algorithm>
#include <set>

#include "nfpe/errors.hpp"
#include "nfpe/io.hpp"

namespace nfpe {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& pointer, const std::string& what) {
  throw UsageError("config " + pointer + ": " + what);
}

void allow_keys(const json& obj, const std::string& pointer, std::set<std::string> keys) {
  if (!obj.is_object()) fail(pointer, "expected an object");
  for (const auto& [k, v] : obj.items())
    if (!keys.count(k)) fail(pointer + "/" + k, "unknown field");
}

double get_number(const json& obj, const std::string& pointer, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) fail(pointer + "/" + key, "expected a number");
  return v.get<double>();
}

int get_int(const json& obj, const std::string& pointer, const char* key, int fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) fail(pointer + "/" + key, "expected an integer");
  return v.get<int>();
}

std::vector<double> get_numbers(const json& obj, const std::string& pointer, const char* key,
                                std::vector<double> fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_array()) fail(pointer + "/" + key, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) fail(pointer + "/" + key + "/" + std::to_string(i), "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

void require(bool ok, const std::string& pointer, const std::string& what) {
  if (!ok) fail(pointer, what);
}

SmoothTermKind kind_from_name(const std::string& s, const std::string& pointer) {
  if (s == "arctan") return SmoothTermKind::arctan;
  if (s == "tanh") return SmoothTermKind::tanh;
  if (s == "gauss") return SmoothTermKind::gauss;
  fail(pointer, "unknown term kind '" + s + "'");
}

const char* kind_name(SmoothTermKind k) {
  switch (k) {
    case SmoothTermKind::arctan: return "arctan";
    case SmoothTermKind::tanh: return "tanh";
    case SmoothTermKind::gauss: return "gauss";
  }
  return "arctan";
}

CoefficientTable table_from_json(const json& j, const std::string& pointer) {
  allow_keys(j, pointer, {"poly", "terms"});
  CoefficientTable t;
  t.poly = get_numbers(j, pointer, "poly", {});
  if (j.contains("terms")) {
    const auto& arr = j.at("terms");
    require(arr.is_array(), pointer + "/terms", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string p = pointer + "/terms/" + std::to_string(i);
      allow_keys(arr[i], p, {"kind", "amplitude", "rate"});
      SmoothTerm term;
      if (arr[i].contains("kind")) {
        require(arr[i].at("kind").is_string(), p + "/kind", "expected a string");
        term.kind = kind_from_name(arr[i].at("kind").get<std::string>(), p + "/kind");
      }
      term.amplitude = get_number(arr[i], p, "amplitude", 0.0);
      term.rate = get_number(arr[i], p, "rate", 1.0);
      t.terms.push_back(term);
    }
  }
  require(!t.poly.empty() || !t.terms.empty(), pointer, "coefficient has no terms");
  return t;
}

json table_to_json(const CoefficientTable& t) {
  json terms = json::array();
  for (const auto& s : t.terms)
    terms.push_back({{"kind", kind_name(s.kind)}, {"amplitude", s.amplitude}, {"rate", s.rate}});
  return {{"poly", t.poly}, {"terms", terms}};
}

}  // namespace

std::string task_name(Task t) {
  switch (t) {
    case Task::validate: return "validate";
    case Task::evolve: return "evolve";
    case Task::steady: return "steady";
    case Task::audit: return "audit";
    case Task::contraction: return "contraction";
    case Task::exp_order: return "exp-order";
    case Task::particles: return "particles";
    case Task::compare: return "compare";
  }
  return "evolve";
}

Task task_from_name(const std::string& name) {
  for (Task t : {Task::validate, Task::evolve, Task::steady, Task::audit, Task::contraction,
                 Task::exp_order, Task::particles, Task::compare})
    if (task_name(t) == name) return t;
  throw UsageError("unknown task '" + name + "'");
}

json model_to_json(const ModelDefinition& def) {
  return {
      {"id", def.id},
      {"beta", table_to_json(def.beta)},
      {"b", table_to_json(def.b)},
      {"potential",
       {{"constant", def.potential.constant},
        {"quadratic", def.potential.quadratic},
        {"soft_abs", def.potential.soft_abs},
        {"m_exponent", def.potential.m_exponent}}},
      {"constants",
       {{"gamma1", def.constants.gamma1},
        {"gamma2", def.constants.gamma2},
        {"b0", def.constants.b0},
        {"gamma3", def.constants.gamma3}}},
      {"drift_from_override", def.drift_from_override},
      {"lambda0", def.lambda0},
      {"omega_empirical", def.omega_empirical},
      {"energy_floor_constant", def.energy_floor_constant},
      {"notes", def.notes},
  };
}

ModelDefinition model_from_json(const json& j, const std::string& pointer) {
  allow_keys(j, pointer,
             {"id", "beta", "b", "potential", "constants", "drift_from_override", "lambda0",
              "omega_empirical", "energy_floor_constant", "notes"});
  ModelDefinition def;
  require(j.contains("id") && j.at("id").is_string(), pointer + "/id", "expected a string id");
  def.id = j.at("id").get<std::string>();
  require(j.contains("beta"), pointer + "/beta", "missing");
  require(j.contains("b"), pointer + "/b", "missing");
  require(j.contains("potential"), pointer + "/potential", "missing");
  def.beta = table_from_json(j.at("beta"), pointer + "/beta");
  def.b = table_from_json(j.at("b"), pointer + "/b");
  const auto& pot = j.at("potential");
  const std::string pp = pointer + "/potential";
  allow_keys(pot, pp, {"constant", "quadratic", "soft_abs", "m_exponent"});
  def.potential.constant = get_number(pot, pp, "constant", 1.0);
  def.potential.quadratic = get_number(pot, pp, "quadratic", 0.0);
  def.potential.soft_abs = get_number(pot, pp, "soft_abs", 0.0);
  def.potential.m_exponent = get_number(pot, pp, "m_exponent", 2.0);
  if (j.contains("constants")) {
    const auto& c = j.at("constants");
    const std::string cp = pointer + "/constants";
    allow_keys(c, cp, {"gamma1", "gamma2", "b0", "gamma3"});
    def.constants.gamma1 = get_number(c, cp, "gamma1", 1.0);
    def.constants.gamma2 = get_number(c, cp, "gamma2", 1.0);
    def.constants.b0 = get_number(c, cp, "b0", 1.0);
    def.constants.gamma3 = get_number(c, cp, "gamma3", 1.0);
  }
  if (j.contains("drift_from_override")) {
    require(j.at("drift_from_override").is_boolean(), pointer + "/drift_from_override",
            "expected a boolean");
    def.drift_from_override = j.at("drift_from_override").get<bool>();
  }
  def.lambda0 = get_number(j, pointer, "lambda0", def.lambda0);
  def.omega_empirical = get_number(j, pointer, "omega_empirical", def.omega_empirical);
  def.energy_floor_constant =
      get_number(j, pointer, "energy_floor_constant", def.energy_floor_constant);
  if (j.contains("notes")) {
    require(j.at("notes").is_string(), pointer + "/notes", "expected a string");
    def.notes = j.at("notes").get<std::string>();
  }
  return def;
}

json validation_to_json(const ValidationReport& rep) {
  json violations = json::array();
  for (const auto& v : rep.violations)
    violations.push_back({{"hypothesis", v.hypothesis},
                          {"sample_point", {v.sample_point.x, v.sample_point.y}},
                          {"observed", v.observed}});
  return {{"passed", rep.passed},
          {"violations", violations},
          {"notes", rep.notes},
          {"max_drift_norm", rep.max_drift_norm}};
}

RunConfig parse_run_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw UsageError("config parse error at line " + std::to_string(line) + ": " + e.what());
  }
  allow_keys(j, "", {"schema_version", "preset", "model", "grid", "evolution", "initial", "resolvent",
                     "tasks", "output_dir", "seed", "steady", "audit", "contraction", "exp_order",
                     "particles"});
  RunConfig cfg;
  cfg.source = j;
  const int version = get_int(j, "", "schema_version", kConfigSchemaVersion);
  require(version == kConfigSchemaVersion, "/schema_version",
          "unsupported schema version " + std::to_string(version));

  // Model.
  require(j.contains("preset") != j.contains("model"), "/preset",
          "exactly one of 'preset' and 'model' is required");
  if (j.contains("preset")) {
    require(j.at("preset").is_string(), "/preset", "expected a string");
    cfg.model_id = j.at("preset").get<std::string>();
    try {
      cfg.model = preset_definition(cfg.model_id);
    } catch (const UsageError& e) {
      fail("/preset", e.what());
    }
  } else {
    cfg.model = model_from_json(j.at("model"));
    cfg.model_id = cfg.model.id;
  }

  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    allow_keys(g, "/grid", {"dim", "L", "N"});
    cfg.dim = get_int(g, "/grid", "dim", cfg.dim);
    cfg.L = get_number(g, "/grid", "L", cfg.L);
    cfg.N = get_int(g, "/grid", "N", cfg.N);
  }
  require(cfg.dim == 1 || cfg.dim == 2, "/grid/dim", "must be 1 or 2");
  require(cfg.L > 0.0, "/grid/L", "must be positive");
  require(cfg.N >= 8, "/grid/N", "must be at least 8");

  if (j.contains("evolution")) {
    const auto& e = j.at("evolution");
    allow_keys(e, "/evolution", {"T", "h", "record_every", "snapshot_every"});
    cfg.evolution.T = get_number(e, "/evolution", "T", cfg.evolution.T);
    cfg.evolution.h = get_number(e, "/evolution", "h", cfg.evolution.h);
    cfg.evolution.record_every = get_int(e, "/evolution", "record_every", cfg.evolution.record_every);
    cfg.snapshot_every = get_int(e, "/evolution", "snapshot_every", cfg.snapshot_every);
  }
  require(cfg.evolution.T >= 0.0, "/evolution/T", "must be >= 0");
  require(cfg.evolution.h > 0.0, "/evolution/h", "must be positive");
  require(cfg.evolution.T == 0.0 || cfg.evolution.h <= cfg.evolution.T, "/evolution/h",
          "must not exceed T");
  require(cfg.evolution.record_every >= 1, "/evolution/record_every", "must be >= 1");
  require(cfg.snapshot_every >= 1, "/evolution/snapshot_every", "must be >= 1");

  if (j.contains("resolvent")) {
    const auto& r = j.at("resolvent");
    allow_keys(r, "/resolvent", {"tol", "max_iter", "damping"});
    cfg.evolution.resolvent.tol = get_number(r, "/resolvent", "tol", cfg.evolution.resolvent.tol);
    cfg.evolution.resolvent.max_iter =
        get_int(r, "/resolvent", "max_iter", cfg.evolution.resolvent.max_iter);
    cfg.evolution.resolvent.damping =
        get_number(r, "/resolvent", "damping", cfg.evolution.resolvent.damping);
    require(cfg.evolution.resolvent.tol > 0.0, "/resolvent/tol", "must be positive");
    require(cfg.evolution.resolvent.max_iter >= 1, "/resolvent/max_iter", "must be >= 1");
    require(cfg.evolution.resolvent.damping > 0.0 && cfg.evolution.resolvent.damping <= 1.0,
            "/resolvent/damping", "must be in (0, 1]");
  }

  if (j.contains("initial")) {
    const auto& in = j.at("initial");
    allow_keys(in, "/initial", {"kind", "mean", "variance"});
    if (in.contains("kind")) {
      require(in.at("kind").is_string(), "/initial/kind", "expected a string");
      cfg.initial.kind = in.at("kind").get<std::string>();
    }
    const auto mean = get_numbers(in, "/initial", "mean", {cfg.initial.mean.x, cfg.initial.mean.y});
    require(!mean.empty() && mean.size() <= 2, "/initial/mean", "expected one or two numbers");
    cfg.initial.mean = {mean[0], mean.size() > 1 ? mean[1] : 0.0};
    cfg.initial.variance = get_number(in, "/initial", "variance", cfg.initial.variance);
  }
  require(cfg.initial.kind == "gaussian" || cfg.initial.kind == "uniform" ||
              cfg.initial.kind == "mixture",
          "/initial/kind", "must be gaussian, uniform or mixture");
  require(cfg.initial.variance > 0.0, "/initial/variance", "must be positive");

  require(j.contains("tasks") && j.at("tasks").is_array() && !j.at("tasks").empty(), "/tasks",
          "expected a nonempty array of task names");
  for (std::size_t i = 0; i < j.at("tasks").size(); ++i) {
    const auto& t = j.at("tasks")[i];
    const std::string p = "/tasks/" + std::to_string(i);
    require(t.is_string(), p, "expected a string");
    try {
      const Task task = task_from_name(t.get<std::string>());
      require(std::find(cfg.tasks.begin(), cfg.tasks.end(), task) == cfg.tasks.end(), p,
              "duplicate task");
      cfg.tasks.push_back(task);
    } catch (const UsageError& e) {
      if (std::string(e.what()).rfind("config ", 0) == 0) throw;
      fail(p, e.what());
    }
  }

  if (j.contains("output_dir")) {
    require(j.at("output_dir").is_string(), "/output_dir", "expected a string");
    cfg.output_dir = j.at("output_dir").get<std::string>();
  }
  if (j.contains("seed")) {
    require(j.at("seed").is_number_unsigned(), "/seed", "expected a nonnegative integer");
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }

  if (j.contains("steady")) {
    const auto& s = j.at("steady");
    allow_keys(s, "/steady", {"tol", "h", "T_max"});
    cfg.steady.tol = get_number(s, "/steady", "tol", cfg.steady.tol);
    cfg.steady.h = get_number(s, "/steady", "h", cfg.steady.h);
    cfg.steady.T_max = get_number(s, "/steady", "T_max", cfg.steady.T_max);
    require(cfg.steady.tol > 0.0 && cfg.steady.h > 0.0 && cfg.steady.T_max > 0.0, "/steady",
            "tol, h and T_max must be positive");
  }
  cfg.steady.resolvent = cfg.evolution.resolvent;

  if (j.contains("audit")) {
    const auto& a = j.at("audit");
    allow_keys(a, "/audit", {"mismatch_tolerance", "floor", "energy_slack_rel"});
    cfg.audit.mismatch_tolerance =
        get_number(a, "/audit", "mismatch_tolerance", cfg.audit.mismatch_tolerance);
    cfg.audit.floor = get_number(a, "/audit", "floor", cfg.audit.floor);
    cfg.audit.energy_slack_rel = get_number(a, "/audit", "energy_slack_rel", cfg.audit.energy_slack_rel);
  }

  if (j.contains("contraction")) {
    const auto& c = j.at("contraction");
    allow_keys(c, "/contraction", {"pairs", "times", "lambdas", "rate_time"});
    cfg.contraction.pairs = get_int(c, "/contraction", "pairs", cfg.contraction.pairs);
    cfg.contraction.times = get_numbers(c, "/contraction", "times", cfg.contraction.times);
    cfg.contraction.lambdas = get_numbers(c, "/contraction", "lambdas", cfg.contraction.lambdas);
    cfg.contraction.rate_time = get_number(c, "/contraction", "rate_time", cfg.contraction.rate_time);
    require(cfg.contraction.pairs >= 1, "/contraction/pairs", "must be >= 1");
    for (double t : cfg.contraction.times) require(t > 0.0, "/contraction/times", "must be positive");
    for (double l : cfg.contraction.lambdas)
      require(l > 0.0, "/contraction/lambdas", "must be positive");
    require(cfg.contraction.rate_time > 0.0, "/contraction/rate_time", "must be positive");
  }

  if (j.contains("exp_order")) {
    const auto& e = j.at("exp_order");
    allow_keys(e, "/exp_order", {"t", "h", "levels"});
    cfg.exp_order.t = get_number(e, "/exp_order", "t", cfg.exp_order.t);
    cfg.exp_order.h = get_number(e, "/exp_order", "h", cfg.exp_order.h);
    cfg.exp_order.levels = get_int(e, "/exp_order", "levels", cfg.exp_order.levels);
    require(cfg.exp_order.t > 0.0 && cfg.exp_order.h > 0.0 && cfg.exp_order.h <= cfg.exp_order.t,
            "/exp_order", "needs 0 < h <= t");
    require(cfg.exp_order.levels >= 2, "/exp_order/levels", "must be >= 2");
  }

  if (j.contains("particles")) {
    const auto& p = j.at("particles");
    allow_keys(p, "/particles", {"count", "dt", "kde_refresh", "bandwidth", "density_floor"});
    const int count = get_int(p, "/particles", "count", static_cast<int>(cfg.particles.count));
    require(count >= 1, "/particles/count", "must be >= 1");
    cfg.particles.count = static_cast<std::size_t>(count);
    cfg.particles.dt = get_number(p, "/particles", "dt", cfg.particles.dt);
    cfg.particles.kde_refresh = get_int(p, "/particles", "kde_refresh", cfg.particles.kde_refresh);
    cfg.particles.kde.bandwidth = get_number(p, "/particles", "bandwidth", 0.0);
    cfg.particles.density_floor =
        get_number(p, "/particles", "density_floor", cfg.particles.density_floor);
    require(cfg.particles.dt > 0.0, "/particles/dt", "must be positive");
    require(cfg.particles.kde_refresh >= 1, "/particles/kde_refresh", "must be >= 1");
    require(cfg.particles.density_floor > 0.0, "/particles/density_floor", "must be positive");
  }
  cfg.particles.seed = cfg.seed;
  cfg.particles.T = cfg.evolution.T;
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(io::read_file(path));
}

}  // namespace nfpe
