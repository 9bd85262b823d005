#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "nfpe/energy.hpp"
#include "nfpe/model.hpp"
#include "nfpe/particles.hpp"
#include "nfpe/semigroup.hpp"

namespace nfpe {

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr int kManifestSchemaVersion = 1;

enum class Task { validate, evolve, steady, audit, contraction, exp_order, particles, compare };

std::string task_name(Task t);
/// Throws UsageError for unknown names.
Task task_from_name(const std::string& name);

struct InitialCondition {
  /// "gaussian", "uniform" or "mixture" (random mixture drawn from `seed`).
  std::string kind = "gaussian";
  Point mean{1.0, 0.0};
  double variance = 0.25;
};

struct ContractionOptions {
  int pairs = 10;
  std::vector<double> times{0.1, 0.5, 1.0};
  std::vector<double> lambdas{1e-3, 1e-2, 5e-2};
  /// H^-1 rate horizon.
  double rate_time = 0.5;
};

struct ExpOrderOptions {
  double t = 1.0;
  /// Coarsest step; the sequence is h, h/2, ..., h/2^levels.
  double h = 0.04;
  int levels = 3;
};

struct RunConfig {
  /// Preset id, or the id of the custom model.
  std::string model_id;
  ModelDefinition model;
  int dim = 1;
  double L = 8.0;
  int N = 400;
  EvolutionConfig evolution{};
  /// Write a density snapshot every k-th record (the final record always).
  int snapshot_every = 10;
  InitialCondition initial{};
  std::vector<Task> tasks;
  std::filesystem::path output_dir = "nfpe-out";
  std::uint64_t seed = 1;
  SteadyStateOptions steady{};
  AuditOptions audit{};
  ContractionOptions contraction{};
  ExpOrderOptions exp_order{};
  ParticleConfig particles{};
  /// Config as parsed, echoed into the manifest.
  nlohmann::json source;
};

/// Parses a config document. Throws UsageError naming the line (syntax errors)
/// or the JSON pointer of the offending field.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

/// JSON form of a model definition (the `model` block of a config).
nlohmann::json model_to_json(const ModelDefinition& def);
ModelDefinition model_from_json(const nlohmann::json& j, const std::string& pointer = "/model");

nlohmann::json validation_to_json(const ValidationReport& rep);

}  // namespace nfpe
