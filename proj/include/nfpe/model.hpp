#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace nfpe {

/// A point (or vector) of the plane. One-dimensional problems leave y at zero.
struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }

/// Scalar coefficient together with its analytic derivative.
struct CoefficientFn {
  std::function<double(double)> eval;
  std::function<double(double)> deriv;

  double operator()(double r) const { return eval(r); }
};

using ScalarPointFn = std::function<double(const Point&)>;
using VectorPointFn = std::function<Point(const Point&)>;

/// Confining potential Phi with D = -grad Phi.
struct Potential {
  ScalarPointFn phi;
  VectorPointFn grad_phi;
  /// div D = -Laplace Phi in the given dimension.
  std::function<double(const Point&, int dim)> div_drift;
  /// Integrability exponent m (Phi^{-m} integrable).
  double m_exponent = 2.0;
};

// ---------------------------------------------------------------------------
// Table-defined coefficients (the form accepted by JSON configs).

enum class SmoothTermKind { arctan, tanh, gauss };

/// amplitude * kind(rate * r); gauss means amplitude * exp(-rate * r^2).
struct SmoothTerm {
  SmoothTermKind kind = SmoothTermKind::arctan;
  double amplitude = 0.0;
  double rate = 1.0;
};

/// sum_k poly[k] r^k + sum of bounded smooth terms.
struct CoefficientTable {
  std::vector<double> poly;
  std::vector<SmoothTerm> terms;
};

/// Phi(x) = constant + quadratic |x|^2 + soft_abs sqrt(1 + |x|^2).
struct PotentialTable {
  double constant = 1.0;
  double quadratic = 0.0;
  double soft_abs = 0.0;
  double m_exponent = 2.0;
};

struct HypothesisConstants {
  double gamma1 = 1.0;
  double gamma2 = 1.0;
  double b0 = 1.0;
  double gamma3 = 1.0;
};

/// Serializable description of a model; presets and custom configs both reduce to this.
struct ModelDefinition {
  std::string id;
  CoefficientTable beta;
  CoefficientTable b;
  PotentialTable potential;
  HypothesisConstants constants;
  /// Supply D(x) = -grad Phi(x) through the drift override instead of the potential.
  bool drift_from_override = false;
  /// Largest resolvent parameter for which Newton convergence was checked.
  double lambda0 = 0.2;
  /// Empirical H^-1 quasi-contraction rate bound.
  double omega_empirical = 5.0;
  /// Lower bound E(u) >= -energy_floor_constant monitored on the corpus.
  double energy_floor_constant = 10.0;
  std::string notes;
};

CoefficientFn make_coefficient(const CoefficientTable& table);
Potential make_potential(const PotentialTable& table);

// ---------------------------------------------------------------------------

/// Coefficient triple (beta, b, Phi) with the hypothesis constants.
struct ModelSpec {
  std::string id;
  CoefficientFn beta;
  CoefficientFn b;
  Potential potential;
  HypothesisConstants constants;
  /// Replaces D = -grad Phi when set (tests, and the OU preset).
  std::optional<VectorPointFn> drift_override;
  double lambda0 = 0.2;
  double omega_empirical = 5.0;
  double energy_floor_constant = 10.0;
  std::string notes;
  /// Populated when built from a table definition (used for manifests).
  std::optional<ModelDefinition> definition;

  Point drift(const Point& x) const {
    if (drift_override) return (*drift_override)(x);
    const Point g = potential.grad_phi(x);
    return {-g.x, -g.y};
  }
  double mobility(double r) const { return b(r) * r; }
  double mobility_deriv(double r) const { return b.deriv(r) * r + b(r); }
};

ModelSpec make_model(const ModelDefinition& def);

/// b*(r) = b(r) r. Throws DomainError for non-finite r.
double b_star(const ModelSpec& spec, double r);
/// b*'(r) = b'(r) r + b(r). Throws DomainError for non-finite r.
double b_star_deriv(const ModelSpec& spec, double r);

// ---------------------------------------------------------------------------
// Presets

/// Ids of the shipped presets: "linear-ou", "soft-confinement".
std::vector<std::string> preset_ids();
/// Throws UsageError for unknown ids.
ModelDefinition preset_definition(const std::string& id);
ModelSpec preset(const std::string& id);

// ---------------------------------------------------------------------------
// Hypothesis validation

struct Interval {
  double lo = -10.0;
  double hi = 10.0;
};

struct SpatialSample {
  int dim = 1;
  double half_width = 10.0;
  int points_per_axis = 401;
};

struct Violation {
  std::string hypothesis;
  /// Scalar sample r, or spatial point (x, y).
  Point sample_point;
  double observed = 0.0;
};

struct ValidationReport {
  bool passed = true;
  std::vector<Violation> violations;
  /// Informational notes (waivers, observed bounds).
  std::vector<std::string> notes;
  double max_drift_norm = 0.0;
};

/// Checks hypotheses (i)-(iv) on n_samples evenly spaced r values and a spatial sample grid.
/// Violations are data; nothing is thrown for them.
ValidationReport validate_hypotheses(const ModelSpec& spec, Interval sample_range,
                                     int n_samples, SpatialSample spatial = {});

}  // namespace nfpe
