#include "nfpe/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nfpe/errors.hpp"

namespace nfpe {

namespace {

double eval_term(const SmoothTerm& t, double r) {
  switch (t.kind) {
    case SmoothTermKind::arctan:
      return t.amplitude * std::atan(t.rate * r);
    case SmoothTermKind::tanh:
      return t.amplitude * std::tanh(t.rate * r);
    case SmoothTermKind::gauss:
      return t.amplitude * std::exp(-t.rate * r * r);
  }
  return 0.0;
}

double deriv_term(const SmoothTerm& t, double r) {
  switch (t.kind) {
    case SmoothTermKind::arctan: {
      const double kr = t.rate * r;
      return t.amplitude * t.rate / (1.0 + kr * kr);
    }
    case SmoothTermKind::tanh: {
      const double th = std::tanh(t.rate * r);
      return t.amplitude * t.rate * (1.0 - th * th);
    }
    case SmoothTermKind::gauss:
      return -2.0 * t.amplitude * t.rate * r * std::exp(-t.rate * r * r);
  }
  return 0.0;
}

// Horner evaluation of sum c_k r^k.
double eval_poly(const std::vector<double>& c, double r) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * r + *it;
  return acc;
}

double deriv_poly(const std::vector<double>& c, double r) {
  double acc = 0.0;
  for (std::size_t k = c.size(); k-- > 1;) acc = acc * r + static_cast<double>(k) * c[k];
  return acc;
}

std::string format_point(const Point& p) {
  std::ostringstream os;
  os << "(" << p.x << ", " << p.y << ")";
  return os.str();
}

}  // namespace

CoefficientFn make_coefficient(const CoefficientTable& table) {
  CoefficientFn fn;
  fn.eval = [table](double r) {
    double v = eval_poly(table.poly, r);
    for (const auto& t : table.terms) v += eval_term(t, r);
    return v;
  };
  fn.deriv = [table](double r) {
    double v = deriv_poly(table.poly, r);
    for (const auto& t : table.terms) v += deriv_term(t, r);
    return v;
  };
  return fn;
}

Potential make_potential(const PotentialTable& t) {
  Potential p;
  p.m_exponent = t.m_exponent;
  p.phi = [t](const Point& x) {
    const double r2 = dot(x, x);
    return t.constant + t.quadratic * r2 + t.soft_abs * std::sqrt(1.0 + r2);
  };
  p.grad_phi = [t](const Point& x) {
    const double r2 = dot(x, x);
    const double s = 2.0 * t.quadratic + t.soft_abs / std::sqrt(1.0 + r2);
    return Point{s * x.x, s * x.y};
  };
  p.div_drift = [t](const Point& x, int dim) {
    const double r2 = dot(x, x);
    const double q = 1.0 + r2;
    const double d = static_cast<double>(dim);
    const double lap =
        2.0 * d * t.quadratic + t.soft_abs * (d * q - r2) / (q * std::sqrt(q));
    return -lap;
  };
  return p;
}

ModelSpec make_model(const ModelDefinition& def) {
  ModelSpec spec;
  spec.id = def.id;
  spec.beta = make_coefficient(def.beta);
  spec.b = make_coefficient(def.b);
  spec.potential = make_potential(def.potential);
  spec.constants = def.constants;
  spec.lambda0 = def.lambda0;
  spec.omega_empirical = def.omega_empirical;
  spec.energy_floor_constant = def.energy_floor_constant;
  spec.notes = def.notes;
  if (def.drift_from_override) {
    const PotentialTable t = def.potential;
    spec.drift_override = [t](const Point& x) {
      const double s = -(2.0 * t.quadratic + t.soft_abs / std::sqrt(1.0 + dot(x, x)));
      return Point{s * x.x, s * x.y};
    };
  }
  spec.definition = def;
  return spec;
}

double b_star(const ModelSpec& spec, double r) {
  if (!std::isfinite(r)) throw DomainError("b_star: non-finite argument");
  return spec.mobility(r);
}

double b_star_deriv(const ModelSpec& spec, double r) {
  if (!std::isfinite(r)) throw DomainError("b_star_deriv: non-finite argument");
  return spec.mobility_deriv(r);
}

// ---------------------------------------------------------------------------

std::vector<std::string> preset_ids() { return {"linear-ou", "soft-confinement"}; }

ModelDefinition preset_definition(const std::string& id) {
  ModelDefinition def;
  def.id = id;
  if (id == "linear-ou") {
    // beta = id, b = 1, Phi = 1 + |x|^2/2, D = -x.
    def.beta.poly = {0.0, 1.0};
    def.b.poly = {1.0};
    def.potential = {1.0, 0.5, 0.0, 2.0};
    def.constants = {1.0, 1.0, 1.0, 1.0};
    def.drift_from_override = true;
    def.lambda0 = 0.2;
    def.omega_empirical = 0.0;
    // min E over probability densities is -log(2 pi)/2 ~ -0.919 (Gibbs state).
    def.energy_floor_constant = 0.92;
    def.notes =
        "Ornstein-Uhlenbeck flow. D = -x is unbounded on R^d and supplied through the drift "
        "override; it is bounded (|D| <= sqrt(d) L) on the truncated domain. Formula bound "
        "omega <= (gamma2 + |D|_inf gamma3)^2 / (4 gamma1) = (1 + L)^2 / 4 in 1D.";
  } else if (id == "soft-confinement") {
    // beta = 2r + atan r, b = 1 + exp(-r^2), Phi = 1 + sqrt(1 + |x|^2).
    def.beta.poly = {0.0, 2.0};
    def.beta.terms = {{SmoothTermKind::arctan, 1.0, 1.0}};
    def.b.poly = {1.0};
    def.b.terms = {{SmoothTermKind::gauss, 1.0, 1.0}};
    def.potential = {1.0, 0.0, 1.0, 3.0};
    // beta' = 2 + 1/(1+r^2) in (2, 3]; b in (1, 2]; b*' = 1 + e^{-r^2}(1 - 2r^2) in [0.554, 2].
    def.constants = {2.0, 3.0, 1.0, 2.0};
    def.lambda0 = 0.2;
    def.omega_empirical = 5.0;
    def.energy_floor_constant = 2.0;
    def.notes =
        "|D| = |x|/sqrt(1+|x|^2) < 1. Formula bound omega <= (gamma2 + |D|_inf gamma3)^2 / "
        "(4 gamma1) = 25/8; empirical bound 5 recorded for the H^-1 check.";
  } else {
    throw UsageError("unknown preset id '" + id + "'");
  }
  return def;
}

ModelSpec preset(const std::string& id) { return make_model(preset_definition(id)); }

// ---------------------------------------------------------------------------

ValidationReport validate_hypotheses(const ModelSpec& spec, Interval range, int n_samples,
                                     SpatialSample spatial) {
  ValidationReport report;
  auto flag = [&](std::string hyp, Point at, double observed) {
    report.violations.push_back({std::move(hyp), at, observed});
  };
  const auto& c = spec.constants;
  if (!(c.gamma1 > 0.0)) flag("(i) gamma1 > 0", {}, c.gamma1);
  if (!(c.gamma1 <= c.gamma2)) flag("(i) gamma1 <= gamma2", {}, c.gamma2);
  if (!(c.b0 > 0.0)) flag("(ii) b0 > 0", {}, c.b0);
  if (!(c.gamma3 > 0.0)) flag("(ii) gamma3 > 0", {}, c.gamma3);

  const double beta0 = spec.beta(0.0);
  if (beta0 != 0.0) flag("(i) beta(0) = 0", {}, beta0);

  const int n = std::max(n_samples, 2);
  const double span = range.hi - range.lo;
  // Relative slack for rounding in the coefficient evaluation.
  auto slack = [](double bound) { return 1e-12 * std::max(1.0, std::abs(bound)); };
  for (int k = 0; k < n; ++k) {
    const double r = range.lo + span * static_cast<double>(k) / (n - 1);
    const Point at{r, 0.0};
    const double bp = spec.beta.deriv(r);
    const double bv = spec.b(r);
    const double bsd = spec.mobility_deriv(r);
    if (!std::isfinite(spec.beta(r)) || !std::isfinite(bp)) flag("(i) beta finite", at, bp);
    if (!std::isfinite(bv) || !std::isfinite(bsd)) flag("(ii) b finite", at, bv);
    if (bp < c.gamma1 - slack(c.gamma1)) flag("(i) gamma1 <= beta'", at, bp);
    if (bp > c.gamma2 + slack(c.gamma2)) flag("(i) beta' <= gamma2", at, bp);
    if (bv < c.b0 - slack(c.b0)) flag("(ii) b >= b0", at, bv);
    if (std::abs(bsd) > c.gamma3 + slack(c.gamma3)) flag("(ii) |b'(r) r + b(r)| <= gamma3", at, bsd);
  }

  const int m = std::max(spatial.points_per_axis, 2);
  const int ny = spatial.dim == 2 ? m : 1;
  const double L = spatial.half_width;
  double max_drift = 0.0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < m; ++i) {
      Point x{-L + 2.0 * L * i / (m - 1), 0.0};
      if (spatial.dim == 2) x.y = -L + 2.0 * L * j / (m - 1);
      const double phi = spec.potential.phi(x);
      if (!(phi >= 1.0 - slack(1.0))) flag("(iv) Phi >= 1", x, phi);
      const Point d = spec.drift(x);
      const double dn = std::sqrt(dot(d, d));
      if (!std::isfinite(dn)) {
        flag("(iii) D bounded", x, dn);
      } else {
        max_drift = std::max(max_drift, dn);
      }
    }
  }
  report.max_drift_norm = max_drift;
  {
    std::ostringstream os;
    os << "max |D| on [-" << L << ", " << L << "]^" << spatial.dim << " = " << max_drift;
    report.notes.push_back(os.str());
  }
  if (spec.drift_override) {
    report.notes.push_back(
        "(iii) waived: drift supplied by drift_override; boundedness holds on the truncated "
        "domain only");
  }
  if (!report.violations.empty()) {
    report.notes.push_back("first violation: " + report.violations.front().hypothesis + " at " +
                           format_point(report.violations.front().sample_point));
  }
  report.passed = report.violations.empty();
  return report;
}

}  // namespace nfpe
