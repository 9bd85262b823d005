#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "nfpe/errors.hpp"
#include "nfpe/io.hpp"

namespace nfpe::io {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

double parse_double(std::string_view text) {
  while (!text.empty() && (text.back() == '\r' || text.back() == ' ')) text.remove_suffix(1);
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  if (text == "nan") return std::nan("");
  if (text == "inf") return HUGE_VAL;
  if (text == "-inf") return -HUGE_VAL;
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw UsageError("not a number: '" + std::string(text) + "'");
  return v;
}

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string snapshot_csv(const DensityField& u) {
  const SpatialGrid& g = u.grid;
  std::string out = g.dim() == 1 ? "x,u\n" : "x,y,u\n";
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Point c = g.center(i);
    out += format_double(c.x);
    out += ',';
    if (g.dim() == 2) {
      out += format_double(c.y);
      out += ',';
    }
    out += format_double(u[i]);
    out += '\n';
  }
  return out;
}

DensityField parse_snapshot_csv(std::string_view text, const SpatialGrid& grid) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw UsageError("snapshot: empty file");
  const std::size_t cols = grid.dim() == 1 ? 2 : 3;
  DensityField u(grid);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (row >= grid.size()) throw UsageError("snapshot: more rows than grid cells");
    std::vector<double> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      fields.push_back(parse_double(std::string_view(line).substr(start, comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != cols)
      throw UsageError("snapshot: line " + std::to_string(row + 2) + " has the wrong field count");
    const Point c = grid.center(row);
    const double tol = 1e-9 * grid.spacing();
    if (std::abs(fields[0] - c.x) > tol || (cols == 3 && std::abs(fields[1] - c.y) > tol))
      throw UsageError("snapshot: line " + std::to_string(row + 2) + " does not match the grid");
    u[row++] = fields.back();
  }
  if (row != grid.size()) throw UsageError("snapshot: fewer rows than grid cells");
  return u;
}

std::string diagnostics_csv(const Trajectory& traj) {
  std::string out = "t,mass,min,E,Psi,dE_dt,grad_norm_sq,l1_inc,hminus_inc\n";
  const std::size_t n = traj.times.size();
  for (std::size_t j = 0; j < n; ++j) {
    const auto& d = traj.diagnostics[j];
    double dEdt = 0.0;
    if (n >= 2) {
      const std::size_t a = j == 0 ? 0 : j - 1;
      const std::size_t b = j + 1 == n ? j : j + 1;
      dEdt = (traj.diagnostics[b].energy - traj.diagnostics[a].energy) /
             (traj.times[b] - traj.times[a]);
    }
    for (double v : {traj.times[j], d.mass, d.min_value, d.energy, d.dissipation, dEdt,
                     d.gradient_metric_norm_sq, d.l1_increment}) {
      out += format_double(v);
      out += ',';
    }
    out += format_double(d.hminus_increment);
    out += '\n';
  }
  return out;
}

std::string audit_csv(const AuditReport& rep) {
  std::string out = "t,E,Psi,dE_dt,mismatch_rel\n";
  for (const auto& r : rep.rows) {
    out += format_double(r.t) + ',' + format_double(r.energy) + ',' + format_double(r.dissipation) +
           ',' + format_double(r.dE_dt) + ',' + format_double(r.mismatch_rel) + '\n';
  }
  return out;
}

std::string ensemble_csv(const ParticleEnsemble& ens) {
  std::string out = ens.dim == 1 ? "id,x\n" : "id,x,y\n";
  for (std::size_t p = 0; p < ens.size(); ++p) {
    out += std::to_string(p);
    out += ',';
    out += format_double(ens.positions[p].x);
    if (ens.dim == 2) {
      out += ',';
      out += format_double(ens.positions[p].y);
    }
    out += '\n';
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string write_file(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + path.string());
  return fnv1a64_hex(bytes);
}

}  // namespace nfpe::io
