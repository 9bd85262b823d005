#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "nfpe/energy.hpp"
#include "nfpe/grid.hpp"
#include "nfpe/particles.hpp"
#include "nfpe/semigroup.hpp"

namespace nfpe::io {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
/// Parses a full field; throws UsageError otherwise.
double parse_double(std::string_view text);

/// 64-bit FNV-1a of the bytes, as 16 lowercase hex digits.
std::string fnv1a64_hex(std::string_view bytes);

/// Header `x,u` (1D) or `x,y,u` (2D), one row per cell in index order.
std::string snapshot_csv(const DensityField& u);
/// Reads a snapshot written by snapshot_csv; the cell centres must match `grid`.
DensityField parse_snapshot_csv(std::string_view text, const SpatialGrid& grid);

/// `t,mass,min,E,Psi,dE_dt,grad_norm_sq,l1_inc,hminus_inc`; dE_dt is the centred
/// difference at interior records and one-sided at the ends.
std::string diagnostics_csv(const Trajectory& traj);
/// `t,E,Psi,dE_dt,mismatch_rel`.
std::string audit_csv(const AuditReport& rep);
/// `id,x[,y]`.
std::string ensemble_csv(const ParticleEnsemble& ens);

std::string read_file(const std::filesystem::path& path);
/// Writes the bytes (creating parent directories) and returns their checksum.
std::string write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace nfpe::io
