#pragma once

#include <cstdint>
#include <vector>

#include "nfpe/grid.hpp"
#include "nfpe/model.hpp"
#include "nfpe/semigroup.hpp"

namespace nfpe {

struct ParticleEnsemble {
  int dim = 1;
  std::vector<Point> positions;
  std::uint64_t rng_seed = 0;
  double t = 0.0;

  std::size_t size() const noexcept { return positions.size(); }
};

struct KdeConfig {
  /// Kernel bandwidth; <= 0 selects the default rule (Silverman 1.06 s N^{-1/5}
  /// in 1D, Scott s N^{-1/6} in 2D) floored at the grid spacing.
  double bandwidth = 0.0;
};

/// Bandwidth the default rule picks for this ensemble on this grid.
double default_bandwidth(const ParticleEnsemble& ens, const SpatialGrid& grid);

/// Gaussian kernel estimate at cell centres (truncated at 6 bandwidths),
/// renormalised to unit discrete mass. Throws UsageError for an empty ensemble.
DensityField kde_density(const ParticleEnsemble& ens, const SpatialGrid& grid,
                         const KdeConfig& cfg = {});

/// Counter-based standard normal: a pure function of (seed, particle, step, draw).
double counter_normal(std::uint64_t seed, std::uint64_t particle, std::uint64_t step,
                      std::uint32_t draw);
/// Counter-based uniform in [0, 1).
double counter_uniform(std::uint64_t seed, std::uint64_t particle, std::uint64_t step,
                       std::uint32_t draw);

struct ParticleConfig {
  std::size_t count = 100000;
  double dt = 1e-3;
  double T = 1.0;
  std::uint64_t seed = 1;
  KdeConfig kde{};
  /// Steps between KDE refreshes of the mean-field density.
  int kde_refresh = 10;
  /// Floor on the estimated density inside sigma^2 = 2 beta(u)/u.
  double density_floor = 1e-6;
  /// Worker threads for the particle update; 0 picks the hardware count.
  /// Results do not depend on this value.
  unsigned threads = 1;
};

struct ParticleRun {
  ParticleEnsemble ensemble;
  DensityField density;
  std::size_t steps = 0;
  /// Range of sigma^2 seen on the sampled subset over all steps.
  double sigma_sq_min = 0.0;
  double sigma_sq_max = 0.0;
};

/// N particles drawn from u0 by inverse CDF at step 0 of the counter stream.
ParticleEnsemble sample_initial(const DensityField& u0, std::size_t count, std::uint64_t seed);

/// Euler-Maruyama for dX = D(X) b(u(X)) dt + sqrt(2 beta(u)/u) dW with the
/// KDE closure for u, reflection at the boundary of [-L, L]^d.
/// Throws NumericError (particle index, step in the message) on a non-finite position.
ParticleRun simulate_mckean_vlasov(const ModelSpec& spec, const SpatialGrid& grid,
                                   const DensityField& u0, const ParticleConfig& cfg);

struct CrossValidation {
  double distance = 0.0;
  DensityField pde;
  DensityField particles;
};

/// l1_distance(KDE of the particle run at T, PDE state at T); T = pde_cfg.T.
CrossValidation cross_validate(const ModelSpec& spec, const SpatialGrid& grid,
                               const DensityField& u0, const EvolutionConfig& pde_cfg,
                               const ParticleConfig& particle_cfg);

}  // namespace nfpe
