#include "nfpe/particles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <thread>

#include "nfpe/errors.hpp"

namespace nfpe {

namespace {

constexpr std::size_t kChunk = 8192;
constexpr double kKernelRadius = 6.0;
constexpr std::size_t kSigmaStride = 101;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t counter_bits(std::uint64_t seed, std::uint64_t particle, std::uint64_t step,
                           std::uint32_t draw) {
  std::uint64_t x = splitmix(seed);
  x = splitmix(x ^ particle);
  x = splitmix(x ^ step);
  return splitmix(x ^ draw);
}

/// Runs body(begin, end) over [0, n) in fixed chunks; chunk boundaries do not
/// depend on the thread count.
template <class Body>
void for_chunks(std::size_t n, unsigned threads, Body&& body) {
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  if (threads <= 1 || chunks <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) body(c, c * kChunk, std::min(n, (c + 1) * kChunk));
    return;
  }
  const unsigned workers = std::min<std::size_t>(threads, chunks);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t c = w; c < chunks; c += workers)
        body(c, c * kChunk, std::min(n, (c + 1) * kChunk));
    });
  }
  for (auto& t : pool) t.join();
}

unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

double sample_std(const ParticleEnsemble& ens) {
  const auto n = static_cast<double>(ens.size());
  if (ens.size() < 2) return 0.0;
  double acc = 0.0;
  for (int axis = 0; axis < ens.dim; ++axis) {
    double mean = 0.0;
    for (const auto& p : ens.positions) mean += axis == 0 ? p.x : p.y;
    mean /= n;
    double var = 0.0;
    for (const auto& p : ens.positions) {
      const double d = (axis == 0 ? p.x : p.y) - mean;
      var += d * d;
    }
    acc += var / (n - 1.0);
  }
  return std::sqrt(acc / ens.dim);
}

/// Unnormalised kernel weights exp(-(c_i - x)^2 / (2 bw^2)) over the cells of one axis.
void axis_weights(const SpatialGrid& grid, double x, double bw, int& first,
                  std::vector<double>& w) {
  const double h = grid.spacing();
  const double L = grid.half_width();
  const int n = grid.cells_per_axis();
  const double reach = kKernelRadius * bw;
  first = std::max(0, static_cast<int>(std::floor((x - reach + L) / h - 0.5)));
  const int last = std::min(n - 1, static_cast<int>(std::ceil((x + reach + L) / h - 0.5)));
  w.clear();
  const double inv = 1.0 / (2.0 * bw * bw);
  for (int i = first; i <= last; ++i) {
    const double d = grid.coordinate(i) - x;
    w.push_back(std::exp(-d * d * inv));
  }
}

DensityField kde_impl(const ParticleEnsemble& ens, const SpatialGrid& grid, double bw,
                      unsigned threads) {
  const std::size_t n = ens.size();
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<std::vector<double>> partial(chunks);
  for_chunks(n, threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
    std::vector<double> acc(grid.size(), 0.0);
    std::vector<double> wx, wy;
    int fx = 0, fy = 0;
    for (std::size_t p = begin; p < end; ++p) {
      const Point& x = ens.positions[p];
      axis_weights(grid, x.x, bw, fx, wx);
      if (grid.dim() == 1) {
        for (std::size_t i = 0; i < wx.size(); ++i) acc[static_cast<std::size_t>(fx) + i] += wx[i];
      } else {
        axis_weights(grid, x.y, bw, fy, wy);
        for (std::size_t j = 0; j < wy.size(); ++j)
          for (std::size_t i = 0; i < wx.size(); ++i)
            acc[grid.index(fx + static_cast<int>(i), fy + static_cast<int>(j))] += wx[i] * wy[j];
      }
    }
    partial[c] = std::move(acc);
  });
  DensityField out(grid);
  for (const auto& part : partial)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += part[i];
  double mass = discrete_mass(out);
  if (!(mass > 0.0)) {
    // All particles farther than the kernel reach from every centre: spread uniformly.
    return uniform_density(grid);
  }
  for (double& v : out.values) v /= mass;
  return out;
}

/// Piecewise-linear interpolation of cell values, constant beyond the outer centres.
double interpolate(const DensityField& u, const Point& x) {
  const SpatialGrid& g = u.grid;
  const int n = g.cells_per_axis();
  auto locate = [&](double c, int& i, double& frac) {
    const double s = (c + g.half_width()) / g.spacing() - 0.5;
    if (s <= 0.0) {
      i = 0;
      frac = 0.0;
    } else if (s >= n - 1) {
      i = n - 2;
      frac = 1.0;
    } else {
      i = static_cast<int>(s);
      frac = s - i;
    }
  };
  int i = 0;
  double fx = 0.0;
  locate(x.x, i, fx);
  if (g.dim() == 1) return (1.0 - fx) * u[g.index(i)] + fx * u[g.index(i + 1)];
  int j = 0;
  double fy = 0.0;
  locate(x.y, j, fy);
  return (1.0 - fx) * (1.0 - fy) * u[g.index(i, j)] + fx * (1.0 - fy) * u[g.index(i + 1, j)] +
         (1.0 - fx) * fy * u[g.index(i, j + 1)] + fx * fy * u[g.index(i + 1, j + 1)];
}

double reflect(double x, double L) {
  const double period = 4.0 * L;
  if (x >= -L && x <= L) return x;
  double y = std::fmod(x + L, period);
  if (y < 0.0) y += period;
  return y <= 2.0 * L ? y - L : 3.0 * L - y;
}

}  // namespace

double counter_uniform(std::uint64_t seed, std::uint64_t particle, std::uint64_t step,
                       std::uint32_t draw) {
  return unit_uniform(counter_bits(seed, particle, step, draw));
}

double counter_normal(std::uint64_t seed, std::uint64_t particle, std::uint64_t step,
                      std::uint32_t draw) {
  // Box-Muller on draws (2 draw, 2 draw + 1); uses the cosine branch.
  const double u1 = 1.0 - counter_uniform(seed, particle, step, 2 * draw);  // (0, 1]
  const double u2 = counter_uniform(seed, particle, step, 2 * draw + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double default_bandwidth(const ParticleEnsemble& ens, const SpatialGrid& grid) {
  const auto n = static_cast<double>(std::max<std::size_t>(ens.size(), 1));
  const double s = sample_std(ens);
  const double rule = ens.dim == 1 ? 1.06 * s * std::pow(n, -0.2) : s * std::pow(n, -1.0 / 6.0);
  return std::max(rule, grid.spacing());
}

DensityField kde_density(const ParticleEnsemble& ens, const SpatialGrid& grid,
                         const KdeConfig& cfg) {
  if (ens.positions.empty()) throw UsageError("kde_density needs a nonempty ensemble");
  if (ens.dim != grid.dim()) throw UsageError("ensemble and grid dimensions differ");
  const double bw = cfg.bandwidth > 0.0 ? cfg.bandwidth : default_bandwidth(ens, grid);
  return kde_impl(ens, grid, bw, 1);
}

ParticleEnsemble sample_initial(const DensityField& u0, std::size_t count, std::uint64_t seed) {
  const SpatialGrid& g = u0.grid;
  std::vector<double> cdf(u0.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < u0.size(); ++i) {
    if (u0[i] < 0.0 && u0[i] < -1e-12) throw DomainError("sample_initial: negative density");
    acc += std::max(u0[i], 0.0);
    cdf[i] = acc;
  }
  if (!(acc > 0.0)) throw DomainError("sample_initial: density has no mass");
  ParticleEnsemble ens;
  ens.dim = g.dim();
  ens.rng_seed = seed;
  ens.positions.resize(count);
  const double h = g.spacing();
  for (std::size_t p = 0; p < count; ++p) {
    const double target = counter_uniform(seed, p, 0, 0) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
    const auto cell = static_cast<std::size_t>(
        std::min<std::ptrdiff_t>(it - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size()) - 1));
    const Point c = g.center(cell);
    Point x{c.x + (counter_uniform(seed, p, 0, 1) - 0.5) * h, 0.0};
    if (g.dim() == 2) x.y = c.y + (counter_uniform(seed, p, 0, 2) - 0.5) * h;
    ens.positions[p] = x;
  }
  return ens;
}

ParticleRun simulate_mckean_vlasov(const ModelSpec& spec, const SpatialGrid& grid,
                                   const DensityField& u0, const ParticleConfig& cfg) {
  require_same_grid(grid, u0.grid);
  if (cfg.count < 1) throw UsageError("particle count must be >= 1");
  if (!(cfg.dt > 0.0)) throw UsageError("particle dt must be positive");
  if (!(cfg.T >= 0.0)) throw UsageError("particle T must be >= 0");
  if (cfg.kde_refresh < 1) throw UsageError("kde_refresh must be >= 1");
  if (!(cfg.density_floor > 0.0)) throw UsageError("density_floor must be positive");

  const unsigned threads = resolve_threads(cfg.threads);
  ParticleRun run;
  run.ensemble = sample_initial(u0, cfg.count, cfg.seed);
  auto& pos = run.ensemble.positions;
  const double L = grid.half_width();
  const auto bandwidth = [&] {
    return cfg.kde.bandwidth > 0.0 ? cfg.kde.bandwidth : default_bandwidth(run.ensemble, grid);
  };

  const auto sched = step_schedule(cfg.T, cfg.dt);
  const std::size_t chunks = (pos.size() + kChunk - 1) / kChunk;
  std::vector<double> chunk_min(chunks), chunk_max(chunks);
  run.sigma_sq_min = std::numeric_limits<double>::infinity();
  run.sigma_sq_max = -std::numeric_limits<double>::infinity();
  DensityField uhat;
  for (std::size_t k = 0; k < sched.size(); ++k) {
    if (k % static_cast<std::size_t>(cfg.kde_refresh) == 0)
      uhat = kde_impl(run.ensemble, grid, bandwidth(), threads);
    const double dt = sched[k];
    const double sdt = std::sqrt(dt);
    const std::uint64_t step_id = k + 1;
    std::fill(chunk_min.begin(), chunk_min.end(), std::numeric_limits<double>::infinity());
    std::fill(chunk_max.begin(), chunk_max.end(), -std::numeric_limits<double>::infinity());
    for_chunks(pos.size(), threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
      for (std::size_t p = begin; p < end; ++p) {
        Point x = pos[p];
        const double u = std::max(interpolate(uhat, x), cfg.density_floor);
        const double sigma_sq = 2.0 * spec.beta(u) / u;
        const double bu = spec.b(u);
        const Point d = spec.drift(x);
        const double sigma = std::sqrt(sigma_sq);
        x.x += d.x * bu * dt + sigma * sdt * counter_normal(cfg.seed, p, step_id, 0);
        if (grid.dim() == 2)
          x.y += d.y * bu * dt + sigma * sdt * counter_normal(cfg.seed, p, step_id, 1);
        if (!std::isfinite(x.x) || !std::isfinite(x.y))
          throw NumericError("non-finite particle position at step " + std::to_string(step_id) +
                                 ", particle " + std::to_string(p),
                             p);
        x.x = reflect(x.x, L);
        if (grid.dim() == 2) x.y = reflect(x.y, L);
        pos[p] = x;
        if (p % kSigmaStride == 0) {
          chunk_min[c] = std::min(chunk_min[c], sigma_sq);
          chunk_max[c] = std::max(chunk_max[c], sigma_sq);
        }
      }
    });
    for (std::size_t c = 0; c < chunks; ++c) {
      run.sigma_sq_min = std::min(run.sigma_sq_min, chunk_min[c]);
      run.sigma_sq_max = std::max(run.sigma_sq_max, chunk_max[c]);
    }
  }
  run.steps = sched.size();
  run.ensemble.t = sched.empty() ? 0.0 : cfg.T;
  if (sched.empty()) run.sigma_sq_min = run.sigma_sq_max = 0.0;
  run.density = kde_impl(run.ensemble, grid, bandwidth(), threads);
  return run;
}

CrossValidation cross_validate(const ModelSpec& spec, const SpatialGrid& grid,
                               const DensityField& u0, const EvolutionConfig& pde_cfg,
                               const ParticleConfig& particle_cfg) {
  ParticleConfig pc = particle_cfg;
  pc.T = pde_cfg.T;
  CrossValidation cv;
  if (pde_cfg.T > 0.0) {
    const ResolventSolver solver(spec, grid);
    cv.pde = propagate(solver, u0, pde_cfg.T, pde_cfg.h, pde_cfg.resolvent);
  } else {
    cv.pde = u0;
  }
  cv.particles = simulate_mckean_vlasov(spec, grid, u0, pc).density;
  cv.distance = l1_distance(cv.particles, cv.pde);
  return cv;
}

}  // namespace nfpe
