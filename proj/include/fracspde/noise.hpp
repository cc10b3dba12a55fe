#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "fracspde/error.hpp"

namespace fracspde {

using Eigen::Index;

/// t_k = k T / K, k = 0..K.
struct TimeGrid {
  double final_time = 0.0;
  Index steps = 0;

  double dt() const { return final_time / static_cast<double>(steps); }
  double time(Index k) const { return final_time * static_cast<double>(k) / static_cast<double>(steps); }

  bool operator==(const TimeGrid&) const = default;
};

TimeGrid make_time_grid(double final_time, Index steps);

// Counter-based Gaussian generation.
//
// A draw is a pure function of (seed, mode j, step k):
//   h = fmix64(seed ^ 0x9E3779B97F4A7C15)
//   h = fmix64(h ^ (j * 0xBF58476D1CE4E5B9))
//   h = fmix64(h ^ (k * 0x94D049BB133111EB))
//   u = ((h >> 12) + 0.5) * 2^-52                 in (0, 1), exactly representable
//   z = Phi^{-1}(u)                               Wichura AS241 (PPND16)
// where fmix64 is the MurmurHash3 64-bit finalizer. Any (j, k) can be drawn
// independently, from any thread.

std::uint64_t fmix64(std::uint64_t h) noexcept;
std::uint64_t noise_key(std::uint64_t seed, std::uint64_t mode, std::uint64_t step) noexcept;
double key_to_uniform(std::uint64_t key) noexcept;

/// Standard normal quantile; relative accuracy about 1e-16 on (0, 1).
double normal_quantile(double p);

double standard_normal(std::uint64_t seed, Index mode, Index step);

/// sqrt(dt) * standard_normal(seed, j, k).
double increment(std::uint64_t seed, Index mode, Index step, double dt);

/// Seed for Monte-Carlo sample s derived from a master seed.
std::uint64_t sample_seed(std::uint64_t master, Index sample) noexcept;

/// Brownian increments Delta B_j(t_k) for modes j = 1..modes on a time grid.
///
/// With substeps r > 1 each increment is the sum of r draws on the r-times finer grid,
/// so a bundle on (T, K, r) and a bundle on (T, rK, 1) with the same seed describe the
/// same Brownian paths.
class NoiseBundle {
 public:
  NoiseBundle(std::uint64_t seed, Index modes, TimeGrid grid, Index substeps = 1);

  std::uint64_t seed() const { return seed_; }
  Index modes() const { return modes_; }
  const TimeGrid& grid() const { return grid_; }
  Index substeps() const { return substeps_; }

  /// Increment for mode j (1-based) over step k (0-based).
  double increment(Index mode, Index step) const;

  /// Increments of modes 1..count over step k.
  Eigen::VectorXd step_increments(Index step, Index count) const;
  Eigen::VectorXd step_increments(Index step) const { return step_increments(step, modes_); }

  /// Prefix view on the first m modes.
  NoiseBundle restrict(Index m) const;

 private:
  std::uint64_t seed_;
  Index modes_;
  TimeGrid grid_;
  Index substeps_;
};

}  // namespace fracspde
