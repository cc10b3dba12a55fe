#include "fracspde/noise.hpp"

#include <cmath>
#include <string>

#include "fracspde/error.hpp"

namespace fracspde {

TimeGrid make_time_grid(double final_time, Index steps) {
  if (!(final_time > 0.0) || steps < 1) {
    throw Error(ErrorKind::InvalidParameter, "time grid needs T > 0 and K >= 1");
  }
  return TimeGrid{final_time, steps};
}

std::uint64_t fmix64(std::uint64_t h) noexcept {
  h ^= h >> 33;
  h *= 0xFF51AFD7ED558CCDULL;
  h ^= h >> 33;
  h *= 0xC4CEB9FE1A85EC53ULL;
  h ^= h >> 33;
  return h;
}

std::uint64_t noise_key(std::uint64_t seed, std::uint64_t mode, std::uint64_t step) noexcept {
  std::uint64_t h = fmix64(seed ^ 0x9E3779B97F4A7C15ULL);
  h = fmix64(h ^ (mode * 0xBF58476D1CE4E5B9ULL));
  h = fmix64(h ^ (step * 0x94D049BB133111EBULL));
  return h;
}

double key_to_uniform(std::uint64_t key) noexcept {
  return (static_cast<double>(key >> 12) + 0.5) * 0x1.0p-52;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorKind::InvalidParameter, "normal quantile needs p in (0, 1)");
  }
  // Wichura, Algorithm AS241 (PPND16).
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2509.0809287301226727 * r + 33430.575583588128105) * r +
                 67265.770927008700853) * r + 45921.953931549871457) * r +
               13731.693765509461125) * r + 1971.5909503065514427) * r +
             133.14166789178437745) * r + 3.387132872796366608) /
           (((((((5226.495278852545925 * r + 28729.085735721942674) * r +
                 39307.89580009271061) * r + 21213.794301586595867) * r +
               5394.1960214247511077) * r + 687.1870074920579083) * r +
             42.313330701600911252) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val = 0.0;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r +
                0.24178072517745061177) * r + 1.27045825245236838258) * r +
              3.64784832476320460504) * r + 5.7694972214606914055) * r +
            4.6303378461565452959) * r + 1.42343711074968357734) /
          (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r +
                0.0151986665636164571966) * r + 0.14810397642748007459) * r +
              0.68976733498510000455) * r + 1.6763848301838038494) * r +
            2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                0.0012426609473880784386) * r + 0.026532189526576123093) * r +
              0.29656057182850489123) * r + 1.7848265399172913358) * r +
            5.4637849111641143699) * r + 6.6579046435011037772) /
          (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r +
                1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
              0.0148753612908506148525) * r + 0.13692988092273580531) * r +
            0.59983220655588793769) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

double standard_normal(std::uint64_t seed, Index mode, Index step) {
  return normal_quantile(key_to_uniform(
      noise_key(seed, static_cast<std::uint64_t>(mode), static_cast<std::uint64_t>(step))));
}

double increment(std::uint64_t seed, Index mode, Index step, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidParameter, "dt must be positive");
  return std::sqrt(dt) * standard_normal(seed, mode, step);
}

std::uint64_t sample_seed(std::uint64_t master, Index sample) noexcept {
  return fmix64(master + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(sample) + 1));
}

NoiseBundle::NoiseBundle(std::uint64_t seed, Index modes, TimeGrid grid, Index substeps)
    : seed_(seed), modes_(modes), grid_(grid), substeps_(substeps) {
  if (modes < 0) throw Error(ErrorKind::InvalidParameter, "negative mode count");
  if (substeps < 1) throw Error(ErrorKind::InvalidParameter, "substeps must be >= 1");
  if (!(grid.final_time > 0.0) || grid.steps < 1) {
    throw Error(ErrorKind::InvalidParameter, "invalid time grid");
  }
}

double NoiseBundle::increment(Index mode, Index step) const {
  if (mode < 1 || mode > modes_) {
    throw Error(ErrorKind::InsufficientNoise, "mode " + std::to_string(mode) +
                                                  " outside bundle of " + std::to_string(modes_));
  }
  if (step < 0 || step >= grid_.steps) {
    throw Error(ErrorKind::TimeGridMismatch, "step " + std::to_string(step) + " outside the time grid");
  }
  if (substeps_ == 1) return fracspde::increment(seed_, mode, step, grid_.dt());
  double sum = 0.0;
  for (Index i = 0; i < substeps_; ++i) sum += standard_normal(seed_, mode, step * substeps_ + i);
  return std::sqrt(grid_.dt() / static_cast<double>(substeps_)) * sum;
}

Eigen::VectorXd NoiseBundle::step_increments(Index step, Index count) const {
  if (count > modes_) {
    throw Error(ErrorKind::InsufficientNoise, "requested more modes than the bundle carries");
  }
  Eigen::VectorXd out(count);
  for (Index j = 1; j <= count; ++j) out(j - 1) = increment(j, step);
  return out;
}

NoiseBundle NoiseBundle::restrict(Index m) const {
  if (m > modes_ || m < 0) {
    throw Error(ErrorKind::InsufficientNoise, "cannot restrict to " + std::to_string(m) +
                                                  " modes from " + std::to_string(modes_));
  }
  return NoiseBundle(seed_, m, grid_, substeps_);
}

}  // namespace fracspde
