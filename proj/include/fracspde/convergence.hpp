#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fracspde/integrator.hpp"

namespace fracspde {

/// Kahan-Babuska-Neumaier compensated sum, in the given order.
double compensated_sum(std::span<const double> xs);

// ---------------------------------------------------------------- rate fitting

struct RateFit {
  double rate = 0.0;  // negated least-squares slope of log(error) against log(n)
  double intercept = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;  // 95% Student-t interval
  double ci_high = 0.0;
  Index points = 0;
};

RateFit fit_rate(std::span<const double> levels, std::span<const double> errors);

/// fit_rate after dropping the coarsest level when it sits more than 3 sigma off the fit
/// through the remaining levels. Needs at least four levels to consider a discard.
struct RobustRateFit {
  RateFit fit;
  std::vector<double> discarded_levels;
};

RobustRateFit fit_rate_discarding_coarse(std::span<const double> levels,
                                         std::span<const double> errors);

// ---------------------------------------------------------------- theory

struct TheoreticalRate {
  double xi = 0.0;
  std::string regime;
  bool hypotheses_met = true;
  std::vector<std::string> violations;
};

/// theorem 1: xi = min(alpha/2, 2 delta); theorem 2: xi = alpha/4 - 1/2 - alpha/(2p).
/// Parameters outside the hypotheses are reported in `violations`, never rejected.
TheoreticalRate theoretical_rate(double alpha, double delta, double eta, double p, int theorem);

struct SemigroupGap {
  double head_sum = 0.0;  // sum_{j<n} lambda_j^{-2 delta} (e^{-t mu_j} - e^{-t mu_jn})^2
  double tail_sum = 0.0;  // sum_{j>=n} lambda_j^{-2 delta} e^{-2 t mu_j}
  double operator_norm = 0.0;
  double hs_norm = 0.0;
  Index tail_terms = 0;
  double tail_precision = 0.0;  // last accepted tail term relative to the tail sum
};

/// Gap between A^{-delta} S(t) and A^{-delta} E_n e^{-t A_n^{alpha/2}} P_n.
SemigroupGap semigroup_gap(Index n, double alpha, double delta, double t);

struct LemmaRow {
  double t = 0.0;
  Index n = 0;
  double head = 0.0;
  double head_bound = 0.0;
  double head_ratio = 0.0;
  double tail = 0.0;
  double tail_bound = 0.0;
  double tail_ratio = 0.0;
};

struct LemmaSummary {
  double t = 0.0;
  double head_slope = 0.0;  // d log(head) / d log(n)
  double tail_slope = 0.0;
  double head_ratio_spread = 0.0;  // max/min of head_ratio over levels
  double tail_ratio_spread = 0.0;
};

struct LemmaTable {
  double alpha = 0.0;
  double delta = 0.0;
  double gamma = 0.0;
  std::vector<LemmaRow> rows;
  std::vector<LemmaSummary> summaries;
};

/// Exact head/tail sums against the bounds n^{-alpha} t^{-1-1/alpha+4 delta/alpha} and
///   n^{-alpha gamma - 4 delta} t^{-gamma}   (delta <= 1/4)
///   n^{-4 delta}                            (1/4 < delta < 1/4 + 3 alpha/4).
LemmaTable lemma_sum_check(double alpha, double delta, double gamma,
                           std::span<const double> t_grid, std::span<const Index> levels);

// ---------------------------------------------------------------- strong errors

/// L2 distance between E_n of a level state (given by its n-1 sine coefficients) and a
/// reference state: modes past the level count in full.
double lifted_distance(const Eigen::Ref<const Eigen::VectorXd>& level_coeffs,
                       const Eigen::Ref<const Eigen::VectorXd>& reference_coeffs);

/// max over the stored times of |E_n u_n(t) - u_ref(t)|_{L2}.
double path_error(const SolutionPath& level_path, const SolutionPath& reference_path);

struct LabConfig {
  double alpha = 1.5;
  NemytskiiMap g;
  double delta = 0.75;
  double eta = 1.0;
  double p = 2.0;
  int theorem = 1;
  std::vector<Index> levels;
  Index n_ref = 0;
  double final_time = 0.5;
  Index steps = 0;
  Index samples = 2;
  std::uint64_t seed = 0;
  Index threads = 1;
  Index quad_factor = 4;
  Index ref_quad_factor = 2;
  Index substeps = 1;
  bool frozen_diffusion = false;
};

void validate(const LabConfig& cfg);

/// sup-in-time errors, one row per sample and one column per level. All levels of a
/// sample share one noise bundle keyed by sample_seed(cfg.seed, sample).
Eigen::MatrixXd sample_strong_errors(const LabConfig& cfg);

struct LevelError {
  Index n = 0;
  double error = 0.0;  // (mean e^p)^{1/p}
  double std_error = 0.0;
  Index samples = 0;
};

LevelError aggregate_level(Index n, std::span<const double> sample_errors, double p);

struct ConvergenceReport {
  nlohmann::json config;
  std::vector<LevelError> levels;
  RateFit fit;
  std::vector<double> discarded_levels;
  TheoreticalRate theoretical;
  std::vector<std::string> warnings;
  nlohmann::json noise;
};

/// Builds the report from a sample matrix as produced by sample_strong_errors.
ConvergenceReport summarize(const LabConfig& cfg, const Eigen::MatrixXd& sample_errors);

ConvergenceReport mc_strong_error(const LabConfig& cfg);

/// |S(t) u_0 - E_n e^{-t A_n^{alpha/2}} P_n u_0|_{L2} for the smooth initial condition.
double deterministic_gap(Index n, double alpha, const InitialCondition& u0, double t);

/// Rate study for g = 0 at a fixed time; theoretical rate min(2 eta, alpha/2).
ConvergenceReport deterministic_rate(double alpha, double eta, std::span<const Index> levels,
                                     double t, Index n_ref);

}  // namespace fracspde
