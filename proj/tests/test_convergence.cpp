#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "fracspde/convergence.hpp"

using namespace fracspde;

namespace {

LabConfig small_lab(const std::string& g, Index samples, std::uint64_t seed) {
  LabConfig cfg;
  cfg.alpha = 1.5;
  cfg.g = nemytskii_catalogue(g);
  cfg.levels = {4, 8, 16};
  cfg.n_ref = 32;
  cfg.final_time = 0.1;
  cfg.steps = 40;
  cfg.samples = samples;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST(CompensatedSum, BeatsNaiveSum) {
  const std::vector<double> xs{1e16, 1.0, -1e16, 1.0};
  EXPECT_EQ(compensated_sum(xs), 2.0);
}

TEST(FitRate, ExactPowerLawAndFlat) {
  const std::vector<double> ns{8, 16, 32, 64};
  std::vector<double> e;
  for (double n : ns) e.push_back(3.0 / n);
  const RateFit f = fit_rate(ns, e);
  EXPECT_NEAR(f.rate, 1.0, 1e-12);
  EXPECT_NEAR(f.ci_high - f.ci_low, 0.0, 1e-10);
  const RateFit flat = fit_rate(ns, std::vector<double>(4, 0.2));
  EXPECT_NEAR(flat.rate, 0.0, 1e-12);
}

TEST(FitRate, NoisyPowerLaw) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> eps(-0.05, 0.05);
  const std::vector<double> ns{8, 16, 32, 64, 128};
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> e;
    for (double n : ns) e.push_back(std::pow(n, -0.75) * (1.0 + eps(rng)));
    const RateFit f = fit_rate(ns, e);
    EXPECT_GE(f.rate, 0.65);
    EXPECT_LE(f.rate, 0.85);
    EXPECT_LE(f.ci_low, f.rate);
    EXPECT_GE(f.ci_high, f.rate);
  }
}

TEST(FitRate, Errors) {
  EXPECT_THROW(fit_rate(std::vector<double>{8, 16}, std::vector<double>{1, 0.5}), Error);
  EXPECT_THROW(fit_rate(std::vector<double>{8, 16, 32}, std::vector<double>{1, 0.0, 0.1}), Error);
}

TEST(FitRate, DiscardsPollutedCoarseLevel) {
  const std::vector<double> ns{4, 8, 16, 32, 64};
  std::vector<double> e;
  const std::vector<double> wiggle{1.0, 1.01, 0.99, 1.005, 0.995};
  for (std::size_t i = 0; i < ns.size(); ++i) e.push_back(wiggle[i] * std::pow(ns[i], -0.75));
  e[0] *= 5.0;
  const auto robust = fit_rate_discarding_coarse(ns, e);
  EXPECT_EQ(robust.discarded_levels, std::vector<double>{4.0});
  EXPECT_NEAR(robust.fit.rate, 0.75, 0.05);
  e[0] /= 5.0;
  EXPECT_TRUE(fit_rate_discarding_coarse(ns, e).discarded_levels.empty());
}

TEST(Theory, Examples) {
  const auto a = theoretical_rate(1.5, 0.75, 1.0, 2.0, 1);
  EXPECT_DOUBLE_EQ(a.xi, 0.75);
  const auto b = theoretical_rate(4.0, 2.0, 2.0, 100.0, 1);
  EXPECT_DOUBLE_EQ(b.xi, 2.0);
  const auto c = theoretical_rate(4.0, 0.75, 1.5, 8.0, 2);
  EXPECT_DOUBLE_EQ(c.xi, 0.25);
  const auto d = theoretical_rate(3.0, 0.75, 1.5, 8.0, 2);
  EXPECT_DOUBLE_EQ(d.xi, 0.0625);
}

TEST(Theory, ViolationsReported) {
  // p = 2 is below alpha / (2 delta - 1) = 3 for alpha = 1.5, delta = 0.75
  const auto r = theoretical_rate(1.5, 0.75, 1.0, 2.0, 1);
  EXPECT_FALSE(r.hypotheses_met);
  EXPECT_FALSE(r.violations.empty());
  const auto ok = theoretical_rate(1.5, 0.75, 1.0, 10.0, 1);
  EXPECT_TRUE(ok.hypotheses_met) << (ok.violations.empty() ? "" : ok.violations.front());
  EXPECT_FALSE(theoretical_rate(1.5, 0.75, 1.0, 10.0, 2).hypotheses_met);
  EXPECT_THROW(theoretical_rate(1.5, 0.75, 1.0, 10.0, 3), Error);
}

TEST(Theory, AlphaOverTwoBelowTwo) {
  for (double alpha = 1.01; alpha <= 2.0; alpha += 0.01) {
    for (double delta : {0.51, 0.75, 1.0}) {
      EXPECT_DOUBLE_EQ(theoretical_rate(alpha, delta, 1.0, 2.0, 1).xi, alpha / 2.0);
    }
  }
}

TEST(Gap, LargeTime) {
  const auto g = semigroup_gap(8, 2.0, 0.0, 10.0);
  EXPECT_LE(g.hs_norm, 1e-8);
}

TEST(Gap, DirectSummationOracle) {
  const auto g = semigroup_gap(2, 2.0, 0.0, 0.1);
  EXPECT_NEAR(g.head_sum, 0.00587079683668842937697, 1e-15);
  EXPECT_NEAR(g.tail_sum, 0.000372366565041978736095, 1e-16);
  EXPECT_NEAR(g.hs_norm, 0.0790136912296243005553, 1e-14);
}

TEST(Gap, MonotoneInLevelAndDelta) {
  for (double t : {0.01, 0.1}) {
    double prev = 1e300;
    for (Index n : {4, 8, 16, 32}) {
      const auto g = semigroup_gap(n, 1.5, 0.25, t);
      EXPECT_LT(g.hs_norm, prev);
      prev = g.hs_norm;
      for (double delta : {0.25, 0.5, 1.0}) {
        EXPECT_GE(semigroup_gap(n, 1.5, 0.0, t).hs_norm, semigroup_gap(n, 1.5, delta, t).hs_norm);
      }
    }
  }
}

TEST(Gap, RangeErrors) {
  EXPECT_THROW(semigroup_gap(8, 1.5, 0.0, 0.0), Error);
  EXPECT_THROW(semigroup_gap(8, 1.5, 1.4, 0.1), Error);  // 1/4 + 3 alpha/4 = 1.375
}

TEST(Lemma, RatiosFinite) {
  const std::vector<double> ts{0.05, 0.1, 0.5};
  const std::vector<Index> ns{8, 16, 32, 64};
  const auto table = lemma_sum_check(1.5, 0.0, 1.0, ts, ns);
  ASSERT_EQ(table.rows.size(), 12u);
  for (const auto& r : table.rows) {
    EXPECT_TRUE(std::isfinite(r.head_ratio));
    EXPECT_TRUE(std::isfinite(r.tail_ratio));
  }
  EXPECT_EQ(table.summaries.size(), 3u);
}

TEST(Lemma, TailSlopeAboveQuarter) {
  const std::vector<double> ts{0.001, 0.01};
  const std::vector<Index> ns{8, 16, 32, 64, 128};
  const auto table = lemma_sum_check(1.5, 0.5, 1.0, ts, ns);
  for (const auto& s : table.summaries) EXPECT_LE(s.tail_slope, -1.7) << "t=" << s.t;
}

TEST(Distance, Basics) {
  Eigen::VectorXd ref = Eigen::VectorXd::Zero(10);
  ref(0) = 1.0;
  EXPECT_EQ(lifted_distance(Eigen::VectorXd::Zero(3), ref), 1.0);
  EXPECT_EQ(lifted_distance(ref.head(4), ref), 0.0);
  Eigen::VectorXd tail = Eigen::VectorXd::Zero(10);
  tail(7) = 2.0;
  EXPECT_EQ(lifted_distance(Eigen::VectorXd::Zero(3), tail), 2.0);
}

TEST(Distance, SingleModeDecay) {
  // u_0 = e_1: level path decays with lambda_1n, reference with lambda_1.
  const Index n = 8;
  const TimeGrid grid = make_time_grid(0.2, 20);
  const NoiseBundle bundle(1, 16, grid);
  InitialCondition u0{0.0, Eigen::VectorXd::Unit(16, 0)};
  const auto zero = nemytskii_catalogue("zero");
  const auto level = solve_discrete(n, 2.0, zero, u0, grid, bundle);
  const auto ref = solve_reference(16, 2.0, zero, u0, grid, bundle);
  double expected = 0.0;
  for (Index k = 0; k <= 20; ++k) {
    const double t = grid.time(k);
    expected = std::max(expected, std::abs(std::exp(-discrete_lambda<double>(1, n) * t) -
                                           std::exp(-continuous_lambda<double>(1) * t)));
  }
  EXPECT_NEAR(path_error(level, ref), expected, 1e-12);
  EXPECT_EQ(path_error(ref, ref), 0.0);
}

TEST(Distance, TriangleInequality) {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> normal;
  for (int rep = 0; rep < 200; ++rep) {
    Eigen::VectorXd a(5), b(20), c(20);
    for (auto& x : a) x = normal(rng);
    for (auto& x : b) x = normal(rng);
    for (auto& x : c) x = normal(rng);
    Eigen::VectorXd a_full = Eigen::VectorXd::Zero(20);
    a_full.head(5) = a;
    EXPECT_LE(lifted_distance(a, c), lifted_distance(a, b) + (b - c).norm() + 1e-12);
    EXPECT_NEAR(lifted_distance(a, c), (a_full - c).norm(), 1e-12);
  }
}

TEST(Distance, GridMismatch) {
  const TimeGrid g1 = make_time_grid(0.1, 10);
  const TimeGrid g2 = make_time_grid(0.1, 20);
  InitialCondition u0 = make_initial(1.0, 8);
  const auto zero = nemytskii_catalogue("zero");
  const auto a = solve_discrete(4, 1.5, zero, u0, g1, NoiseBundle(1, 8, g1));
  const auto b = solve_reference(8, 1.5, zero, u0, g2, NoiseBundle(1, 8, g2));
  EXPECT_THROW(path_error(a, b), Error);
}

TEST(Lab, ZeroDiffusionMatchesDeterministicGaps) {
  LabConfig cfg = small_lab("zero", 3, 1);
  const Eigen::MatrixXd e = sample_strong_errors(cfg);
  const InitialCondition u0 = make_initial(cfg.eta, cfg.n_ref);
  const TimeGrid grid = make_time_grid(cfg.final_time, cfg.steps);
  for (std::size_t l = 0; l < cfg.levels.size(); ++l) {
    double sup = 0.0;
    for (Index k = 0; k <= cfg.steps; ++k) {
      sup = std::max(sup, deterministic_gap(cfg.levels[l], cfg.alpha, u0, grid.time(k)));
    }
    for (Index s = 0; s < 3; ++s) EXPECT_NEAR(e(s, static_cast<Index>(l)), sup, 1e-12);
  }
  const auto report = summarize(cfg, e);
  for (const auto& level : report.levels) EXPECT_NEAR(level.std_error, 0.0, 1e-15);
}

TEST(Lab, MatchesSeparateSolves) {
  LabConfig cfg = small_lab("cos", 2, 3);
  const Eigen::MatrixXd e = sample_strong_errors(cfg);
  const TimeGrid grid = make_time_grid(cfg.final_time, cfg.steps);
  const InitialCondition u0 = make_initial(cfg.eta, cfg.n_ref);
  const NoiseBundle bundle(sample_seed(cfg.seed, 1), cfg.n_ref, grid);
  const auto ref = solve_reference(cfg.n_ref, cfg.alpha, cfg.g, u0, grid, bundle);
  for (std::size_t l = 0; l < cfg.levels.size(); ++l) {
    const auto path = solve_discrete(cfg.levels[l], cfg.alpha, cfg.g, u0, grid, bundle);
    EXPECT_NEAR(e(1, static_cast<Index>(l)), path_error(path, ref), 1e-12);
  }
}

TEST(Lab, ThreadCountIrrelevant) {
  LabConfig cfg = small_lab("cos", 6, 5);
  const Eigen::MatrixXd one = sample_strong_errors(cfg);
  cfg.threads = 3;
  EXPECT_EQ(sample_strong_errors(cfg), one);
}

TEST(Lab, PermutationInvariantAggregation) {
  LabConfig cfg = small_lab("cos", 12, 8);
  const Eigen::MatrixXd e = sample_strong_errors(cfg);
  std::vector<Index> order(12);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(1);
  std::shuffle(order.begin(), order.end(), rng);
  Eigen::MatrixXd shuffled(e.rows(), e.cols());
  for (Index i = 0; i < 12; ++i) shuffled.row(i) = e.row(order[static_cast<std::size_t>(i)]);
  const auto a = summarize(cfg, e);
  const auto b = summarize(cfg, shuffled);
  for (std::size_t l = 0; l < a.levels.size(); ++l) {
    EXPECT_NEAR(a.levels[l].error, b.levels[l].error, 1e-13 * a.levels[l].error);
    EXPECT_NEAR(a.levels[l].std_error, b.levels[l].std_error, 1e-13 * a.levels[l].std_error);
  }
}

TEST(Lab, DoublingSamplesHalvesVariance) {
  // Ratio of squared standard errors at S and 2S, averaged over 20 repetitions.
  const Index s = 16;
  double ratio_sum = 0.0;
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    LabConfig cfg = small_lab("cos", 2 * s, 1000 + rep);
    cfg.levels = {4, 8, 16};
    cfg.steps = 20;
    const Eigen::MatrixXd e = sample_strong_errors(cfg);
    const Eigen::VectorXd col = e.col(1);
    const auto half = aggregate_level(8, std::span<const double>(col.data(), s), 2.0);
    const auto full = aggregate_level(8, std::span<const double>(col.data(), 2 * s), 2.0);
    ratio_sum += (half.std_error * half.std_error) / (full.std_error * full.std_error);
  }
  const double ratio = ratio_sum / 20.0;
  EXPECT_GE(ratio, 1.5);
  EXPECT_LE(ratio, 3.0);
}

TEST(Lab, ErrorsDecreaseAcrossLevels) {
  LabConfig cfg = small_lab("cos", 8, 7);
  cfg.levels = {4, 8, 16, 32};
  cfg.n_ref = 128;
  cfg.steps = 100;
  const auto report = mc_strong_error(cfg);
  for (std::size_t l = 1; l < report.levels.size(); ++l) {
    EXPECT_LT(report.levels[l].error, report.levels[l - 1].error);
  }
  EXPECT_FALSE(report.theoretical.hypotheses_met);
  EXPECT_FALSE(report.warnings.empty());
}

TEST(Lab, Validation) {
  LabConfig cfg = small_lab("cos", 1, 1);
  EXPECT_THROW(sample_strong_errors(cfg), Error);
  cfg = small_lab("cos", 4, 1);
  cfg.levels = {8, 4, 16};
  EXPECT_THROW(sample_strong_errors(cfg), Error);
  cfg = small_lab("cos", 4, 1);
  cfg.n_ref = 8;
  EXPECT_THROW(sample_strong_errors(cfg), Error);
}

TEST(Lab, ErrorsAnnotatedWithSampleAndLevel) {
  LabConfig cfg = small_lab("cos", 2, 1);
  cfg.g.fn = [](double) { return std::numeric_limits<double>::infinity(); };
  try {
    sample_strong_errors(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Divergence);
    EXPECT_NE(std::string(e.what()).find("sample 0"), std::string::npos) << e.what();
  }
}

TEST(DeterministicRate, ReportShape) {
  const std::vector<Index> levels{8, 16, 32};
  const auto r = deterministic_rate(1.5, 1.0, levels, 0.1, 128);
  ASSERT_EQ(r.levels.size(), 3u);
  EXPECT_GT(r.levels[0].error, r.levels[2].error);
  EXPECT_DOUBLE_EQ(r.theoretical.xi, 0.75);
}
