#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "fracspde/fractional_operators.hpp"
#include "fracspde/lifting.hpp"

using namespace fracspde;

namespace {

double rel_entrywise(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
}

}  // namespace

TEST(DiscreteOperator, FracLambdas) {
  EXPECT_NEAR(make_discrete_operator<double>(2, 2.0).frac_lambdas(0), 8.0, 1e-13);
  EXPECT_NEAR(make_discrete_operator<double>(2, 1.5).frac_lambdas(0), 4.75682846001088426687, 1e-13);
  const auto op = make_discrete_operator<double>(3, 3.0);
  EXPECT_NEAR(op.frac_lambdas(0), 27.0, 1e-12);
  EXPECT_NEAR(op.frac_lambdas(1), 140.296115413079060776, 1e-10);
}

TEST(DiscreteOperator, RejectsAlphaOutsideRange) {
  EXPECT_THROW(make_discrete_operator<double>(4, 1.0), Error);
  EXPECT_THROW(make_discrete_operator<double>(4, 4.0), Error);
}

TEST(DiscreteOperator, MonotoneInAlpha) {
  const auto lo = make_discrete_operator<double>(16, 1.3);
  const auto hi = make_discrete_operator<double>(16, 1.7);
  for (Index j = 0; j < 15; ++j) EXPECT_GT(hi.frac_lambdas(j), lo.frac_lambdas(j));
}

TEST(SpectralMatrix, Examples) {
  EXPECT_NEAR(frac_matrix_spectral<double>(2, 1.5)(0, 0), 4.75682846001088426687, 1e-13);
  EXPECT_TRUE(frac_matrix_spectral<double>(3, 2.0).isApprox(stiffness_matrix<double>(3), 1e-13));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> s(frac_matrix_spectral<double>(3, 1.2));
  EXPECT_NEAR(s.eigenvalues()(0), 3.73719281884655197790, 1e-12);
  EXPECT_NEAR(s.eigenvalues()(1), 7.22467405584207613886, 1e-12);
}

TEST(SpectralMatrix, PositiveDefiniteWithFloor) {
  for (double alpha : {1.2, 2.5, 3.9}) {
    for (Index n : {2, 8, 32}) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> s(frac_matrix_spectral<double>(n, alpha));
      EXPECT_GE(s.eigenvalues().minCoeff(), std::pow(4.0, alpha / 2.0));
    }
  }
}

TEST(Balakrishnan, Examples) {
  EXPECT_NEAR(frac_matrix_balakrishnan(2, 1.0)(0, 0), 2.82842712474619009760, 1e-7);
  EXPECT_LE(rel_entrywise(frac_matrix_balakrishnan(3, 1.5), frac_matrix_spectral<double>(3, 1.5)), 1e-6);
  for (Index n : {3, 9, 17}) {
    EXPECT_LE(rel_entrywise(frac_matrix_balakrishnan(n, 2.0), stiffness_matrix<double>(n)), 1e-6);
  }
}

TEST(Balakrishnan, AboveTwoAndSymmetry) {
  for (double alpha : {2.5, 3.0, 3.6}) {
    const Eigen::MatrixXd b = frac_matrix_balakrishnan(12, alpha);
    EXPECT_LE(rel_entrywise(b, frac_matrix_spectral<double>(12, alpha)), 1e-6) << alpha;
    EXPECT_EQ((b - b.transpose()).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Balakrishnan, Scalar) {
  EXPECT_NEAR(balakrishnan_scalar(1.0, 1.5), 1.0, 1e-10);
  EXPECT_NEAR(balakrishnan_scalar(4.0, 1.0), 2.0, 1e-9);
  EXPECT_NEAR(balakrishnan_scalar(8.0, 1.5), 4.75682846001088426687, 1e-8);
}

TEST(Balakrishnan, RejectsBadTolerance) {
  EXPECT_THROW(frac_matrix_balakrishnan(4, 1.5, 0.0), Error);
  EXPECT_THROW(frac_matrix_balakrishnan(4, 1.5, 1e-2), Error);
}

TEST(AdaptiveQuadrature, SmoothAndEndpointSingular) {
  auto f = [](double x) { return Eigen::MatrixXd::Constant(1, 1, std::exp(x)); };
  EXPECT_NEAR(integrate_adaptive(f, 0.0, 1.0, 1e-12)(0, 0), std::expm1(1.0), 1e-12);
  auto g = [](double x) { return Eigen::MatrixXd::Constant(1, 1, std::sqrt(x)); };
  EXPECT_NEAR(integrate_adaptive(g, 0.0, 1.0, 1e-10)(0, 0), 2.0 / 3.0, 1e-9);
}

TEST(Semigroup, IdentityAtZeroAndAdditivity) {
  const auto op = make_discrete_operator<double>(16, 1.5);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  GridField x = GridField::zero(16);
  for (auto& v : x.values) v = normal(rng);
  EXPECT_EQ(semigroup_apply(op, 0.0, x).values, x.values);
  const GridField a = semigroup_apply(op, 0.03, semigroup_apply(op, 0.02, x));
  const GridField b = semigroup_apply(op, 0.05, x);
  EXPECT_LE((a.values - b.values).cwiseAbs().maxCoeff(), 1e-12);

  const auto cop = make_continuous_operator(1.5, 20);
  SpectralField f{Eigen::VectorXd::Ones(20)};
  const SpectralField c = semigroup_apply(cop, 0.01, semigroup_apply(cop, 0.02, f));
  EXPECT_LE((c.coeffs - semigroup_apply(cop, 0.03, f).coeffs).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Semigroup, ContinuousHeatMode) {
  const auto op = make_continuous_operator(2.0, 4);
  const SpectralField out = semigroup_apply(op, 0.1, SpectralField::basis(1, 4));
  EXPECT_NEAR(out.coeffs(0), 0.372707838853437913578, 1e-14);
}

TEST(Green, DiscreteExample) {
  const auto op = make_discrete_operator<double>(2, 2.0);
  EXPECT_NEAR(green_kernel(op, 0.1, 0.5, 0.5), 0.898657928234443182860, 1e-14);
}

TEST(Green, Symmetry) {
  const auto d = make_discrete_operator<double>(16, 1.7);
  const auto c = make_continuous_operator(1.7, 1);
  EXPECT_DOUBLE_EQ(green_kernel(d, 0.05, 0.3, 0.7), green_kernel(d, 0.05, 0.7, 0.3));
  EXPECT_NEAR(green_kernel(c, 0.05, 0.3, 0.7), green_kernel(c, 0.05, 0.7, 0.3), 1e-15);
}

TEST(Green, ChapmanKolmogorov) {
  // int_0^1 G(s,x,z) G(t,z,y) dz: the product is a trig polynomial of degree < 2n, so
  // a uniform rule with 4n points is exact.
  const Index n = 12;
  const auto op = make_discrete_operator<double>(n, 1.5);
  const Index m = 4 * n;
  double sum = 0.0;
  for (Index k = 1; k < m; ++k) {
    const double z = static_cast<double>(k) / m;
    sum += green_kernel(op, 0.01, 0.3, z) * green_kernel(op, 0.02, z, 0.6);
  }
  EXPECT_NEAR(sum / m, green_kernel(op, 0.03, 0.3, 0.6), 1e-12);
}

TEST(Green, TruncationFailureForTinyTime) {
  const auto c = make_continuous_operator(1.5, 1);
  try {
    green_kernel(c, 1e-8, 0.5, 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TruncationFailure);
  }
}

TEST(Green, TruncationTailBound) {
  for (double alpha : {1.2, 2.0, 3.5}) {
    for (double t : {1e-4, 1e-2, 1.0}) {
      const Index big_n = green_truncation(alpha, t);
      double tail = 0.0;
      for (Index j = big_n + 1; j < big_n + 100000; ++j) {
        const double term = std::exp(-t * std::pow(j * std::numbers::pi, alpha));
        tail += term;
        if (term < 1e-30) break;
      }
      EXPECT_LT(tail, 1e-12) << alpha << " " << t;
    }
  }
}

TEST(Commutation, DiagonalInverseCommutesWithLiftedSemigroup) {
  for (Index n : {2, 8, 32}) {
    for (double delta : {0.5, 1.0}) {
      for (double t : {0.01, 0.1, 1.0}) EXPECT_LE(commutator_norm(n, 1.5, delta, t), 1e-10);
    }
  }
}

TEST(Commutation, LiftedSemigroupIsDiagonalDecay) {
  const auto op = make_discrete_operator<double>(8, 1.5);
  const Eigen::MatrixXd s = lifted_semigroup_matrix(op, 0.1);
  for (Index j = 0; j < 7; ++j) {
    EXPECT_NEAR(s(j, j), std::exp(-0.1 * op.frac_lambdas(j)), 1e-13);
  }
  EXPECT_LE((s - Eigen::MatrixXd(s.diagonal().asDiagonal())).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Gruenwald, Coefficients) {
  const auto c = gruenwald_coefficients(0.5, 4);
  ASSERT_EQ(c.size(), 5u);
  EXPECT_DOUBLE_EQ(c[0], 1.0);
  EXPECT_DOUBLE_EQ(c[1], -0.5);
  EXPECT_DOUBLE_EQ(c[2], -0.125);
  for (double r : {0.1, 0.37, 0.9}) EXPECT_DOUBLE_EQ(gruenwald_coefficients(r, 1)[1], -r);
  // gamma-ratio oracle for a mid-range index
  const double r = 0.3;
  const auto d = gruenwald_coefficients(r, 10);
  EXPECT_NEAR(d[10], std::tgamma(10 - r) / (std::tgamma(11.0) * std::tgamma(-r)), 1e-15);
}

TEST(Gruenwald, PartialSumsVanish) {
  const auto c = gruenwald_coefficients(0.5, 100000);
  double s = 0.0;
  double at_100 = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) {
    s += c[j];
    if (j == 100) at_100 = std::abs(s);
  }
  EXPECT_LT(std::abs(s), at_100);
  EXPECT_LT(std::abs(s), 1e-2);
}

TEST(Gruenwald, ApplyLimits) {
  auto zero = [](double) { return 0.0; };
  EXPECT_EQ(gruenwald_apply(0.5, 64, zero, 1.0), 0.0);
  auto lin = [](double x) { return x; };
  auto one = [](double) { return 1.0; };
  const double two_over_sqrt_pi = 1.12837916709551257390;
  const double e1 = std::abs(gruenwald_apply(0.5, 1 << 10, lin, 1.0) - two_over_sqrt_pi);
  const double e2 = std::abs(gruenwald_apply(0.5, 1 << 14, lin, 1.0) - two_over_sqrt_pi);
  EXPECT_LT(e2, e1);
  EXPECT_LT(e2, 1e-4);
  EXPECT_NEAR(gruenwald_apply(0.5, 1 << 14, one, 1.0), 0.564189583547756286948, 1e-2);
}

TEST(Gruenwald, SamplesMatchCallable) {
  const Index n = 50;
  std::vector<double> samples(n + 1);
  for (Index k = 0; k <= n; ++k) samples[static_cast<std::size_t>(k)] = std::sin(static_cast<double>(k) / n);
  auto f = [](double x) { return std::sin(x); };
  EXPECT_NEAR(gruenwald_apply(0.4, n, samples, n), gruenwald_apply(0.4, n, f, 1.0), 1e-14);
}
