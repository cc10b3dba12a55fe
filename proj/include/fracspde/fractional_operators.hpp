#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "fracspde/grid_spectral.hpp"

namespace fracspde {

/// Fractional orders accepted by the operators: 1 < alpha < 4.
inline void require_alpha(double alpha) {
  if (!(alpha > 1.0 && alpha < 4.0)) {
    throw Error(ErrorKind::InvalidParameter,
                "alpha must lie in (1, 4), got " + std::to_string(alpha));
  }
}

/// A^{alpha/2} of the level-n scaled stiffness matrix, held in its eigenbasis.
template <typename Scalar = double>
struct DiscreteFracOperator {
  Index n = 0;
  Scalar alpha = 0;
  VectorX<Scalar> frac_lambdas;
  EigenSystem<Scalar> eigensystem;

  Index size() const { return n - 1; }
};

template <typename Scalar = double>
DiscreteFracOperator<Scalar> make_discrete_operator(Index n, Scalar alpha) {
  require_level(n);
  require_alpha(static_cast<double>(alpha));
  DiscreteFracOperator<Scalar> op;
  op.n = n;
  op.alpha = alpha;
  op.eigensystem = eigen_system<Scalar>(n);
  op.frac_lambdas = op.eigensystem.lambdas.array().pow(alpha / Scalar(2)).matrix();
  return op;
}

/// (-Delta)^{alpha/2} on (0,1) with Dirichlet conditions, truncated to N sine modes.
struct ContinuousFracOperator {
  double alpha = 0.0;
  Index truncation = 0;
  Eigen::VectorXd frac_lambdas;  // (j pi)^alpha

  Index size() const { return truncation; }
};

ContinuousFracOperator make_continuous_operator(double alpha, Index truncation);

/// V diag(lambda^{alpha/2}) V^T from the closed-form eigenpairs.
template <typename Scalar = double>
MatrixX<Scalar> frac_matrix_spectral(Index n, Scalar alpha) {
  const auto op = make_discrete_operator<Scalar>(n, alpha);
  const auto& v = op.eigensystem.vectors;
  return v * op.frac_lambdas.asDiagonal() * v.transpose();
}

/// A^{alpha/2} by numerical quadrature of the Balakrishnan integral
///   (sin(a pi)/pi) int_0^inf z^{a-1} A (zI + A)^{-1} dz,   a = alpha/2.
///
/// The integral is split at z = |A|_inf and both halves are mapped to [0,1] by power
/// substitutions that remove the endpoint singularities; each half is integrated by
/// globally adaptive Gauss-Legendre bisection. Resolvents use tridiagonal solves.
/// Accepts alpha in (0,4). For alpha in (2,4) the result is A * A^{alpha/2 - 1}; for
/// |alpha - 2| < 1e-9 the stiffness matrix is returned directly.
Eigen::MatrixXd frac_matrix_balakrishnan(Index n, double alpha, double rel_tol = 1e-8);

/// lambda^{alpha/2} through the same scalar integral; requires 0 < alpha < 2.
double balakrishnan_scalar(double lambda, double alpha, double rel_tol = 1e-10);

/// Globally adaptive Gauss-Legendre quadrature of a matrix-valued integrand on [a,b].
///
/// Intervals are bisected (largest error first) until the summed estimate
/// |GL(I) - GL(I_left) - GL(I_right)|_F is below rel_tol * |integral|_F.
Eigen::MatrixXd integrate_adaptive(const std::function<Eigen::MatrixXd(double)>& f, double a,
                                   double b, double rel_tol, int max_intervals = 4096);

GridField semigroup_apply(const DiscreteFracOperator<double>& op, double t,
                          const GridField& state);
SpectralField semigroup_apply(const ContinuousFracOperator& op, double t,
                              const SpectralField& state);

/// sum_{k<n} exp(-t lambda_kn^{alpha/2}) e_k(x) e_k(y).
double green_kernel(const DiscreteFracOperator<double>& op, double t, double x, double y);

/// Series for the continuous kernel, truncated where the tail is below 1e-12.
/// Rejects t < 1e-6 with a truncation failure.
double green_kernel(const ContinuousFracOperator& op, double t, double x, double y);

/// Number of terms needed so that sum_{j>N} exp(-t (j pi)^alpha) < tol.
Index green_truncation(double alpha, double t, double tol = 1e-12);

/// Matrix of E_n exp(-t A_n^{alpha/2}) P_n on span(e_1..e_{n-1}), built column by column
/// from the lifting maps.
Eigen::MatrixXd lifted_semigroup_matrix(const DiscreteFracOperator<double>& op, double t);

/// Matrix of A^{-delta} on span(e_1..e_{modes}): diag((j pi)^{-2 delta}).
Eigen::MatrixXd inverse_power_matrix(double delta, Index modes);

/// Frobenius norm of [A^{-delta}, E_n exp(-t A_n^{alpha/2}) P_n] on the first n-1 modes.
double commutator_norm(Index n, double alpha, double delta, double t);

/// C_j^{-r-1} = Gamma(j-r) / (Gamma(j+1) Gamma(-r)) for j = 0..count, by recurrence.
std::vector<double> gruenwald_coefficients(double r, Index count);

/// n^r sum_{j=0}^{i} C_j f((i-j)/n) with samples[k] = f(k/n); evaluates at x = i/n.
double gruenwald_apply(double r, Index n, std::span<const double> samples, Index i);

/// n^r sum_{j=0}^{[nx]} C_j f(x - j/n).
double gruenwald_apply(double r, Index n, const std::function<double(double)>& f, double x);

}  // namespace fracspde
