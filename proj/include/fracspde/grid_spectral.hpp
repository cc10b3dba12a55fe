#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "fracspde/error.hpp"

namespace fracspde {

using Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Uniform partition of [0,1] into n subintervals; only interior points carry unknowns.
struct GridSpec {
  Index n = 0;
  double h = 0.0;

  Index interior_count() const { return n - 1; }
  double point(Index k) const { return static_cast<double>(k) / static_cast<double>(n); }
  std::vector<double> interior_points() const;
};

inline void require_level(Index n) {
  if (n < 2) {
    throw Error(ErrorKind::InvalidLevel, "level n must be >= 2, got " + std::to_string(n));
  }
}

GridSpec make_grid(Index n);

/// Discrete eigenvalue 4 n^2 sin^2(j pi / 2n) of the scaled finite-difference Laplacian.
template <typename Scalar = double>
Scalar discrete_lambda(Index j, Index n) {
  using std::sin;
  const Scalar s = sin(Scalar(j) * std::numbers::pi_v<Scalar> / (Scalar(2) * Scalar(n)));
  return Scalar(4) * Scalar(n) * Scalar(n) * s * s;
}

/// Continuous Dirichlet eigenvalue (j pi)^2.
template <typename Scalar = double>
Scalar continuous_lambda(Index j) {
  const Scalar x = Scalar(j) * std::numbers::pi_v<Scalar>;
  return x * x;
}

/// Closed-form eigenpairs of n^2 tridiag(-1, 2, -1).
///
/// Column j-1 of `vectors` holds e_j^n with entries sqrt(2/n) sin(j k pi / n),
/// k = 1..n-1. The matrix is symmetric and orthogonal, so it is its own inverse.
template <typename Scalar = double>
struct EigenSystem {
  Index n = 0;
  VectorX<Scalar> lambdas;
  MatrixX<Scalar> vectors;

  Index size() const { return n - 1; }
};

template <typename Scalar = double>
EigenSystem<Scalar> eigen_system(Index n) {
  require_level(n);
  using std::sin;
  using std::sqrt;
  const Index dim = n - 1;
  EigenSystem<Scalar> es;
  es.n = n;
  es.lambdas.resize(dim);
  es.vectors.resize(dim, dim);
  const Scalar scale = sqrt(Scalar(2) / Scalar(n));
  const Scalar pi = std::numbers::pi_v<Scalar>;
  for (Index j = 1; j <= dim; ++j) {
    es.lambdas(j - 1) = discrete_lambda<Scalar>(j, n);
    for (Index k = 1; k <= dim; ++k) {
      // reduce j*k mod 2n before scaling to keep the argument small
      const Index r = (j * k) % (2 * n);
      es.vectors(k - 1, j - 1) = scale * sin(Scalar(r) * pi / Scalar(n));
    }
  }
  return es;
}

template <typename Scalar = double>
MatrixX<Scalar> stiffness_matrix(Index n) {
  require_level(n);
  const Index dim = n - 1;
  const Scalar n2 = Scalar(n) * Scalar(n);
  MatrixX<Scalar> a = MatrixX<Scalar>::Zero(dim, dim);
  for (Index i = 0; i < dim; ++i) {
    a(i, i) = Scalar(2) * n2;
    if (i + 1 < dim) {
      a(i, i + 1) = -n2;
      a(i + 1, i) = -n2;
    }
  }
  return a;
}

/// Coefficients a_j = <f, e_j> against e_j(x) = sqrt(2) sin(j pi x), j = 1..size().
struct SpectralField {
  Eigen::VectorXd coeffs;

  Index truncation() const { return coeffs.size(); }
  /// L2(0,1) norm; equals the Euclidean norm of the coefficients.
  double l2_norm() const { return coeffs.norm(); }
  double coefficient(Index j) const { return j <= coeffs.size() ? coeffs(j - 1) : 0.0; }

  static SpectralField basis(Index j, Index truncation);
};

/// Level-n state in the standard basis of R^{n-1}.
struct GridField {
  Index n = 0;
  Eigen::VectorXd values;

  static GridField zero(Index n) { return {n, Eigen::VectorXd::Zero(n - 1)}; }
};

/// e_j evaluated at x.
inline double sine_basis(Index j, double x) {
  return std::numbers::sqrt2 * std::sin(static_cast<double>(j) * std::numbers::pi * x);
}

/// Orthonormal discrete sine transform between the first `modes` coefficients and the
/// values at x_k = k/m, k = 1..m-1.
///
/// synthesize evaluates sum_j a_j sqrt(2) sin(j pi x_k). analyze applies the exact
/// inverse for band-limited data: a_j = (sqrt(2)/m) sum_k f(x_k) sin(j pi x_k), which
/// requires modes <= m-1.
class SineTransform {
 public:
  SineTransform(Index modes, Index m);

  Index modes() const { return modes_; }
  Index m() const { return m_; }
  Index point_count() const { return m_ - 1; }

  Eigen::VectorXd synthesize(const Eigen::Ref<const Eigen::VectorXd>& coeffs) const;
  Eigen::VectorXd analyze(const Eigen::Ref<const Eigen::VectorXd>& values) const;

  /// Column-wise variants; columns may carry fewer than modes() coefficients.
  Eigen::MatrixXd synthesize_columns(const Eigen::Ref<const Eigen::MatrixXd>& coeffs) const;

  /// Table of sqrt(2) sin(j pi k / m); rows are points, columns are modes.
  const Eigen::MatrixXd& table() const { return table_; }

 private:
  Index modes_;
  Index m_;
  Eigen::MatrixXd table_;
};

Eigen::VectorXd synthesize(const SpectralField& field, Index m);
SpectralField analyze(const Eigen::Ref<const Eigen::VectorXd>& values, Index modes);

/// Values of a grid field's interpolant E_n x on the m-point grid.
Eigen::VectorXd synthesize(const GridField& field, Index m);

}  // namespace fracspde
