#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fracspde/grid_spectral.hpp"

namespace fracspde {

/// V * (a_1, ..., a_{n-1}); coefficients beyond n-1 are dropped, missing ones are zero.
template <typename Scalar, typename Derived>
VectorX<Scalar> project_coefficients(const EigenSystem<Scalar>& es,
                                     const Eigen::MatrixBase<Derived>& coeffs) {
  const Index dim = es.size();
  VectorX<Scalar> head = VectorX<Scalar>::Zero(dim);
  const Index k = std::min<Index>(dim, coeffs.size());
  head.head(k) = coeffs.head(k).template cast<Scalar>();
  return es.vectors * head;
}

/// V^T x: the sine coefficients of E_n x.
template <typename Scalar, typename Derived>
VectorX<Scalar> interpolate_coefficients(const EigenSystem<Scalar>& es,
                                         const Eigen::MatrixBase<Derived>& x) {
  return es.vectors.transpose() * x;
}

/// P_n f, with (P_n f)_k = sum_{j<n} <f, e_j> e_j^n(x_k).
GridField project_Pn(const SpectralField& f, Index n);

/// E_n x = sum_k <x, e_k^n> e_k.
SpectralField interpolate_En(const GridField& x);

/// Pointwise diffusion coefficient with its declared constants.
///
/// `fn` must be reentrant: it is called concurrently from Monte-Carlo workers.
/// `delta` and `b_delta` are taken on trust and only feed rate reporting.
struct NemytskiiMap {
  std::string name;
  std::function<double(double)> fn;
  double b0 = 0.0;
  double lipschitz = 0.0;
  double delta = 0.0;
  std::optional<double> b_delta;
  bool identically_zero = false;

  double operator()(double x) const { return fn(x); }
};

/// Built-in maps: "cos", "one", "tanh-scaled", "zero".
NemytskiiMap nemytskii_catalogue(const std::string& name);
std::vector<std::string> nemytskii_names();

NemytskiiMap constant_map(double c);

/// g(f(x_k)) at x_k = k/m, k = 1..m-1. Requires m >= 2 * truncation.
Eigen::VectorXd nemytskii_eval(const NemytskiiMap& g, const SpectralField& f, Index m);

/// g_n(y): column j is P_n of the first n-1 sine coefficients of g(E_n y(.)) e_j,
/// with inner products evaluated by discrete sine analysis on m points. Requires m >= 4n.
Eigen::MatrixXd diffusion_matrix_gn(const NemytskiiMap& g, const GridField& y, Index m);

/// g_n(y) dw without forming the matrix.
Eigen::VectorXd diffusion_apply(const NemytskiiMap& g, const GridField& y,
                                const Eigen::Ref<const Eigen::VectorXd>& dw, Index m);

}  // namespace fracspde
