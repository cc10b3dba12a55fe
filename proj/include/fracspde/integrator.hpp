#pragma once

#include <cstdint>
#include <vector>

#include "fracspde/fractional_operators.hpp"
#include "fracspde/lifting.hpp"
#include "fracspde/noise.hpp"

namespace fracspde {

/// Deterministic u_0 with a_j = j^{-(2 eta + 1)}, j = 1..N.
struct InitialCondition {
  double eta = 0.0;
  Eigen::VectorXd coeffs;

  Index truncation() const { return coeffs.size(); }
  SpectralField field() const { return SpectralField{coeffs}; }
  /// (sum_j lambda_j^{2 eta} a_j^2)^{1/2} with lambda_j = (j pi)^2.
  double domain_norm() const;
};

InitialCondition make_initial(double eta, Index truncation);

/// Exponential Euler in a diagonal (sine) basis:
///   c_{k+1} = exp(-dt mu) (c_k + b_k),  b_k = <g(u_k) sum_j dB_j e_j, e_l>_{l <= modes},
/// with b_k evaluated by synthesis on m points, pointwise product and sine analysis.
/// Both the level-n scheme (in E_n coordinates) and the spectral reference run on it.
class ModalStepper {
 public:
  ModalStepper(Eigen::VectorXd rates, NemytskiiMap g, Index quad_m, double dt,
               bool frozen_diffusion = false);

  Index modes() const { return rates_.size(); }
  Index quad_m() const { return transform_.m(); }

  void reset(const Eigen::Ref<const Eigen::VectorXd>& coeffs);
  /// Advance one step; `dw` must hold at least modes() increments (extra ones are ignored).
  void step(const Eigen::Ref<const Eigen::VectorXd>& dw);

  const Eigen::VectorXd& coeffs() const { return coeffs_; }

 private:
  Eigen::VectorXd rates_;
  Eigen::VectorXd decay_;
  NemytskiiMap g_;
  SineTransform transform_;
  bool frozen_;
  Eigen::MatrixXd frozen_inner_;
  Eigen::VectorXd coeffs_;
  Eigen::MatrixXd work_;
  Eigen::MatrixXd values_;
};

/// One exponential Euler step of du = -A^{alpha/2} u dt + g_n(u) dW_n in grid coordinates:
///   u_{k+1} = e^{-dt A^{alpha/2}} (u_k + g_n(u_k) dW).
/// `quad_m` defaults to 4n when zero.
GridField exp_euler_step(const GridField& state, double dt, const DiscreteFracOperator<double>& op,
                         const NemytskiiMap& g, const Eigen::Ref<const Eigen::VectorXd>& dw,
                         Index quad_m = 0);

/// Same step for the spectral Galerkin reference; `quad_m` defaults to 2N.
SpectralField exp_euler_step(const SpectralField& state, double dt,
                             const ContinuousFracOperator& op, const NemytskiiMap& g,
                             const Eigen::Ref<const Eigen::VectorXd>& dw, Index quad_m = 0);

enum class PathKind { Discrete, Reference };

/// States at t_0, t_s, t_2s, ... (stride s) plus the final time.
/// Discrete paths store grid values u_n(t); reference paths store sine coefficients.
struct SolutionPath {
  PathKind kind = PathKind::Discrete;
  Index level = 0;
  double alpha = 0.0;
  TimeGrid grid;
  Index stride = 1;
  std::uint64_t seed = 0;
  std::vector<Index> steps;
  std::vector<Eigen::VectorXd> states;

  Index size() const { return static_cast<Index>(states.size()); }
  double time(Index i) const { return grid.time(steps[static_cast<std::size_t>(i)]); }
  /// Sine coefficients of the (lifted) state i.
  Eigen::VectorXd coefficients(Index i) const;
};

struct SolveOptions {
  Index quad_factor = 0;  // m = factor * level; 0 picks 4 (discrete) or 2 (reference)
  bool frozen_diffusion = false;
  Index stride = 1;
};

SolutionPath solve_discrete(Index n, double alpha, const NemytskiiMap& g,
                            const InitialCondition& u0, const TimeGrid& grid,
                            const NoiseBundle& bundle, const SolveOptions& options = {});

SolutionPath solve_reference(Index truncation, double alpha, const NemytskiiMap& g,
                             const InitialCondition& u0, const TimeGrid& grid,
                             const NoiseBundle& bundle, const SolveOptions& options = {});

/// Discrete rates lambda_jn^{alpha/2}, j < n.
Eigen::VectorXd discrete_rates(Index n, double alpha);
/// Continuous rates (j pi)^alpha, j <= N.
Eigen::VectorXd continuous_rates(Index truncation, double alpha);

}  // namespace fracspde
