#include "fracspde/integrator.hpp"

#include <cmath>
#include <limits>

namespace fracspde {

double InitialCondition::domain_norm() const {
  double sum = 0.0;
  for (Index j = 1; j <= coeffs.size(); ++j) {
    sum += std::pow(continuous_lambda<double>(j), 2.0 * eta) * coeffs(j - 1) * coeffs(j - 1);
  }
  return std::sqrt(sum);
}

InitialCondition make_initial(double eta, Index truncation) {
  if (!(eta >= 0.0)) throw Error(ErrorKind::InvalidParameter, "eta must be >= 0");
  if (truncation < 1) throw Error(ErrorKind::InvalidParameter, "truncation must be >= 1");
  InitialCondition u0{eta, Eigen::VectorXd(truncation)};
  for (Index j = 1; j <= truncation; ++j) {
    u0.coeffs(j - 1) = std::pow(static_cast<double>(j), -(2.0 * eta + 1.0));
  }
  return u0;
}

Eigen::VectorXd discrete_rates(Index n, double alpha) {
  require_level(n);
  require_alpha(alpha);
  Eigen::VectorXd r(n - 1);
  for (Index j = 1; j < n; ++j) r(j - 1) = std::pow(discrete_lambda<double>(j, n), 0.5 * alpha);
  return r;
}

Eigen::VectorXd continuous_rates(Index truncation, double alpha) {
  return make_continuous_operator(alpha, truncation).frac_lambdas;
}

ModalStepper::ModalStepper(Eigen::VectorXd rates, NemytskiiMap g, Index quad_m, double dt,
                           bool frozen_diffusion)
    : rates_(std::move(rates)),
      g_(std::move(g)),
      transform_(rates_.size(), quad_m),
      frozen_(frozen_diffusion),
      coeffs_(Eigen::VectorXd::Zero(rates_.size())),
      work_(rates_.size(), 2),
      values_(transform_.point_count(), 2) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidParameter, "dt must be positive");
  decay_ = (-dt * rates_.array()).exp();
  // Stiff modes (alpha > 2, fine levels) would otherwise drag the state through subnormals,
  // which costs a large constant factor for no visible change in any output.
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double dead = eps * eps;
  decay_ = (decay_.array() < dead).select(0.0, decay_);
}

void ModalStepper::reset(const Eigen::Ref<const Eigen::VectorXd>& coeffs) {
  if (coeffs.size() != modes()) {
    throw Error(ErrorKind::DimensionMismatch, "initial coefficients do not match mode count");
  }
  coeffs_ = coeffs;
  if (frozen_ && !g_.identically_zero) {
    Eigen::VectorXd mult = transform_.synthesize(coeffs_);
    for (auto& v : mult) v = g_(v);
    frozen_inner_ = transform_.table().transpose() * mult.asDiagonal() * transform_.table() /
                    static_cast<double>(transform_.m());
  }
}

void ModalStepper::step(const Eigen::Ref<const Eigen::VectorXd>& dw) {
  const Index k = modes();
  if (dw.size() < k) {
    throw Error(ErrorKind::InsufficientNoise, "step received fewer increments than modes");
  }
  if (!g_.identically_zero) {
    if (frozen_) {
      coeffs_ += frozen_inner_ * dw.head(k);
    } else {
      work_.col(0) = coeffs_;
      work_.col(1) = dw.head(k);
      values_.noalias() = transform_.table() * work_;
      for (Index i = 0; i < values_.rows(); ++i) values_(i, 1) *= g_(values_(i, 0));
      coeffs_.noalias() += transform_.table().transpose() * values_.col(1) /
                           static_cast<double>(transform_.m());
    }
  }
  coeffs_.array() *= decay_.array();
  if (!coeffs_.allFinite()) {
    throw Error(ErrorKind::Divergence, "non-finite state after exponential Euler step");
  }
}

GridField exp_euler_step(const GridField& state, double dt, const DiscreteFracOperator<double>& op,
                         const NemytskiiMap& g, const Eigen::Ref<const Eigen::VectorXd>& dw,
                         Index quad_m) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidParameter, "dt must be positive");
  if (state.n != op.n || state.values.size() != op.size() || dw.size() != op.size()) {
    throw Error(ErrorKind::DimensionMismatch, "state, operator and noise sizes disagree");
  }
  const Index m = quad_m > 0 ? quad_m : 4 * op.n;
  GridField y = state;
  if (!g.identically_zero) y.values += diffusion_matrix_gn(g, state, m) * dw;
  GridField out = semigroup_apply(op, dt, y);
  if (!out.values.allFinite()) {
    throw Error(ErrorKind::Divergence, "non-finite state after exponential Euler step");
  }
  return out;
}

SpectralField exp_euler_step(const SpectralField& state, double dt,
                             const ContinuousFracOperator& op, const NemytskiiMap& g,
                             const Eigen::Ref<const Eigen::VectorXd>& dw, Index quad_m) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidParameter, "dt must be positive");
  if (state.truncation() != op.truncation || dw.size() != op.truncation) {
    throw Error(ErrorKind::DimensionMismatch, "state, operator and noise sizes disagree");
  }
  const Index m = quad_m > 0 ? quad_m : 2 * op.truncation;
  SpectralField y = state;
  if (!g.identically_zero) {
    const SineTransform st(op.truncation, m);
    Eigen::VectorXd mult = st.synthesize(state.coeffs);
    for (auto& v : mult) v = g(v);
    y.coeffs += st.analyze(mult.cwiseProduct(st.synthesize(dw)));
  }
  SpectralField out = semigroup_apply(op, dt, y);
  if (!out.coeffs.allFinite()) {
    throw Error(ErrorKind::Divergence, "non-finite state after exponential Euler step");
  }
  return out;
}

Eigen::VectorXd SolutionPath::coefficients(Index i) const {
  const auto& s = states[static_cast<std::size_t>(i)];
  if (kind == PathKind::Reference) return s;
  return interpolate_coefficients(eigen_system<double>(level), s);
}

namespace {

void check_bundle(const NoiseBundle& bundle, const TimeGrid& grid, Index needed) {
  if (!(bundle.grid() == grid)) {
    throw Error(ErrorKind::TimeGridMismatch, "noise bundle and solver use different time grids");
  }
  if (bundle.modes() < needed) {
    throw Error(ErrorKind::InsufficientNoise, "bundle has " + std::to_string(bundle.modes()) +
                                                  " modes, solver needs " +
                                                  std::to_string(needed));
  }
}

template <typename Store>
void run_path(ModalStepper& stepper, const TimeGrid& grid, const NoiseBundle& bundle, Index stride,
              SolutionPath& path, Store store) {
  if (stride < 1) throw Error(ErrorKind::InvalidParameter, "stride must be >= 1");
  path.stride = stride;
  path.steps.push_back(0);
  path.states.push_back(store(stepper.coeffs()));
  for (Index k = 0; k < grid.steps; ++k) {
    stepper.step(bundle.step_increments(k, stepper.modes()));
    const Index done = k + 1;
    if (done % stride == 0 || done == grid.steps) {
      path.steps.push_back(done);
      path.states.push_back(store(stepper.coeffs()));
    }
  }
}

}  // namespace

SolutionPath solve_discrete(Index n, double alpha, const NemytskiiMap& g,
                            const InitialCondition& u0, const TimeGrid& grid,
                            const NoiseBundle& bundle, const SolveOptions& options) {
  require_level(n);
  check_bundle(bundle, grid, n - 1);
  const auto es = eigen_system<double>(n);
  const Index factor = options.quad_factor > 0 ? options.quad_factor : 4;
  ModalStepper stepper(discrete_rates(n, alpha), g, factor * n, grid.dt(),
                       options.frozen_diffusion);
  const GridField start = project_Pn(u0.field(), n);
  stepper.reset(interpolate_coefficients(es, start.values));

  SolutionPath path;
  path.kind = PathKind::Discrete;
  path.level = n;
  path.alpha = alpha;
  path.grid = grid;
  path.seed = bundle.seed();
  run_path(stepper, grid, bundle, options.stride, path,
           [&](const Eigen::VectorXd& c) -> Eigen::VectorXd { return es.vectors * c; });
  path.states.front() = start.values;
  return path;
}

SolutionPath solve_reference(Index truncation, double alpha, const NemytskiiMap& g,
                             const InitialCondition& u0, const TimeGrid& grid,
                             const NoiseBundle& bundle, const SolveOptions& options) {
  if (truncation < 1) throw Error(ErrorKind::InvalidParameter, "truncation must be >= 1");
  check_bundle(bundle, grid, truncation);
  const Index factor = options.quad_factor > 0 ? options.quad_factor : 2;
  ModalStepper stepper(continuous_rates(truncation, alpha), g, factor * truncation, grid.dt(),
                       options.frozen_diffusion);
  Eigen::VectorXd start = Eigen::VectorXd::Zero(truncation);
  const Index k = std::min(truncation, u0.truncation());
  start.head(k) = u0.coeffs.head(k);
  stepper.reset(start);

  SolutionPath path;
  path.kind = PathKind::Reference;
  path.level = truncation;
  path.alpha = alpha;
  path.grid = grid;
  path.seed = bundle.seed();
  run_path(stepper, grid, bundle, options.stride, path,
           [](const Eigen::VectorXd& c) -> Eigen::VectorXd { return c; });
  return path;
}

}  // namespace fracspde
