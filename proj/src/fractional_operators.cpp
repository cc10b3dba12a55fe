#include "fracspde/fractional_operators.hpp"

#include "fracspde/lifting.hpp"

#include <algorithm>
#include <array>
#include <limits>

namespace fracspde {

namespace {

constexpr int kGaussPoints = 15;

struct GaussLegendreRule {
  std::array<double, kGaussPoints> nodes{};
  std::array<double, kGaussPoints> weights{};

  GaussLegendreRule() {
    constexpr int n = kGaussPoints;
    for (int i = 0; i < n; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      nodes[static_cast<std::size_t>(i)] = x;
      weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

const GaussLegendreRule& gauss_rule() {
  static const GaussLegendreRule rule;
  return rule;
}

Eigen::MatrixXd gauss_legendre(const std::function<Eigen::MatrixXd(double)>& f, double a,
                               double b) {
  const auto& rule = gauss_rule();
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  Eigen::MatrixXd acc = rule.weights[0] * f(mid + half * rule.nodes[0]);
  for (int i = 1; i < kGaussPoints; ++i) {
    acc += rule.weights[static_cast<std::size_t>(i)] *
           f(mid + half * rule.nodes[static_cast<std::size_t>(i)]);
  }
  return half * acc;
}

struct Piece {
  double a;
  double b;
  Eigen::MatrixXd left;
  Eigen::MatrixXd right;
  double err;

  Eigen::MatrixXd fine() const { return left + right; }
};

Piece make_piece(const std::function<Eigen::MatrixXd(double)>& f, double a, double b,
                 const Eigen::MatrixXd& coarse) {
  const double m = 0.5 * (a + b);
  Piece p{a, b, gauss_legendre(f, a, m), gauss_legendre(f, m, b), 0.0};
  p.err = (coarse - p.left - p.right).norm();
  return p;
}

/// Solves (d I + e A) X = A for A = n^2 tridiag(-1, 2, -1) with the Thomas algorithm.
Eigen::MatrixXd resolvent_times_stiffness(Index n, double d, double e) {
  const Index dim = n - 1;
  const double n2 = static_cast<double>(n) * static_cast<double>(n);
  const double diag = d + 2.0 * e * n2;
  const double off = -e * n2;

  Eigen::MatrixXd x = stiffness_matrix<double>(n);
  Eigen::VectorXd cprime(dim);
  double denom = diag;
  cprime(0) = off / denom;
  x.row(0) /= denom;
  for (Index i = 1; i < dim; ++i) {
    denom = diag - off * cprime(i - 1);
    cprime(i) = off / denom;
    x.row(i) = (x.row(i) - off * x.row(i - 1)) / denom;
  }
  for (Index i = dim - 2; i >= 0; --i) {
    x.row(i) -= cprime(i) * x.row(i + 1);
  }
  return x;
}

void require_tolerance(double rel_tol, double cap) {
  if (!(rel_tol > 0.0 && rel_tol <= cap)) {
    throw Error(ErrorKind::InvalidParameter,
                "relative tolerance must lie in (0, " + std::to_string(cap) + "]");
  }
}

}  // namespace

Eigen::MatrixXd integrate_adaptive(const std::function<Eigen::MatrixXd(double)>& f, double a,
                                   double b, double rel_tol, int max_intervals) {
  std::vector<Piece> pieces;
  pieces.push_back(make_piece(f, a, b, gauss_legendre(f, a, b)));
  Eigen::MatrixXd total = pieces.front().fine();
  double err_total = pieces.front().err;

  while (true) {
    const double scale = total.norm();
    if (err_total <= rel_tol * scale || err_total <= std::numeric_limits<double>::min()) {
      break;
    }
    if (static_cast<int>(pieces.size()) >= max_intervals) {
      throw QuadratureError("adaptive Gauss-Legendre exceeded " + std::to_string(max_intervals) +
                                " intervals",
                            scale > 0.0 ? err_total / scale : err_total);
    }
    const auto worst = std::max_element(pieces.begin(), pieces.end(),
                                        [](const Piece& l, const Piece& r) { return l.err < r.err; });
    Piece parent = std::move(*worst);
    *worst = pieces.back();
    pieces.pop_back();

    const double mid = 0.5 * (parent.a + parent.b);
    Piece lo = make_piece(f, parent.a, mid, parent.left);
    Piece hi = make_piece(f, mid, parent.b, parent.right);
    total += lo.fine() + hi.fine() - parent.fine();
    err_total += lo.err + hi.err - parent.err;
    pieces.push_back(std::move(lo));
    pieces.push_back(std::move(hi));
  }

  // Re-sum from the pieces to drop the drift of the running update.
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(total.rows(), total.cols());
  std::sort(pieces.begin(), pieces.end(), [](const Piece& l, const Piece& r) { return l.a < r.a; });
  for (const auto& p : pieces) sum += p.fine();
  return sum;
}

Eigen::MatrixXd frac_matrix_balakrishnan(Index n, double alpha, double rel_tol) {
  require_level(n);
  // The integral itself holds for any order in (0, 4), so the oracle accepts alpha <= 1 too.
  if (!(alpha > 0.0 && alpha < 4.0)) {
    throw Error(ErrorKind::InvalidParameter, "alpha must lie in (0, 4) for the quadrature");
  }
  require_tolerance(rel_tol, 1e-4);
  if (std::abs(alpha - 2.0) < 1e-9) return stiffness_matrix<double>(n);

  const Eigen::MatrixXd a_mat = stiffness_matrix<double>(n);
  const double half = 0.5 * alpha;
  const double b = half > 1.0 ? half - 1.0 : half;
  const double split = a_mat.cwiseAbs().rowwise().sum().maxCoeff();
  const double q = 1.0 / (1.0 - b);

  // z = split * s^{1/b} on [0, split]; z = split / v^q on [split, inf).
  auto head = [&](double s) { return resolvent_times_stiffness(n, split * std::pow(s, 1.0 / b), 1.0); };
  auto tail = [&](double v) { return resolvent_times_stiffness(n, split, std::pow(v, q)); };

  const double piece_tol = 0.25 * rel_tol;
  const Eigen::MatrixXd h = integrate_adaptive(head, 0.0, 1.0, piece_tol);
  const Eigen::MatrixXd t = integrate_adaptive(tail, 0.0, 1.0, piece_tol);

  Eigen::MatrixXd result = (std::sin(b * std::numbers::pi) / std::numbers::pi) *
                           std::pow(split, b) * (h / b + q * t);
  if (half > 1.0) result = a_mat * result;
  return 0.5 * (result + result.transpose());
}

double balakrishnan_scalar(double lambda, double alpha, double rel_tol) {
  if (!(lambda > 0.0)) {
    throw Error(ErrorKind::InvalidParameter, "lambda must be positive");
  }
  if (!(alpha > 0.0 && alpha < 2.0)) {
    throw Error(ErrorKind::InvalidParameter, "scalar integral requires 0 < alpha < 2");
  }
  require_tolerance(rel_tol, 1e-4);
  const double a = 0.5 * alpha;
  const double q = 1.0 / (1.0 - a);
  auto scalar = [](double v) { return Eigen::MatrixXd::Constant(1, 1, v); };
  auto head = [&](double s) { return scalar(lambda / (lambda * std::pow(s, 1.0 / a) + lambda)); };
  auto tail = [&](double v) { return scalar(lambda / (lambda + std::pow(v, q) * lambda)); };
  const double h = integrate_adaptive(head, 0.0, 1.0, 0.25 * rel_tol)(0, 0);
  const double t = integrate_adaptive(tail, 0.0, 1.0, 0.25 * rel_tol)(0, 0);
  return (std::sin(a * std::numbers::pi) / std::numbers::pi) * std::pow(lambda, a) *
         (h / a + q * t);
}

ContinuousFracOperator make_continuous_operator(double alpha, Index truncation) {
  require_alpha(alpha);
  if (truncation < 1) {
    throw Error(ErrorKind::InvalidParameter, "truncation must be >= 1");
  }
  ContinuousFracOperator op{alpha, truncation, Eigen::VectorXd(truncation)};
  for (Index j = 1; j <= truncation; ++j) {
    op.frac_lambdas(j - 1) = std::pow(static_cast<double>(j) * std::numbers::pi, alpha);
  }
  return op;
}

GridField semigroup_apply(const DiscreteFracOperator<double>& op, double t,
                          const GridField& state) {
  if (!(t >= 0.0)) throw Error(ErrorKind::InvalidParameter, "time must be nonnegative");
  if (state.n != op.n || state.values.size() != op.size()) {
    throw Error(ErrorKind::DimensionMismatch, "state level does not match operator level");
  }
  if (t == 0.0) return state;
  const auto& v = op.eigensystem.vectors;
  const Eigen::VectorXd decay = (-t * op.frac_lambdas.array()).exp();
  Eigen::VectorXd modal = v.transpose() * state.values;
  modal.array() *= decay.array();
  return GridField{op.n, v * modal};
}

Eigen::MatrixXd lifted_semigroup_matrix(const DiscreteFracOperator<double>& op, double t) {
  const Index dim = op.size();
  Eigen::MatrixXd m(dim, dim);
  for (Index j = 1; j <= dim; ++j) {
    const GridField moved = semigroup_apply(op, t, project_Pn(SpectralField::basis(j, dim), op.n));
    m.col(j - 1) = interpolate_En(moved).coeffs;
  }
  return m;
}

Eigen::MatrixXd inverse_power_matrix(double delta, Index modes) {
  Eigen::VectorXd d(modes);
  for (Index j = 1; j <= modes; ++j) d(j - 1) = std::pow(continuous_lambda<double>(j), -delta);
  return d.asDiagonal();
}

double commutator_norm(Index n, double alpha, double delta, double t) {
  const auto op = make_discrete_operator<double>(n, alpha);
  const Eigen::MatrixXd s = lifted_semigroup_matrix(op, t);
  const Eigen::MatrixXd a = inverse_power_matrix(delta, op.size());
  return (a * s - s * a).norm();
}

SpectralField semigroup_apply(const ContinuousFracOperator& op, double t,
                              const SpectralField& state) {
  if (!(t >= 0.0)) throw Error(ErrorKind::InvalidParameter, "time must be nonnegative");
  if (state.truncation() > op.truncation) {
    throw Error(ErrorKind::DimensionMismatch, "state has more modes than the operator");
  }
  if (t == 0.0) return state;
  const Index k = state.truncation();
  SpectralField out = state;
  out.coeffs.array() *= (-t * op.frac_lambdas.head(k).array()).exp();
  return out;
}

double green_kernel(const DiscreteFracOperator<double>& op, double t, double x, double y) {
  if (!(t > 0.0)) throw Error(ErrorKind::InvalidParameter, "kernel needs t > 0");
  double sum = 0.0;
  for (Index k = 1; k < op.n; ++k) {
    sum += std::exp(-t * op.frac_lambdas(k - 1)) * sine_basis(k, x) * sine_basis(k, y);
  }
  return sum;
}

Index green_truncation(double alpha, double t, double tol) {
  if (!(t >= 1e-6)) {
    throw Error(ErrorKind::TruncationFailure,
                "kernel series cannot be truncated reliably for t < 1e-6");
  }
  const double pia = std::pow(std::numbers::pi, alpha);
  // Convexity of j^alpha gives sum_{j>N} exp(-t (j pi)^alpha)
  //   <= exp(-t ((N+1) pi)^alpha) / (1 - exp(-t alpha pi^alpha (N+1)^{alpha-1})).
  auto tail_bound = [&](Index big_n) {
    const double m = static_cast<double>(big_n + 1);
    const double first = std::exp(-t * pia * std::pow(m, alpha));
    const double ratio = std::exp(-t * alpha * pia * std::pow(m, alpha - 1.0));
    return first / (1.0 - ratio);
  };
  constexpr Index cap = Index{1} << 28;
  Index hi = 1;
  while (tail_bound(hi) >= tol) {
    hi *= 2;
    if (hi > cap) throw Error(ErrorKind::TruncationFailure, "kernel truncation exceeds cap");
  }
  Index lo = hi / 2;
  while (hi - lo > 1) {
    const Index mid = lo + (hi - lo) / 2;
    (tail_bound(mid) < tol ? hi : lo) = mid;
  }
  return hi;
}

double green_kernel(const ContinuousFracOperator& op, double t, double x, double y) {
  if (!(t > 0.0)) throw Error(ErrorKind::InvalidParameter, "kernel needs t > 0");
  const Index big_n = green_truncation(op.alpha, t);
  double sum = 0.0;
  for (Index k = 1; k <= big_n; ++k) {
    const double lam = std::pow(static_cast<double>(k) * std::numbers::pi, op.alpha);
    sum += std::exp(-t * lam) * sine_basis(k, x) * sine_basis(k, y);
  }
  return sum;
}

std::vector<double> gruenwald_coefficients(double r, Index count) {
  if (!(r > 0.0 && r < 1.0)) {
    throw Error(ErrorKind::InvalidParameter, "Gruenwald order r must lie in (0, 1)");
  }
  if (count < 0) throw Error(ErrorKind::InvalidParameter, "negative coefficient count");
  std::vector<double> c(static_cast<std::size_t>(count + 1));
  c[0] = 1.0;
  for (Index j = 0; j < count; ++j) {
    const auto u = static_cast<std::size_t>(j);
    c[u + 1] = c[u] * (static_cast<double>(j) - r) / static_cast<double>(j + 1);
  }
  return c;
}

double gruenwald_apply(double r, Index n, std::span<const double> samples, Index i) {
  if (n < 1) throw Error(ErrorKind::InvalidLevel, "step count must be >= 1");
  if (i < 1 || i > n) {
    throw Error(ErrorKind::InvalidParameter, "evaluation index must satisfy 1 <= i <= n");
  }
  if (static_cast<Index>(samples.size()) < i + 1) {
    throw Error(ErrorKind::InsufficientData, "need samples f(0/n) .. f(i/n)");
  }
  const auto c = gruenwald_coefficients(r, i);
  double sum = 0.0;
  for (Index j = 0; j <= i; ++j) {
    sum += c[static_cast<std::size_t>(j)] * samples[static_cast<std::size_t>(i - j)];
  }
  return std::pow(static_cast<double>(n), r) * sum;
}

double gruenwald_apply(double r, Index n, const std::function<double(double)>& f, double x) {
  if (n < 1) throw Error(ErrorKind::InvalidLevel, "step count must be >= 1");
  if (!(x > 0.0 && x <= 1.0)) {
    throw Error(ErrorKind::InvalidParameter, "evaluation point must lie in (0, 1]");
  }
  const double nd = static_cast<double>(n);
  const auto last = static_cast<Index>(std::floor(nd * x * (1.0 + 1e-14)));
  const auto c = gruenwald_coefficients(r, last);
  double sum = 0.0;
  for (Index j = 0; j <= last; ++j) {
    sum += c[static_cast<std::size_t>(j)] * f(x - static_cast<double>(j) / nd);
  }
  return std::pow(nd, r) * sum;
}

}  // namespace fracspde
