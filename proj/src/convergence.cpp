#include "fracspde/convergence.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace fracspde {

double compensated_sum(std::span<const double> xs) {
  double sum = 0.0;
  double c = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      c += (sum - t) + x;
    } else {
      c += (x - t) + sum;
    }
    sum = t;
  }
  return sum + c;
}

namespace {

double student_t975(Index dof) {
  static constexpr double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306,
                                     2.262,  2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120,
                                     2.110,  2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
                                     2.060,  2.056, 2.052, 2.048, 2.045, 2.042};
  if (dof >= 1 && dof <= 30) return table[dof - 1];
  return 1.96 + 2.4 / static_cast<double>(dof);
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

RateFit fit_rate(std::span<const double> levels, std::span<const double> errors) {
  if (levels.size() != errors.size()) {
    throw Error(ErrorKind::DimensionMismatch, "levels and errors differ in length");
  }
  if (levels.size() < 3) throw Error(ErrorKind::InsufficientData, "rate fit needs >= 3 levels");
  const auto k = static_cast<Index>(levels.size());
  Eigen::VectorXd x(k);
  Eigen::VectorXd y(k);
  for (Index i = 0; i < k; ++i) {
    const auto u = static_cast<std::size_t>(i);
    if (!(levels[u] > 0.0)) throw Error(ErrorKind::InvalidParameter, "levels must be positive");
    if (!(errors[u] > 0.0) || !std::isfinite(errors[u])) {
      throw Error(ErrorKind::InvalidParameter, "errors must be positive and finite");
    }
    x(i) = std::log(levels[u]);
    y(i) = std::log(errors[u]);
  }
  const double xm = x.mean();
  const double ym = y.mean();
  const double sxx = (x.array() - xm).square().sum();
  if (!(sxx > 0.0)) throw Error(ErrorKind::InsufficientData, "levels must not all coincide");
  const double sxy = ((x.array() - xm) * (y.array() - ym)).sum();
  const double slope = sxy / sxx;
  const double intercept = ym - slope * xm;
  const double rss = (y.array() - intercept - slope * x.array()).square().sum();
  const double se = std::sqrt(rss / static_cast<double>(k - 2) / sxx);
  const double half = student_t975(k - 2) * se;
  return RateFit{-slope, intercept, se, -slope - half, -slope + half, k};
}

RobustRateFit fit_rate_discarding_coarse(std::span<const double> levels,
                                         std::span<const double> errors) {
  RobustRateFit out{fit_rate(levels, errors), {}};
  if (levels.size() < 4) return out;
  const auto coarse = static_cast<std::size_t>(
      std::min_element(levels.begin(), levels.end()) - levels.begin());
  std::vector<double> lv;
  std::vector<double> er;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (i == coarse) continue;
    lv.push_back(levels[i]);
    er.push_back(errors[i]);
  }
  const RateFit rest = fit_rate(lv, er);
  double rss = 0.0;
  for (std::size_t i = 0; i < lv.size(); ++i) {
    const double r = std::log(er[i]) - (rest.intercept - rest.rate * std::log(lv[i]));
    rss += r * r;
  }
  const double sigma = std::sqrt(rss / static_cast<double>(lv.size() - 2));
  const double resid =
      std::log(errors[coarse]) - (rest.intercept - rest.rate * std::log(levels[coarse]));
  if (std::abs(resid) > 3.0 * sigma && std::abs(resid) > 1e-12) {
    out.fit = rest;
    out.discarded_levels.push_back(levels[coarse]);
  }
  return out;
}

TheoreticalRate theoretical_rate(double alpha, double delta, double eta, double p, int theorem) {
  if (!(p >= 1.0)) throw Error(ErrorKind::InvalidParameter, "moment order p must be >= 1");
  TheoreticalRate out;
  auto violate = [&](const std::string& what) {
    out.hypotheses_met = false;
    out.violations.push_back(what);
  };
  const double eta_lo = 0.25 + alpha / 4.0;
  const double eta_hi = 0.25 + 3.0 * alpha / 4.0;
  auto check_eta = [&] {
    if (!(eta > eta_lo && eta < eta_hi)) {
      std::ostringstream os;
      os << "eta=" << eta << " outside (" << eta_lo << ", " << eta_hi << ")";
      violate(os.str());
    }
  };
  if (theorem == 1) {
    if (!(alpha > 1.0)) violate("alpha must exceed 1");
    check_eta();
    const double delta_lo = std::max(0.5, 0.25 + alpha / 8.0);
    const double delta_hi = 0.25 + 3.0 * alpha / 4.0;
    const bool delta_ok = delta > delta_lo && delta < delta_hi;
    if (!delta_ok) {
      std::ostringstream os;
      os << "delta=" << delta << " outside (" << delta_lo << ", " << delta_hi << ")";
      violate(os.str());
    }
    double p_min = -std::numeric_limits<double>::infinity();
    // 2 alpha / (alpha - 2) only constrains p for alpha > 2.
    if (alpha > 2.0) p_min = std::max(p_min, 2.0 * alpha / (alpha - 2.0));
    if (delta > 0.5) p_min = std::max(p_min, alpha / (2.0 * delta - 1.0));
    if (8.0 * delta - alpha - 2.0 > 0.0) {
      p_min = std::max(p_min, 2.0 * alpha / (8.0 * delta - alpha - 2.0));
    }
    if (delta_ok && !(p > p_min)) {
      std::ostringstream os;
      os << "p=" << p << " must exceed " << p_min;
      violate(os.str());
    }
    if (alpha / 2.0 <= 2.0 * delta) {
      out.xi = alpha / 2.0;
      out.regime = "alpha/2";
    } else {
      out.xi = 2.0 * delta;
      out.regime = "2*delta";
    }
  } else if (theorem == 2) {
    if (!(alpha > 2.0)) {
      violate("alpha must exceed 2");
    } else if (!(p > 2.0 * alpha / (alpha - 2.0))) {
      std::ostringstream os;
      os << "p=" << p << " must exceed " << 2.0 * alpha / (alpha - 2.0);
      violate(os.str());
    }
    check_eta();
    out.xi = alpha / 4.0 - 0.5 - alpha / (2.0 * p);
    out.regime = "alpha/4-1/2-alpha/(2p)";
  } else {
    throw Error(ErrorKind::InvalidParameter, "theorem must be 1 or 2");
  }
  return out;
}

SemigroupGap semigroup_gap(Index n, double alpha, double delta, double t) {
  require_level(n);
  require_alpha(alpha);
  if (!(t > 0.0)) throw Error(ErrorKind::InvalidParameter, "gap needs t > 0");
  if (!(delta >= 0.0 && delta < 0.25 + 0.75 * alpha)) {
    throw Error(ErrorKind::InvalidParameter, "delta must lie in [0, 1/4 + 3 alpha/4)");
  }
  SemigroupGap gap;
  const double half = 0.5 * alpha;
  for (Index j = 1; j < n; ++j) {
    const double lam = continuous_lambda<double>(j);
    const double mu = std::pow(lam, half);
    const double mun = std::pow(discrete_lambda<double>(j, n), half);
    // e^{-t mun} - e^{-t mu} without cancellation; mun <= mu keeps both factors bounded
    const double diff = -std::exp(-t * mun) * std::expm1(-t * (mu - mun));
    const double w = std::pow(lam, -delta);
    gap.head_sum += w * w * diff * diff;
    gap.operator_norm = std::max(gap.operator_norm, w * std::abs(diff));
  }
  constexpr Index cap = 1'000'000;
  double acc = 0.0;
  double last = 0.0;
  for (Index j = n; j < n + cap; ++j) {
    const double lam = continuous_lambda<double>(j);
    const double term = std::pow(lam, -2.0 * delta) * std::exp(-2.0 * t * std::pow(lam, half));
    if (j == n) gap.operator_norm = std::max(gap.operator_norm, std::sqrt(term));
    acc += term;
    last = term;
    ++gap.tail_terms;
    if (term == 0.0 || term < 1e-14 * acc) break;
  }
  gap.tail_sum = acc;
  gap.tail_precision = acc > 0.0 ? last / acc : 0.0;
  gap.hs_norm = std::sqrt(gap.head_sum + gap.tail_sum);
  return gap;
}

LemmaTable lemma_sum_check(double alpha, double delta, double gamma,
                           std::span<const double> t_grid, std::span<const Index> levels) {
  require_alpha(alpha);
  if (!(delta >= 0.0 && delta < 0.25 + 0.75 * alpha)) {
    throw Error(ErrorKind::InvalidParameter, "delta must lie in [0, 1/4 + 3 alpha/4)");
  }
  if (!(gamma > 1.0 / alpha - 4.0 * delta / alpha)) {
    throw Error(ErrorKind::InvalidParameter, "gamma must exceed 1/alpha - 4 delta/alpha");
  }
  if (t_grid.empty() || levels.empty()) {
    throw Error(ErrorKind::InsufficientData, "need at least one time and one level");
  }
  LemmaTable table{alpha, delta, gamma, {}, {}};
  const double t_exp = -1.0 - 1.0 / alpha + 4.0 * delta / alpha;
  for (double t : t_grid) {
    std::vector<double> ns;
    std::vector<double> heads;
    std::vector<double> tails_n;
    std::vector<double> tails;
    double hmin = std::numeric_limits<double>::infinity();
    double hmax = 0.0;
    double tmin = std::numeric_limits<double>::infinity();
    double tmax = 0.0;
    for (Index n : levels) {
      const auto gap = semigroup_gap(n, alpha, delta, t);
      const double nd = static_cast<double>(n);
      LemmaRow row;
      row.t = t;
      row.n = n;
      row.head = gap.head_sum;
      row.head_bound = std::pow(nd, -alpha) * std::pow(t, t_exp);
      row.head_ratio = row.head / row.head_bound;
      row.tail = gap.tail_sum;
      row.tail_bound = delta <= 0.25
                           ? std::pow(nd, -alpha * gamma - 4.0 * delta) * std::pow(t, -gamma)
                           : std::pow(nd, -4.0 * delta);
      row.tail_ratio = row.tail / row.tail_bound;
      table.rows.push_back(row);
      ns.push_back(nd);
      heads.push_back(row.head);
      if (row.tail > 0.0) {
        tails_n.push_back(nd);
        tails.push_back(row.tail);
      }
      hmin = std::min(hmin, row.head_ratio);
      hmax = std::max(hmax, row.head_ratio);
      tmin = std::min(tmin, row.tail_ratio);
      tmax = std::max(tmax, row.tail_ratio);
    }
    LemmaSummary s;
    s.t = t;
    s.head_slope = ns.size() >= 3 ? -fit_rate(ns, heads).rate : nan();
    s.tail_slope = tails.size() >= 3 ? -fit_rate(tails_n, tails).rate : nan();
    s.head_ratio_spread = hmin > 0.0 ? hmax / hmin : std::numeric_limits<double>::infinity();
    s.tail_ratio_spread = tmin > 0.0 ? tmax / tmin : std::numeric_limits<double>::infinity();
    table.summaries.push_back(s);
  }
  return table;
}

double lifted_distance(const Eigen::Ref<const Eigen::VectorXd>& level_coeffs,
                       const Eigen::Ref<const Eigen::VectorXd>& reference_coeffs) {
  const Index shared = std::min(level_coeffs.size(), reference_coeffs.size());
  double sum = (reference_coeffs.head(shared) - level_coeffs.head(shared)).squaredNorm();
  sum += level_coeffs.tail(level_coeffs.size() - shared).squaredNorm();
  sum += reference_coeffs.tail(reference_coeffs.size() - shared).squaredNorm();
  return std::sqrt(sum);
}

double path_error(const SolutionPath& level_path, const SolutionPath& reference_path) {
  if (!(level_path.grid == reference_path.grid) || level_path.steps != reference_path.steps) {
    throw Error(ErrorKind::TimeGridMismatch, "paths are stored on different time grids");
  }
  Eigen::MatrixXd to_modal;
  if (level_path.kind == PathKind::Discrete) {
    to_modal = eigen_system<double>(level_path.level).vectors.transpose();
  }
  auto modal = [&](const SolutionPath& p, const Eigen::VectorXd& s) -> Eigen::VectorXd {
    if (p.kind == PathKind::Reference) return s;
    if (p.level == level_path.level) return to_modal * s;
    return interpolate_coefficients(eigen_system<double>(p.level), s);
  };
  double sup = 0.0;
  for (std::size_t i = 0; i < level_path.states.size(); ++i) {
    sup = std::max(sup, lifted_distance(modal(level_path, level_path.states[i]),
                                        modal(reference_path, reference_path.states[i])));
  }
  return sup;
}

void validate(const LabConfig& cfg) {
  require_alpha(cfg.alpha);
  if (!cfg.g.fn) throw Error(ErrorKind::Config, "diffusion map not set");
  if (cfg.levels.size() < 2) throw Error(ErrorKind::Config, "need at least two levels");
  for (std::size_t i = 0; i < cfg.levels.size(); ++i) {
    require_level(cfg.levels[i]);
    if (i > 0 && cfg.levels[i] <= cfg.levels[i - 1]) {
      throw Error(ErrorKind::Config, "levels must be strictly increasing");
    }
  }
  if (cfg.n_ref < cfg.levels.back()) {
    throw Error(ErrorKind::Config, "reference truncation must be at least the finest level");
  }
  if (!(cfg.final_time > 0.0) || cfg.steps < 1) {
    throw Error(ErrorKind::Config, "need T > 0 and at least one time step");
  }
  if (cfg.samples < 2) throw Error(ErrorKind::Config, "need at least two samples");
  if (!(cfg.p >= 1.0)) throw Error(ErrorKind::Config, "p must be >= 1");
  if (cfg.quad_factor < 4) throw Error(ErrorKind::Config, "quad_factor must be >= 4");
  if (cfg.ref_quad_factor < 2) throw Error(ErrorKind::Config, "ref_quad_factor must be >= 2");
  if (cfg.substeps < 1 || cfg.threads < 1) {
    throw Error(ErrorKind::Config, "substeps and threads must be >= 1");
  }
}

namespace {

void run_sample(const LabConfig& cfg, Index sample, const InitialCondition& u0,
                const std::vector<Eigen::VectorXd>& level_starts, Eigen::MatrixXd& out) {
  const TimeGrid grid{cfg.final_time, cfg.steps};
  const NoiseBundle bundle(sample_seed(cfg.seed, sample), cfg.n_ref, grid, cfg.substeps);
  const double dt = grid.dt();

  ModalStepper reference(continuous_rates(cfg.n_ref, cfg.alpha), cfg.g,
                         cfg.ref_quad_factor * cfg.n_ref, dt, cfg.frozen_diffusion);
  reference.reset(u0.coeffs);
  std::vector<ModalStepper> levels;
  levels.reserve(cfg.levels.size());
  for (std::size_t l = 0; l < cfg.levels.size(); ++l) {
    const Index n = cfg.levels[l];
    levels.emplace_back(discrete_rates(n, cfg.alpha), cfg.g, cfg.quad_factor * n, dt,
                        cfg.frozen_diffusion);
    levels.back().reset(level_starts[l]);
  }

  std::vector<double> sup(cfg.levels.size(), 0.0);
  auto record = [&] {
    for (std::size_t l = 0; l < levels.size(); ++l) {
      sup[l] = std::max(sup[l], lifted_distance(levels[l].coeffs(), reference.coeffs()));
    }
  };
  record();
  for (Index k = 0; k < grid.steps; ++k) {
    const Eigen::VectorXd dw = bundle.step_increments(k);
    std::size_t l = 0;
    try {
      reference.step(dw);
      for (; l < levels.size(); ++l) levels[l].step(dw);
    } catch (const Error& e) {
      std::ostringstream os;
      os << "sample " << sample << ", ";
      if (l < levels.size()) {
        os << "level " << cfg.levels[l];
      } else {
        os << "reference";
      }
      os << ": " << e.what();
      throw Error(e.kind(), os.str());
    }
    record();
  }
  for (std::size_t l = 0; l < sup.size(); ++l) out(sample, static_cast<Index>(l)) = sup[l];
}

}  // namespace

Eigen::MatrixXd sample_strong_errors(const LabConfig& cfg) {
  validate(cfg);
  const InitialCondition u0 = make_initial(cfg.eta, cfg.n_ref);
  std::vector<Eigen::VectorXd> level_starts;
  for (Index n : cfg.levels) {
    level_starts.push_back(interpolate_En(project_Pn(u0.field(), n)).coeffs);
  }

  Eigen::MatrixXd out(cfg.samples, static_cast<Index>(cfg.levels.size()));
  std::atomic<Index> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const Index s = next.fetch_add(1);
      if (s >= cfg.samples) return;
      try {
        run_sample(cfg, s, u0, level_starts, out);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(cfg.samples);
        return;
      }
    }
  };
  const Index nthreads = std::min(cfg.threads, cfg.samples);
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (Index i = 0; i < nthreads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

LevelError aggregate_level(Index n, std::span<const double> sample_errors, double p) {
  const auto s = static_cast<Index>(sample_errors.size());
  if (s < 2) throw Error(ErrorKind::InsufficientData, "need at least two samples");
  std::vector<double> powered(sample_errors.size());
  std::transform(sample_errors.begin(), sample_errors.end(), powered.begin(),
                 [p](double e) { return std::pow(e, p); });
  const double mean = compensated_sum(powered) / static_cast<double>(s);
  std::vector<double> dev(powered.size());
  std::transform(powered.begin(), powered.end(), dev.begin(),
                 [mean](double x) { return (x - mean) * (x - mean); });
  const double var = compensated_sum(dev) / static_cast<double>(s - 1);
  const double se_mean = std::sqrt(var / static_cast<double>(s));
  LevelError out{n, std::pow(mean, 1.0 / p), 0.0, s};
  // delta method for m -> m^{1/p}
  if (mean > 0.0) out.std_error = std::pow(mean, 1.0 / p - 1.0) * se_mean / p;
  return out;
}

ConvergenceReport summarize(const LabConfig& cfg, const Eigen::MatrixXd& sample_errors) {
  ConvergenceReport report;
  std::vector<double> ns;
  std::vector<double> errs;
  for (std::size_t l = 0; l < cfg.levels.size(); ++l) {
    const Eigen::VectorXd col = sample_errors.col(static_cast<Index>(l));
    const auto level =
        aggregate_level(cfg.levels[l], std::span<const double>(col.data(), col.size()), cfg.p);
    report.levels.push_back(level);
    ns.push_back(static_cast<double>(level.n));
    errs.push_back(level.error);
  }
  if (ns.size() >= 3) {
    const bool positive = std::all_of(errs.begin(), errs.end(), [](double e) { return e > 0.0; });
    if (positive) {
      const auto robust = fit_rate_discarding_coarse(ns, errs);
      report.fit = robust.fit;
      report.discarded_levels = robust.discarded_levels;
      for (double n : robust.discarded_levels) {
        std::ostringstream os;
        os << "coarsest level n=" << n << " discarded from the rate fit (residual > 3 sigma)";
        report.warnings.push_back(os.str());
      }
    } else {
      report.warnings.push_back("zero error at some level; rate fit skipped");
    }
  } else {
    report.warnings.push_back("fewer than three levels; rate fit skipped");
  }
  report.theoretical = theoretical_rate(cfg.alpha, cfg.delta, cfg.eta, cfg.p, cfg.theorem);
  for (const auto& v : report.theoretical.violations) {
    report.warnings.push_back("hypothesis not met: " + v);
  }
  const TimeGrid grid{cfg.final_time, cfg.steps};
  report.noise = {{"seed", cfg.seed},        {"modes", cfg.n_ref},
                  {"steps", cfg.steps},      {"dt", grid.dt()},
                  {"substeps", cfg.substeps}, {"sample_seed", "fmix64(seed + golden*(s+1))"}};
  return report;
}

ConvergenceReport mc_strong_error(const LabConfig& cfg) {
  return summarize(cfg, sample_strong_errors(cfg));
}

double deterministic_gap(Index n, double alpha, const InitialCondition& u0, double t) {
  const auto op = make_discrete_operator<double>(n, alpha);
  const GridField discrete = semigroup_apply(op, t, project_Pn(u0.field(), n));
  const SpectralField exact =
      semigroup_apply(make_continuous_operator(alpha, u0.truncation()), t, u0.field());
  return lifted_distance(interpolate_En(discrete).coeffs, exact.coeffs);
}

ConvergenceReport deterministic_rate(double alpha, double eta, std::span<const Index> levels,
                                     double t, Index n_ref) {
  if (levels.empty()) throw Error(ErrorKind::InsufficientData, "no levels");
  if (n_ref < levels.back()) {
    throw Error(ErrorKind::Config, "reference truncation must be at least the finest level");
  }
  const InitialCondition u0 = make_initial(eta, n_ref);
  ConvergenceReport report;
  std::vector<double> ns;
  std::vector<double> errs;
  for (Index n : levels) {
    const double e = deterministic_gap(n, alpha, u0, t);
    report.levels.push_back(LevelError{n, e, 0.0, 1});
    ns.push_back(static_cast<double>(n));
    errs.push_back(e);
  }
  if (ns.size() >= 3) {
    const auto robust = fit_rate_discarding_coarse(ns, errs);
    report.fit = robust.fit;
    report.discarded_levels = robust.discarded_levels;
  }
  report.theoretical.xi = std::min(2.0 * eta, alpha / 2.0);
  report.theoretical.regime = 2.0 * eta < alpha / 2.0 ? "2*eta" : "alpha/2";
  report.noise = nullptr;
  return report;
}

}  // namespace fracspde
