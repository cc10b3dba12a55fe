// Command-line front end: one subcommand per experiment, config file plus flag overrides.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "fracspde/config.hpp"
#include "fracspde/report_io.hpp"

namespace fs = std::filesystem;
using namespace fracspde;

namespace {

/// Flags of one subcommand, bound to a scratch config; only flags actually given
/// override the values loaded from --config.
struct FlagSet {
  ExperimentConfig values;
  std::string config_path;
  Index threads = 1;
  std::vector<std::pair<CLI::Option*, std::function<void(ExperimentConfig&)>>> bound;

  template <typename T>
  void add(CLI::App* sub, const std::string& names, T ExperimentConfig::*member,
           const std::string& help) {
    CLI::Option* opt = sub->add_option(names, values.*member, help)->capture_default_str();
    if constexpr (requires(T v) { v.push_back(v.front()); }) opt->delimiter(',');
    bound.emplace_back(opt, [this, member](ExperimentConfig& dst) { dst.*member = values.*member; });
  }

  void add_flag(CLI::App* sub, const std::string& names, bool ExperimentConfig::*member,
                const std::string& help) {
    CLI::Option* opt = sub->add_flag(names, values.*member, help);
    bound.emplace_back(opt, [this, member](ExperimentConfig& dst) { dst.*member = values.*member; });
  }

  ExperimentConfig merged(const std::string& command) const {
    ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : parse_config(config_path);
    for (const auto& [opt, apply] : bound) {
      if (opt->count() > 0) apply(cfg);
    }
    cfg.command = command;
    return cfg;
  }
};

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".partial";
  {
    std::ofstream out(tmp);
    if (!out) throw Error(ErrorKind::Config, "cannot write '" + path + "'");
    out << text;
  }
  fs::rename(tmp, target);
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void run_eigens(const ExperimentConfig& cfg) {
  const auto es = eigen_system<double>(cfg.n);
  std::ostringstream csv;
  write_csv(csv, es);
  if (!cfg.output_json.empty()) emit(dump_json(to_json(es)), cfg.output_json);
  emit(csv.str(), cfg.output_csv);
}

void run_operator(const ExperimentConfig& cfg) {
  if (cfg.method == "spectral" || cfg.method == "balakrishnan") {
    const Eigen::MatrixXd m = cfg.method == "spectral"
                                  ? frac_matrix_spectral<double>(cfg.n, cfg.alpha)
                                  : frac_matrix_balakrishnan(cfg.n, cfg.alpha, cfg.rel_tol);
    std::ostringstream csv;
    write_csv(csv, m);
    emit(csv.str(), cfg.output_csv);
    return;
  }
  if (cfg.method != "both") {
    throw Error(ErrorKind::Config, "method must be spectral, balakrishnan or both");
  }
  const Eigen::MatrixXd s = frac_matrix_spectral<double>(cfg.n, cfg.alpha);
  const Eigen::MatrixXd b = frac_matrix_balakrishnan(cfg.n, cfg.alpha, cfg.rel_tol);
  const double diff = (s - b).cwiseAbs().maxCoeff();
  auto rows = [](const Eigen::MatrixXd& m) {
    std::vector<std::vector<double>> out(static_cast<std::size_t>(m.rows()));
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)].push_back(m(i, j));
    }
    return out;
  };
  nlohmann::json j{{"config", to_json(cfg)},
                   {"spectral", rows(s)},
                   {"balakrishnan", rows(b)},
                   {"max_abs_diff", diff},
                   {"relative_diff", diff / s.norm()}};
  std::cerr << "max |spectral - balakrishnan| = " << format_double(diff) << "\n";
  emit(dump_json(j), cfg.output_json);
  if (!cfg.output_csv.empty()) {
    std::ostringstream csv;
    write_csv(csv, b);
    emit(csv.str(), cfg.output_csv);
  }
}

void run_green(const ExperimentConfig& cfg) {
  std::ostringstream csv;
  csv << "x,y,G\n";
  std::function<double(double, double)> kernel;
  if (cfg.kernel == "discrete") {
    const auto op = make_discrete_operator<double>(cfg.n, cfg.alpha);
    kernel = [op, t = cfg.t](double x, double y) { return green_kernel(op, t, x, y); };
  } else if (cfg.kernel == "continuous") {
    const auto op = make_continuous_operator(cfg.alpha, 1);
    kernel = [op, t = cfg.t](double x, double y) { return green_kernel(op, t, x, y); };
  } else {
    throw Error(ErrorKind::Config, "kernel must be discrete or continuous");
  }
  for (double x : cfg.xs) {
    for (double y : cfg.ys) {
      csv << format_double(x) << ',' << format_double(y) << ',' << format_double(kernel(x, y))
          << '\n';
    }
  }
  emit(csv.str(), cfg.output_csv);
}

void run_gap(const ExperimentConfig& cfg) {
  std::ostringstream csv;
  csv << "n,head_sum,tail_sum,operator_norm,hs_norm,tail_terms,tail_precision\n";
  nlohmann::json rows = nlohmann::json::array();
  for (Index n : cfg.levels) {
    const auto g = semigroup_gap(n, cfg.alpha, cfg.delta, cfg.t);
    csv << n << ',' << format_double(g.head_sum) << ',' << format_double(g.tail_sum) << ','
        << format_double(g.operator_norm) << ',' << format_double(g.hs_norm) << ','
        << g.tail_terms << ',' << format_double(g.tail_precision) << '\n';
    rows.push_back({{"n", n},
                    {"head_sum", g.head_sum},
                    {"tail_sum", g.tail_sum},
                    {"operator_norm", g.operator_norm},
                    {"hs_norm", g.hs_norm},
                    {"tail_terms", g.tail_terms},
                    {"tail_precision", g.tail_precision}});
  }
  if (!cfg.output_json.empty()) {
    emit(dump_json({{"config", to_json(cfg)}, {"gaps", rows}}), cfg.output_json);
  }
  emit(csv.str(), cfg.output_csv);
}

void run_lemma_check(const ExperimentConfig& cfg) {
  const auto table = lemma_sum_check(cfg.alpha, cfg.delta, cfg.gamma, cfg.t_grid, cfg.levels);
  std::ostringstream csv;
  write_csv(csv, table);
  std::ostringstream summary;
  write_summary_csv(summary, table);
  std::cerr << summary.str();
  if (!cfg.output_json.empty()) {
    nlohmann::json j = to_json(table);
    j["config"] = to_json(cfg);
    emit(dump_json(j), cfg.output_json);
  }
  emit(csv.str(), cfg.output_csv);
}

void emit_report(const ConvergenceReport& report, const ExperimentConfig& cfg) {
  if (!cfg.output_csv.empty()) {
    std::ostringstream csv;
    write_csv(csv, report);
    emit(csv.str(), cfg.output_csv);
  }
  emit(dump_json(to_json(report)), cfg.output_json);
}

void run_det_rate(const ExperimentConfig& in) {
  const ExperimentConfig cfg = resolve_defaults(in);
  auto report = deterministic_rate(cfg.alpha, cfg.eta, cfg.levels, cfg.t, cfg.n_ref);
  report.config = to_json(cfg);
  emit_report(report, cfg);
}

void dump_sample_paths(const LabConfig& lab, const std::string& dir) {
  fs::create_directories(dir);
  const TimeGrid grid{lab.final_time, lab.steps};
  const NoiseBundle bundle(sample_seed(lab.seed, 0), lab.n_ref, grid, lab.substeps);
  const auto u0 = make_initial(lab.eta, lab.n_ref);
  SolveOptions ref_opts{lab.ref_quad_factor, lab.frozen_diffusion, 1};
  {
    std::ofstream out(fs::path(dir) / "reference.csv");
    write_csv(out, solve_reference(lab.n_ref, lab.alpha, lab.g, u0, grid, bundle, ref_opts));
  }
  SolveOptions opts{lab.quad_factor, lab.frozen_diffusion, 1};
  for (Index n : lab.levels) {
    std::ofstream out(fs::path(dir) / ("level_" + std::to_string(n) + ".csv"));
    write_csv(out, solve_discrete(n, lab.alpha, lab.g, u0, grid, bundle, opts));
  }
}

void run_strong_rate(const ExperimentConfig& in, Index threads) {
  const ExperimentConfig cfg = resolve_defaults(in);
  const LabConfig lab = to_lab_config(cfg, threads);
  auto report = mc_strong_error(lab);
  report.config = to_json(cfg);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  emit_report(report, cfg);
  if (!cfg.dump_paths.empty()) dump_sample_paths(lab, cfg.dump_paths);
}

void run_gruenwald(const ExperimentConfig& cfg) {
  const double r = cfg.r;
  std::function<double(double)> f;
  double exact = 0.0;
  if (cfg.f == "x") {
    f = [](double x) { return x; };
    exact = std::pow(cfg.x, 1.0 - r) / std::tgamma(2.0 - r);
  } else if (cfg.f == "one") {
    f = [](double) { return 1.0; };
    exact = std::pow(cfg.x, -r) / std::tgamma(1.0 - r);
  } else {
    throw Error(ErrorKind::Config, "f must be x or one");
  }
  std::ostringstream csv;
  csv << "n,value,exact,error\n";
  for (Index n : cfg.levels) {
    const double v = gruenwald_apply(r, n, f, cfg.x);
    csv << n << ',' << format_double(v) << ',' << format_double(exact) << ','
        << format_double(std::abs(v - exact)) << '\n';
  }
  emit(csv.str(), cfg.output_csv);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractional stochastic heat equation: discretization and convergence laboratory"};
  app.require_subcommand(1);

  struct Command {
    std::string name;
    std::string help;
    std::vector<std::string> flags;
  };
  const std::vector<Command> commands{
      {"eigens", "closed-form eigenvalues of the scaled stiffness matrix", {"n"}},
      {"operator", "fractional stiffness matrix (spectral / Balakrishnan)", {"n", "alpha", "method", "rel_tol"}},
      {"green", "Green kernel on a grid of (x, y) pairs", {"kernel", "n", "alpha", "t", "xs", "ys"}},
      {"gap", "semigroup gap norms per level", {"levels", "alpha", "delta", "t"}},
      {"lemma-check", "head/tail sums against their bounds", {"alpha", "delta", "gamma", "t_grid", "levels"}},
      {"det-rate", "deterministic (g = 0) error decay at fixed t", {"alpha", "eta", "levels", "t", "n_ref"}},
      {"strong-rate", "Monte-Carlo strong error and fitted rate",
       {"alpha", "g", "delta", "eta", "p", "theorem", "levels", "n_ref", "final_time", "steps",
        "samples", "quad_factor", "ref_quad_factor", "substeps", "frozen_diffusion", "dump_paths"}},
      {"gruenwald", "Gruenwald-Letnikov derivative convergence", {"r", "levels", "x", "f"}},
  };

  std::map<std::string, std::unique_ptr<FlagSet>> sets;
  std::map<std::string, CLI::App*> subs;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    auto set = std::make_unique<FlagSet>();
    FlagSet& fsr = *set;
    sub->add_option("--config", fsr.config_path, "JSON config file; flags override its values");
    fsr.add(sub, "--seed", &ExperimentConfig::seed, "random seed");
    fsr.add(sub, "--out-json", &ExperimentConfig::output_json, "write JSON output here");
    fsr.add(sub, "--out-csv", &ExperimentConfig::output_csv, "write CSV output here");
    if (c.name == "strong-rate") {
      sub->add_option("--threads", fsr.threads, "worker threads (results do not depend on it)")
          ->check(CLI::PositiveNumber);
    }
    for (const auto& f : c.flags) {
      if (f == "n") fsr.add(sub, "--n", &ExperimentConfig::n, "level (subintervals)");
      if (f == "alpha") fsr.add(sub, "--alpha", &ExperimentConfig::alpha, "fractional order in (1,4)");
      if (f == "method") fsr.add(sub, "--method", &ExperimentConfig::method, "spectral|balakrishnan|both");
      if (f == "rel_tol") fsr.add(sub, "--rel-tol", &ExperimentConfig::rel_tol, "quadrature tolerance");
      if (f == "kernel") fsr.add(sub, "--kernel", &ExperimentConfig::kernel, "discrete|continuous");
      if (f == "t") fsr.add(sub, "--t", &ExperimentConfig::t, "time");
      if (f == "xs") fsr.add(sub, "--xs", &ExperimentConfig::xs, "x points (comma separated)");
      if (f == "ys") fsr.add(sub, "--ys", &ExperimentConfig::ys, "y points (comma separated)");
      if (f == "levels") fsr.add(sub, "--levels", &ExperimentConfig::levels, "levels (comma separated)");
      if (f == "delta") fsr.add(sub, "--delta", &ExperimentConfig::delta, "smoothness delta");
      if (f == "gamma") fsr.add(sub, "--gamma", &ExperimentConfig::gamma, "tail exponent gamma");
      if (f == "t_grid") fsr.add(sub, "--t-grid", &ExperimentConfig::t_grid, "times (comma separated)");
      if (f == "eta") fsr.add(sub, "--eta", &ExperimentConfig::eta, "initial smoothness eta");
      if (f == "n_ref") fsr.add(sub, "--ref-n,--n-ref", &ExperimentConfig::n_ref, "reference truncation (0: 4x finest)");
      if (f == "g") fsr.add(sub, "--g", &ExperimentConfig::g, "diffusion map: cos|one|tanh-scaled|zero");
      if (f == "p") fsr.add(sub, "--p", &ExperimentConfig::p, "moment order");
      if (f == "theorem") fsr.add(sub, "--theorem", &ExperimentConfig::theorem, "rate theorem 1|2");
      if (f == "final_time") fsr.add(sub, "--T,--final-time", &ExperimentConfig::final_time, "final time");
      if (f == "steps") fsr.add(sub, "--K,--steps", &ExperimentConfig::steps, "time steps (0: default)");
      if (f == "samples") fsr.add(sub, "--samples", &ExperimentConfig::samples, "Monte-Carlo samples");
      if (f == "quad_factor") fsr.add(sub, "--quad-factor", &ExperimentConfig::quad_factor, "level oversampling m/n");
      if (f == "ref_quad_factor") fsr.add(sub, "--ref-quad-factor", &ExperimentConfig::ref_quad_factor, "reference oversampling m/N");
      if (f == "substeps") fsr.add(sub, "--substeps", &ExperimentConfig::substeps, "noise draws per step");
      if (f == "frozen_diffusion") fsr.add_flag(sub, "--frozen-diffusion", &ExperimentConfig::frozen_diffusion, "evaluate g_n at u_0 only");
      if (f == "dump_paths") fsr.add(sub, "--dump-paths", &ExperimentConfig::dump_paths, "directory for sample-0 path CSVs");
      if (f == "r") fsr.add(sub, "--r", &ExperimentConfig::r, "order in (0,1)");
      if (f == "x") fsr.add(sub, "--x", &ExperimentConfig::x, "evaluation point");
      if (f == "f") fsr.add(sub, "--f", &ExperimentConfig::f, "test function: x|one");
    }
    subs[c.name] = sub;
    sets[c.name] = std::move(set);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    for (const auto& [name, sub] : subs) {
      if (!sub->parsed()) continue;
      const FlagSet& set = *sets[name];
      const ExperimentConfig cfg = set.merged(name);
      std::cerr << "seed=" << cfg.seed << "\n";
      if (name == "eigens") run_eigens(cfg);
      if (name == "operator") run_operator(cfg);
      if (name == "green") run_green(cfg);
      if (name == "gap") run_gap(cfg);
      if (name == "lemma-check") run_lemma_check(cfg);
      if (name == "det-rate") run_det_rate(cfg);
      if (name == "strong-rate") run_strong_rate(cfg, set.threads);
      if (name == "gruenwald") run_gruenwald(cfg);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::Config ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
