#include "fracspde/report_io.hpp"

#include <charconv>

namespace fracspde {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

nlohmann::json to_json(const ConvergenceReport& report) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& l : report.levels) {
    levels.push_back({{"n", l.n}, {"error", l.error}, {"stderr", l.std_error}, {"samples", l.samples}});
  }
  return {{"config", report.config},
          {"levels", levels},
          {"fitted_rate",
           {{"value", report.fit.rate},
            {"ci_low", report.fit.ci_low},
            {"ci_high", report.fit.ci_high},
            {"discarded_levels", report.discarded_levels}}},
          {"theoretical",
           {{"xi", report.theoretical.xi},
            {"regime", report.theoretical.regime},
            {"hypotheses_met", report.theoretical.hypotheses_met},
            {"violations", report.theoretical.violations}}},
          {"warnings", report.warnings},
          {"noise", report.noise}};
}

void write_csv(std::ostream& os, const ConvergenceReport& report) {
  os << "n,error,stderr,samples\n";
  for (const auto& l : report.levels) {
    os << l.n << ',' << format_double(l.error) << ',' << format_double(l.std_error) << ','
       << l.samples << '\n';
  }
}

nlohmann::json to_json(const EigenSystem<double>& es) {
  std::vector<double> lambdas(es.lambdas.data(), es.lambdas.data() + es.lambdas.size());
  return {{"n", es.n}, {"lambdas", lambdas}};
}

void write_csv(std::ostream& os, const EigenSystem<double>& es) {
  os << "j,lambda_jn\n";
  for (Index j = 1; j <= es.lambdas.size(); ++j) {
    os << j << ',' << format_double(es.lambdas(j - 1)) << '\n';
  }
}

void write_csv(std::ostream& os, const Eigen::MatrixXd& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) os << ',';
      os << format_double(m(i, j));
    }
    os << '\n';
  }
}

void write_csv(std::ostream& os, const LemmaTable& table) {
  os << "t,n,head,head_bound,head_ratio,tail,tail_bound,tail_ratio\n";
  for (const auto& r : table.rows) {
    os << format_double(r.t) << ',' << r.n << ',' << format_double(r.head) << ','
       << format_double(r.head_bound) << ',' << format_double(r.head_ratio) << ','
       << format_double(r.tail) << ',' << format_double(r.tail_bound) << ','
       << format_double(r.tail_ratio) << '\n';
  }
}

void write_summary_csv(std::ostream& os, const LemmaTable& table) {
  os << "t,head_slope,tail_slope,head_ratio_spread,tail_ratio_spread\n";
  for (const auto& s : table.summaries) {
    os << format_double(s.t) << ',' << format_double(s.head_slope) << ','
       << format_double(s.tail_slope) << ',' << format_double(s.head_ratio_spread) << ','
       << format_double(s.tail_ratio_spread) << '\n';
  }
}

nlohmann::json to_json(const LemmaTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"t", r.t},
                    {"n", r.n},
                    {"head", r.head},
                    {"head_bound", r.head_bound},
                    {"head_ratio", r.head_ratio},
                    {"tail", r.tail},
                    {"tail_bound", r.tail_bound},
                    {"tail_ratio", r.tail_ratio}});
  }
  nlohmann::json sums = nlohmann::json::array();
  for (const auto& s : table.summaries) {
    sums.push_back({{"t", s.t},
                    {"head_slope", s.head_slope},
                    {"tail_slope", s.tail_slope},
                    {"head_ratio_spread", s.head_ratio_spread},
                    {"tail_ratio_spread", s.tail_ratio_spread}});
  }
  return {{"alpha", table.alpha},
          {"delta", table.delta},
          {"gamma", table.gamma},
          {"rows", rows},
          {"summaries", sums}};
}

void write_csv(std::ostream& os, const SolutionPath& path) {
  os << "t";
  const Index width = path.states.empty() ? 0 : path.states.front().size();
  const char* label = path.kind == PathKind::Discrete ? "u" : "a";
  for (Index i = 1; i <= width; ++i) os << ',' << label << i;
  os << '\n';
  for (Index i = 0; i < path.size(); ++i) {
    os << format_double(path.time(i));
    for (double v : path.states[static_cast<std::size_t>(i)]) os << ',' << format_double(v);
    os << '\n';
  }
}

}  // namespace fracspde
