#pragma once

#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "fracspde/convergence.hpp"

namespace fracspde {

/// Schema: config, levels[] {n, error, stderr, samples},
/// fitted_rate {value, ci_low, ci_high, discarded_levels},
/// theoretical {xi, regime, hypotheses_met, violations}, warnings, noise.
nlohmann::json to_json(const ConvergenceReport& report);
void write_csv(std::ostream& os, const ConvergenceReport& report);

nlohmann::json to_json(const EigenSystem<double>& es);
void write_csv(std::ostream& os, const EigenSystem<double>& es);

void write_csv(std::ostream& os, const Eigen::MatrixXd& m);
void write_csv(std::ostream& os, const LemmaTable& table);
void write_summary_csv(std::ostream& os, const LemmaTable& table);
nlohmann::json to_json(const LemmaTable& table);

/// t followed by the state entries, one row per stored time.
void write_csv(std::ostream& os, const SolutionPath& path);

/// Shortest decimal that round-trips the double.
std::string format_double(double v);

}  // namespace fracspde
