#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fracspde/convergence.hpp"

namespace fracspde {

/// Every knob of every CLI command. Serialized verbatim into reports, so a report plus
/// its config reproduces the run. Thread count is deliberately absent.
struct ExperimentConfig {
  std::string command;
  double alpha = 1.5;
  std::string g = "cos";
  double delta = 0.75;
  double eta = 1.0;
  double p = 2.0;
  int theorem = 1;
  std::vector<Index> levels{8, 16, 32, 64};
  Index n_ref = 0;  // 0: four times the finest level
  double final_time = 0.5;
  Index steps = 0;  // 0: T * min(levels)^{-alpha} / 8 rounded up to whole steps
  Index samples = 64;
  std::uint64_t seed = 7;
  Index n = 4;
  double t = 0.1;
  std::vector<double> t_grid{0.05, 0.1, 0.5};
  double gamma = 1.0;
  double r = 0.5;
  double x = 1.0;
  std::string f = "x";
  std::string method = "both";
  std::string kernel = "discrete";
  std::vector<double> xs{0.25, 0.5, 0.75};
  std::vector<double> ys{0.25, 0.5, 0.75};
  double rel_tol = 1e-8;
  Index quad_factor = 4;
  Index ref_quad_factor = 2;
  Index substeps = 1;
  bool frozen_diffusion = false;
  std::string output_json;
  std::string output_csv;
  std::string dump_paths;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Keys accepted in config files; anything else is rejected.
const std::vector<std::string>& config_keys();

nlohmann::json to_json(const ExperimentConfig& cfg);
/// Strict: unknown keys raise a config error naming the key. Missing keys keep `base`.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
ExperimentConfig parse_config(const std::string& path);

/// Resolves defaults that depend on other fields (n_ref, steps).
ExperimentConfig resolve_defaults(ExperimentConfig cfg);

LabConfig to_lab_config(const ExperimentConfig& cfg, Index threads = 1);

}  // namespace fracspde
