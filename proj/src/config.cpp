#include "fracspde/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace fracspde {

namespace {

template <typename T>
void read(const nlohmann::json& j, const char* key, T& field) {
  try {
    field = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "command", "alpha",      "g",           "delta",           "eta",
      "p",       "theorem",    "levels",      "n_ref",           "final_time",
      "steps",   "samples",    "seed",        "n",               "t",
      "t_grid",  "gamma",      "r",           "x",               "f",
      "method",  "kernel",     "xs",          "ys",              "rel_tol",
      "quad_factor", "ref_quad_factor", "substeps", "frozen_diffusion", "output_json",
      "output_csv", "dump_paths"};
  return keys;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  return {{"command", c.command},
          {"alpha", c.alpha},
          {"g", c.g},
          {"delta", c.delta},
          {"eta", c.eta},
          {"p", c.p},
          {"theorem", c.theorem},
          {"levels", c.levels},
          {"n_ref", c.n_ref},
          {"final_time", c.final_time},
          {"steps", c.steps},
          {"samples", c.samples},
          {"seed", c.seed},
          {"n", c.n},
          {"t", c.t},
          {"t_grid", c.t_grid},
          {"gamma", c.gamma},
          {"r", c.r},
          {"x", c.x},
          {"f", c.f},
          {"method", c.method},
          {"kernel", c.kernel},
          {"xs", c.xs},
          {"ys", c.ys},
          {"rel_tol", c.rel_tol},
          {"quad_factor", c.quad_factor},
          {"ref_quad_factor", c.ref_quad_factor},
          {"substeps", c.substeps},
          {"frozen_diffusion", c.frozen_diffusion},
          {"output_json", c.output_json},
          {"output_csv", c.output_csv},
          {"dump_paths", c.dump_paths}};
}

ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig c) {
  if (!j.is_object()) throw Error(ErrorKind::Config, "config must be a JSON object");
  const auto& keys = config_keys();
  for (const auto& item : j.items()) {
    if (std::find(keys.begin(), keys.end(), item.key()) == keys.end()) {
      throw Error(ErrorKind::Config, "unknown config key '" + item.key() + "'");
    }
  }
  auto maybe = [&](const char* key, auto& field) {
    if (j.contains(key)) read(j, key, field);
  };
  maybe("command", c.command);
  maybe("alpha", c.alpha);
  maybe("g", c.g);
  maybe("delta", c.delta);
  maybe("eta", c.eta);
  maybe("p", c.p);
  maybe("theorem", c.theorem);
  maybe("levels", c.levels);
  maybe("n_ref", c.n_ref);
  maybe("final_time", c.final_time);
  maybe("steps", c.steps);
  maybe("samples", c.samples);
  maybe("seed", c.seed);
  maybe("n", c.n);
  maybe("t", c.t);
  maybe("t_grid", c.t_grid);
  maybe("gamma", c.gamma);
  maybe("r", c.r);
  maybe("x", c.x);
  maybe("f", c.f);
  maybe("method", c.method);
  maybe("kernel", c.kernel);
  maybe("xs", c.xs);
  maybe("ys", c.ys);
  maybe("rel_tol", c.rel_tol);
  maybe("quad_factor", c.quad_factor);
  maybe("ref_quad_factor", c.ref_quad_factor);
  maybe("substeps", c.substeps);
  maybe("frozen_diffusion", c.frozen_diffusion);
  maybe("output_json", c.output_json);
  maybe("output_csv", c.output_csv);
  maybe("dump_paths", c.dump_paths);
  return c;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open config file '" + path + "'");
  // An empty file is an empty config.
  in >> std::ws;
  if (in.peek() == std::ifstream::traits_type::eof()) return {};
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, "'" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

ExperimentConfig resolve_defaults(ExperimentConfig cfg) {
  if (cfg.levels.empty()) throw Error(ErrorKind::Config, "levels must not be empty");
  if (cfg.n_ref == 0) cfg.n_ref = 4 * *std::max_element(cfg.levels.begin(), cfg.levels.end());
  if (cfg.steps == 0) {
    const double coarsest = static_cast<double>(*std::min_element(cfg.levels.begin(), cfg.levels.end()));
    const double dt = cfg.final_time * std::pow(coarsest, -cfg.alpha) / 8.0;
    cfg.steps = std::max<Index>(1, static_cast<Index>(std::ceil(cfg.final_time / dt - 1e-9)));
  }
  return cfg;
}

LabConfig to_lab_config(const ExperimentConfig& in, Index threads) {
  const ExperimentConfig c = resolve_defaults(in);
  LabConfig lab;
  lab.alpha = c.alpha;
  lab.g = nemytskii_catalogue(c.g);
  lab.delta = c.delta;
  lab.eta = c.eta;
  lab.p = c.p;
  lab.theorem = c.theorem;
  lab.levels = c.levels;
  lab.n_ref = c.n_ref;
  lab.final_time = c.final_time;
  lab.steps = c.steps;
  lab.samples = c.samples;
  lab.seed = c.seed;
  lab.threads = threads;
  lab.quad_factor = c.quad_factor;
  lab.ref_quad_factor = c.ref_quad_factor;
  lab.substeps = c.substeps;
  lab.frozen_diffusion = c.frozen_diffusion;
  return lab;
}

}  // namespace fracspde
