#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nlseg/domain.hpp"
#include "nlseg/norm.hpp"
#include "nlseg/solver.hpp"

namespace nlseg {

constexpr int kSchemaVersion = 1;

struct ObstacleConfig {
  bool enabled = false;
  double mu = 0, lambda = 0;
};

struct AnalysisConfig {
  double delta_abs = 0;
  double delta_rel = 1e-3;
  bool separation = true;
  bool ball_regularization = true;
  bool interfaces = true;
  bool fb_condition = true;
  bool mass_balance = true;
  bool decay = true;
  bool gradient_bound = true;
  bool singular_points = true;
  bool radial_crosscheck = true;
  bool threshold_robustness = true;
  std::vector<Vec2> decay_probes;      // empty: preset default
  std::vector<double> gradient_radii;  // empty: {0.25, 0.5, 1}
  int random_probes = 8;               // seeded interior probes recorded per stage
};

struct OutputConfig {
  std::string dir = "out";
  bool dump_fields = true;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  std::string name = "experiment";
  DomainSpec domain;      // domain.h is the fixed spacing when h_over_eps == 0
  double h_over_eps = 0;  // h = min(h_max, eps / h_over_eps)
  double h_max = 1.0 / 32;
  Norm norm;
  double convexity_floor = 1e-3;
  InteractionSpec interaction;
  DataSpec data;
  double density_c = 0.25;
  SolverConfig solver;
  ObstacleConfig obstacle;
  AnalysisConfig analysis;
  OutputConfig output;
  std::uint64_t rng_seed = 0;
  std::string base_dir;  // directory of the config file; relative data paths resolve here
};

// Parses and validates a config document. Throws ConfigError naming the
// offending key and its line; unknown keys are errors.
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>",
                              const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);

// Canonical JSON of the effective configuration (sorted keys, all defaults
// spelled out). parse_config(config_to_json(c)) reproduces c.
std::string config_to_json(const ExperimentConfig& c);

// Grid spacing used at one epsilon.
double grid_spacing(const ExperimentConfig& c, double eps);

}  // namespace nlseg
