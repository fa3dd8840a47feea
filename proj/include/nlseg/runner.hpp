#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nlseg/config.hpp"

namespace nlseg {

struct RunOptions {
  std::string output_dir;  // overrides output.dir when set
  bool strict = false;     // informational checks count toward the exit status
  int threads = 0;         // 0: keep the current setting
  std::function<void(const std::string&)> log;
};

struct CheckResult {
  std::string name;
  double measured = 0, target = 0, tol = 0;
  double tol_high = -1;     // upper tolerance when asymmetric
  bool pass = false;
  bool informational = false;
  std::string provenance;   // law | oracle | analytic | postcondition
  std::string detail;
};

struct Report {
  std::string name;
  std::vector<CheckResult> checks;
  std::vector<std::string> warnings;

  // Nonempty and every counted check passes.
  bool passed(bool strict) const;
  std::string to_json(bool strict) const;
  std::string to_text(bool strict) const;
};

// Exit statuses shared by the library entry points and the CLI.
enum ExitStatus { kExitPass = 0, kExitChecksFailed = 1, kExitUsage = 2, kExitError = 3 };

// Solves every stage of the schedule (resuming from complete checkpoints in
// the output directory), then analyses the run. Writes config.json,
// stage_NN/ dumps, metrics.json, report.json and report.txt.
Report run_experiment(const ExperimentConfig& cfg, const RunOptions& opt);

// Re-analyses a state directory written by run_experiment.
Report analyze_run(const std::string& dir, const RunOptions& opt);

// Static checks: norm convexity, domain construction at the first and last
// spacing, boundary data assumptions, resolution coupling and obstacles.
Report validate_experiment(const ExperimentConfig& cfg, const RunOptions& opt);

}  // namespace nlseg
