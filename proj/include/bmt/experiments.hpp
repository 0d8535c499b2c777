#pragma once

#include "bmt/config.hpp"
#include "bmt/csv.hpp"
#include "bmt/follmer.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

namespace bmt {

struct ExperimentInfo {
  std::string name;
  std::string description;
  std::string exercises;  // the result the experiment checks
};

/// The eight experiments in a fixed order.
const std::vector<ExperimentInfo>& experiment_catalog();

struct CheckResult {
  std::string name;
  bool passed = false;
  std::map<std::string, double> values;
  std::string note;
};

struct ExperimentResult {
  std::string experiment;
  std::vector<CheckResult> checks;
  std::vector<std::pair<std::string, CsvTable>> tables;  // file name, table
  bool passed() const;
};

TargetMeasure build_measure(const MeasureSpec& spec);
std::shared_ptr<const TimeGrid> build_grid(const GridSpec& spec);

/// Runs the experiment; progress lines go to `log`. Throws on execution
/// errors.
ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream& log);

/// run_experiment plus summary.json, the CSV tables and run.log in `out`.
/// Returns 0 when every check passes, 2 on a failed check and 1 on an
/// execution error.
int run_and_write(const ExperimentConfig& cfg, const std::filesystem::path& out);

}  // namespace bmt
