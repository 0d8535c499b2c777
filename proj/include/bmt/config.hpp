#pragma once

#include "bmt/core.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace bmt {

/// Parse or validation failure with the offending line (0 when not tied to a
/// line) and key.
class ConfigError : public InvalidInput {
 public:
  ConfigError(int line, std::string key, const std::string& what);
  int line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  int line_;
  std::string key_;
};

/// Flat `key = value` file. `#` starts a comment; blank lines are ignored.
/// Keys must appear in the schema and at most once; values are checked
/// against the key's type and range while parsing.
class Config {
 public:
  static Config parse(std::string_view text);
  static Config load(const std::filesystem::path& file);

  std::string serialize() const;
  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::string& raw(const std::string& key) const { return entries_.at(key); }
  void set(const std::string& key, const std::string& value);
  const std::map<std::string, std::string>& entries() const { return entries_; }

  bool operator==(const Config&) const = default;

 private:
  std::map<std::string, std::string> entries_;
};

struct KeyDoc {
  std::string key;
  std::string type;
  std::string default_value;
  std::string description;
};

/// The documented schema, in a stable order.
const std::vector<KeyDoc>& config_schema();

struct MeasureSpec {
  std::string kind = "gaussian";  // gaussian, truncated_gaussian, uniform_interval, uniform_ball, mixture, isotropic_uniform
  int dim = 1;
  double mean = 0.0;
  double var = 1.0;
  double sigma = 1.0;
  double S = 1.0;
  double lower = 0.0;
  double R = 1.0;

  bool operator==(const MeasureSpec&) const = default;
};

struct GridSpec {
  std::string kind = "geometric";
  double rho = 0.9;
  double eps_end = 1e-4;
  int steps = 100;

  bool operator==(const GridSpec&) const = default;
};

struct ExperimentConfig {
  std::string experiment;
  MeasureSpec measure;
  GridSpec grid;
  std::size_t n_paths = 1000;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out = "out";

  // contraction / localization
  int moment = 1;
  double q = 2.0;
  double slack = 0.05;
  // simulate
  double ks_threshold = 0.02;
  std::size_t save_paths = 20;
  // inequalities
  int n_boot = 200;
  // stein
  std::string statistic = "identity";
  std::size_t n_inner = 4;
  int s_nodes = 16;
  int bins = 25;
  std::size_t min_count = 200;
  std::vector<int> clt_n = {25, 100, 400};
  std::size_t clt_mc = 100000;
  // counterexample
  std::vector<double> eps_list = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  double tube_eps = 0.05;
  double tube_delta = 0.2;
  std::size_t tube_paths = 100000;
  // wiener_ot
  std::size_t ot_pairs = 10000;

  static ExperimentConfig from(const Config& c);
  Config to_config() const;

  bool operator==(const ExperimentConfig&) const = default;
};

}  // namespace bmt
