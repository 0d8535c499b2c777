#include "bmt/config.hpp"
#include "bmt/experiments.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Brownian transport map experiments"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  run->add_option("--config", config_path, "flat key = value config")->required()->check(CLI::ExistingFile);
  auto* seed_opt = run->add_option("--seed", seed, "override the master seed");
  auto* out_opt = run->add_option("--out", out_dir, "override the output directory");

  auto* list = app.add_subcommand("list", "list experiments");
  auto* schema = app.add_subcommand("schema", "print the config keys");

  CLI11_PARSE(app, argc, argv);

  if (*list) {
    for (const auto& e : bmt::experiment_catalog())
      std::cout << e.name << "\t" << e.description << "\t[" << e.exercises << "]\n";
    return 0;
  }
  if (*schema) {
    for (const auto& k : bmt::config_schema())
      std::cout << k.key << " (" << k.type << ", default " << (k.default_value.empty() ? "required" : k.default_value)
                << "): " << k.description << "\n";
    return 0;
  }

  bmt::ExperimentConfig cfg;
  try {
    cfg = bmt::ExperimentConfig::from(bmt::Config::load(config_path));
  } catch (const std::exception& ex) {
    std::cerr << config_path << ": " << ex.what() << "\n";
    return 1;
  }
  if (*seed_opt) cfg.seed = seed;
  if (*out_opt) cfg.out = out_dir;
  const int code = bmt::run_and_write(cfg, cfg.out);
  std::cout << cfg.experiment << ": " << (code == 0 ? "pass" : code == 2 ? "check failed" : "error") << " (" << cfg.out
            << "/summary.json)\n";
  return code;
}
