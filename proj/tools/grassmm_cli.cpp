#include "grassmm/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char **argv) {
  CLI::App app{"Two-block Grassmann majorization-minimization experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string out_dir;
  app.add_option("--out", out_dir, "Directory for traces and reports");

  std::string config_path;
  auto *run = app.add_subcommand("run", "Run every seed in a config");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  auto *audit = app.add_subcommand("audit", "Audit the surrogates of a config");
  audit->add_option("config", config_path, "Experiment config (JSON)")->required();

  std::string kind;
  std::uint64_t seed = 1;
  auto *demo = app.add_subcommand("demo", "Solve one canned instance");
  demo->add_option("kind", kind, "deconv or subspace-mean")->required();
  demo->add_option("--seed", seed, "Instance seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? grassmm::kExitOk : grassmm::kExitError;
  }

  std::optional<std::filesystem::path> out;
  if (!out_dir.empty())
    out = out_dir;
  if (*run)
    return grassmm::cmd_run(config_path, out, std::cout, std::cerr);
  if (*audit)
    return grassmm::cmd_audit(config_path, out, std::cout, std::cerr);
  return grassmm::cmd_demo(kind, seed, std::cout, std::cerr);
}
