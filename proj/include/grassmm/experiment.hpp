#pragma once

/// Batch experiments driven by a JSON config: problem construction per seed,
/// trace/report/audit files, and the exit-code contract used by the CLI.

#include "grassmm/audits.hpp"
#include "grassmm/block_mm.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace grassmm {

enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,
  kExitNotConverged = 2,
  kExitAuditFailed = 3,
};

/// Validation failure; `line` is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
public:
  ConfigError(int line, const std::string &field, const std::string &message);
  int line() const noexcept { return line_; }
  const std::string &field() const noexcept { return field_; }

private:
  int line_;
  std::string field_;
};

enum class ProblemKind { kDeconv, kSubspaceMean };

struct DeconvParams {
  Eigen::Index N = 64;
  double sparsity = 0.05;
  std::optional<Eigen::Index> spikes; // exact spike count instead of Bernoulli
  Eigen::Index kernel_support = 8;
  double noise_sigma = 0.0;
  std::optional<double> lambda; // default: heuristic from the initial kernel
  bool random_init = false;
  double step_scale = 1.0;
};

struct SubspaceMeanParams {
  Eigen::Index N = 10;
  Eigen::Index M = 40;
  Eigen::Index D = 2;
};

struct AuditParams {
  int anchors = 5;
  int samples = 200;
  int directions = 20;
  int pairs = 50;
  int t_samples = 9;
  double radius = 0.39269908169872414; // pi / 8
  int rotations = 10;
};

struct ExperimentConfig {
  ProblemKind kind = ProblemKind::kSubspaceMean;
  DeconvParams deconv;
  SubspaceMeanParams subspace;
  SolverConfig solver;
  AuditParams audit;
  std::vector<std::uint64_t> seeds;
  std::string output = "out";
  int workers = 1;
};

/// Parses and validates a config document. Throws ConfigError.
ExperimentConfig parse_config(const std::string &text);
ExperimentConfig load_config(const std::filesystem::path &path);

const char *kind_name(ProblemKind kind);

/// Problem and starting point for one seed.
struct SeedSetup {
  BlockProblem problem;
  GrassmannPoint init_G;
  Vector init_c;
  std::optional<Vector> true_kernel; // deconv only
  std::optional<double> oracle_cost; // subspace-mean only
  double lambda = 0.0;                // deconv only
};

SeedSetup build_seed(const ExperimentConfig &config, std::uint64_t seed);

struct SeedOutcome {
  std::uint64_t seed = 0;
  BlockMMResult result;
  std::optional<double> recovery;
  std::optional<double> oracle_cost;
};

SeedOutcome run_seed(const ExperimentConfig &config, std::uint64_t seed);

/// CSV with header iter,f,f_after_G,dc_step,grad_norm_G,grad_norm_c and
/// 17 significant digits.
void write_trace_csv(const IterationTrace &trace, const std::filesystem::path &path);

/// All audits for one seed, in a fixed order.
std::vector<AuditResult> audit_seed(const ExperimentConfig &config,
                                    std::uint64_t seed);

int cmd_run(const std::filesystem::path &config_path,
            const std::optional<std::filesystem::path> &out_dir,
            std::ostream &out, std::ostream &err);
int cmd_audit(const std::filesystem::path &config_path,
              const std::optional<std::filesystem::path> &out_dir,
              std::ostream &out, std::ostream &err);
int cmd_demo(const std::string &kind, std::uint64_t seed, std::ostream &out,
             std::ostream &err);

} // namespace grassmm
