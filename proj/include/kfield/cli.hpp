#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "kfield/config.hpp"
#include "kfield/diffusion_control.hpp"
#include "kfield/model_file.hpp"
#include "kfield/sysid.hpp"

namespace kfield {

/// Exit statuses of the kernel-field tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNumerical = 3,
  kExitIo = 4,
};

struct CommandOptions {
  std::filesystem::path out_dir;
  bool force = false;
};

/// Command options from the config ([run] out) without --force.
CommandOptions default_options(const ExperimentConfig& config);

struct SimulateResult {
  std::filesystem::path trajectory;
  std::vector<Grid1D> states;  // one per model step
};
SimulateResult cmd_simulate(const ExperimentConfig& config, const CommandOptions& options);

struct LearnResult {
  std::filesystem::path model_path;
  ModelFile model;
  Eigen::MatrixXd weights;  // M x T
};
LearnResult cmd_learn(const ExperimentConfig& config, const CommandOptions& options);

struct CheckReport {
  SpectralSummary spectrum;
  int sensors = 0;
  bool shaded = false;
  bool row_sum_nonzero = false;
  bool l_shaded = false;
  RankReport observability;
  int actuators = 0;
  RankReport controllability;
  std::filesystem::path report_path;
  std::string text;
};
CheckReport cmd_check(const ExperimentConfig& config, const CommandOptions& options);

struct ObserveRow {
  long step = 0;
  double error_norm = 0.0;
  double trace_p = 0.0;
};
struct ObserveResult {
  std::vector<ObserveRow> trace;
  bool observable = false;
  RankReport certificate;
  std::filesystem::path trace_path;
};
ObserveResult cmd_observe(const ExperimentConfig& config, const CommandOptions& options);

struct ControlResult {
  ControlRun run;
  std::filesystem::path trace_path;
};
ControlResult cmd_control(const ExperimentConfig& config, const CommandOptions& options);

struct PlacementCommandResult {
  PlacementResult placement;
  std::filesystem::path path;
};
PlacementCommandResult cmd_placement(const ExperimentConfig& config, const CommandOptions& options);

/// Entry point of the kernel-field tool; returns the process exit status.
int run_cli(int argc, const char* const* argv);

}  // namespace kfield
