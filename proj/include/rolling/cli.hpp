#pragma once

// Command-line front end: run configs, verify stored trajectories, list and
// export the builtin models.

#include "rolling/model_file.hpp"
#include "rolling/trajectory.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace rolling {

struct CurveSpec {
  std::string kind = "control";  ///< "control" (p-coordinates) or "samples" (chart points)
  std::string generator;         ///< zero | constant | rotating | fourier, empty when data is given
  nlohmann::json params = nlohmann::json::object();
  std::vector<VectorXd> data;
};

struct RunConfig {
  std::string model;
  CurveSpec curve;
  TimeGrid grid;
  std::string mode = "extrinsic";
  std::string output;
  std::string format;
  std::optional<double> threshold;             ///< default 50 h^2
  std::optional<NormalStrategy> strategy;      ///< default: per model
  std::filesystem::path base_dir;              ///< relative paths resolve against this
  std::string source;                          ///< config file, for messages
};

RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// The curve a config describes, for a given model.
CurveInput make_curve(const CartanModel& model, const RunConfig& cfg);

/// 50 h^2.
double default_threshold(const TimeGrid& grid);

struct CommandResult {
  int exit_code = 0;     ///< 0 ok, 2 residual breach, 1 error
  nlohmann::json report;
  std::string error;
};

/// Runs the rolling, writes the trajectory and returns the residual summary.
CommandResult cmd_roll(const RunConfig& cfg, const std::optional<std::filesystem::path>& out = std::nullopt,
                       const std::optional<std::string>& format = std::nullopt);

/// The rolling alone, without writing anything.
Trajectory compute_trajectory(const CartanModel& model, const RunConfig& cfg);

CommandResult cmd_verify(const std::filesystem::path& path, std::optional<double> tol = std::nullopt);
/// Residuals of an in-memory trajectory against its model.
CommandResult verify_trajectory(const Trajectory& tr, std::optional<double> tol = std::nullopt);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rolling
