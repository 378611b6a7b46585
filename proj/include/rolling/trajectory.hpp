#pragma once

// Trajectory files (CSV or JSON) holding t, alpha, alpha_hat, R and s per node,
// plus JSON encodings of residual reports.

#include "rolling/rolling_core.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace rolling {

struct Trajectory {
  int format_version = 1;
  std::string model;         ///< model name as shown to the user
  std::string model_source;  ///< builtin name or absolute model file path
  std::string mode;          ///< "extrinsic" or "intrinsic"
  TimeGrid grid;
  std::vector<double> t;
  std::vector<VectorXd> alpha;
  std::vector<VectorXd> alpha_hat;
  std::vector<MatrixXd> R;
  std::vector<VectorXd> s;

  int dim_alpha() const { return alpha.empty() ? 0 : static_cast<int>(alpha.front().size()); }
  int dim_alpha_hat() const { return alpha_hat.empty() ? 0 : static_cast<int>(alpha_hat.front().size()); }
  int dim_R() const { return R.empty() ? 0 : static_cast<int>(R.front().rows()); }
  int dim_s() const { return s.empty() ? 0 : static_cast<int>(s.front().size()); }

  /// Row count and per-row sizes against the declared grid and dims.
  void check_shape() const;
};

enum class TrajectoryFormat { Csv, Json };

TrajectoryFormat parse_format(const std::string& name);
std::string format_name(TrajectoryFormat f);

std::string trajectory_to_csv(const Trajectory& tr);
nlohmann::json trajectory_to_json(const Trajectory& tr);
Trajectory trajectory_from_csv(const std::string& text);
Trajectory trajectory_from_json(const nlohmann::json& j);

void write_trajectory(const Trajectory& tr, const std::filesystem::path& path, TrajectoryFormat f);
/// Detects the format from the first non-blank character ('{' means JSON).
Trajectory read_trajectory(const std::filesystem::path& path);

nlohmann::json report_to_json(const ResidualReport& r, bool per_node = false);
nlohmann::json report_to_json(const TripleReport& r);

/// %.17g
std::string format_double(double x);

}  // namespace rolling
