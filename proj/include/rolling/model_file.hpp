#pragma once

// Declarative model files (JSON): basis matrices, h/p index sets, J signs,
// base point and a builtin embedding id.

#include "rolling/models.hpp"

#include <json.hpp>

#include <filesystem>

namespace rolling {

nlohmann::json model_to_json(const CartanModel& model);
/// Builds and validates a model; throws RollingError with the failing check.
CartanModel model_from_json(const nlohmann::json& j);

CartanModel load_model_file(const std::filesystem::path& path);
void save_model_file(const CartanModel& model, const std::filesystem::path& path);

/// A builtin name, or a path to a model file.
CartanModel resolve_model(const std::string& name_or_path, const std::filesystem::path& base_dir = {});

}  // namespace rolling
