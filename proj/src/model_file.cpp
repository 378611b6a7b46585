#include "rolling/model_file.hpp"

#include <fstream>

namespace rolling {

using nlohmann::json;

namespace {

json matrix_json(const MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) r.push_back(M(i, j));
    rows.push_back(r);
  }
  return rows;
}

MatrixXd json_matrix(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty() || !j.front().is_array())
    throw RollingError("model file: '" + what + "' must be a non-empty array of rows");
  const auto rows = j.size(), cols = j.front().size();
  MatrixXd M(rows, cols);
  for (size_t i = 0; i < rows; ++i) {
    if (j[i].size() != cols) throw RollingError("model file: ragged matrix in '" + what + "'");
    for (size_t k = 0; k < cols; ++k) M(i, k) = j[i][k].get<double>();
  }
  return M;
}

VectorXd json_vector(const json& j, const std::string& what) {
  if (!j.is_array()) throw RollingError("model file: '" + what + "' must be an array");
  VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

const json& field(const json& j, const char* key) {
  if (!j.contains(key)) throw RollingError(std::string("model file: missing field '") + key + "'");
  return j.at(key);
}

}  // namespace

json model_to_json(const CartanModel& model) {
  json j;
  j["format_version"] = 1;
  j["name"] = model.name;
  const VectorXd s = model.geometry->ambient_form().signs();
  j["J_signs"] = std::vector<double>(s.data(), s.data() + s.size());
  j["basis"] = json::array();
  for (const auto& A : model.basis) j["basis"].push_back(matrix_json(A));
  j["h_indices"] = model.h_indices;
  j["p_indices"] = model.p_indices;
  const VectorXd o = model.base_point();
  j["base_point"] = std::vector<double>(o.data(), o.data() + o.size());
  j["embedding"] = "builtin:" + model.geometry->id();
  j["params"] = json::object();
  for (const auto& [k, v] : model.params) j["params"][k] = v;
  j["symmetric"] = model.symmetric;
  j["ip_p"] = matrix_json(model.ip_p);
  return j;
}

CartanModel model_from_json(const json& j) {
  try {
    CartanModel m;
    m.name = field(j, "name").get<std::string>();
    const std::string emb = field(j, "embedding").get<std::string>();
    const std::string prefix = "builtin:";
    if (emb.rfind(prefix, 0) != 0) throw RollingError("model file: embedding must be 'builtin:<id>', got '" + emb + "'");
    if (j.contains("params")) {
      for (const auto& [k, v] : j.at("params").items()) {
        if (v.is_number()) m.params[k] = {v.get<double>()};
        else m.params[k] = v.get<std::vector<double>>();
      }
    }
    m.geometry = models::make_geometry(emb.substr(prefix.size()), m.params);
    for (const auto& b : field(j, "basis")) m.basis.push_back(json_matrix(b, "basis"));
    m.h_indices = field(j, "h_indices").get<std::vector<int>>();
    m.p_indices = field(j, "p_indices").get<std::vector<int>>();
    m.symmetric = j.value("symmetric", true);

    const VectorXd signs = json_vector(field(j, "J_signs"), "J_signs");
    if (!(SignatureForm(signs) == m.geometry->ambient_form()))
      throw RollingError("model file: J_signs do not match the embedding's ambient form");
    const VectorXd o = json_vector(field(j, "base_point"), "base_point");
    const VectorXd og = m.geometry->base_point();
    if (o.size() != og.size() || (o - og).cwiseAbs().maxCoeff() > 1e-12)
      throw RollingError("model file: base_point differs from the embedding's base point");

    const auto chk = validate_model(m);
    if (!chk.ok)
      throw RollingError("model file: Cartan checks failed (closure " + std::to_string(chk.closure) + ", [h,h] " +
                         std::to_string(chk.bracket_hh) + ", [h,p] " + std::to_string(chk.bracket_hp) +
                         ", orthogonality " + std::to_string(chk.orthogonality) + ", d_e pi condition " +
                         std::to_string(chk.d_e_pi_condition) + ", equivariance " +
                         std::to_string(chk.equivariance) + ")");
    if (j.contains("ip_p")) {
      m.ip_p = json_matrix(j.at("ip_p"), "ip_p");
      if (m.ip_p.rows() != m.p_dim() || m.ip_p.cols() != m.p_dim())
        throw RollingError("model file: ip_p must be |p| x |p|");
    } else {
      m.set_default_ip_p();
    }
    return m;
  } catch (const json::exception& e) {
    throw RollingError(std::string("model file: ") + e.what());
  }
}

CartanModel load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw RollingError("cannot read model file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw RollingError("model file " + path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

void save_model_file(const CartanModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw RollingError("cannot write model file " + path.string());
  out << model_to_json(model).dump(1) << "\n";
}

CartanModel resolve_model(const std::string& name_or_path, const std::filesystem::path& base_dir) {
  const auto names = models::builtin_model_names();
  if (std::find(names.begin(), names.end(), name_or_path) != names.end()) return models::builtin_model(name_or_path);
  std::filesystem::path p(name_or_path);
  if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
  if (p.extension() == ".json" && std::filesystem::exists(p)) return load_model_file(p);
  throw RollingError("unknown model: " + name_or_path);
}

}  // namespace rolling
