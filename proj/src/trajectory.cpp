#include "rolling/trajectory.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace rolling {

using nlohmann::json;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void Trajectory::check_shape() const {
  const size_t n = static_cast<size_t>(grid.n_nodes());
  if (t.size() != n || alpha.size() != n || alpha_hat.size() != n || R.size() != n || s.size() != n)
    throw RollingError("trajectory: expected " + std::to_string(n) + " rows (n_steps + 1), got " +
                       std::to_string(t.size()));
  const int da = dim_alpha(), dh = dim_alpha_hat(), dr = dim_R(), ds = dim_s();
  for (size_t k = 0; k < n; ++k) {
    if (alpha[k].size() != da || alpha_hat[k].size() != dh || R[k].rows() != dr || R[k].cols() != dr ||
        s[k].size() != ds)
      throw RollingError("trajectory: inconsistent dimensions at row " + std::to_string(k));
    if (std::abs(t[k] - grid.t(static_cast<int>(k))) > 1e-9 * std::max(1.0, std::abs(t[k])))
      throw RollingError("trajectory: t at row " + std::to_string(k) + " is off the declared grid");
  }
}

TrajectoryFormat parse_format(const std::string& name) {
  if (name == "csv") return TrajectoryFormat::Csv;
  if (name == "json") return TrajectoryFormat::Json;
  throw RollingError("unknown format: " + name + " (expected csv or json)");
}

std::string format_name(TrajectoryFormat f) { return f == TrajectoryFormat::Csv ? "csv" : "json"; }

namespace {

json metadata(const Trajectory& tr) {
  return json{{"format_version", tr.format_version},
              {"model", tr.model},
              {"model_source", tr.model_source},
              {"mode", tr.mode},
              {"grid", {{"t0", tr.grid.t0()}, {"t1", tr.grid.t1()}, {"n_steps", tr.grid.n_steps()}}},
              {"dims",
               {{"alpha", tr.dim_alpha()}, {"alpha_hat", tr.dim_alpha_hat()}, {"R", tr.dim_R()}, {"s", tr.dim_s()}}}};
}

struct Dims {
  int a, h, r, s;
};

Dims read_metadata(const json& m, Trajectory& tr) {
  tr.format_version = m.at("format_version").get<int>();
  if (tr.format_version != 1)
    throw RollingError("trajectory: unsupported format_version " + std::to_string(tr.format_version));
  tr.model = m.at("model").get<std::string>();
  tr.model_source = m.value("model_source", tr.model);
  tr.mode = m.at("mode").get<std::string>();
  if (tr.mode != "extrinsic" && tr.mode != "intrinsic") throw RollingError("trajectory: unknown mode " + tr.mode);
  const auto& g = m.at("grid");
  const int n = g.at("n_steps").get<int>();
  if (n < 1) throw RollingError("trajectory: n_steps must be positive");
  tr.grid = TimeGrid(g.at("t0").get<double>(), g.at("t1").get<double>(), n);
  const auto& d = m.at("dims");
  Dims dims{d.at("alpha").get<int>(), d.at("alpha_hat").get<int>(), d.at("R").get<int>(), d.at("s").get<int>()};
  if (dims.a <= 0 || dims.h <= 0 || dims.r <= 0 || dims.s <= 0) throw RollingError("trajectory: bad dims");
  return dims;
}

VectorXd slice(const std::vector<double>& row, size_t& pos, int n) {
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = row[pos++];
  return v;
}

MatrixXd slice_rowmajor(const std::vector<double>& row, size_t& pos, int n) {
  MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = row[pos++];
  return M;
}

void push_row(Trajectory& tr, const std::vector<double>& row, const Dims& d) {
  size_t pos = 0;
  tr.t.push_back(row[pos++]);
  tr.alpha.push_back(slice(row, pos, d.a));
  tr.alpha_hat.push_back(slice(row, pos, d.h));
  tr.R.push_back(slice_rowmajor(row, pos, d.r));
  tr.s.push_back(slice(row, pos, d.s));
}

std::vector<double> flat_row(const Trajectory& tr, size_t k) {
  std::vector<double> row;
  row.push_back(tr.t[k]);
  for (Eigen::Index i = 0; i < tr.alpha[k].size(); ++i) row.push_back(tr.alpha[k][i]);
  for (Eigen::Index i = 0; i < tr.alpha_hat[k].size(); ++i) row.push_back(tr.alpha_hat[k][i]);
  for (Eigen::Index i = 0; i < tr.R[k].rows(); ++i)
    for (Eigen::Index j = 0; j < tr.R[k].cols(); ++j) row.push_back(tr.R[k](i, j));
  for (Eigen::Index i = 0; i < tr.s[k].size(); ++i) row.push_back(tr.s[k][i]);
  return row;
}

std::vector<double> parse_csv_row(const std::string& line, size_t line_no) {
  std::vector<double> row;
  const char* p = line.c_str();
  while (true) {
    char* end = nullptr;
    errno = 0;
    const double x = std::strtod(p, &end);
    if (end == p || errno == ERANGE)
      throw RollingError("trajectory: bad number on line " + std::to_string(line_no));
    row.push_back(x);
    while (*end == ' ' || *end == '\r') ++end;
    if (*end == '\0') break;
    if (*end != ',') throw RollingError("trajectory: bad separator on line " + std::to_string(line_no));
    p = end + 1;
  }
  return row;
}

}  // namespace

std::string trajectory_to_csv(const Trajectory& tr) {
  tr.check_shape();
  std::ostringstream out;
  out << "t";
  for (int i = 0; i < tr.dim_alpha(); ++i) out << ",alpha_" << i;
  for (int i = 0; i < tr.dim_alpha_hat(); ++i) out << ",alphahat_" << i;
  for (int i = 0; i < tr.dim_R(); ++i)
    for (int j = 0; j < tr.dim_R(); ++j) out << ",R_" << i << j;
  for (int i = 0; i < tr.dim_s(); ++i) out << ",s_" << i;
  out << "\n# " << metadata(tr).dump() << "\n";
  for (size_t k = 0; k < tr.t.size(); ++k) {
    const auto row = flat_row(tr, k);
    for (size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
    out << "\n";
  }
  return out.str();
}

json trajectory_to_json(const Trajectory& tr) {
  tr.check_shape();
  json j = metadata(tr);
  j["t"] = tr.t;
  auto vecs = [](const std::vector<VectorXd>& vs) {
    json a = json::array();
    for (const auto& v : vs) a.push_back(std::vector<double>(v.data(), v.data() + v.size()));
    return a;
  };
  j["alpha"] = vecs(tr.alpha);
  j["alpha_hat"] = vecs(tr.alpha_hat);
  j["s"] = vecs(tr.s);
  json R = json::array();
  for (const auto& M : tr.R) {
    std::vector<double> flat;
    for (Eigen::Index i = 0; i < M.rows(); ++i)
      for (Eigen::Index c = 0; c < M.cols(); ++c) flat.push_back(M(i, c));
    R.push_back(flat);
  }
  j["R"] = R;
  return j;
}

Trajectory trajectory_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string header, line;
  if (!std::getline(in, header) || header.rfind("t", 0) != 0) throw RollingError("trajectory: missing CSV header");
  Trajectory tr;
  Dims d{};
  bool have_meta = false;
  size_t line_no = 1;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    if (line[0] == '#') {
      try {
        d = read_metadata(json::parse(line.substr(1)), tr);
      } catch (const json::exception& e) {
        throw RollingError(std::string("trajectory: bad metadata line: ") + e.what());
      }
      have_meta = true;
      continue;
    }
    if (!have_meta) throw RollingError("trajectory: metadata line must precede the data");
    rows.push_back(parse_csv_row(line, line_no));
  }
  if (!have_meta) throw RollingError("trajectory: missing metadata line");
  const size_t ncols = 1 + d.a + d.h + static_cast<size_t>(d.r) * d.r + d.s;
  if (static_cast<size_t>(std::count(header.begin(), header.end(), ',')) + 1 != ncols)
    throw RollingError("trajectory: header does not match the declared dimensions");
  for (size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].size() != ncols)
      throw RollingError("trajectory: row " + std::to_string(k) + " has " + std::to_string(rows[k].size()) +
                         " columns, expected " + std::to_string(ncols));
    push_row(tr, rows[k], d);
  }
  tr.check_shape();
  return tr;
}

Trajectory trajectory_from_json(const json& j) {
  try {
    Trajectory tr;
    const Dims d = read_metadata(j, tr);
    const auto& t = j.at("t");
    const size_t n = t.size();
    for (const char* key : {"alpha", "alpha_hat", "R", "s"})
      if (j.at(key).size() != n) throw RollingError(std::string("trajectory: array '") + key + "' has wrong length");
    for (size_t k = 0; k < n; ++k) {
      std::vector<double> row{t[k].get<double>()};
      const std::pair<const char*, size_t> parts[] = {
          {"alpha", d.a}, {"alpha_hat", d.h}, {"R", static_cast<size_t>(d.r) * d.r}, {"s", d.s}};
      for (const auto& [key, len] : parts) {
        const auto v = j.at(key)[k].get<std::vector<double>>();
        if (v.size() != len) throw RollingError(std::string("trajectory: wrong entry size in '") + key + "'");
        row.insert(row.end(), v.begin(), v.end());
      }
      push_row(tr, row, d);
    }
    tr.check_shape();
    return tr;
  } catch (const json::exception& e) {
    throw RollingError(std::string("trajectory: ") + e.what());
  }
}

void write_trajectory(const Trajectory& tr, const std::filesystem::path& path, TrajectoryFormat f) {
  const std::string text = f == TrajectoryFormat::Csv ? trajectory_to_csv(tr) : trajectory_to_json(tr).dump() + "\n";
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw RollingError("cannot write " + path.string());
  out << text;
  if (!out) throw RollingError("write failed: " + path.string());
}

Trajectory read_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw RollingError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw RollingError("trajectory: empty file " + path.string());
  if (text[first] == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw RollingError(std::string("trajectory: ") + e.what());
    }
    return trajectory_from_json(j);
  }
  return trajectory_from_csv(text);
}

json report_to_json(const ResidualReport& r, bool per_node) {
  json j;
  for (const auto& [name, v] : r.summary()) j[name] = v;
  j["max_residual"] = r.max_residual();
  if (per_node) {
    j["rolling_point_nodes"] = r.rolling_point_nodes;
    j["tangency_nodes"] = r.tangency_nodes;
    j["no_slip_nodes"] = r.no_slip_nodes;
    j["no_twist_tan_nodes"] = r.no_twist_tan_nodes;
    j["no_twist_norm_nodes"] = r.no_twist_norm_nodes;
  }
  return j;
}

json report_to_json(const TripleReport& r) {
  return json{{"isometry", r.isometry},
              {"velocity", r.velocity},
              {"orientation_ok", r.orientation_ok},
              {"max_residual", std::max(r.isometry, r.velocity)}};
}

}  // namespace rolling
