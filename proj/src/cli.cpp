#include "rolling/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <future>
#include <iostream>
#include <random>

namespace rolling {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<VectorXd> rows_of(const json& j, const char* what) {
  if (!j.is_array()) throw RollingError(std::string("config: '") + what + "' must be an array of rows");
  std::vector<VectorXd> out;
  for (const auto& r : j) {
    const auto v = r.is_number() ? std::vector<double>{r.get<double>()} : r.get<std::vector<double>>();
    out.push_back(Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  }
  return out;
}

std::optional<NormalStrategy> parse_strategy(const std::string& s) {
  if (s.empty() || s == "auto") return std::nullopt;
  if (s == "closed_form") return NormalStrategy::ClosedForm;
  if (s == "frame_matching") return NormalStrategy::FrameMatching;
  throw RollingError("config: unknown normal_strategy '" + s + "'");
}

std::function<VectorXd(double)> control_generator(const std::string& name, const json& params, int dim) {
  if (name == "zero") return [dim](double) { return VectorXd::Zero(dim); };
  if (name == "constant") {
    const auto u = params.value("u", std::vector<double>(dim, 0.0));
    if (static_cast<int>(u.size()) != dim)
      throw RollingError("config: constant control needs " + std::to_string(dim) + " entries in 'u'");
    const VectorXd c = Eigen::Map<const VectorXd>(u.data(), dim);
    return [c](double) { return c; };
  }
  if (name == "rotating") {
    if (dim < 2) throw RollingError("config: rotating control needs at least two p-coordinates");
    const double amp = params.value("amplitude", 1.0), omega = params.value("omega", 1.0);
    return [dim, amp, omega](double t) {
      VectorXd u = VectorXd::Zero(dim);
      u[0] = amp * std::cos(omega * t);
      u[1] = amp * std::sin(omega * t);
      return u;
    };
  }
  if (name == "fourier") {
    // u_i(t) = c_i + sum_m (a_im cos(m t) + b_im sin(m t)) / m, coefficients N(0, scale^2)
    const int modes = params.value("modes", 3);
    const double scale = params.value("scale", 1.0);
    std::mt19937_64 rng(params.value("seed", 1ULL));
    std::normal_distribution<double> nd(0.0, scale);
    MatrixXd a(dim, modes), b(dim, modes);
    VectorXd c(dim);
    for (int i = 0; i < dim; ++i) {
      c[i] = nd(rng);
      for (int m = 0; m < modes; ++m) {
        a(i, m) = nd(rng) / (m + 1);
        b(i, m) = nd(rng) / (m + 1);
      }
    }
    return [a, b, c, modes](double t) {
      VectorXd u = c;
      for (int m = 0; m < modes; ++m) u += a.col(m) * std::cos((m + 1) * t) + b.col(m) * std::sin((m + 1) * t);
      return u;
    };
  }
  throw RollingError("config: unknown curve generator '" + name + "'");
}

std::string model_source_of(const CartanModel& model, const RunConfig& cfg) {
  const auto names = models::builtin_model_names();
  if (std::find(names.begin(), names.end(), cfg.model) != names.end()) return cfg.model;
  fs::path p(cfg.model);
  if (p.is_relative() && !cfg.base_dir.empty()) p = cfg.base_dir / p;
  (void)model;
  return fs::absolute(p).lexically_normal().string();
}

fs::path resolve(const fs::path& p, const fs::path& base) {
  return (p.is_relative() && !base.empty()) ? base / p : p;
}

json load_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw RollingError("cannot read config " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw RollingError("config " + path.string() + ": " + e.what());
  }
}

}  // namespace

double default_threshold(const TimeGrid& grid) { return 50.0 * grid.h() * grid.h(); }

RunConfig parse_run_config(const json& j, const fs::path& base_dir) {
  try {
    RunConfig c;
    c.base_dir = base_dir;
    c.model = j.at("model").get<std::string>();
    const auto& g = j.at("grid");
    const int n = g.at("n_steps").get<int>();
    if (n < 2) throw RollingError("config: n_steps must be at least 2");
    const double t0 = g.value("t0", 0.0), t1 = g.at("t1").get<double>();
    if (!(t1 > t0)) throw RollingError("config: grid needs t1 > t0");
    c.grid = TimeGrid(t0, t1, n);
    const auto& cv = j.at("curve");
    c.curve.kind = cv.value("kind", "control");
    if (c.curve.kind != "control" && c.curve.kind != "samples")
      throw RollingError("config: curve kind must be 'control' or 'samples'");
    c.curve.generator = cv.value("generator", "");
    if (cv.contains("params")) c.curve.params = cv.at("params");
    if (cv.contains("data")) c.curve.data = rows_of(cv.at("data"), "curve.data");
    if (c.curve.generator.empty() && c.curve.data.empty())
      throw RollingError("config: curve needs a 'generator' or 'data'");
    if (!c.curve.data.empty() && static_cast<int>(c.curve.data.size()) != c.grid.n_nodes())
      throw RollingError("config: curve.data needs n_steps + 1 rows");
    c.mode = j.value("mode", "extrinsic");
    if (c.mode != "extrinsic" && c.mode != "intrinsic") throw RollingError("config: mode must be extrinsic|intrinsic");
    c.output = j.value("output", "");
    c.format = j.value("format", "");
    if (!c.format.empty()) parse_format(c.format);
    if (j.contains("threshold")) c.threshold = j.at("threshold").get<double>();
    c.strategy = parse_strategy(j.value("normal_strategy", ""));
    return c;
  } catch (const json::exception& e) {
    throw RollingError(std::string("config: ") + e.what());
  }
}

RunConfig load_run_config(const fs::path& path) {
  RunConfig c = parse_run_config(load_json(path), path.parent_path());
  c.source = path.string();
  return c;
}

CurveInput make_curve(const CartanModel& model, const RunConfig& cfg) {
  const auto& cs = cfg.curve;
  if (cs.kind == "control") {
    if (!cs.data.empty()) {
      for (const auto& v : cs.data)
        if (v.size() != model.p_dim())
          throw RollingError("config: control rows need " + std::to_string(model.p_dim()) + " entries");
      return ControlCurve::from_samples(cfg.grid, cs.data);
    }
    return ControlCurve::from_function(cfg.grid, control_generator(cs.generator, cs.params, model.p_dim()));
  }
  if (!cs.data.empty()) {
    for (const auto& v : cs.data)
      if (v.size() != model.geometry->chart_dim())
        throw RollingError("config: sample rows need " + std::to_string(model.geometry->chart_dim()) + " entries");
    return SampledCurve{cfg.grid, cs.data};
  }
  // generated samples: the projection of the lift of the generated control
  const ControlCurve u = ControlCurve::from_function(cfg.grid, control_generator(cs.generator, cs.params, model.p_dim()));
  return SampledCurve{cfg.grid, project_path(model, horizontal_lift(model, u))};
}

Trajectory compute_trajectory(const CartanModel& model, const RunConfig& cfg) {
  const CurveInput curve = make_curve(model, cfg);
  Trajectory tr;
  tr.model = model.name;
  tr.model_source = model_source_of(model, cfg);
  tr.mode = cfg.mode;
  tr.grid = cfg.grid;
  for (int k = 0; k < cfg.grid.n_nodes(); ++k) tr.t.push_back(cfg.grid.t(k));
  if (cfg.mode == "extrinsic") {
    const ExtrinsicRolling er = cfg.strategy ? extrinsic_roll(model, curve, *cfg.strategy) : extrinsic_roll(model, curve);
    tr.alpha = er.path.alpha;
    tr.alpha_hat = er.path.alpha_hat;
    for (const auto& g : er.path.motions) {
      tr.R.push_back(g.R);
      tr.s.push_back(g.s);
    }
  } else {
    const IntrinsicRolling ir = intrinsic_roll(model, curve);
    tr.alpha = ir.triple.alpha;
    tr.alpha_hat = ir.triple.alpha_hat;
    tr.R = ir.triple.A;
    tr.s.assign(tr.t.size(), VectorXd::Zero(tr.dim_alpha()));
  }
  return tr;
}

CommandResult verify_trajectory(const Trajectory& tr, std::optional<double> tol) {
  tr.check_shape();
  const CartanModel model = resolve_model(tr.model_source);
  const double threshold = tol.value_or(default_threshold(tr.grid));
  CommandResult res;
  res.report = json{{"model", tr.model}, {"mode", tr.mode}, {"n_steps", tr.grid.n_steps()}, {"threshold", threshold}};
  bool pass = false;
  if (tr.mode == "extrinsic") {
    const SignatureForm form = model.geometry->ambient_form();
    if (tr.dim_alpha() != form.dim() || tr.dim_alpha_hat() != form.dim() || tr.dim_R() != form.dim() ||
        tr.dim_s() != form.dim())
      throw RollingError("trajectory: dimensions do not match model " + tr.model);
    RollingMapPath path{tr.grid, form, {}, tr.alpha, tr.alpha_hat};
    for (size_t k = 0; k < tr.R.size(); ++k) path.motions.push_back({tr.R[k], tr.s[k]});
    const ExtrinsicFrames f = extrinsic_frames(model, path);
    const ResidualReport r = residual_suite(path, f.tangent_M, f.tangent_Mhat, f.normal_Mhat);
    res.report["residuals"] = report_to_json(r);
    pass = r.passes(threshold);
  } else {
    const auto& geo = *model.geometry;
    const int c = geo.chart_dim();
    if (tr.dim_alpha() != c || tr.dim_alpha_hat() != c || tr.dim_R() != c)
      throw RollingError("trajectory: dimensions do not match model " + tr.model);
    RollingTriple triple;
    triple.grid = tr.grid;
    triple.alpha = tr.alpha;
    triple.alpha_hat = tr.alpha_hat;
    triple.A = tr.R;
    triple.metric_Mhat = geo.chart_metric(model.base_point());
    triple.frames_M.grid = tr.grid;
    for (const auto& a : tr.alpha) {
      triple.metric_M.push_back(geo.chart_metric(a));
      triple.frames_M.frames.push_back(geo.chart_tangent_frame(a));
    }
    const TripleReport r = check_triple(triple);
    res.report["residuals"] = report_to_json(r);
    pass = r.orientation_ok && std::max(r.isometry, r.velocity) <= threshold;
  }
  res.report["pass"] = pass;
  res.exit_code = pass ? 0 : 2;
  return res;
}

CommandResult cmd_roll(const RunConfig& cfg, const std::optional<fs::path>& out,
                       const std::optional<std::string>& format) {
  CommandResult res;
  try {
    const CartanModel model = resolve_model(cfg.model, cfg.base_dir);
    const Trajectory tr = compute_trajectory(model, cfg);

    fs::path out_path;
    if (out) out_path = *out;
    else if (!cfg.output.empty()) out_path = resolve(cfg.output, cfg.base_dir);
    std::string fmt = format.value_or(cfg.format);
    if (fmt.empty()) fmt = out_path.extension() == ".json" ? "json" : "csv";
    const TrajectoryFormat f = parse_format(fmt);
    if (out_path.empty()) {
      const std::string stem = cfg.source.empty() ? std::string("trajectory") : fs::path(cfg.source).stem().string();
      out_path = resolve(stem + "." + fmt, cfg.base_dir);
    }
    write_trajectory(tr, out_path, f);

    const double threshold = cfg.threshold.value_or(default_threshold(cfg.grid));
    res = verify_trajectory(tr, threshold);
    res.report["output"] = out_path.string();
    res.report["format"] = fmt;
    if (!cfg.source.empty()) res.report["config"] = cfg.source;
  } catch (const std::exception& e) {
    res.exit_code = 1;
    res.error = e.what();
    res.report = json{{"error", res.error}};
    if (!cfg.source.empty()) res.report["config"] = cfg.source;
  }
  return res;
}

CommandResult cmd_verify(const fs::path& path, std::optional<double> tol) {
  CommandResult res;
  try {
    const Trajectory tr = read_trajectory(path);
    res = verify_trajectory(tr, tol);
    res.report["file"] = path.string();
  } catch (const std::exception& e) {
    res.exit_code = 1;
    res.error = e.what();
    res.report = json{{"error", res.error}, {"file", path.string()}};
  }
  return res;
}

namespace {

int roll_command(const std::string& config, const std::string& out, const std::string& format, std::ostream& os,
                 std::ostream& es) {
  const std::optional<std::string> fmt = format.empty() ? std::nullopt : std::optional<std::string>(format);
  if (fs::is_directory(config)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(config))
      if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) {
      es << "no .json configs in " << config << "\n";
      return 1;
    }
    std::vector<std::future<CommandResult>> jobs;
    for (const auto& f : files) {
      jobs.push_back(std::async(std::launch::async, [f, out, fmt] {
        RunConfig cfg;
        try {
          cfg = load_run_config(f);
        } catch (const std::exception& e) {
          return CommandResult{1, json{{"config", f.string()}, {"error", e.what()}}, e.what()};
        }
        std::optional<fs::path> target;
        if (!out.empty()) {
          const std::string ext = fmt.value_or(cfg.format.empty() ? "csv" : cfg.format);
          target = fs::path(out) / (f.stem().string() + "." + ext);
        }
        return cmd_roll(cfg, target, fmt);
      }));
    }
    json all = json::array();
    int code = 0;
    for (auto& j : jobs) {
      CommandResult r = j.get();
      if (r.exit_code == 1) es << r.report.value("config", std::string()) << ": " << r.error << "\n";
      code = (r.exit_code == 1 || code == 1) ? 1 : std::max(code, r.exit_code);
      all.push_back(r.report);
    }
    os << all.dump(2) << "\n";
    return code;
  }
  RunConfig cfg;
  try {
    cfg = load_run_config(config);
  } catch (const std::exception& e) {
    es << e.what() << "\n";
    return 1;
  }
  const CommandResult r =
      cmd_roll(cfg, out.empty() ? std::nullopt : std::optional<fs::path>(out), fmt);
  if (r.exit_code == 1) {
    es << r.error << "\n";
    return 1;
  }
  os << r.report.dump(2) << "\n";
  return r.exit_code;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& os, std::ostream& es) {
  CLI::App app{"Rolling maps of homogeneous spaces on flat spaces", "rollkit"};
  app.require_subcommand(1);

  std::string config, out, format;
  auto* roll = app.add_subcommand("roll", "run a config file (or every .json config in a directory)");
  roll->add_option("--config", config, "config file or directory")->required();
  roll->add_option("--out", out, "trajectory file (output directory for a config directory)");
  roll->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  std::string in;
  std::optional<double> tol;
  auto* verify = app.add_subcommand("verify", "recompute residuals of a stored trajectory");
  verify->add_option("--in", in, "trajectory file")->required();
  verify->add_option("--tol", tol, "tolerance (default 50 h^2)");

  auto* models_cmd = app.add_subcommand("models", "builtin models");
  models_cmd->require_subcommand(1);
  auto* list = models_cmd->add_subcommand("list", "list builtin models");
  std::string export_dir;
  auto* exp = models_cmd->add_subcommand("export", "write every builtin model as a JSON model file");
  exp->add_option("dir", export_dir, "target directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, os, es);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*roll) return roll_command(config, out, format, os, es);
    if (*verify) {
      const CommandResult r = cmd_verify(in, tol);
      if (r.exit_code == 1) {
        es << r.error << "\n";
        return 1;
      }
      os << r.report.dump(2) << "\n";
      return r.exit_code;
    }
    if (*list) {
      for (const auto& name : models::builtin_model_names()) {
        const CartanModel m = models::builtin_model(name);
        os << name << "  embedding=" << m.geometry->id() << "  dim=" << m.geometry->manifold_dim()
           << "  ambient=" << m.geometry->ambient_form().dim() << (m.symmetric ? "  symmetric" : "") << "\n";
      }
      return 0;
    }
    if (*exp) {
      fs::create_directories(export_dir);
      for (const auto& name : models::builtin_model_names()) {
        const fs::path p = fs::path(export_dir) / (name + ".json");
        save_model_file(models::builtin_model(name), p);
        os << p.string() << "\n";
      }
      return 0;
    }
  } catch (const std::exception& e) {
    es << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace rolling
