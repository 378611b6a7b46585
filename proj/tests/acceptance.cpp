// One PASS/FAIL line per acceptance criterion.  Exit status is the number of
// failed criteria.

#include "rolling/models.hpp"
#include "support/oracles.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace rolling;
using Eigen::Vector2d;
using Eigen::Vector3d;
using oracle::max_abs;

namespace {

const double kPi = std::acos(-1.0);

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

double vmax(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

ControlCurve constant(const TimeGrid& grid, const VectorXd& u) {
  return ControlCurve::from_function(grid, [u](double) { return u; });
}

ControlCurve smooth(const CartanModel& m, std::uint64_t seed, const TimeGrid& grid, double scale = 0.4) {
  oracle::Gen g(seed);
  return ControlCurve::from_function(grid, oracle::smooth_control(g, m.p_dim(), 2, scale));
}

// p-coordinates of unit speed along chart direction `dir` at o
VectorXd unit_control(const CartanModel& m, const VectorXd& dir) {
  const VectorXd u = m.d_e_pi().colPivHouseholderQr().solve(dir);
  return u / std::sqrt(u.dot(m.ip_p * u));
}

ResidualReport suite(const ExtrinsicRolling& er) {
  return residual_suite(er.path, er.tangent_M, er.tangent_Mhat, er.normal_Mhat);
}

// ------------------------------------------------------------------ criteria

Outcome c1_se_algebra() {
  oracle::Gen g(1);
  double assoc = 0.0, inv = 0.0, iso = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = g.integer(3, 8);
    const VectorXd signs = g.signs(n, true);
    const SignatureForm form(signs);
    auto motion = [&] { return RigidMotion{g.j_orthogonal(signs, 0.3), g.vec(n)}; };
    const RigidMotion a = motion(), b = motion(), c = motion();
    const RigidMotion l = se_compose(se_compose(c, b), a), r = se_compose(c, se_compose(b, a));
    assoc = std::max({assoc, max_abs(l.R - r.R), max_abs(l.s - r.s)});
    const RigidMotion e = se_compose(a, se_inverse(a));
    inv = std::max({inv, max_abs(e.R - MatrixXd::Identity(n, n)), max_abs(e.s)});
    const VectorXd x = g.vec(n), y = g.vec(n);
    const VectorXd d0 = x - y, d1 = se_act(l, x) - se_act(l, y);
    // an indefinite <d, d> cancels terms of size |d|^2, so roundoff is relative to that
    iso = std::max(iso, std::abs(form.ip(d1, d1) - form.ip(d0, d0)) / std::max(1.0, d1.squaredNorm()));
    iso = std::max(iso, j_orthogonality_residual(l.R, form));
  }
  const double worst = std::max({assoc, inv, iso});
  return {worst <= 1e-12, "associativity " + fmt(assoc) + ", inverse " + fmt(inv) + ", isometry " + fmt(iso)};
}

Outcome c2_convergence() {
  // equator traversed at varying speed so the residual is not at roundoff
  const Vector2d dir(1, 0);
  std::vector<double> res;
  for (int n : {250, 500, 1000}) {
    const TimeGrid grid(0, 2 * kPi, n);
    const auto path = models::roll_sphere(
        ControlCurve::from_function(grid, [&](double t) { return VectorXd((1.0 + 0.5 * std::sin(3 * t)) * dir); }));
    res.push_back(vmax(no_slip_residual(path)));
  }
  const double f1 = res[0] / res[1], f2 = res[1] / res[2];
  return {f1 >= 8 && f2 >= 8,
          "no-slip " + fmt(res[0]) + " / " + fmt(res[1]) + " / " + fmt(res[2]) + ", factors " + fmt(f1) + ", " + fmt(f2)};
}

Outcome c3_quarter_equator() {
  const Vector3d o(0, -1, 0);
  const Vector3d t1 = models::sphere_tangent_pair(o).first;
  const TimeGrid grid(0, kPi / 2, 2000);
  const auto path = models::roll_sphere(constant(grid, Vector2d(1, 0)));
  const double ds = std::abs(path.motions.back().s.norm() - kPi / 2);
  // rolling o towards t1 turns the ball by pi/2 about t1 x o
  const double dR = (path.motions.back().R - oracle::rodrigues(t1.cross(o), kPi / 2)).norm();
  return {ds <= 1e-6 && dR <= 1e-6, "| |s(T)| - pi/2 | " + fmt(ds) + ", |R(T) - closed form|_F " + fmt(dR)};
}

Outcome c4_hyperboloid_geodesic() {
  const TimeGrid grid(0, 2, 1000);
  const auto path = models::roll_hyperboloid(constant(grid, Vector2d(1, 0)));
  double err = 0.0, cons = 0.0;
  for (int k = 0; k < grid.n_nodes(); ++k) {
    const double t = grid.t(k);
    err = std::max(err, max_abs(path.alpha[k] - Vector3d(std::cosh(t), std::sinh(t), 0)));
    err = std::max(err, max_abs(path.motions[k].s - Vector3d(0, t, 0)));
    cons = std::max(cons, std::abs(models::hyperboloid_constraint(path.alpha[k])));
  }
  return {err <= 1e-7 && cons <= 1e-10, "path error " + fmt(err) + ", constraint " + fmt(cons)};
}

Outcome c5_residual_suite() {
  const TimeGrid grid(0, 1, 400);
  const double tol = 50 * grid.h() * grid.h();
  bool ok = true;
  std::string detail = "tol " + fmt(tol) + ":";
  std::uint64_t seed = 50;
  for (const char* name : {"hyperboloid", "riemann_sphere", "so_1_2", "so_3_0", "stiefel_3_1", "stiefel_4_2"}) {
    const CartanModel m = models::builtin_model(name);
    const double r = suite(extrinsic_roll(m, smooth(m, ++seed, grid))).max_residual();
    ok = ok && r <= tol;
    detail += std::string(" ") + name + " " + fmt(r);
  }
  return {ok, detail};
}

double transport_gap(const CartanModel& m, const CurveInput& input) {
  const auto lift = horizontal_lift(m, input);
  std::vector<VectorXd> curve;
  TangentFramePath frames{lift.grid, {}};
  for (const auto& c : project_path(m, lift)) {
    curve.push_back(m.geometry->embed(c));
    frames.frames.push_back(m.geometry->ambient_tangent_frame(curve.back()));
  }
  const auto Y = transport_homogeneous(m, lift, Eigen::Vector2d(0.3, -1.1));
  const auto Z = parallel_transport_embedded(curve, frames, Y.front(), TransportKind::Tangent,
                                             m.geometry->ambient_form());
  double d = 0.0;
  for (size_t k = 0; k < Y.size(); ++k) d = std::max(d, max_abs(Y[k] - Z[k]));
  return d;
}

Outcome c6_transport() {
  const TimeGrid grid(0, 1.5, 4096);
  bool ok = true;
  std::string detail;
  for (const char* name : {"riemann_sphere", "hyperboloid"}) {
    const CartanModel m = models::builtin_model(name);
    const double geo = transport_gap(m, constant(grid, unit_control(m, Eigen::Vector2d(1, 0.5))));
    const double wiggly = transport_gap(m, smooth(m, 9, grid));
    ok = ok && geo <= 1e-6 && wiggly <= 1e-6;
    detail += std::string(name) + " geodesic " + fmt(geo) + ", non-geodesic " + fmt(wiggly) + "; ";
  }
  return {ok, detail};
}

Outcome c7_stiefel_vs_sphere() {
  const TimeGrid grid(0, 2, 2000);
  SampledCurve circle{grid, {}};
  for (int k = 0; k < grid.n_nodes(); ++k) circle.points.push_back(Vector3d(std::cos(grid.t(k)), std::sin(grid.t(k)), 0));
  const auto st = models::roll_stiefel({3, 1}, circle);
  const auto sph = models::roll_sphere(constant(grid, Vector2d(1, 0)));
  // frame alignment: e1 -> o = (0,-1,0), e2 -> t1 = (-1,0,0), e3 -> -e3
  Eigen::Matrix3d K;
  K << 0, -1, 0, -1, 0, 0, 0, 0, -1;
  double d = 0.0;
  for (int k = 0; k < grid.n_nodes(); ++k) {
    d = std::max(d, max_abs(K * st.path.motions[k].R * K.transpose() - sph.motions[k].R));
    d = std::max(d, max_abs(K * st.path.motions[k].s - sph.motions[k].s));
    d = std::max(d, max_abs(K * st.path.alpha[k] - sph.alpha[k]));
  }
  return {d <= 1e-6, "max deviation " + fmt(d)};
}

Outcome c8_bridge() {
  const TimeGrid grid(0, 1, 800);
  bool ok = true;
  std::string detail;
  std::uint64_t seed = 80;
  for (const auto& name : models::builtin_model_names()) {
    const CartanModel m = models::builtin_model(name);
    const ControlCurve c = smooth(m, ++seed, grid);
    const auto er = extrinsic_roll(m, c);
    const auto ir = intrinsic_roll(m, c);
    const double d = intrinsic_extrinsic_mismatch(m, ir.triple, er.path);
    ok = ok && d <= 1e-7;
    detail += name + " " + fmt(d) + (m.symmetric ? "" : " (non-symmetric)") + "; ";
  }
  return {ok, detail};
}

Outcome c9_perturbation() {
  const TimeGrid grid(0, 1, 400);
  const CartanModel m = models::builtin_model("stiefel_4_2");
  const auto er = extrinsic_roll(m, smooth(m, 90, grid));
  oracle::Gen g(91);
  const MatrixXd N = er.normal_Mhat.frames.front();
  MatrixXd Kn = g.mat(N.cols(), N.cols());
  Kn = (Kn - Kn.transpose()).eval();
  const MatrixXd omega0 = N * Kn * N.transpose();
  const auto pert = perturb_normal_generator(er.path, [&](double) { return omega0; }, er.tangent_Mhat, er.normal_Mhat);
  const auto C0 = tangent_restriction(er.path, er.tangent_M, er.tangent_Mhat);
  const auto C1 = tangent_restriction(pert, er.tangent_M, er.tangent_Mhat);
  double dtan = 0.0;
  for (size_t k = 0; k < C0.size(); ++k) dtan = std::max(dtan, max_abs(C1[k] - C0[k]));
  const double twist = vmax(no_twist_residuals(pert, er.tangent_Mhat, er.normal_Mhat).second);
  return {dtan <= 1e-6 && twist > 1e-3,
          "tangential change " + fmt(dtan) + ", normal twist " + fmt(twist) +
              " (the tangential part is not invariant; see README)"};
}

Outcome c10_pseudo_orth_closed_form() {
  const TimeGrid grid(0, 1, 400);
  const double tol = 50 * grid.h() * grid.h();
  bool ok = true;
  std::string detail = "tol " + fmt(tol) + ":";
  std::uint64_t seed = 100;
  for (auto [p, q] : {std::pair{2, 1}, {3, 0}, {2, 2}}) {
    const CartanModel m = models::make_pseudo_orthogonal_model({p, q, {}});
    const auto er = extrinsic_roll(m, smooth(m, ++seed, grid), NormalStrategy::ClosedForm);
    const double r = suite(er).no_twist_norm;
    ok = ok && r <= tol;
    detail += " (" + std::to_string(p) + "," + std::to_string(q) + ") " + fmt(r);
  }
  return {ok, detail};
}

// chart point of a unit vector under the stereographic embedding used by the sphere model
VectorXd sphere_chart(const Vector3d& x) {
  const double d = 1.0 - x.y();
  return Eigen::Vector2d(-x.x() / d, -x.z() / d);
}

double wrap(double a) { return std::remainder(a, 2 * kPi); }

Outcome c11_holonomy() {
  const CartanModel m = models::builtin_model("riemann_sphere");
  const Vector3d o = m.embedded_base_point();
  const MatrixXd Jo = m.geometry->embed_jacobian(m.base_point());
  const MatrixXd Jpinv = (Jo.transpose() * Jo).inverse() * Jo.transpose();
  bool ok = true;
  std::string detail;
  for (double theta : {kPi / 6, kPi / 4, kPi / 3}) {
    // latitude at polar angle theta about the axis nrm, starting at o
    const Vector3d nrm = std::cos(theta) * o + std::sin(theta) * Vector3d::UnitZ();
    const TimeGrid grid(0, 2 * kPi, 4096);
    SampledCurve lat{grid, {}};
    for (int k = 0; k < grid.n_nodes(); ++k) lat.points.push_back(sphere_chart(oracle::rodrigues(nrm, grid.t(k)) * o));
    const MatrixXd A = intrinsic_roll(m, lat).triple.A.back();

    // oracle: v' = -<v, a'> a along a(t) = rot(nrm, t) o, integrated by RK4
    auto rhs = [&](double t, const VectorXd& v) -> VectorXd {
      const Vector3d a = oracle::rodrigues(nrm, t) * o;
      return -v.dot(nrm.cross(a)) * a;
    };
    MatrixXd P(3, 2);
    for (int j = 0; j < 2; ++j) P.col(j) = oracle::rk4(rhs, Jo.col(j), 0, 2 * kPi, 20000);
    const double frame_err = max_abs(A * Jpinv * P - MatrixXd::Identity(2, 2));

    // angle of the oracle loop map in the frame (t, o x t) with t the initial velocity
    const Vector3d t0 = nrm.cross(o).normalized(), t1 = o.cross(t0);
    const Vector3d w = oracle::rk4(rhs, t0, 0, 2 * kPi, 20000);
    const double angle = std::atan2(w.dot(t1), w.dot(t0));
    const double classical = 2 * kPi * (1 - std::cos(theta));
    const double angle_err = std::abs(wrap(angle - classical));

    // chart metric at o is conformal, so A(T) itself is a rotation matrix there
    const double a_angle = std::atan2(A(1, 0), A(0, 0));
    const double a_err = std::min(std::abs(wrap(a_angle - classical)), std::abs(wrap(a_angle + classical)));
    ok = ok && frame_err <= 1e-5 && angle_err <= 1e-5 && a_err <= 1e-5;
    detail += "theta " + fmt(theta) + ": A(T) vs transport " + fmt(frame_err) + ", rotation angle " + fmt(a_err) +
              ", oracle vs 2pi(1-cos) " + fmt(angle_err) + "; ";
  }
  return {ok, detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"SE(V) algebra on random motions", c1_se_algebra},
      {"convergence order of the no-slip residual", c2_convergence},
      {"sphere quarter equator closed form", c3_quarter_equator},
      {"hyperboloid geodesic closed form", c4_hyperboloid_geodesic},
      {"full residual suite at 50 h^2", c5_residual_suite},
      {"homogeneous vs embedded parallel transport", c6_transport},
      {"St(3,1) against the sphere", c7_stiefel_vs_sphere},
      {"extrinsic tangent map equals the intrinsic isometry chain", c8_bridge},
      {"normal perturbation keeps the tangential part", c9_perturbation},
      {"SO+(p,q) closed-form normal part has no twist", c10_pseudo_orth_closed_form},
      {"latitude holonomy", c11_holonomy},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s C%zu %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed;
}
