#include "rolling/models.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

using namespace rolling;
using oracle::max_abs;

namespace {

double vmax(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

ControlCurve smooth(const CartanModel& m, std::uint64_t seed, const TimeGrid& grid, double scale = 0.4) {
  oracle::Gen g(seed);
  return ControlCurve::from_function(grid, oracle::smooth_control(g, m.p_dim(), 2, scale));
}

ControlCurve constant(const TimeGrid& grid, const VectorXd& u) {
  return ControlCurve::from_function(grid, [u](double) { return u; });
}

// p-coordinates of unit length for ip_p, pointing along chart direction `dir` at o
VectorXd unit_control(const CartanModel& m, const VectorXd& dir) {
  const VectorXd u = m.d_e_pi().colPivHouseholderQr().solve(dir);
  return u / std::sqrt(u.dot(m.ip_p * u));
}

std::vector<VectorXd> embedded(const CartanModel& m, const std::vector<VectorXd>& chart) {
  std::vector<VectorXd> out;
  for (const auto& c : chart) out.push_back(m.geometry->embed(c));
  return out;
}

}  // namespace

TEST_CASE("builtin models pass the structural checks") {
  for (const auto& name : models::builtin_model_names()) {
    INFO(name);
    const CartanModel m = models::builtin_model(name);
    const CartanCheck c = validate_model(m, 100);
    CHECK(c.ok);
    CHECK(c.closure <= 1e-9);
    CHECK(c.bracket_hh <= 1e-9);
    CHECK(c.bracket_hp <= 1e-9);
    CHECK(c.orthogonality <= 1e-9);
    CHECK(c.equivariance <= 1e-10);
    CHECK(std::isfinite(c.d_e_pi_condition));
    if (m.symmetric) {
      CHECK(c.bracket_pp <= 1e-9);
      CHECK(c.warnings.empty());
    } else {
      CHECK(c.bracket_pp > 0.1);
    }
  }
  // a wrong symmetric flag only warns
  CartanModel st = models::make_stiefel_model({4, 2});
  st.symmetric = true;
  const CartanCheck c = validate_model(st, 20);
  CHECK(c.ok);
  CHECK_FALSE(c.warnings.empty());
}

TEST_CASE("broken models are rejected") {
  CartanModel m = models::make_sphere_model();
  std::swap(m.h_indices[0], m.p_indices[0]);  // h no longer a subalgebra complement
  CHECK_FALSE(validate_model(m).ok);

  CartanModel bad = models::make_hyperbolic_model();
  bad.basis[1] *= 0.0;
  CHECK_THROWS_AS(validate_model(bad), RollingError);
}

TEST_CASE("horizontal lift from controls") {
  const CartanModel m = models::make_pseudo_orthogonal_model({2, 1, {}});
  const TimeGrid grid(0, 1, 500);
  std::mt19937_64 rng(4);
  const MatrixXd q0 = random_group_element(m, rng, 0.3);

  const auto still = horizontal_lift(m, constant(grid, VectorXd::Zero(m.p_dim())), q0);
  for (const auto& q : still.samples) CHECK(max_abs(q - q0) == 0.0);

  const VectorXd u = Eigen::Vector3d(0.4, -0.3, 0.8);
  const auto lift = horizontal_lift(m, constant(grid, u), q0);
  const MatrixXd U = m.p_element(u);
  for (int k : {0, 100, 500}) CHECK(max_abs(lift.samples[k] - q0 * oracle::expm_taylor(grid.t(k) * U)) <= 1e-8);
  CHECK(horizontality_residual(m, lift) <= 1e-8);
  for (const auto& c : lift.controls) CHECK(max_abs(c - u) <= 1e-12);

  CHECK_THROWS_AS(horizontal_lift(m, constant(grid, VectorXd::Zero(2))), RollingError);
}

TEST_CASE("horizontal lift of the sampled disc geodesic") {
  const CartanModel m = models::make_hyperbolic_model();
  const TimeGrid grid(0, 2, 400);
  std::vector<VectorXd> pts;
  for (int k = 0; k < grid.n_nodes(); ++k) pts.push_back(Eigen::Vector2d(std::tanh(grid.t(k) / 2), 0));
  const auto lift = horizontal_lift(m, SampledCurve{grid, pts});
  const VectorXd u_expected = m.d_e_pi().colPivHouseholderQr().solve(Eigen::Vector2d(0.5, 0));
  for (const auto& c : lift.controls) CHECK(max_abs(c - u_expected) <= 1e-6);
  const auto back = project_path(m, lift);
  for (size_t k = 0; k < pts.size(); ++k) CHECK(max_abs(back[k] - pts[k]) <= 1e-8);
  CHECK(horizontality_residual(m, lift) <= 1e-8);

  // wrong starting point
  auto shifted = pts;
  for (auto& p : shifted) p[1] += 0.1;
  CHECK_THROWS_AS(horizontal_lift(m, SampledCurve{grid, shifted}), RollingError);
}

TEST_CASE("property: lifts are horizontal for random controls") {
  const TimeGrid grid(0, 1, 200);
  std::uint64_t seed = 100;
  for (const auto& name : models::builtin_model_names()) {
    INFO(name);
    const CartanModel m = models::builtin_model(name);
    for (int trial = 0; trial < 3; ++trial) {
      const auto lift = horizontal_lift(m, smooth(m, ++seed, grid));
      CHECK(horizontality_residual(m, lift) <= 1e-8);
      if (auto form = m.geometry->group_form())
        for (const auto& q : lift.samples) CHECK(j_orthogonality_residual(q, *form) <= 1e-9 * q.squaredNorm());
    }
  }
}

TEST_CASE("develop_intrinsic") {
  const CartanModel m = models::make_sphere_model();
  const TimeGrid grid(0, M_PI / 2, 1000);
  for (const auto& a : develop_intrinsic(m, constant(grid, VectorXd::Zero(2)))) CHECK(max_abs(a) == 0.0);

  const VectorXd u = unit_control(m, Eigen::Vector2d(1, 0));
  const auto dev = develop_intrinsic(m, constant(grid, u));
  const VectorXd ray = m.d_e_pi() * u;
  for (int k : {0, 333, 1000}) CHECK(max_abs(dev[k] - grid.t(k) * ray) <= 1e-13);
  const MatrixXd G = m.geometry->chart_metric(m.base_point());
  CHECK(std::sqrt(dev.back().dot(G * dev.back())) == doctest::Approx(M_PI / 2).epsilon(1e-8));
}

TEST_CASE("isometry chain") {
  const CartanModel m = models::make_hyperbolic_model();
  const TimeGrid grid(0, 1.5, 300);
  const auto lift = horizontal_lift(m, smooth(m, 7, grid));
  const auto A = isometry_chain_A(m, lift);
  CHECK(max_abs(A[0] - MatrixXd::Identity(2, 2)) <= 1e-12);

  const auto alpha = project_path(m, lift);
  const MatrixXd Go = m.geometry->chart_metric(m.base_point());
  for (size_t k = 0; k < A.size(); k += 30) {
    // complex notation: A v = conj(a)^2 v, a the (0,0) entry of the SU(1,1) element
    const MatrixXd& q = lift.samples[k];
    const std::complex<double> a(q(0, 0), q(2, 0));
    const std::complex<double> c = std::conj(a) * std::conj(a);
    Eigen::Matrix2d mult;
    mult << c.real(), -c.imag(), c.imag(), c.real();
    CHECK(max_abs(A[k] - mult) <= 1e-8);
    CHECK(max_abs(A[k].transpose() * Go * A[k] - m.geometry->chart_metric(alpha[k])) <= 1e-9);
  }
}

TEST_CASE("intrinsic roll") {
  const CartanModel m = models::make_hyperbolic_model();
  const TimeGrid grid(0, 2, 400);
  const auto zero = intrinsic_roll(m, constant(grid, VectorXd::Zero(2)));
  for (size_t k = 0; k < zero.triple.A.size(); ++k) {
    CHECK(max_abs(zero.triple.alpha[k] - m.base_point()) == 0.0);
    CHECK(max_abs(zero.triple.alpha_hat[k]) == 0.0);
    CHECK(max_abs(zero.triple.A[k] - MatrixXd::Identity(2, 2)) <= 1e-15);
  }

  // unit-speed geodesic along the real axis
  const VectorXd u = unit_control(m, Eigen::Vector2d(1, 0));
  const auto geo = intrinsic_roll(m, constant(grid, u));
  for (int k = 0; k < grid.n_nodes(); k += 40) {
    const double t = grid.t(k);
    CHECK(max_abs(geo.triple.alpha[k] - Eigen::Vector2d(std::tanh(t / 2), 0)) <= 1e-9);
    CHECK(max_abs(geo.triple.alpha_hat[k] - Eigen::Vector2d(t / 2, 0)) <= 1e-12);
    const MatrixXd& Ak = geo.triple.A[k];
    CHECK(std::abs(Ak(0, 1)) + std::abs(Ak(1, 0)) <= 1e-9);
    CHECK(Ak(0, 0) == doctest::Approx(std::cosh(t / 2) * std::cosh(t / 2)).epsilon(1e-8));
  }
  const auto rep = check_triple(geo.triple);
  CHECK(rep.isometry <= 1e-9);
  CHECK(rep.velocity <= 1e-8);
  CHECK(rep.orientation_ok);
}

TEST_CASE("property: triples and parallel fields") {
  const TimeGrid grid(0, 1, 800);
  std::uint64_t seed = 500;
  for (const auto& name : models::builtin_model_names()) {
    INFO(name);
    const CartanModel m = models::builtin_model(name);
    const auto ir = intrinsic_roll(m, smooth(m, ++seed, grid));
    const auto rep = check_triple(ir.triple);
    CHECK(rep.isometry <= 1e-9);
    CHECK(rep.velocity <= 50 * grid.h() * grid.h());
    CHECK(rep.orientation_ok);

    // A carries homogeneous parallel fields to constant vectors of T_o M
    oracle::Gen g(seed);
    const VectorXd y0 = g.vec(m.p_dim());
    const VectorXd target = m.d_e_pi() * y0;
    const auto& geo = *m.geometry;
    double drift = 0.0;
    for (size_t k = 0; k < ir.lift.samples.size(); ++k) {
      const VectorXd Y = geo.act_jacobian(ir.lift.samples[k], m.base_point()) * target;
      drift = std::max(drift, max_abs(ir.triple.A[k] * Y - target));
    }
    CHECK(drift <= 1e-7);

    // speed: g(alpha', alpha') = g_o(alpha_hat', alpha_hat')
    const auto da = differentiate_nodes(grid, ir.triple.alpha);
    const auto dh = differentiate_nodes(grid, ir.triple.alpha_hat);
    double speed = 0.0;
    for (size_t k = 0; k < da.size(); ++k)
      speed = std::max(speed, std::abs(da[k].dot(ir.triple.metric_M[k] * da[k]) - dh[k].dot(ir.triple.metric_Mhat * dh[k])));
    CHECK(speed <= 1e-8);
  }
}

TEST_CASE("transport_homogeneous against embedded transport") {
  const int n = 1024;
  for (const char* name : {"riemann_sphere", "hyperboloid"}) {
    INFO(name);
    const CartanModel m = models::builtin_model(name);
    const TimeGrid grid(0, 1.5, n);
    const auto lift = horizontal_lift(m, smooth(m, 9, grid));
    const auto curve = embedded(m, project_path(m, lift));
    TangentFramePath frames{grid, {}};
    for (const auto& x : curve) frames.frames.push_back(m.geometry->ambient_tangent_frame(x));
    const VectorXd y0 = Eigen::Vector2d(0.3, -1.1);
    const auto Y = transport_homogeneous(m, lift, y0);
    const auto Z = parallel_transport_embedded(curve, frames, Y.front(), TransportKind::Tangent,
                                               m.geometry->ambient_form());
    double d = 0.0;
    for (size_t k = 0; k < Y.size(); ++k) d = std::max(d, max_abs(Y[k] - Z[k]));
    CHECK(d <= 1e-5);
  }
}

TEST_CASE("extrinsic development and closed forms") {
  const CartanModel hyp = models::make_hyperbolic_model();
  const TimeGrid grid(0, 2, 400);
  const ControlCurve zero = constant(grid, VectorXd::Zero(2));
  const auto lz = horizontal_lift(hyp, zero);
  for (const auto& s : extrinsic_develop(hyp, lz, embedded(hyp, project_path(hyp, lz)))) CHECK(max_abs(s) == 0.0);
  const auto er0 = extrinsic_roll(hyp, zero);
  for (const auto& g : er0.path.motions) {
    CHECK(max_abs(g.R - MatrixXd::Identity(3, 3)) == 0.0);
    CHECK(max_abs(g.s) == 0.0);
  }

  // u1 = 1: alpha = (cosh t, sinh t, 0), s_bar = t e2
  const VectorXd u = models::hyperboloid_control_to_p(Eigen::Vector2d(1, 0));
  const auto lift = horizontal_lift(hyp, constant(grid, u));
  const auto curve = embedded(hyp, project_path(hyp, lift));
  const auto sbar = extrinsic_develop(hyp, lift, curve);
  for (int k = 0; k < grid.n_nodes(); k += 50) {
    const double t = grid.t(k);
    CHECK(max_abs(curve[k] - Eigen::Vector3d(std::cosh(t), std::sinh(t), 0)) <= 1e-9);
    CHECK(max_abs(sbar[k] - Eigen::Vector3d(0, t, 0)) <= 1e-7);
  }

  // codimension 1: R is rho(q)^{-1} wholesale and agrees with the kinematic system
  const ControlCurve c = smooth(hyp, 17, grid);
  const auto er = extrinsic_roll(hyp, c, NormalStrategy::ClosedForm);
  const auto kin = models::roll_hyperboloid(ControlCurve::from_function(grid, [&](double t) {
    const VectorXd p = c.u(t);
    return VectorXd(Eigen::Vector2d(p[1], -p[0]));
  }));
  for (size_t k = 0; k < er.path.motions.size(); ++k) {
    CHECK(max_abs(er.path.motions[k].R * hyp.geometry->represent(er.lift.samples[k]) - MatrixXd::Identity(3, 3)) <=
          1e-12);
  }
  CHECK(max_abs(er.path.motions.back().R - kin.motions.back().R) <= 1e-8);
  CHECK(max_abs(er.path.motions.back().s - kin.motions.back().s) <= 1e-7);
}

TEST_CASE("normal extension by frames") {
  const CartanModel hyp = models::make_hyperbolic_model();
  const TimeGrid grid(0, 1, 800);
  const auto er = extrinsic_roll(hyp, smooth(hyp, 23, grid), NormalStrategy::ClosedForm);
  const SignatureForm form = hyp.geometry->ambient_form();
  const auto nalong = parallel_transport_frame(er.tangent_M, hyp.geometry->ambient_normal_frame(er.path.alpha.front()),
                                               TransportKind::Normal, form);
  std::vector<MatrixXd> tang;
  for (const auto& g : er.path.motions) tang.push_back(g.R);
  const auto full = normal_extension_by_frames(tang, {grid, nalong}, er.normal_Mhat, form);
  double d = 0.0;
  for (size_t k = 0; k < full.size(); ++k) d = std::max(d, max_abs(full[k] - er.path.motions[k].R));
  CHECK(d <= 1e-8);
  for (const auto& R : full) CHECK(is_oriented_isometry(R, form).ok);

  // flat on flat: tangent identity, constant normals
  const TimeGrid g2(0, 1, 10);
  MatrixXd plane(3, 2), nrm(3, 1);
  plane << 1, 0, 0, 1, 0, 0;
  nrm << 0, 0, 1;
  const MatrixXd Pt = plane * plane.transpose();
  const auto ext = normal_extension_by_frames(std::vector<MatrixXd>(11, Pt), TangentFramePath::constant(g2, nrm),
                                              TangentFramePath::constant(g2, nrm), SignatureForm::euclidean(3));
  for (const auto& R : ext) CHECK(max_abs(R - MatrixXd::Identity(3, 3)) <= 1e-15);

  CHECK_THROWS_AS(normal_extension_by_frames(std::vector<MatrixXd>(11, Pt), TangentFramePath::constant(g2, nrm),
                                             TangentFramePath::constant(g2, MatrixXd(2 * nrm)),
                                             SignatureForm::euclidean(3)),
                  RollingError);
}

TEST_CASE("Stiefel frame matching agrees with the S(t) construction") {
  const models::StiefelShape shape{4, 2};
  const CartanModel m = models::make_stiefel_model(shape);
  const TimeGrid grid(0, 1, 1600);
  const ControlCurve c = smooth(m, 41, grid, 0.3);
  const auto fm = extrinsic_roll(m, c, NormalStrategy::FrameMatching);
  const auto st = models::roll_stiefel(shape, c);
  double dR = 0.0;
  for (size_t k = 0; k < fm.path.motions.size(); ++k)
    dR = std::max(dR, max_abs(fm.path.motions[k].R - st.path.motions[k].R));
  CHECK(dR <= 1e-6);
  CHECK_THROWS_WITH_AS(extrinsic_roll(m, c, NormalStrategy::ClosedForm), doctest::Contains("closed-form"),
                       RollingError);
}

TEST_CASE("property: extrinsic rolling passes the residual suite") {
  const TimeGrid grid(0, 1, 200);
  const double tol = 50 * grid.h() * grid.h();
  std::uint64_t seed = 900;
  for (const auto& name : models::builtin_model_names()) {
    INFO(name);
    const CartanModel m = models::builtin_model(name);
    const auto er = extrinsic_roll(m, smooth(m, ++seed, grid));
    const auto r = residual_suite(er.path, er.tangent_M, er.tangent_Mhat, er.normal_Mhat);
    CHECK(r.passes(tol));
    for (const auto& g : er.path.motions) CHECK(is_oriented_isometry(g.R, er.path.form, 1e-8).ok);
  }
}

TEST_CASE("property: development speed and the intrinsic bridge") {
  const TimeGrid grid(0, 1, 800);
  std::uint64_t seed = 1300;
  for (const auto& name : models::builtin_model_names()) {
    INFO(name);
    const CartanModel m = models::builtin_model(name);
    const ControlCurve c = smooth(m, ++seed, grid);
    const auto er = extrinsic_roll(m, c);
    const auto da = differentiate_nodes(grid, er.path.alpha);
    const auto dh = differentiate_nodes(grid, er.path.alpha_hat);
    double speed = 0.0;
    for (size_t k = 0; k < da.size(); ++k)
      speed = std::max(speed, std::abs(er.path.form.norm2(da[k]) - er.path.form.norm2(dh[k])));
    CHECK(speed <= 1e-8);

    if (m.symmetric) {
      const auto ir = intrinsic_roll(m, c);
      CHECK(intrinsic_extrinsic_mismatch(m, ir.triple, er.path) <= 1e-7);
    }
  }
}

TEST_CASE("latitude development: arc length and curvature carry over") {
  const CartanModel m = models::builtin_model("riemann_sphere");
  const Eigen::Vector3d o = m.embedded_base_point();
  const double pi = std::acos(-1.0);
  for (double theta : {0.4, 0.9}) {
    const Eigen::Vector3d axis = std::cos(theta) * o + std::sin(theta) * Eigen::Vector3d::UnitZ();
    const TimeGrid grid(0, 2 * pi, 2048);
    SampledCurve lat{grid, {}};
    for (int k = 0; k < grid.n_nodes(); ++k) {
      const Eigen::Vector3d x = oracle::rodrigues(axis, grid.t(k)) * o;
      lat.points.push_back(Eigen::Vector2d(-x.x() / (1 - x.y()), -x.z() / (1 - x.y())));
    }
    const auto ir = intrinsic_roll(m, lat);
    const MatrixXd& G = ir.triple.metric_Mhat;
    auto dist = [&](const VectorXd& a, const VectorXd& b) { return std::sqrt((a - b).dot(G * (a - b))); };
    double len = 0.0;
    for (size_t k = 1; k < ir.triple.alpha_hat.size(); ++k) len += dist(ir.triple.alpha_hat[k], ir.triple.alpha_hat[k - 1]);
    INFO("theta " << theta);
    CHECK(len == doctest::Approx(2 * pi * std::sin(theta)).epsilon(1e-5));
    // a circle of radius tan(theta) traversed through the angle 2 pi cos(theta)
    const double chord = 2 * std::tan(theta) * std::abs(std::sin(pi * std::cos(theta)));
    CHECK(std::abs(dist(ir.triple.alpha_hat.back(), ir.triple.alpha_hat.front()) - chord) <= 1e-6);
  }
}
