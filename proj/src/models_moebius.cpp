#include "models_internal.hpp"

#include <cmath>

namespace rolling::models {

namespace {

const cd I(0.0, 1.0);

double sigma(Branch b) { return b == Branch::SU11 ? 1.0 : -1.0; }

Eigen::Matrix2cd complexify2(const MatrixXd& q) {
  if (q.rows() != 4 || q.cols() != 4) throw RollingError("expected a realified 2x2 complex matrix (4x4 real)");
  return complexify(q);
}

cd chart_to_complex(const VectorXd& m) {
  if (m.size() != 2) throw RollingError("chart point must have 2 coordinates");
  return {m[0], m[1]};
}

VectorXd complex_to_chart(cd z) { return Eigen::Vector2d(z.real(), z.imag()); }

// Real 2x2 matrix of multiplication by c.
MatrixXd complex_mult(cd c) {
  MatrixXd M(2, 2);
  M << c.real(), -c.imag(), c.imag(), c.real();
  return M;
}

// Coordinates (c1, c2, c3) of a 2x2 element in the basis (A1, A2, A3);
// both bases put i/2 on the (0,0) entry of A1 and 1/2, i/2 on the (0,1) entry of A2, A3.
Vector3d pauli_coords(const Eigen::Matrix2cd& X) {
  return {2.0 * X(0, 0).imag(), 2.0 * X(0, 1).real(), 2.0 * X(0, 1).imag()};
}

Matrix3d hat(const Vector3d& u) {
  Matrix3d M;
  M << 0, -u[2], u[1], u[2], 0, -u[0], -u[1], u[0], 0;
  return M;
}

class MoebiusGeometry : public Geometry {
 public:
  explicit MoebiusGeometry(Branch b) : branch_(b) {}

  int group_size() const override { return 4; }
  int chart_dim() const override { return 2; }
  int manifold_dim() const override { return 2; }
  VectorXd base_point() const override { return VectorXd::Zero(2); }

  VectorXd act(const MatrixXd& q, const VectorXd& m) const override {
    const auto g = complexify2(q);
    const cd z = chart_to_complex(m);
    const cd den = g(1, 0) * z + g(1, 1);
    if (std::abs(den) < 1e-14) throw RollingError("Moebius action: point sent to infinity");
    return complex_to_chart((g(0, 0) * z + g(0, 1)) / den);
  }

  MatrixXd act_jacobian(const MatrixXd& q, const VectorXd& m) const override {
    const auto g = complexify2(q);
    const cd z = chart_to_complex(m);
    const cd den = g(1, 0) * z + g(1, 1);
    return complex_mult((g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0)) / (den * den));
  }

  VectorXd infinitesimal_action(const MatrixXd& X, const VectorXd& m) const override {
    const auto x = complexify2(X);
    const cd z = chart_to_complex(m);
    return complex_to_chart(x(0, 1) + (x(0, 0) - x(1, 1)) * z - x(1, 0) * z * z);
  }

  MatrixXd chart_metric(const VectorXd& m) const override {
    const double r = m.squaredNorm();
    const double d = 1.0 - sigma(branch_) * r;
    if (d <= 0.0) throw RollingError("point outside the disc");
    return (4.0 / (d * d)) * MatrixXd::Identity(2, 2);
  }

  MatrixXd chart_tangent_frame(const VectorXd&) const override { return MatrixXd::Identity(2, 2); }

  std::optional<SignatureForm> group_form() const override {
    if (branch_ == Branch::SU11) return SignatureForm(Eigen::Vector4d(1, -1, 1, -1));
    return SignatureForm::euclidean(4);
  }

  bool closed_form_normal() const override { return true; }

 protected:
  MoebiusElement element(const MatrixXd& q) const {
    const auto g = complexify2(q);
    return {g(0, 0), g(0, 1), branch_};
  }

  Branch branch_;
};

class HyperboloidGeometry final : public MoebiusGeometry {
 public:
  HyperboloidGeometry() : MoebiusGeometry(Branch::SU11) {}
  std::string id() const override { return "hyperboloid12"; }
  SignatureForm ambient_form() const override { return SignatureForm(Vector3d(-1, 1, 1)); }
  MatrixXd represent(const MatrixXd& q) const override { return ad_su11(element(q)); }
  MatrixXd represent_algebra(const MatrixXd& X) const override {
    const Vector3d c = pauli_coords(complexify2(X));
    return ad_su11_algebra(c[0], c[1], c[2]);
  }
  VectorXd embed(const VectorXd& m) const override { return embed_hyperbolic(m); }
  MatrixXd embed_jacobian(const VectorXd& m) const override {
    const double x = m[0], y = m[1];
    const double d = 1.0 - x * x - y * y;
    if (d <= 0.0) throw RollingError("point outside the disc");
    const double d2 = d * d;
    MatrixXd Jm(3, 2);
    Jm.col(0) << 4 * x / d2, 4 * x * y / d2, (-2 * d - 4 * x * x) / d2;
    Jm.col(1) << 4 * y / d2, (2 * d + 4 * y * y) / d2, -4 * x * y / d2;
    return Jm;
  }
  MatrixXd ambient_tangent_frame(const VectorXd& x) const override {
    MatrixXd F(3, 2);
    F.col(0) << x[1], x[0], 0.0;
    F.col(1) << x[2], 0.0, x[0];
    return F;
  }
  MatrixXd ambient_normal_frame(const VectorXd& x) const override { return x; }
};

class SphereGeometry final : public MoebiusGeometry {
 public:
  SphereGeometry() : MoebiusGeometry(Branch::SU2) {}
  std::string id() const override { return "riemann_sphere"; }
  SignatureForm ambient_form() const override { return SignatureForm::euclidean(3); }
  MatrixXd represent(const MatrixXd& q) const override {
    const Matrix3d C = sphere_frame_change();
    return C * ad_su2(element(q)) * C.transpose();
  }
  MatrixXd represent_algebra(const MatrixXd& X) const override {
    const Matrix3d C = sphere_frame_change();
    return C * hat(pauli_coords(complexify2(X))) * C.transpose();
  }
  VectorXd embed(const VectorXd& m) const override { return embed_sphere(m); }
  MatrixXd embed_jacobian(const VectorXd& m) const override {
    const double x = m[0], y = m[1];
    const double s = 1.0 + x * x + y * y;
    const double s2 = s * s;
    MatrixXd Jm(3, 2);
    Jm.col(0) << -2 / s + 4 * x * x / s2, 4 * x / s2, 4 * x * y / s2;
    Jm.col(1) << 4 * x * y / s2, 4 * y / s2, -2 / s + 4 * y * y / s2;
    return Jm;
  }
  MatrixXd ambient_tangent_frame(const VectorXd& x) const override {
    const auto [t1, t2] = sphere_tangent_pair(x.normalized());
    MatrixXd F(3, 2);
    F << t1, t2;
    return F;
  }
  MatrixXd ambient_normal_frame(const VectorXd& x) const override { return x; }
};

std::vector<MatrixXd> realified(const std::vector<Eigen::Matrix2cd>& basis) {
  std::vector<MatrixXd> out;
  for (const auto& A : basis) out.push_back(realify(A));
  return out;
}

RollingMapPath codim1_roll(const std::function<Matrix3d(double)>& U, const Vector3d& base,
                           const SignatureForm& form, const TimeGrid& grid) {
  auto flow = flow_affine_ode([&](double t) -> MatrixXd { return -U(t); }, FlowSide::Left,
                              [&](double t, const MatrixXd&) -> VectorXd { return U(t) * base; },
                              MatrixXd::Identity(3, 3), VectorXd::Zero(3), grid, form);
  RollingMapPath path{grid, form, {}, {}, {}};
  const MatrixXd J = form.J();
  for (int k = 0; k < grid.n_nodes(); ++k) {
    const MatrixXd& R = flow.X[k];
    path.motions.push_back({R, flow.x[k]});
    path.alpha.push_back(J * R.transpose() * J * base);
    path.alpha_hat.push_back(base + flow.x[k]);
  }
  return path;
}

Vector2d control_at(const ControlCurve& u, double t) {
  const VectorXd v = u.u(t);
  if (v.size() != 2) throw RollingError("control must have 2 components");
  return v;
}

}  // namespace

double MoebiusElement::constraint_residual() const {
  return std::abs(std::norm(a) - sigma(branch) * std::norm(b) - 1.0);
}

Eigen::Matrix2cd MoebiusElement::matrix() const {
  Eigen::Matrix2cd g;
  g << a, b, sigma(branch) * std::conj(b), std::conj(a);
  return g;
}

MoebiusElement MoebiusElement::from_matrix(const Eigen::Matrix2cd& g, Branch branch) {
  MoebiusElement e{g(0, 0), g(0, 1), branch};
  const double tol = 1e-9 * std::max(1.0, g.cwiseAbs().maxCoeff());
  if (std::abs(g(1, 0) - sigma(branch) * std::conj(g(0, 1))) > tol ||
      std::abs(g(1, 1) - std::conj(g(0, 0))) > tol || e.constraint_residual() > 1e-9 * std::max(1.0, std::norm(e.a)))
    throw RollingError("matrix is not in the requested SU branch");
  return e;
}

MatrixXd realify(const Eigen::MatrixXcd& Z) {
  const auto n = Z.rows();
  MatrixXd R(2 * n, 2 * Z.cols());
  R << Z.real(), -Z.imag(), Z.imag(), Z.real();
  return R;
}

Eigen::MatrixXcd complexify(const MatrixXd& X) {
  if (X.rows() % 2 != 0 || X.cols() % 2 != 0) throw RollingError("complexify: odd dimension");
  const auto n = X.rows() / 2, m = X.cols() / 2;
  Eigen::MatrixXcd Z(n, m);
  Z.real() = X.topLeftCorner(n, m);
  Z.imag() = X.bottomLeftCorner(n, m);
  return Z;
}

std::vector<Eigen::Matrix2cd> su11_basis() {
  Eigen::Matrix2cd A1, A2, A3;
  A1 << 0.5 * I, 0, 0, -0.5 * I;
  A2 << 0, 0.5, 0.5, 0;
  A3 << 0, 0.5 * I, -0.5 * I, 0;
  return {A1, A2, A3};
}

std::vector<Eigen::Matrix2cd> su2_basis() {
  Eigen::Matrix2cd A1, A2, A3;
  A1 << 0.5 * I, 0, 0, -0.5 * I;
  A2 << 0, 0.5, -0.5, 0;
  A3 << 0, 0.5 * I, 0.5 * I, 0;
  return {A1, A2, A3};
}

Vector3d embed_hyperbolic(cd z) {
  const double r = std::norm(z);
  if (!(r < 1.0)) throw RollingError("embed_hyperbolic: |z| >= 1");
  const double d = 1.0 - r;
  return {(1.0 + r) / d, 2.0 * z.imag() / d, -2.0 * z.real() / d};
}

Vector3d embed_hyperbolic(const VectorXd& chart) { return embed_hyperbolic(chart_to_complex(chart)); }

double hyperboloid_constraint(const VectorXd& x) {
  if (x.size() != 3) throw RollingError("hyperboloid_constraint: need a 3-vector");
  return std::abs(x[0] * x[0] - 1.0 - x[1] * x[1] - x[2] * x[2]) + (x[0] > 0.0 ? 0.0 : 1.0);
}

Matrix3d ad_su11(const MoebiusElement& g) {
  if (g.branch != Branch::SU11 || g.constraint_residual() > 1e-9 * std::max(1.0, std::norm(g.a)))
    throw RollingError("ad_su11: element violates the group constraint");
  const cd a = g.a, b = g.b;
  const cd a2 = a * a, b2 = b * b, ab = a * b, cab = std::conj(a) * b;
  Matrix3d M;
  M << std::norm(a) + std::norm(b), 2 * cab.imag(), -2 * (a * std::conj(b)).real(),
      2 * ab.imag(), (a2 - b2).real(), -(a2 + b2).imag(),
      -2 * ab.real(), (a2 - b2).imag(), (a2 + b2).real();
  return M;
}

Matrix3d ad_su11_algebra(double v, double u1, double u2) {
  Matrix3d M;
  M << 0, u2, -u1, u2, 0, -v, -u1, v, 0;
  return M;
}

Vector2d hyperboloid_control_to_p(const Vector2d& u) { return {-u[1], u[0]}; }

Matrix3d hyperboloid_generator(const Vector2d& u) {
  Matrix3d M;
  M << 0, u[0], u[1], u[0], 0, 0, u[1], 0, 0;
  return M;
}

RollingMapPath roll_hyperboloid(const ControlCurve& u) {
  return codim1_roll([&](double t) { return hyperboloid_generator(control_at(u, t)); }, Vector3d(1, 0, 0),
                     SignatureForm(Vector3d(-1, 1, 1)), u.grid);
}

HyperbolicLift hyperbolic_lift(const TimeGrid& grid, const std::vector<cd>& z, double theta0) {
  if (static_cast<int>(z.size()) != grid.n_nodes()) throw RollingError("hyperbolic_lift: sample count does not match the grid");
  for (const auto& w : z)
    if (!(std::norm(w) < 1.0 - 1e-12)) throw RollingError("hyperbolic_lift: curve reaches the boundary |z| = 1");
  std::vector<VectorXd> pts;
  for (const auto& w : z) pts.push_back(complex_to_chart(w));
  const auto vel = differentiate_nodes(grid, pts);
  std::vector<VectorXd> rate(pts.size());
  for (size_t k = 0; k < pts.size(); ++k) {
    const double x = pts[k][0], y = pts[k][1];
    rate[k] = VectorXd::Constant(1, 2.0 * (x * vel[k][1] - vel[k][0] * y) / (1.0 - x * x - y * y));
  }
  const std::vector<double> cand{-1.0, 1.0};
  std::vector<HyperbolicLift> lifts;
  std::vector<std::vector<double>> node_res;
  const auto A1 = su11_basis()[0];
  for (double sgn : cand) {
    const auto th = integrate_vector([&](double t) { return VectorXd(sgn * interpolate_nodes(grid, rate, t)); },
                                     VectorXd::Constant(1, theta0), grid);
    HyperbolicLift L{{grid, {}, {}}, {}, sgn, 0.0};
    for (size_t k = 0; k < z.size(); ++k) {
      Eigen::Matrix2cd h;
      h << 1.0, z[k], std::conj(z[k]), 1.0;
      h /= std::sqrt(1.0 - std::norm(z[k]));
      L.lift.samples.push_back(realify(h) * expm(th[k][0] * realify(A1)));
      L.theta.push_back(th[k][0]);
    }
    const auto dg = differentiate_nodes(grid, L.lift.samples);
    std::vector<double> res;
    for (size_t k = 0; k < z.size(); ++k) {
      const Eigen::Matrix2cd X = complexify(checked_inverse(L.lift.samples[k]) * dg[k]);
      // h-part: coefficient of A1 plus any real diagonal drift
      res.push_back(std::max(std::abs(2.0 * X(0, 0).imag()), std::abs(X(0, 0).real())));
      L.lift.controls.push_back(Vector2d(2.0 * X(0, 1).real(), 2.0 * X(0, 1).imag()));
    }
    L.horizontality = *std::max_element(res.begin(), res.end());
    lifts.push_back(std::move(L));
    node_res.push_back(std::move(res));
  }
  const int win = lifts[1].horizontality < lifts[0].horizontality ? 1 : 0;
  // The winner must not lose at any node where the two choices are distinguishable.
  for (size_t k = 0; k < z.size(); ++k) {
    const double w = node_res[win][k], l = node_res[1 - win][k];
    if (w > l + 1e-6 * std::max(1.0, l))
      throw RollingError("hyperbolic_lift: sign of theta' is not consistent along the curve");
  }
  return lifts[win];
}

Vector3d embed_sphere(cd z) {
  const double r = std::norm(z);
  const double s = 1.0 + r;
  return {-2.0 * z.real() / s, (r - 1.0) / s, -2.0 * z.imag() / s};
}

Vector3d embed_sphere(const VectorXd& chart) { return embed_sphere(chart_to_complex(chart)); }

Matrix3d ad_su2(const MoebiusElement& g) {
  if (g.branch != Branch::SU2 || g.constraint_residual() > 1e-9 * std::max(1.0, std::norm(g.a)))
    throw RollingError("ad_su2: element violates the group constraint");
  const cd a = g.a, b = g.b;
  const cd a2 = a * a, b2 = b * b, ab = a * b, cab = std::conj(a) * b;
  Matrix3d M;
  M << std::norm(a) - std::norm(b), -2 * cab.imag(), 2 * cab.real(),
      2 * ab.imag(), (a2 + b2).real(), -(a2 - b2).imag(),
      -2 * ab.real(), (a2 + b2).imag(), (a2 - b2).real();
  return M;
}

Matrix3d sphere_frame_change() {
  Matrix3d C;
  C << 0, 0, 1, -1, 0, 0, 0, -1, 0;
  return C;
}

std::pair<Vector3d, Vector3d> sphere_tangent_pair(const Vector3d& base) {
  if (std::abs(base.norm() - 1.0) > 1e-9) throw RollingError("sphere base point must be a unit vector");
  Vector3d seed(-1, 0, 0);
  if (std::abs(seed.dot(base)) > 0.9) seed = Vector3d(0, 0, -1);
  const Vector3d t1 = (seed - seed.dot(base) * base).normalized();
  return {t1, base.cross(t1)};
}

Matrix3d sphere_generator(const Vector2d& u, const Vector3d& base) {
  const auto [t1, t2] = sphere_tangent_pair(base);
  return u[0] * (t1 * base.transpose() - base * t1.transpose()) +
         u[1] * (t2 * base.transpose() - base * t2.transpose());
}

RollingMapPath roll_sphere(const ControlCurve& u, const Vector3d& base) {
  sphere_tangent_pair(base);
  return codim1_roll([&](double t) { return sphere_generator(control_at(u, t), base); }, base,
                     SignatureForm::euclidean(3), u.grid);
}

CartanModel make_hyperbolic_model() {
  CartanModel m;
  m.name = "hyperboloid";
  m.basis = realified(su11_basis());
  m.h_indices = {0};
  m.p_indices = {1, 2};
  m.symmetric = true;
  m.geometry = std::make_shared<HyperboloidGeometry>();
  m.set_default_ip_p();
  return m;
}

CartanModel make_sphere_model() {
  CartanModel m;
  m.name = "riemann_sphere";
  m.basis = realified(su2_basis());
  m.h_indices = {0};
  m.p_indices = {1, 2};
  m.symmetric = true;
  m.geometry = std::make_shared<SphereGeometry>();
  m.set_default_ip_p();
  return m;
}

std::shared_ptr<const Geometry> make_hyperboloid_geometry() { return std::make_shared<HyperboloidGeometry>(); }
std::shared_ptr<const Geometry> make_sphere_geometry() { return std::make_shared<SphereGeometry>(); }

}  // namespace rolling::models
