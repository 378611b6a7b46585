#include "models_internal.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>

namespace rolling::models {

namespace {

MatrixXd unit(int n, int i, int j) {
  MatrixXd E = MatrixXd::Zero(n, n);
  E(i, j) = 1.0;
  return E;
}

MatrixXd kron(const MatrixXd& A, const MatrixXd& B) { return Eigen::kroneckerProduct(A, B).eval(); }

MatrixXd block_diag(const MatrixXd& A, const MatrixXd& B) {
  MatrixXd D = MatrixXd::Zero(A.rows() + B.rows(), A.cols() + B.cols());
  D.topLeftCorner(A.rows(), A.cols()) = A;
  D.bottomRightCorner(B.rows(), B.cols()) = B;
  return D;
}

MatrixXd frame_times(const std::vector<MatrixXd>& basis, const MatrixXd& X) {
  MatrixXd F(X.size(), basis.size());
  for (size_t i = 0; i < basis.size(); ++i) F.col(i) = flatten(basis[i] * X);
  return F;
}

class PseudoOrthGeometry final : public Geometry {
 public:
  explicit PseudoOrthGeometry(PseudoOrthParams params)
      : prm_(std::move(params)),
        n_(prm_.n()),
        P0_(prm_.base()),
        skew_(so_pq_basis(prm_)),
        sym_(sym_pq_basis(prm_)),
        form_(trace_j_form(prm_)) {}

  std::string id() const override { return "pseudo_orth"; }
  int group_size() const override { return 2 * n_; }
  int chart_dim() const override { return n_ * n_; }
  int manifold_dim() const override { return n_ * (n_ - 1) / 2; }
  VectorXd base_point() const override { return flatten(P0_); }

  VectorXd act(const MatrixXd& q, const VectorXd& m) const override {
    const auto [Q1, Q2] = split(q);
    return flatten(Q1 * point(m) * checked_inverse(Q2, "pseudo_orth act"));
  }
  MatrixXd act_jacobian(const MatrixXd& q, const VectorXd&) const override { return represent(q); }
  VectorXd infinitesimal_action(const MatrixXd& X, const VectorXd& m) const override {
    const auto [U1, U2] = split(X);
    const MatrixXd P = point(m);
    return flatten(U1 * P - P * U2);
  }
  MatrixXd chart_metric(const VectorXd&) const override { return form_.J(); }
  MatrixXd chart_tangent_frame(const VectorXd& m) const override { return ambient_tangent_frame(m); }

  SignatureForm ambient_form() const override { return form_; }
  MatrixXd represent(const MatrixXd& q) const override {
    const auto [Q1, Q2] = split(q);
    return kron(checked_inverse(Q2, "pseudo_orth represent").transpose(), Q1);
  }
  MatrixXd represent_algebra(const MatrixXd& X) const override {
    const auto [U1, U2] = split(X);
    const MatrixXd I = MatrixXd::Identity(n_, n_);
    return kron(I, U1) - kron(U2.transpose(), I);
  }
  VectorXd embed(const VectorXd& m) const override { return m; }
  MatrixXd embed_jacobian(const VectorXd&) const override { return MatrixXd::Identity(n_ * n_, n_ * n_); }
  MatrixXd ambient_tangent_frame(const VectorXd& x) const override { return frame_times(skew_, point(x)); }
  MatrixXd ambient_normal_frame(const VectorXd& x) const override { return frame_times(sym_, point(x)); }

  std::optional<SignatureForm> group_form() const override {
    const VectorXd s = prm_.J_signs();
    VectorXd both(2 * n_);
    both << s, s;
    return SignatureForm(both);
  }
  bool closed_form_normal() const override { return true; }

 private:
  std::pair<MatrixXd, MatrixXd> split(const MatrixXd& q) const {
    if (q.rows() != 2 * n_ || q.cols() != 2 * n_) throw RollingError("pseudo_orth: group element has the wrong size");
    return {q.topLeftCorner(n_, n_), q.bottomRightCorner(n_, n_)};
  }
  MatrixXd point(const VectorXd& m) const {
    if (m.size() != n_ * n_) throw RollingError("pseudo_orth: point has the wrong size");
    return unflatten(m, n_, n_);
  }

  PseudoOrthParams prm_;
  int n_;
  MatrixXd P0_;
  std::vector<MatrixXd> skew_, sym_;
  SignatureForm form_;
};

class StiefelGeometry final : public Geometry {
 public:
  explicit StiefelGeometry(StiefelShape shape) : sh_(shape) { sh_.validate(); }

  std::string id() const override { return "stiefel"; }
  int group_size() const override { return sh_.n; }
  int chart_dim() const override { return sh_.dim_V(); }
  int manifold_dim() const override { return sh_.k * (sh_.k - 1) / 2 + (sh_.n - sh_.k) * sh_.k; }
  VectorXd base_point() const override { return flatten(sh_.E()); }

  VectorXd act(const MatrixXd& q, const VectorXd& m) const override { return flatten(check(q) * point(m)); }
  MatrixXd act_jacobian(const MatrixXd& q, const VectorXd&) const override { return represent(q); }
  VectorXd infinitesimal_action(const MatrixXd& X, const VectorXd& m) const override {
    return flatten(check(X) * point(m));
  }
  MatrixXd chart_metric(const VectorXd&) const override { return MatrixXd::Identity(sh_.dim_V(), sh_.dim_V()); }
  MatrixXd chart_tangent_frame(const VectorXd& m) const override { return stiefel_tangent_frame(point(m)); }

  SignatureForm ambient_form() const override { return SignatureForm::euclidean(sh_.dim_V()); }
  MatrixXd represent(const MatrixXd& q) const override { return kron(MatrixXd::Identity(sh_.k, sh_.k), check(q)); }
  MatrixXd represent_algebra(const MatrixXd& X) const override { return represent(X); }
  VectorXd embed(const VectorXd& m) const override { return m; }
  MatrixXd embed_jacobian(const VectorXd&) const override {
    return MatrixXd::Identity(sh_.dim_V(), sh_.dim_V());
  }
  MatrixXd ambient_tangent_frame(const VectorXd& x) const override { return stiefel_tangent_frame(point(x)); }
  MatrixXd ambient_normal_frame(const VectorXd& x) const override { return stiefel_normal_frame(point(x)); }

  std::optional<SignatureForm> group_form() const override { return SignatureForm::euclidean(sh_.n); }
  // St_{n,1} is the round sphere: codimension 1 and symmetric
  bool closed_form_normal() const override { return sh_.k == 1; }

 private:
  const MatrixXd& check(const MatrixXd& q) const {
    if (q.rows() != sh_.n || q.cols() != sh_.n) throw RollingError("stiefel: group element has the wrong size");
    return q;
  }
  MatrixXd point(const VectorXd& m) const {
    if (m.size() != sh_.dim_V()) throw RollingError("stiefel: point has the wrong size");
    return unflatten(m, sh_.n, sh_.k);
  }

  StiefelShape sh_;
};

std::vector<MatrixXd> skew_unit_basis(int k) {
  std::vector<MatrixXd> out;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) out.push_back((unit(k, i, j) - unit(k, j, i)) / std::sqrt(2.0));
  return out;
}

std::vector<MatrixXd> sym_unit_basis(int k) {
  std::vector<MatrixXd> out;
  for (int i = 0; i < k; ++i) out.push_back(unit(k, i, i));
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) out.push_back((unit(k, i, j) + unit(k, j, i)) / std::sqrt(2.0));
  return out;
}

// Columns of an orthonormal basis of the orthogonal complement of range(P).
MatrixXd complement(const MatrixXd& P) {
  const MatrixXd Q = P.householderQr().householderQ() * MatrixXd::Identity(P.rows(), P.rows());
  return Q.rightCols(P.rows() - P.cols());
}

Eigen::Index columns(const std::vector<MatrixXd>& v) { return static_cast<Eigen::Index>(v.size()); }

}  // namespace

// ------------------------------------------------------------ pseudo-orthogonal

VectorXd PseudoOrthParams::J_signs() const {
  VectorXd s(n());
  s.head(p).setOnes();
  s.tail(q).setConstant(-1.0);
  return s;
}

MatrixXd PseudoOrthParams::base() const {
  return P0.size() == 0 ? MatrixXd::Identity(n(), n()) : P0;
}

void PseudoOrthParams::validate() const {
  if (p < 0 || q < 0 || p + q < 2) throw RollingError("pseudo_orth: need p, q >= 0 and p + q >= 2");
  if (P0.size() == 0) return;
  if (P0.rows() != n() || P0.cols() != n()) throw RollingError("pseudo_orth: P0 has the wrong size");
  const SignatureForm f(J_signs());
  const auto chk = is_oriented_isometry(P0, f, 1e-9);
  if (!chk.ok || P0.determinant() <= 0.0)
    throw RollingError("pseudo_orth: P0 is not in SO+(p,q) (residual " + std::to_string(chk.residual) + ")");
}

std::vector<MatrixXd> so_pq_basis(const PseudoOrthParams& params) {
  params.validate();
  const int n = params.n();
  const VectorXd J = params.J_signs();
  std::vector<MatrixXd> out;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out.push_back(unit(n, i, j) - J[i] * J[j] * unit(n, j, i));
  return out;
}

std::vector<MatrixXd> sym_pq_basis(const PseudoOrthParams& params) {
  params.validate();
  const int n = params.n();
  const VectorXd J = params.J_signs();
  std::vector<MatrixXd> out;
  for (int i = 0; i < n; ++i) out.push_back(unit(n, i, i));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out.push_back(unit(n, i, j) + J[i] * J[j] * unit(n, j, i));
  return out;
}

SignatureForm trace_j_form(const PseudoOrthParams& params) {
  const int n = params.n();
  const VectorXd J = params.J_signs();
  VectorXd s(n * n);
  for (int b = 0; b < n; ++b)
    for (int a = 0; a < n; ++a) s[a + n * b] = J[a] * J[b];
  return SignatureForm(s);
}

RollingMapPath roll_pseudo_orthogonal(const PseudoOrthParams& params, const ControlCurve& u) {
  params.validate();
  const int n = params.n();
  const auto basis = so_pq_basis(params);
  const MatrixXd P0 = params.base();
  const MatrixXd P0inv = checked_inverse(P0, "P0");
  const VectorXd J = params.J_signs();
  const SignatureForm jform(J);
  auto U = [&](double t) {
    const VectorXd c = u.u(t);
    if (c.size() != columns(basis)) throw RollingError("roll_pseudo_orthogonal: control has the wrong number of coefficients");
    MatrixXd X = MatrixXd::Zero(n, n);
    for (size_t i = 0; i < basis.size(); ++i) X += c[i] * basis[i];
    return X;
  };
  VectorXd both(2 * n);
  both << J, J;
  auto flow = flow_affine_ode(
      [&](double t) -> MatrixXd {
        const MatrixXd X = U(t);
        return block_diag(-X, P0inv * X * P0);
      },
      FlowSide::Left, [&](double t, const MatrixXd&) -> VectorXd { return flatten(2.0 * U(t) * P0); },
      MatrixXd::Identity(2 * n, 2 * n), VectorXd::Zero(n * n), u.grid, SignatureForm(both));
  RollingMapPath path{u.grid, trace_j_form(params), {}, {}, {}};
  for (int k = 0; k < u.grid.n_nodes(); ++k) {
    const MatrixXd R1 = flow.X[k].topLeftCorner(n, n);
    const MatrixXd R2 = flow.X[k].bottomRightCorner(n, n);
    const MatrixXd R2inv = jform.J() * R2.transpose() * jform.J();
    const MatrixXd R1inv = jform.J() * R1.transpose() * jform.J();
    path.motions.push_back({kron(R2inv.transpose(), R1), flow.x[k]});
    path.alpha.push_back(flatten(R1inv * P0 * R2));
    path.alpha_hat.push_back(flatten(P0) + flow.x[k]);
  }
  return path;
}

CartanModel make_pseudo_orthogonal_model(const PseudoOrthParams& params) {
  params.validate();
  CartanModel m;
  m.name = "so_" + std::to_string(params.p) + "_" + std::to_string(params.q);
  const auto B = so_pq_basis(params);
  const MatrixXd P0 = params.base();
  const MatrixXd P0inv = checked_inverse(P0, "P0");
  for (const auto& b : B) m.basis.push_back(block_diag(b, P0inv * b * P0));
  for (const auto& c : B) m.basis.push_back(block_diag(c, -P0inv * c * P0));
  const int d = static_cast<int>(B.size());
  for (int i = 0; i < d; ++i) {
    m.h_indices.push_back(i);
    m.p_indices.push_back(d + i);
  }
  m.symmetric = true;
  m.geometry = make_pseudo_orth_geometry(params);
  m.params["p"] = {static_cast<double>(params.p)};
  m.params["q"] = {static_cast<double>(params.q)};
  if (params.P0.size() != 0) {
    const VectorXd v = flatten(params.P0);
    m.params["P0"] = std::vector<double>(v.data(), v.data() + v.size());
  }
  m.set_default_ip_p();
  return m;
}

std::shared_ptr<const Geometry> make_pseudo_orth_geometry(const PseudoOrthParams& params) {
  params.validate();
  return std::make_shared<PseudoOrthGeometry>(params);
}

// -------------------------------------------------------------------- Stiefel

void StiefelShape::validate() const {
  if (k < 1 || k >= n) throw RollingError("stiefel: need 1 <= k < n");
}

MatrixXd StiefelShape::E() const { return MatrixXd::Identity(n, k); }

MatrixXd stiefel_tangent_frame(const MatrixXd& P) {
  const int n = static_cast<int>(P.rows()), k = static_cast<int>(P.cols());
  StiefelShape{n, k}.validate();
  const MatrixXd Pp = complement(P);
  const auto A = skew_unit_basis(k);
  MatrixXd F(n * k, columns(A) + (n - k) * k);
  int c = 0;
  for (const auto& a : A) F.col(c++) = flatten(P * a);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < n - k; ++i) F.col(c++) = flatten(Pp.col(i) * Eigen::RowVectorXd::Unit(k, j));
  return F;
}

MatrixXd stiefel_normal_frame(const MatrixXd& P) {
  const int n = static_cast<int>(P.rows()), k = static_cast<int>(P.cols());
  StiefelShape{n, k}.validate();
  const auto S = sym_unit_basis(k);
  MatrixXd F(n * k, columns(S));
  for (size_t i = 0; i < S.size(); ++i) F.col(i) = flatten(P * S[i]);
  return F;
}

StiefelSubspaces stiefel_subspaces(const StiefelShape& shape) {
  shape.validate();
  const int n = shape.n, k = shape.k;
  const MatrixXd E = shape.E();
  StiefelSubspaces out;
  // at E the complement is spanned exactly by the last n - k coordinate vectors
  const auto A = skew_unit_basis(k);
  out.tangent.resize(n * k, columns(A) + (n - k) * k);
  int c = 0;
  for (const auto& a : A) out.tangent.col(c++) = flatten(E * a);
  for (int j = 0; j < k; ++j)
    for (int i = k; i < n; ++i) {
      MatrixXd W = MatrixXd::Zero(n, k);
      W(i, j) = 1.0;
      out.tangent.col(c++) = flatten(W);
    }
  out.normal = stiefel_normal_frame(E);
  out.v_e = flatten(E) / std::sqrt(static_cast<double>(k));
  std::vector<MatrixXd> sl;
  for (int j = 1; j < k; ++j) {
    MatrixXd S = MatrixXd::Zero(k, k);
    for (int i = 0; i < j; ++i) S(i, i) = 1.0;
    S(j, j) = -j;
    sl.push_back(S / std::sqrt(static_cast<double>(j * (j + 1))));
  }
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) sl.push_back((unit(k, i, j) + unit(k, j, i)) / std::sqrt(2.0));
  out.sl_kk.resize(n * k, columns(sl));
  for (size_t i = 0; i < sl.size(); ++i) out.sl_kk.col(i) = flatten(E * sl[i]);
  std::vector<VectorXd> h, p;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const VectorXd v = flatten(unit(n, i, j) - unit(n, j, i)) / std::sqrt(2.0);
      (i >= k ? h : p).push_back(v);
    }
  out.h_basis.resize(n * n, static_cast<Eigen::Index>(h.size()));
  out.p_basis.resize(n * n, static_cast<Eigen::Index>(p.size()));
  for (size_t i = 0; i < h.size(); ++i) out.h_basis.col(i) = h[i];
  for (size_t i = 0; i < p.size(); ++i) out.p_basis.col(i) = p[i];
  out.Pi = out.tangent * out.tangent.transpose();
  out.Pi_perp = out.normal * out.normal.transpose();
  return out;
}

MatrixXd stiefel_omega(const StiefelShape& shape, const MatrixXd& qdot, double tol) {
  shape.validate();
  const int n = shape.n, k = shape.k;
  if (qdot.rows() != n || qdot.cols() != n) throw RollingError("stiefel_omega: qdot has the wrong size");
  const double scale = std::max(1.0, qdot.cwiseAbs().maxCoeff());
  const double skew = (qdot + qdot.transpose()).cwiseAbs().maxCoeff();
  const double corner = qdot.bottomRightCorner(n - k, n - k).cwiseAbs().maxCoeff();
  if (skew > tol * scale || corner > tol * scale)
    throw RollingError("stiefel_omega: qdot is not in p (skew residual " + std::to_string(skew) +
                       ", h-block " + std::to_string(corner) + ")");
  const auto sub = stiefel_subspaces(shape);
  const MatrixXd rho = kron(MatrixXd::Identity(k, k), qdot);
  return -(sub.Pi * rho * sub.Pi + sub.Pi_perp * rho * sub.Pi_perp);
}

StiefelRolling roll_stiefel(const StiefelShape& shape, const CurveInput& input) {
  shape.validate();
  const CartanModel model = make_stiefel_model(shape);
  StiefelRolling out;
  out.lift = horizontal_lift(model, input);
  const GroupPath& lift = out.lift;
  const TimeGrid grid = lift.grid;
  const int k = shape.k, dv = shape.dim_V();
  const MatrixXd E = shape.E();
  std::function<VectorXd(double)> coeff;
  if (const auto* c = std::get_if<ControlCurve>(&input)) coeff = c->u;
  else coeff = [&lift, grid](double t) { return interpolate_nodes(grid, lift.controls, t); };
  const auto sub = stiefel_subspaces(shape);
  auto Omega = [&](double t) -> MatrixXd {
    const MatrixXd rho = kron(MatrixXd::Identity(k, k), model.p_element(coeff(t)));
    return -(sub.Pi * rho * sub.Pi + sub.Pi_perp * rho * sub.Pi_perp);
  };
  // W = S^{-1} satisfies W' = -W Omega; s' = W (U E)
  auto flow = flow_affine_ode([&](double t) -> MatrixXd { return -Omega(t); }, FlowSide::Right,
                              [&](double t, const MatrixXd& W) -> VectorXd {
                                return W * flatten(model.p_element(coeff(t)) * E);
                              },
                              MatrixXd::Identity(dv, dv), VectorXd::Zero(dv), grid,
                              SignatureForm::euclidean(dv));
  out.path = RollingMapPath{grid, SignatureForm::euclidean(dv), {}, {}, {}};
  const VectorXd e = flatten(E);
  for (int i = 0; i < grid.n_nodes(); ++i) {
    const MatrixXd& W = flow.X[i];
    const MatrixXd& Q = lift.samples[i];
    out.S.push_back(W.transpose());
    out.path.motions.push_back({W * kron(MatrixXd::Identity(k, k), Q.transpose()), flow.x[i]});
    out.path.alpha.push_back(flatten(Q * E));
    out.path.alpha_hat.push_back(e + flow.x[i]);
  }
  return out;
}

CartanModel make_stiefel_model(const StiefelShape& shape) {
  shape.validate();
  CartanModel m;
  m.name = "stiefel_" + std::to_string(shape.n) + "_" + std::to_string(shape.k);
  const int n = shape.n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      (i >= shape.k ? m.h_indices : m.p_indices).push_back(static_cast<int>(m.basis.size()));
      m.basis.push_back(unit(n, i, j) - unit(n, j, i));
    }
  m.symmetric = shape.k == 1;
  m.geometry = make_stiefel_geometry(shape);
  m.params["n"] = {static_cast<double>(shape.n)};
  m.params["k"] = {static_cast<double>(shape.k)};
  m.set_default_ip_p();
  return m;
}

std::shared_ptr<const Geometry> make_stiefel_geometry(const StiefelShape& shape) {
  return std::make_shared<StiefelGeometry>(shape);
}

// ------------------------------------------------------------------ registry

namespace {

int int_param(const std::map<std::string, std::vector<double>>& params, const std::string& key) {
  const auto it = params.find(key);
  if (it == params.end() || it->second.size() != 1) throw RollingError("model parameter '" + key + "' missing or not a scalar");
  const double v = it->second.front();
  if (v != std::floor(v)) throw RollingError("model parameter '" + key + "' must be an integer");
  return static_cast<int>(v);
}

PseudoOrthParams pseudo_params(const std::map<std::string, std::vector<double>>& params) {
  PseudoOrthParams p{int_param(params, "p"), int_param(params, "q"), {}};
  if (const auto it = params.find("P0"); it != params.end()) {
    const int n = p.n();
    if (static_cast<int>(it->second.size()) != n * n) throw RollingError("model parameter 'P0' must have n^2 entries");
    p.P0 = unflatten(Eigen::Map<const VectorXd>(it->second.data(), n * n), n, n);
  }
  p.validate();
  return p;
}

}  // namespace

std::shared_ptr<const Geometry> make_geometry(const std::string& embedding_id,
                                              const std::map<std::string, std::vector<double>>& params) {
  if (embedding_id == "hyperboloid12") return make_hyperboloid_geometry();
  if (embedding_id == "riemann_sphere") return make_sphere_geometry();
  if (embedding_id == "pseudo_orth") return make_pseudo_orth_geometry(pseudo_params(params));
  if (embedding_id == "stiefel") return make_stiefel_geometry({int_param(params, "n"), int_param(params, "k")});
  throw RollingError("unknown embedding: builtin:" + embedding_id);
}

std::vector<std::string> builtin_model_names() {
  return {"hyperboloid", "riemann_sphere", "so_2_1", "so_3_0", "so_2_2", "so_1_2", "stiefel_3_1", "stiefel_4_2"};
}

CartanModel builtin_model(const std::string& name) {
  if (name == "hyperboloid") return make_hyperbolic_model();
  if (name == "riemann_sphere") return make_sphere_model();
  if (name == "so_2_1") return make_pseudo_orthogonal_model({2, 1, {}});
  if (name == "so_3_0") return make_pseudo_orthogonal_model({3, 0, {}});
  if (name == "so_2_2") return make_pseudo_orthogonal_model({2, 2, {}});
  if (name == "so_1_2") return make_pseudo_orthogonal_model({1, 2, {}});
  if (name == "stiefel_3_1") return make_stiefel_model({3, 1});
  if (name == "stiefel_4_2") return make_stiefel_model({4, 2});
  throw RollingError("unknown model: " + name);
}

}  // namespace rolling::models
