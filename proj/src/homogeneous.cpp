#include "rolling/homogeneous.hpp"

#include <algorithm>
#include <cmath>

namespace rolling {

namespace {

MatrixXd basis_columns(const std::vector<MatrixXd>& basis) {
  if (basis.empty()) throw RollingError("CartanModel: empty basis");
  const auto sz = basis.front().size();
  MatrixXd B(sz, basis.size());
  for (size_t i = 0; i < basis.size(); ++i) {
    if (basis[i].size() != sz) throw RollingError("CartanModel: basis matrices differ in size");
    B.col(i) = flatten(basis[i]);
  }
  return B;
}

void require_p_dim(const CartanModel& model, const VectorXd& u, const char* what) {
  if (u.size() != model.p_dim())
    throw RollingError(std::string(what) + ": control has " + std::to_string(u.size()) +
                       " coefficients, model p has " + std::to_string(model.p_dim()));
}

MatrixXd pinv(const MatrixXd& M) { return M.completeOrthogonalDecomposition().pseudoInverse(); }

}  // namespace

MatrixXd CartanModel::d_e_pi() const {
  const VectorXd o = base_point();
  MatrixXd D(geometry->chart_dim(), p_dim());
  for (int j = 0; j < p_dim(); ++j) D.col(j) = geometry->infinitesimal_action(basis[p_indices[j]], o);
  return D;
}

MatrixXd CartanModel::p_element(const VectorXd& u) const {
  require_p_dim(*this, u, "p_element");
  MatrixXd X = MatrixXd::Zero(group_size(), group_size());
  for (int j = 0; j < p_dim(); ++j) X += u[j] * basis[p_indices[j]];
  return X;
}

MatrixXd CartanModel::algebra_element(const VectorXd& c) const {
  if (c.size() != algebra_dim()) throw RollingError("algebra_element: wrong coefficient count");
  MatrixXd X = MatrixXd::Zero(group_size(), group_size());
  for (int j = 0; j < algebra_dim(); ++j) X += c[j] * basis[j];
  return X;
}

VectorXd CartanModel::algebra_coordinates(const MatrixXd& X) const {
  return basis_columns(basis).colPivHouseholderQr().solve(flatten(X));
}

void CartanModel::set_default_ip_p() {
  const MatrixXd D = d_e_pi();
  ip_p = D.transpose() * geometry->chart_metric(base_point()) * D;
}

MatrixXd random_group_element(const CartanModel& model, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> N(0.0, scale);
  VectorXd c(model.algebra_dim());
  for (auto& x : c) x = N(rng);
  return expm(model.algebra_element(c));
}

CartanCheck validate_model(const CartanModel& model, int samples, std::uint64_t seed, double tol) {
  CartanCheck chk;
  if (!model.geometry) throw RollingError("validate_model: model has no geometry");
  const int m = model.algebra_dim();
  std::vector<int> kind(m, -1);
  for (int i : model.h_indices) {
    if (i < 0 || i >= m) throw RollingError("validate_model: h index out of range");
    kind[i] = 0;
  }
  for (int i : model.p_indices) {
    if (i < 0 || i >= m || kind[i] != -1) throw RollingError("validate_model: p index out of range or repeated");
    kind[i] = 1;
  }
  if (std::count(kind.begin(), kind.end(), -1) != 0)
    throw RollingError("validate_model: h and p indices do not cover the basis");
  for (const auto& A : model.basis)
    if (A.rows() != model.group_size() || A.cols() != model.group_size())
      throw RollingError("validate_model: basis matrix size differs from the group realization");

  const MatrixXd B = basis_columns(model.basis);
  const auto qr = B.colPivHouseholderQr();
  if (qr.rank() != m) throw RollingError("validate_model: basis is linearly dependent");
  double scale = 0.0;
  for (const auto& A : model.basis) scale = std::max(scale, A.cwiseAbs().maxCoeff());
  const double btol = tol * std::max(1.0, scale * scale);
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      const VectorXd br = flatten(bracket(model.basis[i], model.basis[j]));
      const VectorXd c = qr.solve(br);
      chk.closure = std::max(chk.closure, (B * c - br).cwiseAbs().maxCoeff());
      double hpart = 0.0, ppart = 0.0;
      for (int r = 0; r < m; ++r) {
        double& part = kind[r] == 0 ? hpart : ppart;
        part = std::max(part, std::abs(c[r]));
      }
      if (kind[i] == 0 && kind[j] == 0) chk.bracket_hh = std::max(chk.bracket_hh, ppart);
      else if (kind[i] == 1 && kind[j] == 1) chk.bracket_pp = std::max(chk.bracket_pp, ppart);
      else chk.bracket_hp = std::max(chk.bracket_hp, hpart);
    }
  }
  for (int i : model.h_indices)
    for (int j : model.p_indices)
      chk.orthogonality = std::max(chk.orthogonality, std::abs((model.basis[i] * model.basis[j]).trace()));

  const MatrixXd D = model.d_e_pi();
  if (D.cols() != model.geometry->manifold_dim())
    throw RollingError("validate_model: dim p differs from dim M");
  Eigen::JacobiSVD<MatrixXd> svd(D);
  const auto& sv = svd.singularValues();
  chk.d_e_pi_condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : INFINITY;

  std::mt19937_64 rng(seed);
  const auto& geo = *model.geometry;
  const VectorXd o = model.base_point();
  for (int s = 0; s < samples; ++s) {
    const MatrixXd q = random_group_element(model, rng);
    const VectorXd x = geo.act(random_group_element(model, rng), o);
    const VectorXd lhs = geo.embed(geo.act(q, x));
    const VectorXd rhs = geo.represent(q) * geo.embed(x);
    chk.equivariance = std::max(chk.equivariance, (lhs - rhs).norm() / std::max(1.0, rhs.norm()));
  }

  chk.ok = chk.closure <= btol && chk.bracket_hh <= btol && chk.bracket_hp <= btol &&
           chk.orthogonality <= btol && chk.d_e_pi_condition <= 1e6 && chk.equivariance <= 1e-8;
  if (model.symmetric && chk.bracket_pp > btol)
    chk.warnings.push_back("model is flagged symmetric but [p,p] has a p-component of " +
                           std::to_string(chk.bracket_pp));
  return chk;
}

ControlCurve ControlCurve::from_function(const TimeGrid& grid, std::function<VectorXd(double)> f) {
  ControlCurve c{grid, std::move(f), {}};
  c.coords.reserve(grid.n_nodes());
  for (int k = 0; k < grid.n_nodes(); ++k) c.coords.push_back(c.u(grid.t(k)));
  return c;
}

ControlCurve ControlCurve::from_samples(const TimeGrid& grid, std::vector<VectorXd> coords) {
  if (static_cast<int>(coords.size()) != grid.n_nodes())
    throw RollingError("ControlCurve: sample count does not match the grid");
  auto shared = std::make_shared<const std::vector<VectorXd>>(coords);
  ControlCurve c{grid, [grid, shared](double t) { return interpolate_nodes(grid, *shared, t); },
                 std::move(coords)};
  return c;
}

namespace {

// RK4 for q' = q X(t, q) with X(t, q) in p, optionally reprojected.
template <class Rate>
GroupPath lift_rk4(const CartanModel& model, const TimeGrid& grid, const MatrixXd& q0, Rate&& rate) {
  const auto form = model.geometry->group_form();
  GroupPath out{grid, {}, {}};
  out.samples.reserve(grid.n_nodes());
  out.controls.reserve(grid.n_nodes());
  MatrixXd q = form ? reproject(q0, *form) : q0;
  const double h = grid.h();
  for (int k = 0; k < grid.n_steps(); ++k) {
    const double t = grid.t(k);
    const VectorXd u1 = rate(t, q);
    out.samples.push_back(q);
    out.controls.push_back(u1);
    const MatrixXd K1 = q * model.p_element(u1);
    const MatrixXd q2 = q + 0.5 * h * K1;
    const MatrixXd K2 = q2 * model.p_element(rate(t + 0.5 * h, q2));
    const MatrixXd q3 = q + 0.5 * h * K2;
    const MatrixXd K3 = q3 * model.p_element(rate(t + 0.5 * h, q3));
    const MatrixXd q4 = q + h * K3;
    const MatrixXd K4 = q4 * model.p_element(rate(t + h, q4));
    q += (h / 6.0) * (K1 + 2.0 * K2 + 2.0 * K3 + K4);
    if (form) q = reproject(q, *form);
  }
  out.samples.push_back(q);
  out.controls.push_back(rate(grid.t(grid.n_steps()), q));
  return out;
}

}  // namespace

GroupPath horizontal_lift(const CartanModel& model, const CurveInput& input, const MatrixXd& q0,
                          const LiftOptions& opts) {
  if (q0.rows() != model.group_size() || q0.cols() != model.group_size())
    throw RollingError("horizontal_lift: q0 has the wrong size");
  if (const auto* control = std::get_if<ControlCurve>(&input)) {
    if (static_cast<int>(control->coords.size()) != control->grid.n_nodes())
      throw RollingError("horizontal_lift: control sample count does not match the grid");
    auto rate = [&](double t, const MatrixXd&) {
      VectorXd u = control->u(t);
      require_p_dim(model, u, "horizontal_lift");
      return u;
    };
    return lift_rk4(model, control->grid, q0, rate);
  }
  const auto& curve = std::get<SampledCurve>(input);
  const TimeGrid& grid = curve.grid;
  if (static_cast<int>(curve.points.size()) != grid.n_nodes())
    throw RollingError("horizontal_lift: curve sample count does not match the grid");
  const auto& geo = *model.geometry;
  const VectorXd o = model.base_point();
  const VectorXd start = geo.act(q0, o);
  if (curve.points.front().size() != start.size())
    throw RollingError("horizontal_lift: curve points have the wrong dimension");
  if ((curve.points.front() - start).norm() > 1e-8 * std::max(1.0, start.norm()))
    throw RollingError("horizontal_lift: curve does not start at tau_{q0}(o)");
  const auto velocity = differentiate_nodes(grid, curve.points);
  const MatrixXd D = model.d_e_pi();
  auto rate = [&](double t, const MatrixXd& q) -> VectorXd {
    const VectorXd v = interpolate_nodes(grid, velocity, t);
    const MatrixXd M = geo.act_jacobian(q, o) * D;
    const VectorXd u = M.colPivHouseholderQr().solve(v);
    const double r = (M * u - v).norm();
    if (!std::isfinite(r) || r > opts.residual_tol * std::max(1.0, v.norm()))
      throw RollingError("horizontal_lift: velocity is not in the range of d tau d_e pi (residual " +
                         std::to_string(r) + "); curve is not smooth or leaves the chart");
    return u;
  };
  return lift_rk4(model, grid, q0, rate);
}

GroupPath horizontal_lift(const CartanModel& model, const CurveInput& input) {
  return horizontal_lift(model, input, MatrixXd::Identity(model.group_size(), model.group_size()));
}

double horizontality_residual(const CartanModel& model, const GroupPath& lift) {
  const auto dq = differentiate_nodes(lift.grid, lift.samples);
  double worst = 0.0;
  for (size_t k = 0; k < dq.size(); ++k) {
    const MatrixXd X = checked_inverse(lift.samples[k], "horizontality_residual") * dq[k];
    const VectorXd c = model.algebra_coordinates(X);
    for (int i : model.h_indices) worst = std::max(worst, std::abs(c[i]));
  }
  return worst;
}

std::vector<VectorXd> project_path(const CartanModel& model, const GroupPath& lift) {
  std::vector<VectorXd> out;
  out.reserve(lift.samples.size());
  const VectorXd o = model.base_point();
  for (const auto& q : lift.samples) out.push_back(model.geometry->act(q, o));
  return out;
}

std::vector<VectorXd> develop_intrinsic(const CartanModel& model, const ControlCurve& control) {
  const MatrixXd D = model.d_e_pi();
  auto rhs = [&](double t) -> VectorXd {
    const VectorXd u = control.u(t);
    require_p_dim(model, u, "develop_intrinsic");
    return D * u;
  };
  return integrate_vector(rhs, VectorXd::Zero(D.rows()), control.grid);
}

std::vector<MatrixXd> isometry_chain_A(const CartanModel& model, const GroupPath& lift) {
  const MatrixXd D = model.d_e_pi();
  const VectorXd o = model.base_point();
  std::vector<MatrixXd> out;
  out.reserve(lift.samples.size());
  for (const auto& q : lift.samples) {
    const MatrixXd M = model.geometry->act_jacobian(q, o) * D;
    Eigen::JacobiSVD<MatrixXd> svd(M);
    const auto& sv = svd.singularValues();
    if (!(sv(sv.size() - 1) > 1e-12 * sv(0)))
      throw RollingError("isometry_chain_A: d_q pi is singular on the chosen frame");
    out.push_back(D * pinv(M));
  }
  return out;
}

IntrinsicRolling intrinsic_roll(const CartanModel& model, const CurveInput& input) {
  IntrinsicRolling out{{}, horizontal_lift(model, input)};
  const GroupPath& lift = out.lift;
  const auto& geo = *model.geometry;
  const TimeGrid& grid = lift.grid;
  const ControlCurve control = std::holds_alternative<ControlCurve>(input)
                                   ? std::get<ControlCurve>(input)
                                   : ControlCurve::from_samples(grid, lift.controls);
  RollingTriple& tr = out.triple;
  tr.grid = grid;
  tr.alpha = project_path(model, lift);
  tr.alpha_hat = develop_intrinsic(model, control);
  tr.A = isometry_chain_A(model, lift);
  tr.metric_Mhat = geo.chart_metric(model.base_point());
  tr.frames_M.grid = grid;
  const MatrixXd D = model.d_e_pi();
  const VectorXd o = model.base_point();
  for (size_t k = 0; k < lift.samples.size(); ++k) {
    tr.metric_M.push_back(geo.chart_metric(tr.alpha[k]));
    tr.frames_M.frames.push_back(geo.act_jacobian(lift.samples[k], o) * D);
  }
  return out;
}

std::vector<VectorXd> transport_homogeneous(const CartanModel& model, const GroupPath& lift,
                                            const VectorXd& y0) {
  require_p_dim(model, y0, "transport_homogeneous");
  const auto& geo = *model.geometry;
  const VectorXd o = model.base_point();
  const VectorXd w = model.d_e_pi() * y0;
  std::vector<VectorXd> out;
  out.reserve(lift.samples.size());
  for (const auto& q : lift.samples)
    out.push_back(geo.embed_jacobian(geo.act(q, o)) * (geo.act_jacobian(q, o) * w));
  return out;
}

std::vector<VectorXd> extrinsic_develop(const CartanModel& model, const GroupPath& lift,
                                        const std::vector<VectorXd>& emb_curve) {
  const TimeGrid& grid = lift.grid;
  if (emb_curve.size() != lift.samples.size())
    throw RollingError("extrinsic_develop: curve and lift have different sample counts");
  const auto velocity = differentiate_nodes(grid, emb_curve);
  std::vector<VectorXd> rhs(velocity.size());
  for (size_t k = 0; k < velocity.size(); ++k)
    rhs[k] = model.geometry->represent(lift.samples[k]).partialPivLu().solve(velocity[k]);
  return integrate_vector([&](double t) { return interpolate_nodes(grid, rhs, t); },
                          VectorXd::Zero(emb_curve.front().size()), grid);
}

std::vector<MatrixXd> normal_extension_by_frames(const std::vector<MatrixXd>& tangential,
                                                 const TangentFramePath& normal_along,
                                                 const TangentFramePath& normal_development,
                                                 const SignatureForm& form, double tol) {
  const size_t n = tangential.size();
  if (normal_along.frames.size() != n || normal_development.frames.size() != n)
    throw RollingError("normal_extension_by_frames: sample counts differ");
  std::vector<MatrixXd> out;
  out.reserve(n);
  const MatrixXd I = MatrixXd::Identity(form.dim(), form.dim());
  for (size_t k = 0; k < n; ++k) {
    const MatrixXd& N = normal_along.frames[k];
    const MatrixXd& Nh = normal_development.frames[k];
    if (N.cols() != Nh.cols()) throw RollingError("normal_extension_by_frames: frame sizes differ");
    if (N.cols() == 0) {
      out.push_back(tangential[k]);
      continue;
    }
    const MatrixXd G = form.gram(N);
    const MatrixXd Gh = form.gram(Nh);
    if ((G - Gh).cwiseAbs().maxCoeff() > tol * std::max(1.0, Gh.cwiseAbs().maxCoeff()))
      throw RollingError("normal_extension_by_frames: frame Gram matrices differ (non-isometric frames)");
    const MatrixXd coords = checked_inverse(G, "normal_extension_by_frames") * N.transpose() * form.J();
    const MatrixXd PN = N * coords;
    out.push_back(tangential[k] * (I - PN) + Nh * coords);
  }
  return out;
}

ExtrinsicFrames extrinsic_frames(const CartanModel& model, const RollingMapPath& path) {
  const auto& geo = *model.geometry;
  const VectorXd ob = model.embedded_base_point();
  ExtrinsicFrames f{{path.grid, {}},
                    TangentFramePath::constant(path.grid, geo.ambient_tangent_frame(ob)),
                    TangentFramePath::constant(path.grid, geo.ambient_normal_frame(ob))};
  f.tangent_M.frames.reserve(path.alpha.size());
  for (const auto& a : path.alpha) f.tangent_M.frames.push_back(geo.ambient_tangent_frame(a));
  return f;
}

ExtrinsicRolling extrinsic_roll(const CartanModel& model, const CurveInput& input,
                                NormalStrategy strategy) {
  const auto& geo = *model.geometry;
  if (strategy == NormalStrategy::ClosedForm && !geo.closed_form_normal())
    throw RollingError("extrinsic_roll: closed-form normal extension is unavailable for model " +
                       model.name);
  GroupPath lift = horizontal_lift(model, input);
  const TimeGrid grid = lift.grid;
  const SignatureForm form = geo.ambient_form();
  const VectorXd ob = model.embedded_base_point();
  std::vector<VectorXd> alpha_bar;
  alpha_bar.reserve(lift.samples.size());
  for (const auto& m : project_path(model, lift)) alpha_bar.push_back(geo.embed(m));
  std::vector<MatrixXd> R;
  std::vector<VectorXd> s_bar;
  if (strategy == NormalStrategy::ClosedForm) {
    for (const auto& q : lift.samples) R.push_back(checked_inverse(geo.represent(q), "extrinsic_roll"));
    s_bar = extrinsic_develop(model, lift, alpha_bar);
  } else {
    // Both tangent and normal parts come from matching parallel frames along
    // alpha_bar with the fixed frames at o_bar; rho(q)^{-1} is not twist-free on
    // tangents unless the space is symmetric.
    TangentFramePath tangent_along{grid, {}};
    for (const auto& a : alpha_bar) tangent_along.frames.push_back(geo.ambient_tangent_frame(a));
    const MatrixXd Th = geo.ambient_tangent_frame(ob);
    const MatrixXd Nh = geo.ambient_normal_frame(ob);
    const auto T = parallel_transport_frame(tangent_along, Th, TransportKind::Tangent, form);
    TangentFramePath normal_along{grid, parallel_transport_frame(tangent_along, Nh, TransportKind::Normal, form)};
    const MatrixXd GTinv = checked_inverse(form.gram(Th), "extrinsic_roll tangent Gram");
    std::vector<MatrixXd> Rt;
    for (const auto& Tk : T) Rt.push_back(Th * GTinv * Tk.transpose() * form.J());
    R = normal_extension_by_frames(Rt, normal_along, TangentFramePath::constant(grid, Nh), form);
    const auto vel = differentiate_nodes(grid, alpha_bar);
    std::vector<VectorXd> rhs(vel.size());
    for (size_t k = 0; k < vel.size(); ++k) rhs[k] = R[k] * vel[k];
    s_bar = integrate_vector([&](double t) { return interpolate_nodes(grid, rhs, t); },
                             VectorXd::Zero(ob.size()), grid);
  }

  ExtrinsicRolling out;
  out.path = RollingMapPath{grid, form, {}, alpha_bar, {}};
  for (size_t k = 0; k < R.size(); ++k) {
    VectorXd ah = ob + s_bar[k];
    out.path.motions.push_back({R[k], ah - R[k] * alpha_bar[k]});
    out.path.alpha_hat.push_back(std::move(ah));
  }
  auto frames = extrinsic_frames(model, out.path);
  out.tangent_M = std::move(frames.tangent_M);
  out.tangent_Mhat = std::move(frames.tangent_Mhat);
  out.normal_Mhat = std::move(frames.normal_Mhat);
  out.lift = std::move(lift);
  return out;
}

ExtrinsicRolling extrinsic_roll(const CartanModel& model, const CurveInput& input) {
  return extrinsic_roll(model, input,
                        model.geometry->closed_form_normal() ? NormalStrategy::ClosedForm
                                                             : NormalStrategy::FrameMatching);
}

double intrinsic_extrinsic_mismatch(const CartanModel& model, const RollingTriple& triple,
                                    const RollingMapPath& path) {
  if (triple.A.size() != path.motions.size())
    throw RollingError("intrinsic_extrinsic_mismatch: sample counts differ");
  const auto& geo = *model.geometry;
  const MatrixXd dio = geo.embed_jacobian(model.base_point());
  double worst = 0.0;
  for (size_t k = 0; k < triple.A.size(); ++k) {
    const MatrixXd& F = triple.frames_M.frames[k];
    const MatrixXd lhs = dio * triple.A[k] * F;
    const MatrixXd rhs = path.motions[k].R * geo.embed_jacobian(triple.alpha[k]) * F;
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff() / std::max(1.0, rhs.cwiseAbs().maxCoeff()));
  }
  return worst;
}

}  // namespace rolling
