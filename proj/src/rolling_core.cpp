#include "rolling/rolling_core.hpp"

#include <algorithm>
#include <cmath>

namespace rolling {

namespace {

void require_nodes(const TimeGrid& grid, size_t got, const char* what) {
  if (static_cast<int>(got) != grid.n_nodes())
    throw RollingError(std::string(what) + ": sample count does not match the grid");
}

void require_aligned(const RollingMapPath& path, const TangentFramePath& frames, const char* what) {
  if (!(frames.grid == path.grid)) throw RollingError(std::string(what) + ": grids are not aligned");
  require_nodes(path.grid, frames.frames.size(), what);
}

void check_path(const RollingMapPath& path, const char* what) {
  require_nodes(path.grid, path.motions.size(), what);
  require_nodes(path.grid, path.alpha.size(), what);
  require_nodes(path.grid, path.alpha_hat.size(), what);
}

// Orthonormal basis of span(F) (Euclidean), rejecting ill-conditioned frames.
MatrixXd orthonormal_basis(const MatrixXd& F) {
  Eigen::JacobiSVD<MatrixXd> svd(F, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || !(sv(sv.size() - 1) > 0.0) || sv(0) / sv(sv.size() - 1) > 1e6)
    throw RollingError("degenerate frame: rank deficient or condition number above 1e6");
  return svd.matrixU();
}

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

std::vector<VectorXd> translations(const RollingMapPath& path) {
  std::vector<VectorXd> s;
  s.reserve(path.motions.size());
  for (const auto& g : path.motions) s.push_back(g.s);
  return s;
}

// Largest component, measured by projector P, of Omega applied to unit columns of F.
double max_component(const MatrixXd& P, const MatrixXd& Omega, const MatrixXd& F) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < F.cols(); ++j) {
    const double n = F.col(j).norm();
    if (n == 0.0) continue;
    worst = std::max(worst, (P * (Omega * F.col(j))).norm() / n);
  }
  return worst;
}

}  // namespace

TangentFramePath TangentFramePath::constant(const TimeGrid& grid, const MatrixXd& frame) {
  return {grid, std::vector<MatrixXd>(grid.n_nodes(), frame)};
}

double ResidualReport::max_residual() const {
  return std::max({rolling_point, tangency, no_slip, no_twist_tan, no_twist_norm});
}

std::vector<std::pair<std::string, double>> ResidualReport::summary() const {
  return {{"rolling_point", rolling_point},
          {"tangency", tangency},
          {"no_slip", no_slip},
          {"no_twist_tan", no_twist_tan},
          {"no_twist_norm", no_twist_norm}};
}

std::vector<MatrixXd> rotation_generators(const RollingMapPath& path) {
  check_path(path, "rotation_generators");
  std::vector<MatrixXd> R;
  R.reserve(path.motions.size());
  for (const auto& g : path.motions) R.push_back(g.R);
  const auto dR = differentiate_nodes(path.grid, R);
  std::vector<MatrixXd> out(R.size());
  for (size_t k = 0; k < R.size(); ++k)
    out[k] = j_skew_part(dR[k] * checked_inverse(R[k], "rotation_generators"), path.form);
  return out;
}

ResidualReport rolling_condition_residuals(const RollingMapPath& path,
                                           const TangentFramePath& tangent_M,
                                           const TangentFramePath& tangent_Mhat) {
  check_path(path, "rolling_condition_residuals");
  require_aligned(path, tangent_M, "rolling_condition_residuals");
  require_aligned(path, tangent_Mhat, "rolling_condition_residuals");
  ResidualReport rep;
  const int n = path.grid.n_nodes();
  rep.rolling_point_nodes.resize(n);
  rep.tangency_nodes.resize(n);
  for (int k = 0; k < n; ++k) {
    const auto& g = path.motions[k];
    rep.rolling_point_nodes[k] = (se_act(g, path.alpha[k]) - path.alpha_hat[k]).norm();
    const MatrixXd Q1 = orthonormal_basis(g.R * tangent_M.frames[k]);
    const MatrixXd Q2 = orthonormal_basis(tangent_Mhat.frames[k]);
    if (Q1.cols() != Q2.cols()) throw RollingError("rolling_condition_residuals: tangent dimensions differ");
    const MatrixXd off = Q1 - Q2 * (Q2.transpose() * Q1);
    rep.tangency_nodes[k] = off.cols() == 0 ? 0.0 : off.jacobiSvd().singularValues()(0);
  }
  rep.rolling_point = max_of(rep.rolling_point_nodes);
  rep.tangency = max_of(rep.tangency_nodes);
  return rep;
}

std::vector<double> no_slip_residual(const RollingMapPath& path) {
  check_path(path, "no_slip_residual");
  if (path.grid.n_steps() < 2) throw RollingError("no_slip_residual: grid too short (n_steps < 2)");
  const auto Omega = rotation_generators(path);
  const auto s = translations(path);
  const auto ds = differentiate_nodes(path.grid, s);
  std::vector<double> out(s.size());
  for (size_t k = 0; k < s.size(); ++k)
    out[k] = (Omega[k] * (path.alpha_hat[k] - s[k]) + ds[k]).norm();
  return out;
}

std::pair<std::vector<double>, std::vector<double>> no_twist_residuals(
    const RollingMapPath& path, const TangentFramePath& tangent_Mhat,
    const TangentFramePath& normal_Mhat) {
  require_aligned(path, tangent_Mhat, "no_twist_residuals");
  require_aligned(path, normal_Mhat, "no_twist_residuals");
  const auto Omega = rotation_generators(path);
  std::vector<double> tan(Omega.size()), nor(Omega.size());
  for (size_t k = 0; k < Omega.size(); ++k) {
    const MatrixXd& T = tangent_Mhat.frames[k];
    const MatrixXd& N = normal_Mhat.frames[k];
    if (T.cols() + N.cols() != path.dim())
      throw RollingError("no_twist_residuals: tangent and normal frames are not complementary");
    const MatrixXd PT = j_projector(T, path.form);
    const MatrixXd PN = j_projector(N, path.form);
    tan[k] = max_component(PT, Omega[k], T);
    nor[k] = max_component(PN, Omega[k], N);
  }
  return {tan, nor};
}

ResidualReport residual_suite(const RollingMapPath& path, const TangentFramePath& tangent_M,
                              const TangentFramePath& tangent_Mhat,
                              const TangentFramePath& normal_Mhat) {
  ResidualReport rep = rolling_condition_residuals(path, tangent_M, tangent_Mhat);
  rep.no_slip_nodes = no_slip_residual(path);
  auto [tan, nor] = no_twist_residuals(path, tangent_Mhat, normal_Mhat);
  rep.no_twist_tan_nodes = std::move(tan);
  rep.no_twist_norm_nodes = std::move(nor);
  rep.no_slip = max_of(rep.no_slip_nodes);
  rep.no_twist_tan = max_of(rep.no_twist_tan_nodes);
  rep.no_twist_norm = max_of(rep.no_twist_norm_nodes);
  return rep;
}

RollingMapPath invert_rolling(const RollingMapPath& path) {
  check_path(path, "invert_rolling");
  RollingMapPath out{path.grid, path.form, {}, path.alpha_hat, path.alpha};
  out.motions.reserve(path.motions.size());
  for (const auto& g : path.motions) out.motions.push_back(se_inverse(g));
  return out;
}

RollingMapPath compose_rolling(const RollingMapPath& path_01, const RollingMapPath& path_12,
                               double match_tol) {
  check_path(path_01, "compose_rolling");
  check_path(path_12, "compose_rolling");
  if (!(path_01.grid == path_12.grid)) throw RollingError("compose_rolling: grids are not aligned");
  if (!(path_01.form == path_12.form)) throw RollingError("compose_rolling: ambient forms differ");
  RollingMapPath out{path_01.grid, path_01.form, {}, path_01.alpha, path_12.alpha_hat};
  out.motions.reserve(path_01.motions.size());
  for (size_t k = 0; k < path_01.motions.size(); ++k) {
    const VectorXd& a = path_01.alpha_hat[k];
    const VectorXd& b = path_12.alpha[k];
    if ((a - b).norm() > match_tol * std::max(1.0, a.norm()))
      throw RollingError("compose_rolling: curve mismatch at node " + std::to_string(k));
    out.motions.push_back(se_compose(path_12.motions[k], path_01.motions[k]));
  }
  return out;
}

RollingMapPath perturb_normal_generator(const RollingMapPath& path,
                                        const std::function<MatrixXd(double)>& omega0,
                                        const TangentFramePath& tangent_Mhat,
                                        const TangentFramePath& normal_Mhat,
                                        double admissible_tol) {
  check_path(path, "perturb_normal_generator");
  require_aligned(path, tangent_Mhat, "perturb_normal_generator");
  require_aligned(path, normal_Mhat, "perturb_normal_generator");
  for (int k = 0; k < path.grid.n_nodes(); ++k) {
    const MatrixXd W = omega0(path.grid.t(k));
    if (W.rows() != path.dim() || W.cols() != path.dim())
      throw RollingError("perturb_normal_generator: Omega0 has the wrong shape");
    const double scale = std::max(1.0, W.cwiseAbs().maxCoeff());
    const MatrixXd& T = tangent_Mhat.frames[k];
    const MatrixXd& N = normal_Mhat.frames[k];
    const MatrixXd PT = j_projector(T, path.form);
    const double skew = (W - j_skew_part(W, path.form)).cwiseAbs().maxCoeff();
    const double kills_tangent = (W * T).cwiseAbs().maxCoeff() / std::max(1.0, T.cwiseAbs().maxCoeff());
    const double keeps_normal = (PT * W * N).cwiseAbs().maxCoeff() / std::max(1.0, N.cwiseAbs().maxCoeff());
    if (std::max({skew, kills_tangent, keeps_normal}) > admissible_tol * scale)
      throw RollingError("perturb_normal_generator: Omega0 is not admissible at node " +
                         std::to_string(k));
  }
  const auto Omega = rotation_generators(path);
  const TimeGrid grid = path.grid;
  auto generator = [&](double t) -> MatrixXd {
    return interpolate_nodes(grid, Omega, t) + omega0(t);
  };
  const auto Rt = flow_matrix_ode(generator, path.motions.front().R, grid, FlowSide::Left, path.form);
  RollingMapPath out{grid, path.form, {}, path.alpha, path.alpha_hat};
  out.motions.reserve(Rt.samples.size());
  for (size_t k = 0; k < Rt.samples.size(); ++k) {
    const MatrixXd& R = Rt.samples[k];
    out.motions.push_back({R, path.alpha_hat[k] - R * path.alpha[k]});
  }
  return out;
}

namespace {

std::vector<MatrixXd> transport_projectors(const TangentFramePath& frames, TransportKind which,
                                           const SignatureForm& form) {
  std::vector<MatrixXd> P;
  P.reserve(frames.frames.size());
  const MatrixXd I = MatrixXd::Identity(form.dim(), form.dim());
  for (const auto& F : frames.frames) {
    MatrixXd PT = j_projector(F, form);
    P.push_back(which == TransportKind::Tangent ? PT : MatrixXd(I - PT));
  }
  return P;
}

MatrixXd cayley_step(const MatrixXd& P0, const MatrixXd& P1, const MatrixXd& Y) {
  const MatrixXd half = 0.5 * (P1 - P0);
  const MatrixXd I = MatrixXd::Identity(P0.rows(), P0.cols());
  return (I - half).partialPivLu().solve((I + half) * Y);
}

}  // namespace

std::vector<VectorXd> parallel_transport_embedded(const std::vector<VectorXd>& curve,
                                                  const TangentFramePath& tangent_frames,
                                                  const VectorXd& v0, TransportKind which,
                                                  const SignatureForm& form) {
  require_nodes(tangent_frames.grid, curve.size(), "parallel_transport_embedded");
  require_nodes(tangent_frames.grid, tangent_frames.frames.size(), "parallel_transport_embedded");
  if (v0.size() != form.dim()) throw RollingError("parallel_transport_embedded: dimension mismatch");
  const auto P = transport_projectors(tangent_frames, which, form);
  if ((P[0] * v0 - v0).norm() > 1e-8 * std::max(1.0, v0.norm()))
    throw RollingError("parallel_transport_embedded: v0 is not in the stated subspace");
  const double n0 = form.norm2(v0);
  const bool rescale = std::abs(n0) > 1e-12 * v0.squaredNorm();
  std::vector<VectorXd> out;
  out.reserve(curve.size());
  VectorXd v = P[0] * v0;
  out.push_back(v);
  for (size_t k = 0; k + 1 < P.size(); ++k) {
    v = P[k + 1] * cayley_step(P[k], P[k + 1], v);
    if (rescale) {
      const double n1 = form.norm2(v);
      if (n1 * n0 > 0.0) v *= std::sqrt(n0 / n1);
    }
    out.push_back(v);
  }
  return out;
}

std::vector<MatrixXd> parallel_transport_frame(const TangentFramePath& tangent_frames,
                                               const MatrixXd& F0, TransportKind which,
                                               const SignatureForm& form) {
  if (F0.rows() != form.dim()) throw RollingError("parallel_transport_frame: dimension mismatch");
  const auto P = transport_projectors(tangent_frames, which, form);
  if ((P[0] * F0 - F0).norm() > 1e-8 * std::max(1.0, F0.norm()))
    throw RollingError("parallel_transport_frame: frame is not in the stated subspace");
  const MatrixXd G0 = form.gram(F0);
  const MatrixXd G0inv = checked_inverse(G0, "parallel_transport_frame");
  const MatrixXd I = MatrixXd::Identity(F0.cols(), F0.cols());
  std::vector<MatrixXd> out;
  out.reserve(P.size());
  MatrixXd Y = P[0] * F0;
  out.push_back(Y);
  for (size_t k = 0; k + 1 < P.size(); ++k) {
    Y = P[k + 1] * cayley_step(P[k], P[k + 1], Y);
    for (int it = 0; it < 4; ++it) {
      const MatrixXd D = form.gram(Y) - G0;
      if (D.cwiseAbs().maxCoeff() <= 1e-15 * std::max(1.0, G0.cwiseAbs().maxCoeff())) break;
      Y = Y * (I - 0.5 * G0inv * D);
    }
    out.push_back(Y);
  }
  return out;
}

TripleReport check_triple(const RollingTriple& triple) {
  const TimeGrid& grid = triple.grid;
  require_nodes(grid, triple.alpha.size(), "check_triple");
  require_nodes(grid, triple.alpha_hat.size(), "check_triple");
  require_nodes(grid, triple.A.size(), "check_triple");
  require_nodes(grid, triple.metric_M.size(), "check_triple");
  require_nodes(grid, triple.frames_M.frames.size(), "check_triple");
  TripleReport rep;
  const auto da = differentiate_nodes(grid, triple.alpha);
  const auto dah = differentiate_nodes(grid, triple.alpha_hat);
  const MatrixXd& Gh = triple.metric_Mhat;
  const MatrixXd F0 = triple.frames_M.frames.front();
  const MatrixXd coords = (F0.transpose() * Gh * F0).partialPivLu().solve(F0.transpose() * Gh);
  double det0 = 0.0;
  for (int k = 0; k < grid.n_nodes(); ++k) {
    const MatrixXd& A = triple.A[k];
    const MatrixXd& F = triple.frames_M.frames[k];
    const MatrixXd AF = A * F;
    rep.isometry = std::max(rep.isometry, (AF.transpose() * Gh * AF - F.transpose() * triple.metric_M[k] * F)
                                              .cwiseAbs()
                                              .maxCoeff());
    rep.velocity = std::max(rep.velocity, (A * da[k] - dah[k]).norm());
    const double det = (coords * AF).determinant();
    if (k == 0) det0 = det;
    if (!(det0 > 0.0) || !(det * det0 > 0.0)) rep.orientation_ok = false;
  }
  return rep;
}

std::vector<MatrixXd> tangent_restriction(const RollingMapPath& path,
                                          const TangentFramePath& tangent_M,
                                          const TangentFramePath& tangent_Mhat) {
  check_path(path, "tangent_restriction");
  require_aligned(path, tangent_M, "tangent_restriction");
  require_aligned(path, tangent_Mhat, "tangent_restriction");
  std::vector<MatrixXd> out;
  out.reserve(path.motions.size());
  for (size_t k = 0; k < path.motions.size(); ++k) {
    const MatrixXd& Fh = tangent_Mhat.frames[k];
    out.push_back(Fh.colPivHouseholderQr().solve(path.motions[k].R * tangent_M.frames[k]));
  }
  return out;
}

}  // namespace rolling
