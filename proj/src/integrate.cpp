#include "rolling/integrate.hpp"

#include <cmath>

namespace rolling {

TimeGrid::TimeGrid(double t0, double t1, int n_steps) : t0_(t0), t1_(t1), n_(n_steps) {
  if (!(t1 > t0)) throw RollingError("TimeGrid: t1 must exceed t0");
  if (n_steps < 1) throw RollingError("TimeGrid: n_steps must be at least 1");
}

namespace {

MatrixXd apply(const MatrixXd& L, const MatrixXd& X, FlowSide side) {
  if (side == FlowSide::Left) {
    if (L.cols() != X.rows()) throw RollingError("flow_matrix_ode: generator/state dimension mismatch");
    return L * X;
  }
  if (X.cols() != L.rows()) throw RollingError("flow_matrix_ode: generator/state dimension mismatch");
  return X * L;
}

void check_square(const MatrixXd& L) {
  if (L.rows() != L.cols()) throw RollingError("flow_matrix_ode: generator is not square");
}

// Scale-aware J-orthogonality defect; boosts have large entries and the raw
// residual then sits at a roundoff floor far above 1e-12.
double scaled_residual(const MatrixXd& X, const SignatureForm& form) {
  const double scale = std::max(1.0, X.cwiseAbs().maxCoeff());
  return j_orthogonality_residual(X, form) / (scale * scale);
}

}  // namespace

OperatorPath flow_matrix_ode(const MatrixGenerator& generator, const MatrixXd& X0,
                             const TimeGrid& grid, FlowSide side,
                             const std::optional<SignatureForm>& reproject_form) {
  OperatorPath out{grid, {}};
  out.samples.reserve(grid.n_nodes());
  MatrixXd X = X0;
  if (reproject_form) X = reproject(X, *reproject_form);
  out.samples.push_back(X);
  const double h = grid.h();
  for (int k = 0; k < grid.n_steps(); ++k) {
    const double t = grid.t(k);
    const MatrixXd L1 = generator(t);
    const MatrixXd L2 = generator(t + 0.5 * h);
    const MatrixXd L3 = generator(t + h);
    check_square(L1);
    const MatrixXd K1 = apply(L1, X, side);
    const MatrixXd K2 = apply(L2, X + 0.5 * h * K1, side);
    const MatrixXd K3 = apply(L2, X + 0.5 * h * K2, side);
    const MatrixXd K4 = apply(L3, X + h * K3, side);
    X += (h / 6.0) * (K1 + 2.0 * K2 + 2.0 * K3 + K4);
    if (reproject_form) X = reproject(X, *reproject_form);
    out.samples.push_back(X);
  }
  return out;
}

AffineFlowPath flow_affine_ode(const MatrixGenerator& generator, FlowSide side,
                               const CoupledRate& rate, const MatrixXd& X0, const VectorXd& x0,
                               const TimeGrid& grid,
                               const std::optional<SignatureForm>& reproject_form) {
  AffineFlowPath out{grid, {}, {}};
  out.X.reserve(grid.n_nodes());
  out.x.reserve(grid.n_nodes());
  MatrixXd X = X0;
  if (reproject_form) X = reproject(X, *reproject_form);
  VectorXd x = x0;
  out.X.push_back(X);
  out.x.push_back(x);
  const double h = grid.h();
  auto dx = [&](double t, const MatrixXd& Y) {
    VectorXd v = rate(t, Y);
    if (v.size() != x.size()) throw RollingError("flow_affine_ode: rate dimension mismatch");
    return v;
  };
  for (int k = 0; k < grid.n_steps(); ++k) {
    const double t = grid.t(k);
    const MatrixXd L1 = generator(t);
    const MatrixXd L2 = generator(t + 0.5 * h);
    const MatrixXd L3 = generator(t + h);
    check_square(L1);
    const MatrixXd K1 = apply(L1, X, side);
    const VectorXd k1 = dx(t, X);
    const MatrixXd X2 = X + 0.5 * h * K1;
    const MatrixXd K2 = apply(L2, X2, side);
    const VectorXd k2 = dx(t + 0.5 * h, X2);
    const MatrixXd X3 = X + 0.5 * h * K2;
    const MatrixXd K3 = apply(L2, X3, side);
    const VectorXd k3 = dx(t + 0.5 * h, X3);
    const MatrixXd X4 = X + h * K3;
    const MatrixXd K4 = apply(L3, X4, side);
    const VectorXd k4 = dx(t + h, X4);
    X += (h / 6.0) * (K1 + 2.0 * K2 + 2.0 * K3 + K4);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (reproject_form) X = reproject(X, *reproject_form);
    out.X.push_back(X);
    out.x.push_back(x);
  }
  return out;
}

std::vector<VectorXd> integrate_vector(const VectorField& rhs, const VectorXd& x0,
                                       const TimeGrid& grid) {
  std::vector<VectorXd> out;
  out.reserve(grid.n_nodes());
  VectorXd x = x0;
  out.push_back(x);
  const double h = grid.h();
  VectorXd f0 = rhs(grid.t(0));
  for (int k = 0; k < grid.n_steps(); ++k) {
    const double t = grid.t(k);
    const VectorXd fm = rhs(t + 0.5 * h);
    const VectorXd f1 = rhs(grid.t(k + 1));
    if (f0.size() != x.size() || fm.size() != x.size() || f1.size() != x.size())
      throw RollingError("integrate_vector: rhs dimension mismatch");
    x += (h / 6.0) * (f0 + 4.0 * fm + f1);
    out.push_back(x);
    f0 = f1;
  }
  return out;
}

MatrixXd reproject(const MatrixXd& X, const SignatureForm& form, ReprojectStats* stats) {
  if (X.rows() != form.dim() || X.cols() != form.dim())
    throw RollingError("reproject: dimension mismatch");
  const auto J = form.signs().asDiagonal();
  MatrixXd Y = X;
  double res = scaled_residual(Y, form);
  int it = 0;
  while (res > 1e-12) {
    if (it == 50) throw RollingError("reprojection failed: no convergence in 50 iterations");
    Eigen::FullPivLU<MatrixXd> lu(Y);
    if (!lu.isInvertible()) throw RollingError("reprojection failed: singular matrix");
    const MatrixXd Yinv = lu.inverse();
    Y = 0.5 * (Y + MatrixXd(J * Yinv.transpose() * J));
    if (!Y.allFinite()) throw RollingError("reprojection failed: non-finite iterate");
    res = scaled_residual(Y, form);
    ++it;
  }
  if (stats) {
    stats->iterations = it;
    stats->residual = j_orthogonality_residual(Y, form);
  }
  return Y;
}

}  // namespace rolling
