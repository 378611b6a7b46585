#include "rolling/linalg_semi.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <limits>

namespace rolling {

namespace {

void require_dim(long got, long want, const char* what) {
  if (got != want) {
    throw RollingError(std::string("dimension mismatch in ") + what + ": got " +
                       std::to_string(got) + ", expected " + std::to_string(want));
  }
}

double block_det(const MatrixXd& R, const std::vector<int>& idx) {
  if (idx.empty()) return 1.0;
  MatrixXd B(idx.size(), idx.size());
  for (size_t i = 0; i < idx.size(); ++i)
    for (size_t j = 0; j < idx.size(); ++j) B(i, j) = R(idx[i], idx[j]);
  return B.determinant();
}

}  // namespace

SignatureForm::SignatureForm(VectorXd signs) : signs_(std::move(signs)) {
  if (signs_.size() == 0) throw RollingError("SignatureForm: empty sign vector");
  p_ = 0;
  for (Eigen::Index k = 0; k < signs_.size(); ++k) {
    if (signs_[k] == 1.0) {
      ++p_;
    } else if (signs_[k] != -1.0) {
      throw RollingError("SignatureForm: signs must be +1 or -1");
    }
  }
}

SignatureForm SignatureForm::euclidean(int dim) { return SignatureForm(VectorXd::Ones(dim)); }

SignatureForm SignatureForm::split(int p, int q) {
  VectorXd s(p + q);
  s.head(p).setOnes();
  s.tail(q).setConstant(-1.0);
  return SignatureForm(s);
}

double SignatureForm::ip(const VectorXd& x, const VectorXd& y) const {
  require_dim(x.size(), dim(), "indefinite_ip");
  require_dim(y.size(), dim(), "indefinite_ip");
  return (signs_.array() * x.array() * y.array()).sum();
}

MatrixXd SignatureForm::gram(const MatrixXd& frame) const {
  require_dim(frame.rows(), dim(), "gram");
  return frame.transpose() * signs_.asDiagonal() * frame;
}

double indefinite_ip(const SignatureForm& form, const VectorXd& x, const VectorXd& y) {
  return form.ip(x, y);
}

RigidMotion RigidMotion::identity(int dim) {
  return {MatrixXd::Identity(dim, dim), VectorXd::Zero(dim)};
}

VectorXd se_act(const RigidMotion& g, const VectorXd& v) {
  require_dim(g.R.rows(), g.s.size(), "se_act");
  require_dim(g.R.cols(), v.size(), "se_act");
  return g.R * v + g.s;
}

RigidMotion se_compose(const RigidMotion& g2, const RigidMotion& g1) {
  require_dim(g1.s.size(), g2.s.size(), "se_compose");
  require_dim(g2.R.cols(), g1.R.rows(), "se_compose");
  return {g2.R * g1.R, g2.s + g2.R * g1.s};
}

RigidMotion se_inverse(const RigidMotion& g) {
  require_dim(g.R.rows(), g.s.size(), "se_inverse");
  MatrixXd Rinv = checked_inverse(g.R, "se_inverse");
  VectorXd s = -(Rinv * g.s);
  return {std::move(Rinv), std::move(s)};
}

double j_orthogonality_residual(const MatrixXd& X, const SignatureForm& form) {
  require_dim(X.rows(), form.dim(), "j_orthogonality_residual");
  require_dim(X.cols(), form.dim(), "j_orthogonality_residual");
  const MatrixXd J = form.J();
  return (X.transpose() * J * X - J).cwiseAbs().maxCoeff();
}

IsometryCheck is_oriented_isometry(const MatrixXd& R, const SignatureForm& form, double tol) {
  IsometryCheck out;
  if (R.rows() != form.dim() || R.cols() != form.dim()) {
    out.residual = std::numeric_limits<double>::infinity();
    return out;
  }
  out.residual = j_orthogonality_residual(R, form);
  std::vector<int> pos, neg;
  for (int k = 0; k < form.dim(); ++k) (form.signs()[k] > 0 ? pos : neg).push_back(k);
  out.det_positive = block_det(R, pos);
  out.det_negative = block_det(R, neg);
  out.ok = out.residual <= tol && out.det_positive > 0.0 && out.det_negative > 0.0;
  return out;
}

MatrixXd j_skew_part(const MatrixXd& W, const SignatureForm& form) {
  require_dim(W.rows(), form.dim(), "j_skew_part");
  const auto J = form.signs().asDiagonal();
  return 0.5 * (W - J * W.transpose() * J);
}

MatrixXd j_projector(const MatrixXd& frame, const SignatureForm& form) {
  require_dim(frame.rows(), form.dim(), "j_projector");
  if (frame.cols() == 0) return MatrixXd::Zero(form.dim(), form.dim());
  Eigen::JacobiSVD<MatrixXd> svd(frame);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (!(smin > 0.0) || smax / smin > 1e6) {
    throw RollingError("degenerate frame: rank deficient or condition number above 1e6");
  }
  const MatrixXd G = form.gram(frame);
  Eigen::JacobiSVD<MatrixXd> gsvd(G);
  const auto& gs = gsvd.singularValues();
  if (!(gs(gs.size() - 1) > 1e-12 * gs(0))) {
    throw RollingError("degenerate frame: subspace is null for the scalar product");
  }
  return frame * G.inverse() * frame.transpose() * form.J();
}

MatrixXd checked_inverse(const MatrixXd& M, const char* what) {
  if (M.rows() != M.cols()) throw RollingError(std::string(what) + ": matrix is not square");
  Eigen::FullPivLU<MatrixXd> lu(M);
  if (!lu.isInvertible()) throw RollingError(std::string(what) + ": singular matrix");
  return lu.inverse();
}

MatrixXd expm(const MatrixXd& X) {
  if (X.rows() != X.cols()) throw RollingError("expm: matrix is not square");
  return X.exp();
}

VectorXd flatten(const MatrixXd& M) {
  return Eigen::Map<const VectorXd>(M.data(), M.size());
}

MatrixXd unflatten(const VectorXd& v, int rows, int cols) {
  require_dim(v.size(), static_cast<long>(rows) * cols, "unflatten");
  return Eigen::Map<const MatrixXd>(v.data(), rows, cols);
}

}  // namespace rolling
