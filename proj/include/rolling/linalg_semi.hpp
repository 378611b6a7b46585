#pragma once

// Indefinite scalar products, J-orthogonal isometries and the group SE(V)
// of semi-Euclidean motions.

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace rolling {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Thrown for any shape or domain violation in the rolling library.
class RollingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A diagonal, non-degenerate scalar product  <x,y> = sum_k signs[k] x_k y_k.
class SignatureForm {
 public:
  SignatureForm() = default;
  explicit SignatureForm(VectorXd signs);

  static SignatureForm euclidean(int dim);
  /// First p entries +1, remaining q entries -1.
  static SignatureForm split(int p, int q);

  int dim() const { return static_cast<int>(signs_.size()); }
  int p() const { return p_; }
  int q() const { return dim() - p_; }
  const VectorXd& signs() const { return signs_; }
  MatrixXd J() const { return signs_.asDiagonal(); }
  bool is_euclidean() const { return p_ == dim(); }

  double ip(const VectorXd& x, const VectorXd& y) const;
  double norm2(const VectorXd& x) const { return ip(x, x); }

  /// Gram matrix F^T J F of the columns of F.
  MatrixXd gram(const MatrixXd& frame) const;

  bool operator==(const SignatureForm& other) const { return signs_ == other.signs_; }

 private:
  VectorXd signs_;
  int p_ = 0;
};

/// Free-function form of the scalar product; throws on dimension mismatch.
double indefinite_ip(const SignatureForm& form, const VectorXd& x, const VectorXd& y);

/// g = (R, s), acting by v -> R v + s.
struct RigidMotion {
  MatrixXd R;
  VectorXd s;

  static RigidMotion identity(int dim);
  int dim() const { return static_cast<int>(s.size()); }
};

VectorXd se_act(const RigidMotion& g, const VectorXd& v);
/// (R2,s2)(R1,s1) = (R2 R1, s2 + R2 s1): g1 acts first.
RigidMotion se_compose(const RigidMotion& g2, const RigidMotion& g1);
RigidMotion se_inverse(const RigidMotion& g);

struct IsometryCheck {
  bool ok = false;
  double residual = 0.0;       ///< max-abs entry of R^T J R - J
  double det_positive = 1.0;   ///< det of the +1 diagonal block
  double det_negative = 1.0;   ///< det of the -1 diagonal block
};

inline constexpr double kIsometryTol = 1e-9;

/// Membership in the identity component of O(V): J-orthogonality plus
/// positive determinants on both sign blocks.
IsometryCheck is_oriented_isometry(const MatrixXd& R, const SignatureForm& form,
                                   double tol = kIsometryTol);

/// ||X^T J X - J||_max.
double j_orthogonality_residual(const MatrixXd& X, const SignatureForm& form);

/// Projects a generator onto so(V):  (W - J W^T J) / 2.
MatrixXd j_skew_part(const MatrixXd& W, const SignatureForm& form);

/// J-orthogonal projector onto span(frame), F (F^T J F)^{-1} F^T J.
/// Throws when the frame is rank deficient, ill-conditioned (> 1e6) or spans
/// a degenerate subspace.
MatrixXd j_projector(const MatrixXd& frame, const SignatureForm& form);

/// Inverse through a pivoted LU; throws on a singular matrix.
MatrixXd checked_inverse(const MatrixXd& M, const char* what = "matrix");

/// Matrix exponential (Pade scaling and squaring, Eigen unsupported module).
MatrixXd expm(const MatrixXd& X);

/// Column-major flattening helpers.
VectorXd flatten(const MatrixXd& M);
MatrixXd unflatten(const VectorXd& v, int rows, int cols);

/// The commutator XY - YX.
inline MatrixXd bracket(const MatrixXd& X, const MatrixXd& Y) { return X * Y - Y * X; }

}  // namespace rolling
