#pragma once

// Rolling maps g(t) = (R(t), s(t)) in SE(V): residual checks for the rolling,
// no-slip and no-twist conditions, inversion / composition / normal
// perturbation of rolling maps, and step-and-project parallel transport for
// submanifolds of a semi-Euclidean space.

#include "rolling/integrate.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace rolling {

struct RollingMapPath {
  TimeGrid grid;
  SignatureForm form;               ///< scalar product on the ambient space V
  std::vector<RigidMotion> motions;
  std::vector<VectorXd> alpha;      ///< rolling curve on M (ambient coordinates)
  std::vector<VectorXd> alpha_hat;  ///< development on M-hat

  int dim() const { return form.dim(); }
};

/// Per-node spanning sets (as matrix columns) for a tangent or normal space.
struct TangentFramePath {
  TimeGrid grid;
  std::vector<MatrixXd> frames;

  /// Same frame at every node (e.g. an affine tangent space).
  static TangentFramePath constant(const TimeGrid& grid, const MatrixXd& frame);
};

/// Intrinsic rolling (alpha, alpha_hat, A).  Points and velocities are in
/// chart coordinates; A(t) acts on chart vectors tangent at alpha(t) and
/// returns chart vectors of T_o M.  metric_M / metric_Mhat are the metric
/// tensors in the same coordinates, frames_M spans T_{alpha(t)} M.
struct RollingTriple {
  TimeGrid grid;
  std::vector<VectorXd> alpha;
  std::vector<VectorXd> alpha_hat;
  std::vector<MatrixXd> A;
  std::vector<MatrixXd> metric_M;
  MatrixXd metric_Mhat;
  TangentFramePath frames_M;
};

struct ResidualReport {
  double rolling_point = 0.0;
  double tangency = 0.0;
  double no_slip = 0.0;
  double no_twist_tan = 0.0;
  double no_twist_norm = 0.0;
  std::vector<double> rolling_point_nodes;
  std::vector<double> tangency_nodes;
  std::vector<double> no_slip_nodes;
  std::vector<double> no_twist_tan_nodes;
  std::vector<double> no_twist_norm_nodes;

  double max_residual() const;
  bool passes(double tol) const { return max_residual() <= tol; }
  /// Names and values of the five maxima, in declaration order.
  std::vector<std::pair<std::string, double>> summary() const;
};

/// Omega_k ~ R'(t_k) R(t_k)^{-1} by fourth-order differencing, projected onto so(V).
std::vector<MatrixXd> rotation_generators(const RollingMapPath& path);

/// Conditions 1-2: |g.alpha - alpha_hat| and the sine of the largest principal
/// angle between R T_alpha M and T_alpha_hat M-hat.
ResidualReport rolling_condition_residuals(const RollingMapPath& path,
                                           const TangentFramePath& tangent_M,
                                           const TangentFramePath& tangent_Mhat);

/// |(g' g^{-1}).alpha_hat| = |R'R^{-1}(alpha_hat - s) + s'| per node.
std::vector<double> no_slip_residual(const RollingMapPath& path);

/// Tangential and normal no-twist residuals per node: the largest tangent
/// (resp. normal) component of Omega v over unit frame vectors v of the
/// tangent (resp. normal) space of M-hat.
std::pair<std::vector<double>, std::vector<double>> no_twist_residuals(
    const RollingMapPath& path, const TangentFramePath& tangent_Mhat,
    const TangentFramePath& normal_Mhat);

/// All five residuals.
ResidualReport residual_suite(const RollingMapPath& path, const TangentFramePath& tangent_M,
                              const TangentFramePath& tangent_Mhat,
                              const TangentFramePath& normal_Mhat);

/// Pointwise inverse motions, curves swapped: M-hat rolls on M.
RollingMapPath invert_rolling(const RollingMapPath& path);

/// path_01 rolls M0 on M1, path_12 rolls M1 on M2; the result rolls M0 on M2
/// with motions g12(t) g01(t).
RollingMapPath compose_rolling(const RollingMapPath& path_01, const RollingMapPath& path_12,
                               double match_tol = 1e-8);

/// Integrates R~' = (Omega + Omega0) R~ with Omega recovered from the path.
/// Omega0(t) must lie in so(V), annihilate T_{alpha_hat} M-hat and preserve
/// its normal space; this is checked at every node before integrating.
RollingMapPath perturb_normal_generator(const RollingMapPath& path,
                                        const std::function<MatrixXd(double)>& omega0,
                                        const TangentFramePath& tangent_Mhat,
                                        const TangentFramePath& normal_Mhat,
                                        double admissible_tol = 1e-8);

enum class TransportKind { Tangent, Normal };

/// Parallel transport along a sampled curve in V for the induced connection
/// on the tangent (or normal) bundle.  Each step is a trapezoidal solve of
/// v' = P'(t) v followed by projection onto the next subspace and rescaling
/// of the indefinite norm.
std::vector<VectorXd> parallel_transport_embedded(const std::vector<VectorXd>& curve,
                                                  const TangentFramePath& tangent_frames,
                                                  const VectorXd& v0, TransportKind which,
                                                  const SignatureForm& form);

/// Same for a whole frame at once; the Gram matrix of the columns is held at
/// its initial value.
std::vector<MatrixXd> parallel_transport_frame(const TangentFramePath& tangent_frames,
                                               const MatrixXd& F0, TransportKind which,
                                               const SignatureForm& form);

struct TripleReport {
  double isometry = 0.0;  ///< max |(A F)^T G_hat (A F) - F^T G F|
  double velocity = 0.0;  ///< max |A alpha' - alpha_hat'|
  bool orientation_ok = true;
};

/// Checks the defining properties of an intrinsic rolling triple.
TripleReport check_triple(const RollingTriple& triple);

/// Matrix of R(t) restricted to T_alpha M, expressed in the given frames:
/// R F_M = F_Mhat C.  Returns one C per node.
std::vector<MatrixXd> tangent_restriction(const RollingMapPath& path,
                                          const TangentFramePath& tangent_M,
                                          const TangentFramePath& tangent_Mhat);

}  // namespace rolling
