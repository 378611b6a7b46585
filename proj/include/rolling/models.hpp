#pragma once

// Concrete geometries: the Poincare disc / hyperboloid (SU(1,1)), the Riemann
// sphere (SU(2)), pseudo-orthogonal groups SO+(p,q) rolled by pairs, and
// Stiefel manifolds.  Each comes with closed-form kinematics and a
// CartanModel for the generic engine.

#include "rolling/homogeneous.hpp"

#include <complex>

namespace rolling::models {

using cd = std::complex<double>;
using Eigen::Matrix3d;
using Eigen::Vector2d;
using Eigen::Vector3d;

enum class Branch { SU11, SU2 };

/// [[a, b], [+-conj(b), conj(a)]]; |a|^2 -+ |b|^2 = 1 depending on the branch.
struct MoebiusElement {
  cd a{1.0, 0.0};
  cd b{0.0, 0.0};
  Branch branch = Branch::SU11;

  double constraint_residual() const;
  Eigen::Matrix2cd matrix() const;
  static MoebiusElement from_matrix(const Eigen::Matrix2cd& g, Branch branch);
};

/// Complex n x n matrix X + iY as the real 2n x 2n matrix [[X, -Y], [Y, X]].
MatrixXd realify(const Eigen::MatrixXcd& Z);
Eigen::MatrixXcd complexify(const MatrixXd& X);

std::vector<Eigen::Matrix2cd> su11_basis();  // A1 (isotropy), A2, A3
std::vector<Eigen::Matrix2cd> su2_basis();

// ---------------------------------------------------------------- hyperbolic

/// Disc point z = x + iy (chart (x, y)) to the upper sheet of the hyperboloid
/// in R^{1,2} with form diag(-1, 1, 1).
Vector3d embed_hyperbolic(cd z);
Vector3d embed_hyperbolic(const VectorXd& chart);
double hyperboloid_constraint(const VectorXd& x);

/// Ad_g on R^{1,2}.
Matrix3d ad_su11(const MoebiusElement& g);
/// Image of v A1 + u1 A2 + u2 A3.
Matrix3d ad_su11_algebra(double v, double u1, double u2);

struct HyperbolicLift {
  GroupPath lift;                 // realified SU(1,1) elements
  std::vector<double> theta;
  double sign = -1.0;             // theta' = sign * 2 (x y' - x' y) / (1 - |z|^2)
  double horizontality = 0.0;
};

/// Horizontal lift of a sampled disc curve, g = (1-|z|^2)^{-1/2} [[1, z], [conj z, 1]] e^{theta A1}.
HyperbolicLift hyperbolic_lift(const TimeGrid& grid, const std::vector<cd>& z, double theta0 = 0.0);

/// (u1, u2) of the kinematic matrix [[0,u1,u2],[u1,0,0],[u2,0,0]] to p-coordinates
/// in the basis (A2, A3).
Vector2d hyperboloid_control_to_p(const Vector2d& u);
Matrix3d hyperboloid_generator(const Vector2d& u);

/// R' = -U R, s' = U e1 along the control (u1, u2).  Rolls the hyperboloid on
/// its affine tangent plane at e1.
RollingMapPath roll_hyperboloid(const ControlCurve& u);

// -------------------------------------------------------------------- sphere

Vector3d embed_sphere(cd z);
Vector3d embed_sphere(const VectorXd& chart);

/// Ad_g on R^3 in the basis (A1, A2, A3) of su(2).
Matrix3d ad_su2(const MoebiusElement& g);
/// Rotation taking Ad coordinates to the coordinates of the stereographic embedding.
Matrix3d sphere_frame_change();

/// Orthonormal tangent pair at a unit base vector, with t1 x t2 = base.
std::pair<Vector3d, Vector3d> sphere_tangent_pair(const Vector3d& base);
Matrix3d sphere_generator(const Vector2d& u, const Vector3d& base);

/// R' = -U R, s' = U base with U = sum u_j (t_j base^T - base t_j^T).
RollingMapPath roll_sphere(const ControlCurve& u, const Vector3d& base = Vector3d(0.0, -1.0, 0.0));

// --------------------------------------------------------- pseudo-orthogonal

struct PseudoOrthParams {
  int p = 2;
  int q = 1;
  MatrixXd P0;  // empty means identity

  int n() const { return p + q; }
  VectorXd J_signs() const;
  MatrixXd base() const;
  void validate() const;
};

/// Basis of so(p,q): E_ij - J_ii J_jj E_ji, i < j.
std::vector<MatrixXd> so_pq_basis(const PseudoOrthParams& params);
/// Basis of J-symmetric matrices: E_ii and E_ij + J_ii J_jj E_ji.
std::vector<MatrixXd> sym_pq_basis(const PseudoOrthParams& params);
/// Form on V = gl(n) (column-major) given by tr(B^J C).
SignatureForm trace_j_form(const PseudoOrthParams& params);

/// s' = 2 U P0, R1' = -U R1, R2' = P0^{-1} U P0 R2 with U = sum u_j B_j.
/// Motions act on vec(X) as kron(R2^{-T}, R1).
RollingMapPath roll_pseudo_orthogonal(const PseudoOrthParams& params, const ControlCurve& u);

// ------------------------------------------------------------------- Stiefel

struct StiefelShape {
  int n = 3;
  int k = 1;
  void validate() const;
  MatrixXd E() const;
  int dim_V() const { return n * k; }
};

struct StiefelSubspaces {
  MatrixXd tangent;     // columns: orthonormal basis of T_E St (flattened)
  MatrixXd normal;      // T_E^perp St
  MatrixXd v_e;         // span{E}
  MatrixXd sl_kk;       // traceless symmetric part of the normal space
  MatrixXd h_basis;     // h as flattened n x n matrices
  MatrixXd p_basis;
  MatrixXd Pi;          // orthogonal projector onto T_E St
  MatrixXd Pi_perp;
};

StiefelSubspaces stiefel_subspaces(const StiefelShape& shape);

/// Orthonormal bases of T_P St and its complement at an arbitrary point.
MatrixXd stiefel_tangent_frame(const MatrixXd& P);
MatrixXd stiefel_normal_frame(const MatrixXd& P);

/// Omega = -(Pi rho_U Pi + Pi_perp rho_U Pi_perp) for U = Q^{-1} Q' in p.
MatrixXd stiefel_omega(const StiefelShape& shape, const MatrixXd& qdot, double tol = 1e-10);

struct StiefelRolling {
  RollingMapPath path;
  GroupPath lift;
  std::vector<MatrixXd> S;  // S(t) on V
};

/// Horizontal lift, S from Omega, R = S^{-1} rho_{Q^{-1}}, s' = S^{-1}(U E).
StiefelRolling roll_stiefel(const StiefelShape& shape, const CurveInput& input);

// -------------------------------------------------------------- Cartan models

CartanModel make_hyperbolic_model();
CartanModel make_sphere_model();
CartanModel make_pseudo_orthogonal_model(const PseudoOrthParams& params);
CartanModel make_stiefel_model(const StiefelShape& shape);

/// Builtin embedding ids: hyperboloid12, riemann_sphere, pseudo_orth, stiefel.
std::shared_ptr<const Geometry> make_geometry(const std::string& embedding_id,
                                              const std::map<std::string, std::vector<double>>& params);

/// Names of the bundled models, in listing order.
std::vector<std::string> builtin_model_names();
/// Throws RollingError("unknown model: <name>").
CartanModel builtin_model(const std::string& name);

}  // namespace rolling::models
