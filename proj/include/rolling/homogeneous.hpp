#pragma once

// Homogeneous spaces M = G/H with a reductive split g = h + p: horizontal
// lifts, intrinsic development and the isometry chain, homogeneous parallel
// transport, and extrinsic rolling maps built from an equivariant embedding.

#include "rolling/rolling_core.hpp"

#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace rolling {

/// Concrete realization of a homogeneous space: how the matrix group acts on
/// chart coordinates of M, how it is represented on the ambient space V, and
/// the equivariant embedding of M into V.
class Geometry {
 public:
  virtual ~Geometry() = default;

  virtual std::string id() const = 0;
  virtual int group_size() const = 0;     ///< size of the square matrices realizing G
  virtual int chart_dim() const = 0;      ///< number of chart coordinates
  virtual int manifold_dim() const = 0;
  virtual VectorXd base_point() const = 0;

  /// tau_q(m).
  virtual VectorXd act(const MatrixXd& q, const VectorXd& m) const = 0;
  /// d_m tau_q on chart vectors.
  virtual MatrixXd act_jacobian(const MatrixXd& q, const VectorXd& m) const = 0;
  /// d/de tau_{exp(eX)}(m) at e = 0.
  virtual VectorXd infinitesimal_action(const MatrixXd& X, const VectorXd& m) const = 0;
  /// Metric tensor of M in chart coordinates.
  virtual MatrixXd chart_metric(const VectorXd& m) const = 0;
  /// Columns spanning T_m M in chart coordinates.
  virtual MatrixXd chart_tangent_frame(const VectorXd& m) const = 0;

  virtual SignatureForm ambient_form() const = 0;
  virtual MatrixXd represent(const MatrixXd& q) const = 0;
  virtual MatrixXd represent_algebra(const MatrixXd& X) const = 0;
  virtual VectorXd embed(const VectorXd& m) const = 0;
  virtual MatrixXd embed_jacobian(const VectorXd& m) const = 0;
  /// Tangent / normal frames of the embedded manifold at an ambient point on it.
  virtual MatrixXd ambient_tangent_frame(const VectorXd& x) const = 0;
  virtual MatrixXd ambient_normal_frame(const VectorXd& x) const = 0;

  /// Scalar product preserved by the matrix realization of G, if any; used
  /// to reproject integrated group elements.
  virtual std::optional<SignatureForm> group_form() const { return std::nullopt; }
  /// True when R = rho(q)^{-1} on the whole of V already satisfies the
  /// normal no-twist condition.
  virtual bool closed_form_normal() const = 0;
};

struct CartanModel {
  std::string name;
  std::vector<MatrixXd> basis;
  std::vector<int> h_indices;
  std::vector<int> p_indices;
  MatrixXd ip_p;
  bool symmetric = true;
  std::shared_ptr<const Geometry> geometry;
  std::map<std::string, std::vector<double>> params;

  int algebra_dim() const { return static_cast<int>(basis.size()); }
  int p_dim() const { return static_cast<int>(p_indices.size()); }
  int group_size() const { return geometry->group_size(); }

  VectorXd base_point() const { return geometry->base_point(); }
  VectorXd embedded_base_point() const { return geometry->embed(geometry->base_point()); }
  /// Matrix of d_e pi restricted to p, from p-coordinates to chart vectors at o.
  MatrixXd d_e_pi() const;
  /// sum_j u_j A_{p_j}.
  MatrixXd p_element(const VectorXd& u) const;
  MatrixXd algebra_element(const VectorXd& c) const;
  /// Coordinates of X in the full basis (least squares).
  VectorXd algebra_coordinates(const MatrixXd& X) const;
  /// Default p scalar product: pullback of the chart metric at o through d_e pi.
  void set_default_ip_p();
};

struct CartanCheck {
  double bracket_hh = 0.0;  ///< largest p-component of [h,h]
  double bracket_hp = 0.0;  ///< largest h-component of [h,p]
  double bracket_pp = 0.0;  ///< largest p-component of [p,p]
  double closure = 0.0;     ///< largest bracket component outside span(basis)
  double orthogonality = 0.0;
  double d_e_pi_condition = 0.0;
  double equivariance = 0.0;
  bool ok = false;
  std::vector<std::string> warnings;
};

/// Structural checks on a model: bracket relations, h orthogonal to p under
/// the trace form, invertibility of d_e pi, and equivariance of the embedding
/// on random samples.
CartanCheck validate_model(const CartanModel& model, int samples = 100, std::uint64_t seed = 7,
                           double tol = 1e-9);

/// A random group element exp(sum c_i A_i), c_i ~ N(0, scale^2).
MatrixXd random_group_element(const CartanModel& model, std::mt19937_64& rng, double scale = 0.5);

/// Curve in p-coordinates.  `u` is defined on the whole interval; `coords`
/// holds its node values.
struct ControlCurve {
  TimeGrid grid;
  std::function<VectorXd(double)> u;
  std::vector<VectorXd> coords;

  static ControlCurve from_function(const TimeGrid& grid, std::function<VectorXd(double)> f);
  /// Node values, interpolated piecewise-cubically between nodes.
  static ControlCurve from_samples(const TimeGrid& grid, std::vector<VectorXd> coords);
  int dim() const { return coords.empty() ? 0 : static_cast<int>(coords.front().size()); }
};

/// Curve on M given by chart coordinates at the grid nodes.
struct SampledCurve {
  TimeGrid grid;
  std::vector<VectorXd> points;
};

using CurveInput = std::variant<ControlCurve, SampledCurve>;

struct GroupPath {
  TimeGrid grid;
  std::vector<MatrixXd> samples;
  std::vector<VectorXd> controls;  ///< p-coordinates of q^{-1} q' at the nodes
};

struct LiftOptions {
  double residual_tol = 1e-8;  ///< relative least-squares residual for sampled curves
};

GroupPath horizontal_lift(const CartanModel& model, const CurveInput& input,
                          const MatrixXd& q0, const LiftOptions& opts = {});
GroupPath horizontal_lift(const CartanModel& model, const CurveInput& input);

/// Largest h-component of q^{-1} q' (differenced) along the lift.
double horizontality_residual(const CartanModel& model, const GroupPath& lift);

/// Chart points pi(q(t_k)) = tau_{q(t_k)}(o).
std::vector<VectorXd> project_path(const CartanModel& model, const GroupPath& lift);

/// alpha_hat(t) = int_0^t d_e pi(U), in chart coordinates of T_o M.
std::vector<VectorXd> develop_intrinsic(const CartanModel& model, const ControlCurve& control);

/// A(t_k) = (d_o tau_{q(t_k)})^{-1} as an operator on chart vectors tangent at
/// alpha(t_k).
std::vector<MatrixXd> isometry_chain_A(const CartanModel& model, const GroupPath& lift);

struct IntrinsicRolling {
  RollingTriple triple;
  GroupPath lift;
};

IntrinsicRolling intrinsic_roll(const CartanModel& model, const CurveInput& input);

/// Ambient samples of Y(t) = d pi(dL_q sum_j y_j A_{p_j}).
std::vector<VectorXd> transport_homogeneous(const CartanModel& model, const GroupPath& lift,
                                            const VectorXd& y0);

/// s_bar(t) = int_0^t rho(q)^{-1} alpha_bar'; the development is o_bar + s_bar.
std::vector<VectorXd> extrinsic_develop(const CartanModel& model, const GroupPath& lift,
                                        const std::vector<VectorXd>& emb_curve);

enum class NormalStrategy { ClosedForm, FrameMatching };

struct ExtrinsicRolling {
  RollingMapPath path;
  TangentFramePath tangent_M;
  TangentFramePath tangent_Mhat;
  TangentFramePath normal_Mhat;
  GroupPath lift;
};

ExtrinsicRolling extrinsic_roll(const CartanModel& model, const CurveInput& input,
                                NormalStrategy strategy);
/// Closed form where the model admits it, frame matching otherwise.
ExtrinsicRolling extrinsic_roll(const CartanModel& model, const CurveInput& input);

/// Full operators R(t) = R_T(t) on tangents plus the map sending the normal
/// frame along the curve to the normal frame along the development.
std::vector<MatrixXd> normal_extension_by_frames(const std::vector<MatrixXd>& tangential,
                                                 const TangentFramePath& normal_along,
                                                 const TangentFramePath& normal_development,
                                                 const SignatureForm& form, double tol = 1e-8);

/// Frames for the residual suite of a rolling of the model's embedded
/// manifold on its affine tangent space at o_bar.
struct ExtrinsicFrames {
  TangentFramePath tangent_M;
  TangentFramePath tangent_Mhat;
  TangentFramePath normal_Mhat;
};
ExtrinsicFrames extrinsic_frames(const CartanModel& model, const RollingMapPath& path);

/// max_k |d iota(o) A(t_k) F - R(t_k) d iota(alpha(t_k)) F| over tangent
/// frames F of the triple: the extrinsic map restricted to tangents against
/// the intrinsic isometry.
double intrinsic_extrinsic_mismatch(const CartanModel& model, const RollingTriple& triple,
                                    const RollingMapPath& path);

}  // namespace rolling
