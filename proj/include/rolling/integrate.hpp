#pragma once

// Fixed-step integration on uniform grids: matrix flows with optional
// J-orthogonal reprojection, vector quadrature, and the node-based finite
// differencing / interpolation used to recover velocities from samples.

#include "rolling/linalg_semi.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

namespace rolling {

/// Uniform grid on [t0, t1] with n_steps intervals.
class TimeGrid {
 public:
  TimeGrid() : TimeGrid(0.0, 1.0, 1) {}
  TimeGrid(double t0, double t1, int n_steps);

  double t0() const { return t0_; }
  double t1() const { return t1_; }
  int n_steps() const { return n_; }
  int n_nodes() const { return n_ + 1; }
  double h() const { return (t1_ - t0_) / n_; }
  double t(int k) const { return t0_ + k * h(); }

  bool operator==(const TimeGrid& o) const {
    return t0_ == o.t0_ && t1_ == o.t1_ && n_ == o.n_;
  }

 private:
  double t0_;
  double t1_;
  int n_;
};

struct OperatorPath {
  TimeGrid grid;
  std::vector<MatrixXd> samples;
};

enum class FlowSide { Left, Right };

using MatrixGenerator = std::function<MatrixXd(double)>;
using VectorField = std::function<VectorXd(double)>;

/// Classical RK4 for X' = L(t) X (Left) or X' = X L(t) (Right).  With a form,
/// every step ends with reproject().
OperatorPath flow_matrix_ode(const MatrixGenerator& generator, const MatrixXd& X0,
                             const TimeGrid& grid, FlowSide side,
                             const std::optional<SignatureForm>& reproject_form = std::nullopt);

/// x' = rhs(t): Simpson weights per step, exact for cubic rhs.
std::vector<VectorXd> integrate_vector(const VectorField& rhs, const VectorXd& x0,
                                       const TimeGrid& grid);

/// Coupled affine flow: X' = L(t) X (or X L(t)) together with x' = f(t, X).
/// Used for kinematic systems (R, s) whose translation rate depends on the
/// rotational state.
struct AffineFlowPath {
  TimeGrid grid;
  std::vector<MatrixXd> X;
  std::vector<VectorXd> x;
};

using CoupledRate = std::function<VectorXd(double, const MatrixXd&)>;

AffineFlowPath flow_affine_ode(const MatrixGenerator& generator, FlowSide side,
                               const CoupledRate& rate, const MatrixXd& X0, const VectorXd& x0,
                               const TimeGrid& grid,
                               const std::optional<SignatureForm>& reproject_form = std::nullopt);

struct ReprojectStats {
  int iterations = 0;
  double residual = 0.0;
};

/// Iterates X <- (X + J^{-1} X^{-T} J)/2 to residual <= 1e-12 (at most 50
/// sweeps).  Throws "reprojection failed" on a singular iterate or when the
/// residual does not converge.
MatrixXd reproject(const MatrixXd& X, const SignatureForm& form, ReprojectStats* stats = nullptr);

// ---------------------------------------------------------------------------
// Node-based helpers.  All accept Eigen dense types (VectorXd / MatrixXd).

namespace detail {
// Weights sum to zero, so differences against the first node are used:
// constant samples then differentiate to exactly zero.
template <class T>
T combo(const std::vector<T>& f, std::initializer_list<std::pair<int, double>> terms) {
  const T& ref = f[terms.begin()->first];
  auto it = terms.begin() + 1;
  T out = (f[it->first] - ref) * it->second;
  for (++it; it != terms.end(); ++it) out += (f[it->first] - ref) * it->second;
  return out;
}
}  // namespace detail

/// Derivative at every node.  Five-point stencils (fourth order, one-sided
/// at the ends) when n_steps >= 4, three-point stencils otherwise.
template <class T>
std::vector<T> differentiate_nodes(const TimeGrid& grid, const std::vector<T>& f) {
  const int n = grid.n_steps();
  if (static_cast<int>(f.size()) != n + 1) throw RollingError("differentiate_nodes: sample count != n_steps + 1");
  if (n < 2) throw RollingError("differentiate_nodes: grid too short (n_steps < 2)");
  const double h = grid.h();
  std::vector<T> d(f.size());
  using detail::combo;
  if (n >= 4) {
    const double c = 1.0 / (12.0 * h);
    d[0] = combo(f, {{0, -25 * c}, {1, 48 * c}, {2, -36 * c}, {3, 16 * c}, {4, -3 * c}});
    d[1] = combo(f, {{0, -3 * c}, {1, -10 * c}, {2, 18 * c}, {3, -6 * c}, {4, 1 * c}});
    for (int k = 2; k <= n - 2; ++k)
      d[k] = combo(f, {{k - 2, 1 * c}, {k - 1, -8 * c}, {k + 1, 8 * c}, {k + 2, -1 * c}});
    d[n - 1] = combo(f, {{n, 3 * c}, {n - 1, 10 * c}, {n - 2, -18 * c}, {n - 3, 6 * c}, {n - 4, -1 * c}});
    d[n] = combo(f, {{n, 25 * c}, {n - 1, -48 * c}, {n - 2, 36 * c}, {n - 3, -16 * c}, {n - 4, 3 * c}});
  } else {
    const double c = 1.0 / (2.0 * h);
    d[0] = combo(f, {{0, -3 * c}, {1, 4 * c}, {2, -1 * c}});
    for (int k = 1; k < n; ++k) d[k] = combo(f, {{k - 1, -c}, {k + 1, c}});
    d[n] = combo(f, {{n, 3 * c}, {n - 1, -4 * c}, {n - 2, 1 * c}});
  }
  return d;
}

/// Piecewise-cubic Lagrange interpolation of node samples (four nearest
/// nodes, clamped at the ends).
template <class T>
T interpolate_nodes(const TimeGrid& grid, const std::vector<T>& f, double t) {
  const int n = grid.n_steps();
  if (static_cast<int>(f.size()) != n + 1) throw RollingError("interpolate_nodes: sample count != n_steps + 1");
  const double x = (t - grid.t0()) / grid.h();
  const int order = std::min(3, n);
  int start = static_cast<int>(std::floor(x)) - (order - 1) / 2;
  start = std::clamp(start, 0, n - order);
  T out = f[start] * 0.0;
  for (int i = 0; i <= order; ++i) {
    double w = 1.0;
    for (int j = 0; j <= order; ++j)
      if (j != i) w *= (x - (start + j)) / static_cast<double>(i - j);
    out += f[start + i] * w;
  }
  return out;
}

}  // namespace rolling
