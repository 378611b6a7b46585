#include "rolling/integrate.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

using namespace rolling;
using oracle::max_abs;

TEST_CASE("time grid") {
  const TimeGrid g(0.0, 2.0, 8);
  CHECK(g.h() == 0.25);
  CHECK(g.n_nodes() == 9);
  CHECK(g.t(8) == 2.0);
  CHECK_THROWS_AS(TimeGrid(1.0, 1.0, 4), RollingError);
  CHECK_THROWS_AS(TimeGrid(0.0, 1.0, 0), RollingError);
}

TEST_CASE("flow_matrix_ode examples") {
  const TimeGrid grid(0.0, 1.0, 1000);
  const MatrixXd I = MatrixXd::Identity(3, 3);
  auto zero = flow_matrix_ode([](double) { return MatrixXd::Zero(3, 3); }, I, grid, FlowSide::Left);
  CHECK(zero.samples.size() == 1001);
  CHECK(max_abs(zero.samples.back() - I) == 0.0);

  oracle::Gen g(1);
  const MatrixXd L = g.mat(3, 3);
  for (FlowSide side : {FlowSide::Left, FlowSide::Right}) {
    auto path = flow_matrix_ode([&](double) { return L; }, I, grid, side);
    for (int k : {0, 250, 1000}) CHECK(max_abs(path.samples[k] - oracle::expm_taylor(grid.t(k) * L)) <= 1e-8);
  }

  // skew generator with reprojection stays orthogonal
  const SignatureForm e3 = SignatureForm::euclidean(3);
  auto skew = [&](double t) {
    MatrixXd W(3, 3);
    W << 0, -std::cos(t), 0.3 * t, std::cos(t), 0, -1, -0.3 * t, 1, 0;
    return W;
  };
  auto rot = flow_matrix_ode(skew, I, TimeGrid(0.0, 3.0, 300), FlowSide::Left, e3);
  double worst = 0.0;
  for (const auto& R : rot.samples) worst = std::max(worst, j_orthogonality_residual(R, e3));
  CHECK(worst <= 1e-12);

  CHECK_THROWS_AS(flow_matrix_ode([](double) { return MatrixXd::Zero(2, 2); }, I, grid, FlowSide::Left),
                  RollingError);
}

TEST_CASE("flow order against the exponential oracle") {
  oracle::Gen g(77);
  const MatrixXd L = g.mat(4, 4);
  const MatrixXd exact = oracle::expm_taylor(L);
  double prev = 0.0;
  for (int n : {20, 40, 80}) {
    const auto path = flow_matrix_ode([&](double) { return L; }, MatrixXd::Identity(4, 4), TimeGrid(0, 1, n),
                                      FlowSide::Left);
    const double err = max_abs(path.samples.back() - exact);
    if (prev > 0.0) CHECK(prev / err >= 12.0);
    prev = err;
  }
}

TEST_CASE("integrate_vector") {
  const TimeGrid grid(0.0, 2.0, 64);
  const VectorXd w = Eigen::Vector2d(1.5, -2.0);
  auto lin = integrate_vector([&](double) { return w; }, VectorXd::Zero(2), grid);
  for (int k = 0; k < grid.n_nodes(); ++k) CHECK(max_abs(lin[k] - grid.t(k) * w) <= 1e-14);

  auto cub = integrate_vector([](double t) { return VectorXd::Constant(1, 3 * t * t * t - t); }, VectorXd::Zero(1),
                              grid);
  CHECK(cub.back()[0] == doctest::Approx(0.75 * 16 - 2.0).epsilon(1e-13));

  auto trig = integrate_vector([](double t) { return Eigen::Vector2d(std::cos(t), 0).eval(); }, VectorXd::Zero(2),
                               grid);
  for (int k = 0; k < grid.n_nodes(); ++k) CHECK(std::abs(trig[k][0] - std::sin(grid.t(k))) <= 1e-8);

  const VectorXd x0 = Eigen::Vector3d(1, 2, 3);
  auto still = integrate_vector([](double) { return VectorXd::Zero(3); }, x0, grid);
  CHECK(max_abs(still.back() - x0) == 0.0);
}

TEST_CASE("reproject") {
  const SignatureForm e4 = SignatureForm::euclidean(4);
  oracle::Gen g(8);
  const MatrixXd Q = g.j_orthogonal(VectorXd::Ones(4));
  CHECK(max_abs(reproject(Q, e4) - Q) <= 1e-13);

  for (int trial = 0; trial < 20; ++trial) {
    const MatrixXd X = MatrixXd::Identity(4, 4) + 1e-4 * g.mat(4, 4);
    ReprojectStats st;
    const MatrixXd Y = reproject(X, e4, &st);
    CHECK(st.residual <= 1e-12);
    CHECK(st.iterations <= 6);
    CHECK(max_abs(reproject(Y, e4) - Y) <= 1e-13);
  }

  const SignatureForm mixed(Eigen::Vector4d(1, -1, 1, -1));
  const MatrixXd B = g.j_orthogonal(mixed.signs()) + 1e-5 * g.mat(4, 4);
  CHECK(j_orthogonality_residual(reproject(B, mixed), mixed) <= 1e-12);

  CHECK_THROWS_WITH_AS(reproject(MatrixXd::Zero(4, 4), e4), doctest::Contains("reprojection failed"), RollingError);
}

TEST_CASE("affine flow couples rotation and translation") {
  // R' = -W R, x' = W e1 with W constant: x(t) = t W e1, R = exp(-tW)
  MatrixXd W(3, 3);
  W << 0, -1, 0.5, 1, 0, -0.2, -0.5, 0.2, 0;
  const Eigen::Vector3d e1(1, 0, 0);
  const TimeGrid grid(0, 1, 200);
  auto f = flow_affine_ode([&](double) { return MatrixXd(-W); }, FlowSide::Left,
                           [&](double, const MatrixXd&) { return VectorXd(W * e1); }, MatrixXd::Identity(3, 3),
                           VectorXd::Zero(3), grid, SignatureForm::euclidean(3));
  CHECK(max_abs(f.X.back() - oracle::expm_taylor(-W)) <= 1e-10);
  CHECK(max_abs(f.x.back() - W * e1) <= 1e-12);
}

TEST_CASE("node differencing and interpolation") {
  const TimeGrid grid(0.0, 1.0, 50);
  std::vector<double> f, df;
  for (int k = 0; k < grid.n_nodes(); ++k) {
    f.push_back(std::sin(2 * grid.t(k)));
    df.push_back(2 * std::cos(2 * grid.t(k)));
  }
  const auto d = differentiate_nodes(grid, f);
  for (int k = 0; k < grid.n_nodes(); ++k) CHECK(std::abs(d[k] - df[k]) <= 2e-6);
  std::vector<double> c(grid.n_nodes(), 0.37);
  for (double v : differentiate_nodes(grid, c)) CHECK(v == 0.0);

  CHECK(std::abs(interpolate_nodes(grid, f, 0.333) - std::sin(0.666)) <= 1e-7);
  CHECK(interpolate_nodes(grid, f, grid.t(7)) == doctest::Approx(f[7]).epsilon(1e-14));
  CHECK_THROWS_AS(differentiate_nodes(TimeGrid(0, 1, 1), std::vector<double>{0.0, 1.0}), RollingError);
}
