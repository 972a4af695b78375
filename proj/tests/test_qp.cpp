#include <catch_amalgamated.hpp>

#include "chp/qp.hpp"
#include "support/admm_oracle.hpp"

using namespace chp;

namespace {

QpProblem dense_qp(const Eigen::MatrixXd& P, const Eigen::VectorXd& q,
                   const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                   const Eigen::MatrixXd& G, const Eigen::VectorXd& h) {
  QpProblem prob;
  prob.P = P.sparseView();
  prob.q = q;
  prob.A = A.sparseView();
  prob.b = b;
  prob.G = G.sparseView();
  prob.h = h;
  return prob;
}

}  // namespace

TEST_CASE("bound-constrained quadratic with equality") {
  // min .1(x0^2+x1^2) + 10 x0 + 50 x1  s.t. x0+x1 = 30, x <= 25
  Eigen::MatrixXd P = 0.2 * Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd q(2);
  q << 10, 50;
  Eigen::MatrixXd A(1, 2);
  A << 1, 1;
  Eigen::VectorXd b(1);
  b << 30;
  Eigen::MatrixXd G = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd h = Eigen::VectorXd::Constant(2, 25.0);
  QpSolution sol = solve_qp(dense_qp(P, q, A, b, G, h));
  REQUIRE(sol.status == QpStatus::Optimal);
  CHECK(sol.x[0] == Catch::Approx(25.0).margin(1e-8));
  CHECK(sol.x[1] == Catch::Approx(5.0).margin(1e-8));
  CHECK(sol.y[0] == Catch::Approx(-51.0).margin(1e-7));
  CHECK(sol.z[0] == Catch::Approx(36.0).margin(1e-7));
  CHECK(sol.objective == Catch::Approx(565.0));
  CHECK(sol.residuals.worst() < 1e-8);
}

TEST_CASE("equality-only problem takes the direct path") {
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(2);
  Eigen::MatrixXd A(1, 2);
  A << 1, -1;
  Eigen::VectorXd b(1);
  b << 4;
  QpSolution sol = solve_qp(dense_qp(P, q, A, b, Eigen::MatrixXd(0, 2), Eigen::VectorXd(0)));
  REQUIRE(sol.status == QpStatus::Optimal);
  CHECK(sol.x[0] == Catch::Approx(2.0));
  CHECK(sol.x[1] == Catch::Approx(-2.0));
}

TEST_CASE("pure linear program") {
  // min -x0 - 2 x1 s.t. x0 + x1 <= 4, x >= 0
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(2, 2);
  Eigen::VectorXd q(2);
  q << -1, -2;
  Eigen::MatrixXd G(3, 2);
  G << 1, 1, -1, 0, 0, -1;
  Eigen::VectorXd h(3);
  h << 4, 0, 0;
  QpSolution sol =
      solve_qp(dense_qp(P, q, Eigen::MatrixXd(0, 2), Eigen::VectorXd(0), G, h));
  REQUIRE(sol.status == QpStatus::Optimal);
  CHECK(sol.x[0] == Catch::Approx(0.0).margin(1e-7));
  CHECK(sol.x[1] == Catch::Approx(4.0).margin(1e-7));
  CHECK(sol.objective == Catch::Approx(-8.0).margin(1e-7));
}

TEST_CASE("contradictory bounds are reported infeasible with the offending rows") {
  // x <= 0 and x >= 1
  Eigen::MatrixXd G(2, 1);
  G << 1, -1;
  Eigen::VectorXd h(2);
  h << 0, -1;
  QpProblem prob = dense_qp(Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1),
                            Eigen::MatrixXd(0, 1), Eigen::VectorXd(0), G, h);
  QpSolution sol = solve_qp(prob);
  REQUIRE(sol.status == QpStatus::Infeasible);
  CHECK_FALSE(sol.infeasible_rows.empty());
}

TEST_CASE("equality encoded as an inequality pair still converges") {
  // min (x-1)^2 with x <= 5 and -x <= -5 (forces x = 5)
  Eigen::MatrixXd P = 2 * Eigen::MatrixXd::Identity(1, 1);
  Eigen::VectorXd q(1);
  q << -2;
  Eigen::MatrixXd G(2, 1);
  G << 1, -1;
  Eigen::VectorXd h(2);
  h << 5, -5;
  QpSolution sol = solve_qp(dense_qp(P, q, Eigen::MatrixXd(0, 1), Eigen::VectorXd(0), G, h));
  REQUIRE(sol.status == QpStatus::Optimal);
  CHECK(sol.x[0] == Catch::Approx(5.0).margin(1e-7));
  // the pair's multiplier difference carries the stationarity: z0 - z1 = -8
  CHECK(sol.z[0] - sol.z[1] == Catch::Approx(-8.0).margin(1e-6));
  CHECK(sol.residuals.complementarity < 1e-7);
}

TEST_CASE("badly scaled rows are handled by row equilibration") {
  Eigen::MatrixXd P = 2 * Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd q(2);
  q << -2, -4;
  Eigen::MatrixXd A(1, 2);
  A << 1e5, 1e5;  // x0 + x1 = 1, scaled up
  Eigen::VectorXd b(1);
  b << 1e5;
  Eigen::MatrixXd G(2, 2);
  G << 1e-4, 0, 0, 1e4;
  Eigen::VectorXd h(2);
  h << 1e-4 * 10, 1e4 * 10;
  QpSolution sol = solve_qp(dense_qp(P, q, A, b, G, h));
  REQUIRE(sol.status == QpStatus::Optimal);
  CHECK(sol.x.sum() == Catch::Approx(1.0).margin(1e-8));
  CHECK(sol.residuals.worst() < 1e-8);
}

TEST_CASE("random convex programs agree with the splitting oracle") {
  std::mt19937_64 eng(1234);
  auto unif = [&](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(eng() >> 11) * 0x1.0p-53);
  };
  for (int trial = 0; trial < 20; ++trial) {
    int n = 3 + static_cast<int>(unif(0, 5));
    int me = static_cast<int>(unif(0, 2.99));
    int mi = 2 + static_cast<int>(unif(0, 6));
    Eigen::MatrixXd L(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) L(i, j) = j <= i ? unif(-1, 1) : 0.0;
    Eigen::MatrixXd P = L * L.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd q(n), x0(n);
    for (int i = 0; i < n; ++i) {
      q[i] = unif(-5, 5);
      x0[i] = unif(-2, 2);
    }
    Eigen::MatrixXd A(me, n), G(mi, n);
    for (int i = 0; i < me; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = unif(-2, 2);
    for (int i = 0; i < mi; ++i)
      for (int j = 0; j < n; ++j) G(i, j) = unif(-2, 2);
    Eigen::VectorXd b = A * x0;
    Eigen::VectorXd h = G * x0;
    for (int i = 0; i < mi; ++i) h[i] += unif(0.01, 3.0);

    QpProblem prob = dense_qp(P, q, A, b, G, h);
    QpSolution ours = solve_qp(prob);
    REQUIRE(ours.status == QpStatus::Optimal);
    chp_test::AdmmResult oracle = chp_test::admm_solve(prob);
    REQUIRE(oracle.converged);
    double scale = 1.0 + std::abs(oracle.objective);
    CHECK(std::abs(ours.objective - oracle.objective) / scale < 1e-7);
    CHECK((ours.x - oracle.x).cwiseAbs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("lp export lists objective, rows and free bounds") {
  Eigen::MatrixXd P = 2 * Eigen::MatrixXd::Identity(1, 1);
  Eigen::VectorXd q(1);
  q << 3;
  Eigen::MatrixXd A(1, 1), G(1, 1);
  A << 1;
  G << 1;
  Eigen::VectorXd b(1), h(1);
  b << 2;
  h << 5;
  QpProblem prob = dense_qp(P, q, A, b, G, h);
  std::ostringstream os;
  write_lp(
      os, prob, [](int) { return std::string("x0"); },
      [](int) { return std::string("bal"); }, [](int) { return std::string("cap"); });
  std::string lp = os.str();
  CHECK(lp.find("Minimize") != std::string::npos);
  CHECK(lp.find("bal: + 1 x0 = 2") != std::string::npos);
  CHECK(lp.find("cap: + 1 x0 <= 5") != std::string::npos);
  CHECK(lp.find("x0 ^ 2") != std::string::npos);
  CHECK(lp.find("x0 free") != std::string::npos);
}
