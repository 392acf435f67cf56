#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "s3rc/dictionaries.hpp"
#include "s3rc/errors.hpp"
#include "s3rc/l1_solver.hpp"
#include "s3rc/matrix_core.hpp"
#include "s3rc/rng.hpp"

using namespace s3rc;

namespace {

Eigen::MatrixXd random_dictionary(int rows, int cols, uint64_t seed) {
  Eigen::MatrixXd D(rows, cols);
  uint64_t ctr = 0;
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) D(i, j) = rng::gaussian(seed, 21, ctr++);
  return normalize_columns(D);
}

Eigen::VectorXd random_signal(int rows, uint64_t seed) {
  Eigen::VectorXd y(rows);
  for (int i = 0; i < rows; ++i) y(i) = rng::gaussian(seed, 22, static_cast<uint64_t>(i));
  return y;
}

// soft-threshold closed form for orthonormal dictionaries
Eigen::VectorXd soft_threshold_solution(const Eigen::MatrixXd& D, const Eigen::VectorXd& y,
                                        double lambda) {
  const Eigen::VectorXd c = D.transpose() * y;
  Eigen::VectorXd x(c.size());
  for (int i = 0; i < c.size(); ++i) {
    const double mag = std::abs(c(i)) - lambda / 2.0;
    x(i) = mag > 0 ? (c(i) > 0 ? mag : -mag) : 0.0;
  }
  return x;
}

}  // namespace

TEST_CASE("solve_lasso: identity dictionary soft-thresholds the signal") {
  Eigen::MatrixXd D = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd y(2);
  y << 1.0, 0.1;
  const Eigen::VectorXd x = solve_lasso(D, y, {0.4, 1000, 1e-8});
  CHECK(x(0) == doctest::Approx(0.8).epsilon(1e-10));
  CHECK(x(1) == 0.0);
}

TEST_CASE("solve_lasso: lambda = 0 reproduces least squares") {
  const Eigen::MatrixXd D = random_dictionary(6, 4, 31);
  const Eigen::VectorXd y = random_signal(6, 32);
  const Eigen::VectorXd x = solve_lasso(D, y, {0.0, 1000, 1e-8});
  const Eigen::VectorXd ls = (D.transpose() * D).ldlt().solve(D.transpose() * y);
  CHECK((x - ls).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("solve_lasso: lambda at or above 2||D^T y||_inf gives exactly zero") {
  const Eigen::MatrixXd D = random_dictionary(5, 8, 33);
  const Eigen::VectorXd y = random_signal(5, 34);
  const double lambda0 = 2.0 * (D.transpose() * y).cwiseAbs().maxCoeff();
  const Eigen::VectorXd x = solve_lasso(D, y, {lambda0, 1000, 1e-8});
  CHECK(x.cwiseAbs().maxCoeff() == 0.0);
  const Eigen::VectorXd x2 = solve_lasso(D, y, {lambda0 * 1.5, 1000, 1e-8});
  CHECK(x2.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("solve_lasso: objective never exceeds the zero vector's") {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const Eigen::MatrixXd D = random_dictionary(8, 12, 100 + seed);
    const Eigen::VectorXd y = random_signal(8, 200 + seed);
    const double lambda = 0.05 + 0.1 * rng::uniform(seed, 23, 0);
    const Eigen::VectorXd x = solve_lasso(D, y, {lambda, 2000, 1e-8});
    CHECK(lasso_objective(D, y, x, lambda) <= y.squaredNorm() + 1e-12);
  }
}

TEST_CASE("solve_lasso: KKT conditions hold at the returned point") {
  for (uint64_t seed = 0; seed < 30; ++seed) {
    const int n = 4 + static_cast<int>(seed % 9);
    const int d = 3 + static_cast<int>(seed % 7);
    const Eigen::MatrixXd D = random_dictionary(d, n, 300 + seed);
    const Eigen::VectorXd y = random_signal(d, 400 + seed);
    const double lambda = 0.01 + 0.2 * rng::uniform(seed, 24, 1);
    const Eigen::VectorXd x = solve_lasso(D, y, {lambda, 2000, 1e-8});
    CHECK(kkt_violation(D, y, x, lambda) <= 1e-8);
  }
}

TEST_CASE("solve_lasso: homotopy matches coordinate descent objectives") {
  for (uint64_t seed = 0; seed < 25; ++seed) {
    const Eigen::MatrixXd D = random_dictionary(10, 15, 500 + seed);
    const Eigen::VectorXd y = random_signal(10, 600 + seed);
    const double lambda = 0.02 + 0.1 * rng::uniform(seed, 25, 2);
    const SolverConfig cfg{lambda, 5000, 1e-8};
    const Eigen::VectorXd xh = solve_lasso(D, y, cfg);
    const Eigen::VectorXd xc = oracle_coordinate_descent(D, y, cfg);
    CHECK(lasso_objective(D, y, xh, lambda) ==
          doctest::Approx(lasso_objective(D, y, xc, lambda)).epsilon(1e-6));
  }
}

TEST_CASE("oracle_coordinate_descent: orthonormal dictionary matches closed form") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    // orthonormal square dictionary via QR of a random matrix
    const Eigen::MatrixXd A = random_dictionary(6, 6, 700 + seed);
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
    const Eigen::MatrixXd Q = qr.householderQ();
    const Eigen::VectorXd y = random_signal(6, 800 + seed);
    const double lambda = 0.1;
    const Eigen::VectorXd x = oracle_coordinate_descent(Q, y, {lambda, 1000, 1e-8});
    CHECK((x - soft_threshold_solution(Q, y, lambda)).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("oracle_coordinate_descent: lambda = 0 on square nonsingular D equals direct solve") {
  // Orthonormal columns make the sweep an exact Gauss-Seidel solve, so the
  // objective-change stopping rule leaves no measurable coefficient error.
  const Eigen::MatrixXd A = random_dictionary(5, 5, 900);
  const Eigen::MatrixXd D = Eigen::HouseholderQR<Eigen::MatrixXd>(A).householderQ();
  const Eigen::VectorXd y = random_signal(5, 901);
  const Eigen::VectorXd x = oracle_coordinate_descent(D, y, {0.0, 1000, 1e-8});
  const Eigen::VectorXd direct = D.fullPivLu().solve(y);
  CHECK((x - direct).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("solve_joint: empty V reduces to solve_lasso on P") {
  GalleryDictionary P;
  P.atoms = Eigen::MatrixXd::Identity(3, 3);
  P.class_ids = {1, 2, 3};
  VariationDictionary V;
  V.atoms.resize(3, 0);
  Eigen::VectorXd y(3);
  y << 0.9, 0.2, -0.3;
  const SolverConfig cfg{0.1, 1000, 1e-8};
  const SparseCode code = solve_joint(P, V, y, cfg);
  const Eigen::VectorXd direct = solve_lasso(P.atoms, y, cfg);
  CHECK(code.beta.size() == 0);
  CHECK((code.alpha - direct).cwiseAbs().maxCoeff() == 0.0);
  CHECK(code.objective ==
        doctest::Approx(lasso_objective(P.atoms, y, direct, cfg.lambda)).epsilon(1e-12));
}

TEST_CASE("solve_joint: gallery column recovered at tiny lambda") {
  GalleryDictionary P;
  P.atoms = random_dictionary(12, 5, 1000);
  P.class_ids = {1, 2, 3, 4, 5};
  VariationDictionary V;
  V.atoms = random_dictionary(12, 4, 1001);
  const int k = 2;
  const Eigen::VectorXd y = P.atoms.col(k);
  const SparseCode code = solve_joint(P, V, y, {1e-6, 5000, 1e-8});
  // oracle agreement at the same lambda
  Eigen::MatrixXd D(12, 9);
  D << P.atoms, V.atoms;
  const Eigen::VectorXd xc = oracle_coordinate_descent(D, y, {1e-6, 100000, 1e-8});
  CHECK(code.objective == doctest::Approx(lasso_objective(D, y, xc, 1e-6)).epsilon(1e-6));
  // alpha approaches e_k, beta approaches 0
  CHECK(code.alpha(k) == doctest::Approx(1.0).epsilon(1e-4));
  for (int i = 0; i < code.alpha.size(); ++i)
    if (i != k) CHECK(std::abs(code.alpha(i)) <= 1e-4);
  CHECK(code.beta.cwiseAbs().maxCoeff() <= 1e-4);
}

TEST_CASE("solve_joint: objective field is consistent with its own code") {
  GalleryDictionary P;
  P.atoms = random_dictionary(10, 6, 1100);
  P.class_ids = {1, 2, 3, 4, 5, 6};
  VariationDictionary V;
  V.atoms = random_dictionary(10, 5, 1101);
  const Eigen::VectorXd y = random_signal(10, 1102);
  const SparseCode code = solve_joint(P, V, y, {0.05, 5000, 1e-8});
  Eigen::MatrixXd D(10, 11);
  D << P.atoms, V.atoms;
  Eigen::VectorXd x(11);
  x << code.alpha, code.beta;
  CHECK(code.objective == doctest::Approx(lasso_objective(D, y, x, 0.05)).epsilon(1e-8));
}

TEST_CASE("solve_lasso: rejects malformed input") {
  Eigen::MatrixXd D = Eigen::MatrixXd::Identity(3, 3);
  Eigen::VectorXd y(3);
  y << 1, 2, 3;
  CHECK_THROWS_AS(solve_lasso(D, Eigen::VectorXd::Ones(4), {0.1, 100, 1e-8}), DimensionError);
  CHECK_THROWS_AS(solve_lasso(D, y, {-1.0, 100, 1e-8}), ConfigError);
  CHECK_THROWS_AS(solve_lasso(D, y, {0.1, 0, 1e-8}), ConfigError);
  Eigen::VectorXd bad = y;
  bad(1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(solve_lasso(D, bad, {0.1, 100, 1e-8}), DegenerateInputError);
}

TEST_CASE("solve_lasso: iteration limit carries the best iterate") {
  const Eigen::MatrixXd D = random_dictionary(10, 20, 1200);
  const Eigen::VectorXd y = random_signal(10, 1201);
  try {
    solve_lasso(D, y, {1e-4, 2, 1e-8});
    FAIL("expected IterationLimitError");
  } catch (const IterationLimitError& e) {
    CHECK(e.best_iterate.size() == 20);
    CHECK(e.best_iterate.allFinite());
    // partial path point is still no worse than the zero vector
    CHECK(lasso_objective(D, y, e.best_iterate, 1e-4) <= y.squaredNorm() + 1e-12);
  }
}

TEST_CASE("solve_lasso: duplicate atoms do not break the path") {
  Eigen::MatrixXd D = random_dictionary(6, 4, 1300);
  Eigen::MatrixXd DD(6, 8);
  DD << D, D;  // every atom duplicated
  const Eigen::VectorXd y = random_signal(6, 1301);
  const double lambda = 0.05;
  const Eigen::VectorXd x = solve_lasso(DD, y, {lambda, 5000, 1e-8});
  CHECK(kkt_violation(DD, y, x, lambda) <= 1e-8);
}
