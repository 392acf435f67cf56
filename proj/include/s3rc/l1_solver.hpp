#pragma once

#include <Eigen/Dense>

namespace s3rc {

struct GalleryDictionary;
struct VariationDictionary;

// Problem: minimize ||D x - y||_2^2 + lambda * ||x||_1  (no 1/2 factor).
// KKT at the optimum, with c = D^T (y - D x):
//   active i:    2 c_i = lambda * sign(x_i)
//   inactive i:  |2 c_i| <= lambda + kkt_tol
struct SolverConfig {
  double lambda = 1e-3;
  int max_iters = 10000;
  double kkt_tol = 1e-8;
};

struct SparseCode {
  Eigen::VectorXd alpha;  // gallery coefficients
  Eigen::VectorXd beta;   // variation coefficients (length 0 when V is empty)
  double objective = 0.0;
};

// Homotopy solver: walks the regularization path from lambda_0 = 2*||D^T y||_inf
// (solution zero) down to cfg.lambda, processing atom-entry and sign-change
// breakpoints.  Expects unit-norm columns.  Throws IterationLimitError with the
// best iterate if the path needs more than cfg.max_iters breakpoints.
Eigen::VectorXd solve_lasso(const Eigen::MatrixXd& D, const Eigen::VectorXd& y,
                            const SolverConfig& cfg);

// Solves the same problem on the concatenation [P V] and splits the result.
SparseCode solve_joint(const GalleryDictionary& P, const VariationDictionary& V,
                       const Eigen::VectorXd& y, const SolverConfig& cfg);

// Independent check solver: cyclic coordinate descent with exact per-coordinate
// soft-threshold updates.  Stops when a full sweep improves the objective by
// less than 1e-12, capped at 1e5 sweeps.
Eigen::VectorXd oracle_coordinate_descent(const Eigen::MatrixXd& D,
                                          const Eigen::VectorXd& y,
                                          const SolverConfig& cfg);

double lasso_objective(const Eigen::MatrixXd& D, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& x, double lambda);

// Largest KKT violation of x for the problem above; zero at an exact optimum.
double kkt_violation(const Eigen::MatrixXd& D, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& x, double lambda);

}  // namespace s3rc
