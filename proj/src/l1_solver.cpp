#include "s3rc/l1_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "s3rc/dictionaries.hpp"
#include "s3rc/errors.hpp"

namespace s3rc {

double lasso_objective(const Eigen::MatrixXd& D, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& x, double lambda) {
  return (D * x - y).squaredNorm() + lambda * x.lpNorm<1>();
}

double kkt_violation(const Eigen::MatrixXd& D, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& x, double lambda) {
  const Eigen::VectorXd c2 = 2.0 * (D.transpose() * (y - D * x));
  double v = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i) != 0.0)
      v = std::max(v, std::abs(c2(i) - lambda * (x(i) > 0 ? 1.0 : -1.0)));
    else
      v = std::max(v, std::abs(c2(i)) - lambda);
  }
  return v;
}

namespace {

void check_problem(const Eigen::MatrixXd& D, const Eigen::VectorXd& y,
                   const SolverConfig& cfg) {
  if (D.rows() != y.size())
    throw DimensionError("lasso: dictionary has " + std::to_string(D.rows()) +
                         " rows, signal has " + std::to_string(y.size()));
  if (D.cols() < 1) throw DimensionError("lasso: dictionary has no columns");
  if (!D.allFinite() || !y.allFinite())
    throw DegenerateInputError("lasso: non-finite input");
  if (cfg.lambda < 0) throw ConfigError("lasso: lambda must be nonnegative");
  if (cfg.max_iters < 1) throw ConfigError("lasso: max_iters must be positive");
  if (cfg.kkt_tol <= 0) throw ConfigError("lasso: kkt_tol must be positive");
}

// Cholesky with an explicit pivot floor: any Schur complement at or below
// 1e-10 counts as loss of positive definiteness.
bool cholesky_with_floor(const Eigen::MatrixXd& G, Eigen::MatrixXd& L) {
  const Eigen::Index n = G.rows();
  L = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = G(j, j) - L.row(j).head(j).squaredNorm();
    if (d <= 1e-10) return false;
    L(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < n; ++i)
      L(i, j) = (G(i, j) - L.row(i).head(j).dot(L.row(j).head(j))) / L(j, j);
  }
  return true;
}

Eigen::VectorXd chol_solve(const Eigen::MatrixXd& L, const Eigen::VectorXd& b) {
  Eigen::VectorXd z = L.triangularView<Eigen::Lower>().solve(b);
  return L.transpose().triangularView<Eigen::Upper>().solve(z);
}

// Active-set bookkeeping for the homotopy path: member indices, their path
// signs, and the Cholesky factor of the active Gram matrix.
struct ActiveSet {
  const Eigen::MatrixXd& D;
  std::vector<int> idx;
  std::vector<double> sign;
  Eigen::MatrixXd L;

  explicit ActiveSet(const Eigen::MatrixXd& dict) : D(dict) {}

  int size() const { return static_cast<int>(idx.size()); }

  Eigen::MatrixXd gram() const {
    const int a = size();
    Eigen::MatrixXd G(a, a);
    for (int i = 0; i < a; ++i)
      for (int j = 0; j <= i; ++j)
        G(i, j) = G(j, i) = D.col(idx[i]).dot(D.col(idx[j]));
    return G;
  }

  // Admits column j with the given path sign.  Tries a rank-1 Cholesky append
  // first; if that loses positive definiteness, refactorizes from scratch.
  // Returns false (set unchanged) when the extended Gram is singular.
  bool try_admit(int j, double s) {
    const int a = size();
    const double djj = D.col(j).squaredNorm();
    if (a == 0) {
      if (djj <= 1e-10) return false;
      L = Eigen::MatrixXd::Constant(1, 1, std::sqrt(djj));
      idx.push_back(j);
      sign.push_back(s);
      return true;
    }
    Eigen::VectorXd g(a);
    for (int i = 0; i < a; ++i) g(i) = D.col(idx[i]).dot(D.col(j));
    const Eigen::VectorXd w = L.triangularView<Eigen::Lower>().solve(g);
    const double diag2 = djj - w.squaredNorm();
    if (diag2 > 1e-10) {
      Eigen::MatrixXd L2 = Eigen::MatrixXd::Zero(a + 1, a + 1);
      L2.topLeftCorner(a, a) = L;
      L2.row(a).head(a) = w.transpose();
      L2(a, a) = std::sqrt(diag2);
      L = std::move(L2);
      idx.push_back(j);
      sign.push_back(s);
      return true;
    }
    idx.push_back(j);
    sign.push_back(s);
    if (cholesky_with_floor(gram(), L)) return true;
    idx.pop_back();
    sign.pop_back();
    if (!cholesky_with_floor(gram(), L))
      throw NumericalError("lasso: active Gram matrix lost positive definiteness");
    return false;
  }

  void remove(int pos) {
    idx.erase(idx.begin() + pos);
    sign.erase(sign.begin() + pos);
    if (size() > 0 && !cholesky_with_floor(gram(), L))
      throw NumericalError("lasso: active Gram matrix lost positive definiteness");
  }

  Eigen::VectorXd sign_vector() const {
    Eigen::VectorXd s(size());
    for (int i = 0; i < size(); ++i) s(i) = sign[static_cast<size_t>(i)];
    return s;
  }
};

}  // namespace

Eigen::VectorXd solve_lasso(const Eigen::MatrixXd& D, const Eigen::VectorXd& y,
                            const SolverConfig& cfg) {
  check_problem(D, y, cfg);
  const int n = static_cast<int>(D.cols());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);

  // Path parameter mu = lambda/2; the solution is zero for mu >= ||D^T y||_inf.
  const double mu_target = cfg.lambda / 2.0;
  double mu = (D.transpose() * y).cwiseAbs().maxCoeff();
  if (mu <= mu_target) return x;

  ActiveSet act(D);
  std::vector<char> in_active(static_cast<size_t>(n), 0);
  // Atoms whose admission would make the active Gram singular are barred from
  // entering; the bans are relative to the current active set, so any change
  // to it clears them.
  std::vector<char> banned(static_cast<size_t>(n), 0);
  const double tol = 1e-12;

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    const Eigen::VectorXd c = D.transpose() * (y - D * x);

    // Direction along which the active coefficients move as mu decreases by 1.
    const int a = act.size();
    Eigen::VectorXd u;
    Eigen::VectorXd rate = Eigen::VectorXd::Zero(n);
    if (a > 0) {
      u = chol_solve(act.L, act.sign_vector());
      Eigen::VectorXd Du = Eigen::VectorXd::Zero(D.rows());
      for (int i = 0; i < a; ++i) Du += u(i) * D.col(act.idx[static_cast<size_t>(i)]);
      rate = D.transpose() * Du;
    }

    const double d_target = mu - mu_target;

    // Earliest inactive atom whose correlation reaches the boundary.  A valid
    // candidate needs its boundary to close faster than it recedes (positive
    // denominator); a negative step means the crossing is already overdue by
    // numerical drift, so it is clamped to an immediate entry.  Lowest column
    // index wins ties because the scan keeps the first candidate found.
    double d_entry = std::numeric_limits<double>::infinity();
    int entry_j = -1;
    double entry_sign = 0.0;
    for (int j = 0; j < n; ++j) {
      if (in_active[static_cast<size_t>(j)] || banned[static_cast<size_t>(j)]) continue;
      if (1.0 - rate(j) > tol) {
        const double d1 = std::max((mu - c(j)) / (1.0 - rate(j)), 0.0);
        if (d1 < d_entry - tol) {
          d_entry = d1;
          entry_j = j;
          entry_sign = 1.0;
        }
      }
      if (1.0 + rate(j) > tol) {
        const double d2 = std::max((mu + c(j)) / (1.0 + rate(j)), 0.0);
        if (d2 < d_entry - tol) {
          d_entry = d2;
          entry_j = j;
          entry_sign = -1.0;
        }
      }
    }

    // Earliest active coefficient crossing zero.
    double d_drop = std::numeric_limits<double>::infinity();
    int drop_pos = -1;
    for (int i = 0; i < a; ++i) {
      const int col = act.idx[static_cast<size_t>(i)];
      if (x(col) == 0.0 || u(i) == 0.0) continue;
      const double dd = -x(col) / u(i);
      if (dd > tol && dd < d_drop - tol) {
        d_drop = dd;
        drop_pos = i;
      }
    }

    if (d_target <= std::min(d_entry, d_drop) + tol) {
      // Reached the target regularization: fresh solve on the final support.
      mu = mu_target;
      x.setZero();
      if (act.size() > 0) {
        Eigen::VectorXd rhs(act.size());
        for (int i = 0; i < act.size(); ++i)
          rhs(i) = D.col(act.idx[static_cast<size_t>(i)]).dot(y) -
                   mu_target * act.sign[static_cast<size_t>(i)];
        const Eigen::VectorXd xa = chol_solve(act.L, rhs);
        for (int i = 0; i < act.size(); ++i) x(act.idx[static_cast<size_t>(i)]) = xa(i);
      }
      if (!x.allFinite()) throw NumericalError("lasso: non-finite solution");
      if (kkt_violation(D, y, x, cfg.lambda) > cfg.kkt_tol)
        throw NumericalError("lasso: KKT conditions not met at path end");
      return x;
    }

    if (d_drop <= d_entry + tol) {  // drop wins ties
      for (int i = 0; i < a; ++i)
        x(act.idx[static_cast<size_t>(i)]) += d_drop * u(i);
      mu -= d_drop;
      const int col = act.idx[static_cast<size_t>(drop_pos)];
      x(col) = 0.0;
      in_active[static_cast<size_t>(col)] = 0;
      act.remove(drop_pos);
      std::fill(banned.begin(), banned.end(), 0);
      continue;
    }

    for (int i = 0; i < a; ++i)
      x(act.idx[static_cast<size_t>(i)]) += d_entry * u(i);
    mu -= d_entry;
    if (act.try_admit(entry_j, entry_sign)) {
      in_active[static_cast<size_t>(entry_j)] = 1;
      std::fill(banned.begin(), banned.end(), 0);
    } else {
      banned[static_cast<size_t>(entry_j)] = 1;
    }
  }

  throw IterationLimitError("lasso: homotopy path exceeded " +
                                std::to_string(cfg.max_iters) + " breakpoints",
                            x);
}

SparseCode solve_joint(const GalleryDictionary& P, const VariationDictionary& V,
                       const Eigen::VectorXd& y, const SolverConfig& cfg) {
  const Eigen::Index K = P.atoms.cols();
  const Eigen::Index m = V.atoms.cols();
  if (m > 0 && V.atoms.rows() != P.atoms.rows())
    throw DimensionError("solve_joint: gallery and variation row counts differ");
  Eigen::MatrixXd D(P.atoms.rows(), K + m);
  D.leftCols(K) = P.atoms;
  if (m > 0) D.rightCols(m) = V.atoms;

  const Eigen::VectorXd x = solve_lasso(D, y, cfg);
  SparseCode code;
  code.alpha = x.head(K);
  code.beta = x.tail(m);
  code.objective = lasso_objective(D, y, x, cfg.lambda);
  return code;
}

Eigen::VectorXd oracle_coordinate_descent(const Eigen::MatrixXd& D,
                                          const Eigen::VectorXd& y,
                                          const SolverConfig& cfg) {
  check_problem(D, y, cfg);
  const int n = static_cast<int>(D.cols());
  Eigen::VectorXd col_sq(n);
  for (int i = 0; i < n; ++i) {
    col_sq(i) = D.col(i).squaredNorm();
    if (col_sq(i) <= 0)
      throw DegenerateInputError("coordinate descent: zero dictionary column " +
                                 std::to_string(i));
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r = y;  // residual y - D x, maintained incrementally
  const double half_lambda = cfg.lambda / 2.0;
  double f_prev = lasso_objective(D, y, x, cfg.lambda);

  const int max_sweeps = 100000;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    for (int i = 0; i < n; ++i) {
      const double rho = D.col(i).dot(r) + col_sq(i) * x(i);
      const double mag = std::abs(rho) - half_lambda;
      const double xi = mag > 0 ? (rho > 0 ? mag : -mag) / col_sq(i) : 0.0;
      if (xi != x(i)) {
        r += D.col(i) * (x(i) - xi);
        x(i) = xi;
      }
    }
    const double f = lasso_objective(D, y, x, cfg.lambda);
    if (std::abs(f_prev - f) < 1e-12) return x;
    f_prev = f;
  }
  throw IterationLimitError("coordinate descent: no convergence within 1e5 sweeps", x);
}

}  // namespace s3rc
