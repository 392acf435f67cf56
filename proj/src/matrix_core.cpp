#include "s3rc/matrix_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "s3rc/errors.hpp"

namespace s3rc {

int FeatureMatrix::num_classes() const {
  if (!class_names.empty()) return static_cast<int>(class_names.size());
  int k = 0;
  for (int l : labels) k = std::max(k, l);
  return k;
}

void FeatureMatrix::validate() const {
  if (data.rows() < 1 || data.cols() < 1)
    throw DimensionError("feature matrix must have at least one row and one column");
  if (!data.allFinite())
    throw DegenerateInputError("feature matrix contains non-finite entries");
  if (!labels.empty() && labels.size() != static_cast<size_t>(data.cols()))
    throw DimensionError("label count does not match sample count");
  const int k = num_classes();
  for (size_t j = 0; j < labels.size(); ++j) {
    if (labels[j] < 0 || labels[j] > k)
      throw DegenerateInputError("label out of range at column " + std::to_string(j));
  }
}

namespace {

// Flips each row so its largest-magnitude entry is positive; eigenvectors are
// sign-ambiguous and golden tests need one fixed representative.
void canonicalize_signs(Eigen::MatrixXd& components) {
  for (Eigen::Index r = 0; r < components.rows(); ++r) {
    Eigen::Index imax = 0;
    components.row(r).cwiseAbs().maxCoeff(&imax);
    if (components(r, imax) < 0) components.row(r) = -components.row(r);
  }
}

}  // namespace

PcaModel pca_fit(const Eigen::MatrixXd& X, int d) {
  const Eigen::Index D = X.rows();
  const Eigen::Index N = X.cols();
  if (D < 1 || N < 1) throw DimensionError("pca_fit: empty input");
  if (!X.allFinite()) throw DegenerateInputError("pca_fit: non-finite input");
  if (d < 1) throw DimensionError("pca_fit: retained dimension must be positive");
  if (d > std::min<Eigen::Index>(D, N - 1))
    throw DimensionError("pca_fit: d = " + std::to_string(d) + " exceeds min(D, N-1) = " +
                         std::to_string(std::min<Eigen::Index>(D, N - 1)));

  PcaModel model;
  model.mean = X.rowwise().mean();
  Eigen::MatrixXd Xc = X.colwise() - model.mean;

  // Pairs of (covariance eigenvalue, solver index), sorted descending with
  // index order breaking ties.
  Eigen::VectorXd evals;
  Eigen::MatrixXd directions;  // columns are unit principal directions in R^D
  if (N <= D) {
    // Gram route: eigenvectors of Xc^T Xc lift to directions Xc u / sqrt(s).
    Eigen::MatrixXd G = Xc.transpose() * Xc;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    if (es.info() != Eigen::Success) throw NumericalError("pca_fit: eigendecomposition failed");
    evals.resize(N);
    directions.resize(D, N);
    for (Eigen::Index i = 0; i < N; ++i) {
      const double s = std::max(es.eigenvalues()(i), 0.0);
      evals(i) = s / static_cast<double>(N - 1);
      if (s > 0)
        directions.col(i) = Xc * es.eigenvectors().col(i) / std::sqrt(s);
      else
        directions.col(i).setZero();
    }
  } else {
    Eigen::MatrixXd C = (Xc * Xc.transpose()) / static_cast<double>(N - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
    if (es.info() != Eigen::Success) throw NumericalError("pca_fit: eigendecomposition failed");
    evals = es.eigenvalues().cwiseMax(0.0);
    directions = es.eigenvectors();
  }

  std::vector<Eigen::Index> order(static_cast<size_t>(evals.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return evals(a) > evals(b); });

  const double lambda_max = evals(order[0]);
  const double tol = static_cast<double>(std::max(D, N)) *
                     std::numeric_limits<double>::epsilon() * lambda_max;
  int rank = 0;
  for (Eigen::Index i = 0; i < evals.size(); ++i)
    if (evals(i) > tol) ++rank;
  if (d > rank)
    throw DimensionError("pca_fit: d = " + std::to_string(d) +
                         " exceeds effective rank " + std::to_string(rank));

  model.components.resize(d, D);
  model.eigenvalues.resize(d);
  for (int r = 0; r < d; ++r) {
    model.components.row(r) = directions.col(order[static_cast<size_t>(r)]).transpose();
    model.eigenvalues(r) = evals(order[static_cast<size_t>(r)]);
  }
  canonicalize_signs(model.components);
  return model;
}

PcaModel pca_fit(const FeatureMatrix& X, int d) { return pca_fit(X.data, d); }

Eigen::MatrixXd pca_project(const PcaModel& m, const Eigen::MatrixXd& X) {
  if (X.rows() != m.mean.size())
    throw DimensionError("pca_project: input has " + std::to_string(X.rows()) +
                         " rows, model expects " + std::to_string(m.mean.size()));
  return m.components * (X.colwise() - m.mean);
}

FeatureMatrix pca_project(const PcaModel& m, const FeatureMatrix& X) {
  FeatureMatrix out;
  out.data = pca_project(m, X.data);
  out.labels = X.labels;
  out.class_names = X.class_names;
  return out;
}

Eigen::MatrixXd normalize_columns(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd out(X.rows(), X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double n = X.col(j).norm();
    if (n < 1e-12)
      throw DegenerateInputError("normalize_columns: column " + std::to_string(j) +
                                 " has near-zero norm");
    out.col(j) = X.col(j) / n;
  }
  return out;
}

}  // namespace s3rc
