#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace s3rc {

// Column-major dataset: one sample per column.  labels[j] is the class id of
// column j in {1..K}, or 0 for unlabeled.  An empty labels vector means every
// column is unlabeled.  class_names[k-1] is the display name of class k.
struct FeatureMatrix {
  Eigen::MatrixXd data;                  // D x N
  std::vector<int> labels;               // size N, or empty
  std::vector<std::string> class_names;  // size K, or empty

  int dim() const { return static_cast<int>(data.rows()); }
  int count() const { return static_cast<int>(data.cols()); }
  bool is_labeled(int j) const {
    return !labels.empty() && labels[static_cast<size_t>(j)] > 0;
  }
  int num_classes() const;

  // Throws DimensionError / DegenerateInputError if the invariants
  // (finite entries, label range, D >= 1, N >= 1) do not hold.
  void validate() const;
};

struct PcaModel {
  Eigen::VectorXd mean;         // length D
  Eigen::MatrixXd components;   // d x D, orthonormal rows
  Eigen::VectorXd eigenvalues;  // length d, descending

  int in_dim() const { return static_cast<int>(components.cols()); }
  int out_dim() const { return static_cast<int>(components.rows()); }
};

// Fits PCA on the columns of X: centers by the global mean, then keeps the
// top-d eigenvectors of the sample covariance (normalized by N-1), ordered
// by descending eigenvalue with index order breaking ties.  Uses the N x N
// Gram matrix when N <= D.  Throws DimensionError when d > min(D, N-1) or
// when d exceeds the effective rank of the centered data.
PcaModel pca_fit(const Eigen::MatrixXd& X, int d);
PcaModel pca_fit(const FeatureMatrix& X, int d);

// Returns components * (X - mean), column by column.
Eigen::MatrixXd pca_project(const PcaModel& m, const Eigen::MatrixXd& X);
FeatureMatrix pca_project(const PcaModel& m, const FeatureMatrix& X);

// Rescales every column to unit l2 norm.  A column with norm below 1e-12
// raises DegenerateInputError naming the column.
Eigen::MatrixXd normalize_columns(const Eigen::MatrixXd& X);

}  // namespace s3rc
