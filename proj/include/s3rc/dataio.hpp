#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "s3rc/matrix_core.hpp"

namespace s3rc {

enum class Protocol { Transductive, Inductive };

struct SplitSpec {
  int labeled_per_class = 1;
  double test_fraction = 0.5;  // inductive only: share of the non-labeled rest
};

// Column indices into the source FeatureMatrix.  Transductive splits alias
// test and unlabeled_train.
struct Split {
  std::vector<int> labeled;
  std::vector<int> unlabeled_train;
  std::vector<int> test;
};

struct SynthSpec {
  int K = 10;       // classes
  int d = 50;       // feature dimension
  int m = 8;        // shared variation atoms
  int n_l = 2;      // labeled samples per class
  int n_u = 20;     // unlabeled samples per class
  double eta = 0.6;    // nonlinear session-gap magnitude
  double rho = 0.4;    // linear variation scale
  double sigma = 0.02;  // additive noise std
  uint64_t seed = 7;

  void validate() const;
};

// Everything the generator drew, for oracle evaluation of the generated set.
struct SynthTruth {
  Eigen::MatrixXd base;     // d x K unit prototypes g_k
  Eigen::MatrixXd proto_l;  // d x K labeled-session prototypes
  Eigen::MatrixXd proto_u;  // d x K unlabeled-session prototypes
  Eigen::MatrixXd atoms;    // d x m shared variation atoms W
  Eigen::MatrixXd codes;    // m x N per-sample variation codes b
  std::vector<int> true_class;  // per column, 1..K
  std::vector<char> from_unlabeled_session;  // per column
};

// Dataset CSV: first line `#dim=<D>`, then one `label,f_0,...,f_{D-1}` row
// per sample; label `?` means unlabeled.  A header with zero rows loads as an
// empty (N = 0) matrix.
FeatureMatrix load_dataset(const std::string& path);
void save_dataset(const std::string& path, const FeatureMatrix& X);

// Headerless matrix CSV: one row per line, comma-separated.
Eigen::MatrixXd load_matrix_csv(const std::string& path);
void save_matrix_csv(const std::string& path, const Eigen::MatrixXd& M);

// Writes content to path via a temporary file plus rename.
void atomic_write(const std::string& path, const std::string& content);

// Stratified seeded split of a fully labeled dataset: per class,
// labeled_per_class columns become labeled, the rest are unlabeled-train and
// test per the protocol.  Errors name the first class that is too small.
Split split(const FeatureMatrix& X, Protocol protocol, const SplitSpec& spec, uint64_t seed);

// Two-session generator: per class a base prototype on the unit sphere, one
// perturbed prototype per session (the nonlinear gap eta), shared variation
// atoms entering with 2-sparse codes (scale rho), plus gaussian noise.
// Labeled-session columns come first (grouped by class), then the
// unlabeled-session columns (grouped by class, label `?`).
std::pair<FeatureMatrix, SynthTruth> generate_synthetic(const SynthSpec& spec);

}  // namespace s3rc
