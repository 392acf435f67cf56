#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "s3rc/dictionaries.hpp"
#include "s3rc/rectifier.hpp"

namespace s3rc {

enum class CovMode { Identity, Diagonal, Full };
enum class PriorsMode { LabeledProportion, Uniform };

struct EmConfig {
  int max_iters = 50;
  double rel_tol = 1e-5;  // on |delta ll| / (|ll| + 1)
  CovMode cov_mode = CovMode::Diagonal;
  double variance_floor = 1e-6;  // diagonal mode
  double ridge = 1e-3;           // full mode: added as ridge * I
  double prior_floor = 1e-8;

  void validate() const;
};

// Mixture with one component per class: means are the class prototypes.
// Covariance storage depends on cov_mode: identity keeps none, diagonal keeps
// one variance vector per class (diag_vars columns), full keeps one matrix
// per class.
struct GmmModel {
  Eigen::MatrixXd means;  // d x K
  CovMode cov_mode = CovMode::Diagonal;
  Eigen::MatrixXd diag_vars;               // d x K (diagonal mode)
  std::vector<Eigen::MatrixXd> full_covs;  // K matrices (full mode)
  Eigen::VectorXd priors;                  // K, simplex
  double ridge = 0.0;                      // ridge applied in full mode

  int dim() const { return static_cast<int>(means.rows()); }
  int num_classes() const { return static_cast<int>(means.cols()); }
  void validate() const;
};

// Z(i, j) = posterior of class j+1 for column i; rows sum to 1 and labeled
// rows are exactly one-hot at their label.
struct ResponsibilityMatrix {
  Eigen::MatrixXd Z;  // N x K
};

struct EmTrace {
  std::vector<double> log_likelihoods;  // [0] is the initial model's value
  bool converged = false;

  int iterations() const { return static_cast<int>(log_likelihoods.size()) - 1; }
};

// Means from the gallery columns (bit-exact), identity-equivalent covariances
// in cfg.cov_mode, priors from labeled counts or uniform.  P must carry
// exactly one column per class.
GmmModel init_gmm(const RectifiedSet& R, const GalleryDictionary& P,
                  PriorsMode priors_mode, const EmConfig& cfg);

// Labeled rows clamped one-hot; unlabeled rows proportional to
// prior * N(y | mean, cov), computed in the log domain.
ResponsibilityMatrix e_step(const GmmModel& m, const RectifiedSet& R);

// Weighted-mean / weighted-scatter update.  A class whose soft count falls
// below prior_floor * N keeps previous's mean and covariance (or the global
// mean and unit covariance when previous is null) and gets prior prior_floor;
// priors are floored and renormalized.
GmmModel m_step(const RectifiedSet& R, const ResponsibilityMatrix& Z, const EmConfig& cfg,
                const GmmModel* previous = nullptr);

// Labeled terms log(pi_l * N(y | theta_l)); unlabeled terms marginalized over
// classes.  Log domain throughout.
double log_likelihood(const GmmModel& m, const RectifiedSet& R);

// Alternates e_step / m_step from init until the relative log-likelihood
// change drops below rel_tol or max_iters is reached (reported in the trace,
// never thrown).  max_iters = 0 returns init untouched.
std::pair<GmmModel, EmTrace> fit_em(const RectifiedSet& R, const GmmModel& init,
                                    const EmConfig& cfg);

}  // namespace s3rc
