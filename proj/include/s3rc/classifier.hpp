#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "s3rc/dictionaries.hpp"
#include "s3rc/gmm.hpp"
#include "s3rc/l1_solver.hpp"
#include "s3rc/matrix_core.hpp"

namespace s3rc {

enum class Method { S3RC, ESRC, SSRC, SRC };
enum class VariationSource { Centroid, Prototype, Generic, File };

struct PipelineConfig {
  Method method = Method::S3RC;
  double lambda = 0.005;
  int pca_dim = 1;
  bool pca_on_unlabeled = true;  // fit PCA on labeled + unlabeled (default) or labeled only
  EmConfig em;
  PriorsMode priors_mode = PriorsMode::LabeledProportion;
  VariationSource variation_source = VariationSource::Centroid;
  std::string variation_file;        // used when variation_source == File
  std::vector<int> prototype_index;  // used when == Prototype; empty means first sample
  int solver_max_iters = 10000;
  double kkt_tol = 1e-8;

  void validate() const;
  SolverConfig solver() const { return {lambda, solver_max_iters, kkt_tol}; }
};

struct ClassificationResult {
  Eigen::VectorXd residuals;  // r_k per class
  int label = 0;              // argmin_k residuals, ties to the lowest class id
  SparseCode code;
};

// Everything fit_pipeline learns; classify() only reads it.
struct FittedModel {
  PcaModel pca;
  GalleryDictionary gallery;  // the dictionary classification codes against (P*)
  VariationDictionary variation;
  std::optional<GmmModel> gmm;  // present for the s3rc method
  EmTrace trace;
  PipelineConfig config;
  std::vector<std::string> class_names;
};

struct EvalReport {
  double rate = 0.0;
  int correct = 0;
  int total = 0;
  Eigen::MatrixXi confusion;  // K x K, row = true class, column = predicted
};

// r_k = ||y - [P V] [delta_k(alpha); beta]||^2 where delta_k keeps the alpha
// entries of class k (all of them when P has several columns per class).
Eigen::VectorXd residuals(const Eigen::VectorXd& y, const GalleryDictionary& P,
                          const VariationDictionary& V, const SparseCode& code);

// Full fit: PCA + normalization, dictionaries per method/variation source,
// and for the s3rc method rectification + semi-supervised EM yielding P*.
// X carries labeled and unlabeled columns together; generic supplies the
// auxiliary classes when variation_source == Generic.
FittedModel fit_pipeline(const FeatureMatrix& X, const PipelineConfig& cfg,
                         const GenericSet* generic = nullptr);

// Projects, normalizes, codes against [P* V], and labels by least residual.
// Columns of raw are samples in the model's original feature space.
std::vector<ClassificationResult> classify(const FittedModel& model,
                                           const Eigen::MatrixXd& raw);

// Transductive run: fit on X, then classify X's unlabeled columns (in column
// order).  Requires at least one unlabeled column.
std::pair<std::vector<ClassificationResult>, FittedModel> run_s3rc(
    const FeatureMatrix& X, const PipelineConfig& cfg, const GenericSet* generic = nullptr);

// Same shape for the src / esrc / ssrc baselines.
std::vector<ClassificationResult> run_baseline(Method method, const FeatureMatrix& X,
                                               const PipelineConfig& cfg,
                                               const GenericSet* generic = nullptr);

EvalReport evaluate(const std::vector<int>& predicted, const std::vector<int>& truth,
                    int num_classes);

}  // namespace s3rc
