#include "s3rc/classifier.hpp"

#include <algorithm>

#include "s3rc/errors.hpp"
#include "s3rc/rectifier.hpp"

namespace s3rc {

void PipelineConfig::validate() const {
  if (lambda <= 0) throw ConfigError("pipeline: lambda must be positive");
  if (pca_dim < 1) throw ConfigError("pipeline: pca_dim must be at least 1");
  if (solver_max_iters < 1) throw ConfigError("pipeline: solver_max_iters must be positive");
  if (kkt_tol <= 0) throw ConfigError("pipeline: kkt_tol must be positive");
  if (variation_source == VariationSource::File && variation_file.empty())
    throw ConfigError("pipeline: variation_source=file needs a path");
  em.validate();
}

Eigen::VectorXd residuals(const Eigen::VectorXd& y, const GalleryDictionary& P,
                          const VariationDictionary& V, const SparseCode& code) {
  if (P.atoms.rows() != y.size())
    throw DimensionError("residuals: gallery dimension does not match sample");
  if (code.alpha.size() != P.atoms.cols())
    throw DimensionError("residuals: alpha length does not match gallery");
  if (code.beta.size() != V.atoms.cols())
    throw DimensionError("residuals: beta length does not match variation dictionary");

  const int K = P.num_classes();
  const Eigen::VectorXd base = V.empty() ? y : Eigen::VectorXd(y - V.atoms * code.beta);
  Eigen::VectorXd r(K);
  for (int k = 0; k < K; ++k) {
    Eigen::VectorXd recon = Eigen::VectorXd::Zero(y.size());
    for (Eigen::Index j = 0; j < P.atoms.cols(); ++j)
      if (P.class_ids[static_cast<size_t>(j)] == k + 1) recon += code.alpha(j) * P.atoms.col(j);
    r(k) = (base - recon).squaredNorm();
  }
  return r;
}

namespace {

int argmin_label(const Eigen::VectorXd& r) {
  int best = 0;
  for (int k = 1; k < r.size(); ++k)
    if (r(k) < r(best)) best = k;
  return best + 1;
}

// Builds the variation dictionary for the configured source, in the current
// (projected) space.
VariationDictionary make_variation(const LabeledSet& L, const PipelineConfig& cfg,
                                   const GenericSet* generic, int active_dim) {
  switch (cfg.variation_source) {
    case VariationSource::Centroid:
      return variation_centroid_subtraction(L);
    case VariationSource::Prototype: {
      std::vector<int> idx = cfg.prototype_index;
      if (idx.empty()) idx.assign(static_cast<size_t>(L.num_classes()), 0);
      return variation_prototype_subtraction(L, idx);
    }
    case VariationSource::Generic: {
      if (generic == nullptr || generic->classes.empty())
        throw ConfigError("pipeline: variation_source=generic needs a generic set");
      LabeledSet as_labeled;  // same centroid-subtraction construction
      as_labeled.classes = generic->classes;
      return variation_centroid_subtraction(as_labeled);
    }
    case VariationSource::File:
      return load_variation_dictionary(cfg.variation_file, active_dim);
  }
  throw ConfigError("pipeline: unknown variation source");
}

}  // namespace

FittedModel fit_pipeline(const FeatureMatrix& X, const PipelineConfig& cfg,
                         const GenericSet* generic) {
  cfg.validate();
  X.validate();
  if (cfg.method == Method::SRC && cfg.variation_source == VariationSource::Generic)
    throw ConfigError("pipeline: src uses no variation dictionary; generic source is invalid");

  // Columns the PCA is fit on: labeled always, unlabeled per flag.
  std::vector<int> fit_cols;
  std::vector<int> unlabeled_cols;
  for (int j = 0; j < X.count(); ++j) {
    if (X.is_labeled(j) || cfg.pca_on_unlabeled) fit_cols.push_back(j);
    if (!X.is_labeled(j)) unlabeled_cols.push_back(j);
  }
  Eigen::MatrixXd fit_data(X.dim(), static_cast<Eigen::Index>(fit_cols.size()));
  for (size_t j = 0; j < fit_cols.size(); ++j)
    fit_data.col(static_cast<Eigen::Index>(j)) = X.data.col(fit_cols[j]);

  FittedModel M;
  M.config = cfg;
  M.class_names = X.class_names;
  M.pca = pca_fit(fit_data, cfg.pca_dim);

  FeatureMatrix Xp = pca_project(M.pca, X);
  Xp.data = normalize_columns(Xp.data);

  const LabeledSet L = labeled_set_from(Xp);
  Eigen::MatrixXd U(Xp.dim(), static_cast<Eigen::Index>(unlabeled_cols.size()));
  for (size_t j = 0; j < unlabeled_cols.size(); ++j)
    U.col(static_cast<Eigen::Index>(j)) = Xp.data.col(unlabeled_cols[j]);

  GenericSet generic_proj;
  const GenericSet* gptr = nullptr;
  if (generic != nullptr && cfg.variation_source == VariationSource::Generic) {
    for (const auto& Gi : generic->classes)
      generic_proj.classes.push_back(normalize_columns(pca_project(M.pca, Gi)));
    gptr = &generic_proj;
  }

  switch (cfg.method) {
    case Method::SRC:
      M.gallery = gallery_from_samples(L);
      M.variation.atoms.resize(Xp.dim(), 0);
      return M;
    case Method::ESRC:
      M.gallery = gallery_from_samples(L);
      M.variation = make_variation(L, cfg, gptr, Xp.dim());
      return M;
    case Method::SSRC:
      M.gallery = gallery_from_centroids(L);
      M.variation = make_variation(L, cfg, gptr, Xp.dim());
      return M;
    case Method::S3RC:
      break;
  }

  const GalleryDictionary P0 = gallery_from_centroids(L);
  M.variation = make_variation(L, cfg, gptr, Xp.dim());

  const RectifiedSet R = build_rectified_set(L, U, P0, M.variation, cfg.solver());
  const GmmModel init = init_gmm(R, P0, cfg.priors_mode, cfg.em);
  auto [model, trace] = fit_em(R, init, cfg.em);
  M.gmm = std::move(model);
  M.trace = std::move(trace);

  M.gallery.atoms = normalize_columns(M.gmm->means);
  M.gallery.class_ids = P0.class_ids;
  return M;
}

std::vector<ClassificationResult> classify(const FittedModel& model,
                                           const Eigen::MatrixXd& raw) {
  const Eigen::MatrixXd proj = normalize_columns(pca_project(model.pca, raw));
  const SolverConfig scfg = model.config.solver();

  std::vector<ClassificationResult> out;
  out.reserve(static_cast<size_t>(proj.cols()));
  for (Eigen::Index j = 0; j < proj.cols(); ++j) {
    ClassificationResult res;
    res.code = solve_joint(model.gallery, model.variation, proj.col(j), scfg);
    res.residuals = residuals(proj.col(j), model.gallery, model.variation, res.code);
    res.label = argmin_label(res.residuals);
    out.push_back(std::move(res));
  }
  return out;
}

namespace {

Eigen::MatrixXd unlabeled_block(const FeatureMatrix& X) {
  std::vector<int> cols;
  for (int j = 0; j < X.count(); ++j)
    if (!X.is_labeled(j)) cols.push_back(j);
  Eigen::MatrixXd U(X.dim(), static_cast<Eigen::Index>(cols.size()));
  for (size_t j = 0; j < cols.size(); ++j)
    U.col(static_cast<Eigen::Index>(j)) = X.data.col(cols[j]);
  return U;
}

}  // namespace

std::pair<std::vector<ClassificationResult>, FittedModel> run_s3rc(
    const FeatureMatrix& X, const PipelineConfig& cfg, const GenericSet* generic) {
  const Eigen::MatrixXd U = unlabeled_block(X);
  if (U.cols() == 0)
    throw DegenerateInputError("run_s3rc: no unlabeled samples to classify");
  PipelineConfig c = cfg;
  c.method = Method::S3RC;
  FittedModel M = fit_pipeline(X, c, generic);
  return {classify(M, U), std::move(M)};
}

std::vector<ClassificationResult> run_baseline(Method method, const FeatureMatrix& X,
                                               const PipelineConfig& cfg,
                                               const GenericSet* generic) {
  if (method == Method::S3RC)
    throw ConfigError("run_baseline: s3rc is not a baseline; use run_s3rc");
  const Eigen::MatrixXd U = unlabeled_block(X);
  if (U.cols() == 0)
    throw DegenerateInputError("run_baseline: no unlabeled samples to classify");
  PipelineConfig c = cfg;
  c.method = method;
  const FittedModel M = fit_pipeline(X, c, generic);
  return classify(M, U);
}

EvalReport evaluate(const std::vector<int>& predicted, const std::vector<int>& truth,
                    int num_classes) {
  if (predicted.size() != truth.size())
    throw DimensionError("evaluate: prediction and truth lengths differ");
  if (predicted.empty()) throw DegenerateInputError("evaluate: nothing to evaluate");
  EvalReport rep;
  rep.total = static_cast<int>(predicted.size());
  rep.confusion = Eigen::MatrixXi::Zero(num_classes, num_classes);
  for (size_t i = 0; i < predicted.size(); ++i) {
    const int p = predicted[i];
    const int t = truth[i];
    if (p < 1 || p > num_classes || t < 1 || t > num_classes)
      throw DegenerateInputError("evaluate: label out of range at index " + std::to_string(i));
    rep.confusion(t - 1, p - 1) += 1;
    if (p == t) ++rep.correct;
  }
  rep.rate = static_cast<double>(rep.correct) / rep.total;
  return rep;
}

}  // namespace s3rc
