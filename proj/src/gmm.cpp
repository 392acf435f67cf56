#include "s3rc/gmm.hpp"

#include <cmath>
#include <limits>

#include "s3rc/errors.hpp"

namespace s3rc {

void EmConfig::validate() const {
  if (max_iters < 0) throw ConfigError("em: max_iters must be nonnegative");
  if (rel_tol <= 0) throw ConfigError("em: rel_tol must be positive");
  if (variance_floor <= 0) throw ConfigError("em: variance_floor must be positive");
  if (ridge <= 0) throw ConfigError("em: ridge must be positive");
  if (prior_floor <= 0 || prior_floor >= 1) throw ConfigError("em: prior_floor must be in (0,1)");
}

void GmmModel::validate() const {
  const int K = num_classes();
  if (K < 1) throw DimensionError("gmm: no classes");
  if (priors.size() != K) throw DimensionError("gmm: prior count does not match class count");
  if (!means.allFinite() || !priors.allFinite())
    throw NumericalError("gmm: non-finite parameters");
  if (priors.minCoeff() < 0) throw NumericalError("gmm: negative prior");
  if (std::abs(priors.sum() - 1.0) > 1e-10) throw NumericalError("gmm: priors do not sum to 1");
  if (cov_mode == CovMode::Diagonal) {
    if (diag_vars.rows() != means.rows() || diag_vars.cols() != K)
      throw DimensionError("gmm: diagonal variance shape mismatch");
    if (!(diag_vars.minCoeff() > 0)) throw NumericalError("gmm: non-positive variance");
  } else if (cov_mode == CovMode::Full) {
    if (full_covs.size() != static_cast<size_t>(K))
      throw DimensionError("gmm: covariance count does not match class count");
    for (int k = 0; k < K; ++k) {
      const auto& S = full_covs[static_cast<size_t>(k)];
      if (S.rows() != means.rows() || S.cols() != means.rows())
        throw DimensionError("gmm: covariance shape mismatch for class " + std::to_string(k + 1));
      if (!S.isApprox(S.transpose(), 1e-10))
        throw NumericalError("gmm: covariance of class " + std::to_string(k + 1) + " not symmetric");
    }
  }
}

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

void check_alignment(const GmmModel& m, const RectifiedSet& R) {
  if (R.data.rows() != m.dim())
    throw DimensionError("gmm: data dimension " + std::to_string(R.data.rows()) +
                         " does not match model dimension " + std::to_string(m.dim()));
  for (int l : R.labels)
    if (l < 0 || l > m.num_classes())
      throw DegenerateInputError("gmm: label " + std::to_string(l) + " out of range");
}

// Per-class Gaussian log-density evaluator; factorizes full covariances once.
class DensityEval {
 public:
  explicit DensityEval(const GmmModel& m) : m_(m), logdet_(static_cast<size_t>(m.num_classes()), 0.0) {
    if (m.cov_mode == CovMode::Diagonal) {
      for (int k = 0; k < m.num_classes(); ++k)
        logdet_[static_cast<size_t>(k)] = m.diag_vars.col(k).array().log().sum();
    } else if (m.cov_mode == CovMode::Full) {
      llts_.resize(static_cast<size_t>(m.num_classes()));
      for (int k = 0; k < m.num_classes(); ++k) {
        auto& llt = llts_[static_cast<size_t>(k)];
        llt.compute(m.full_covs[static_cast<size_t>(k)]);
        if (llt.info() != Eigen::Success)
          throw NumericalError("gmm: covariance of class " + std::to_string(k + 1) +
                               " is not positive definite");
        logdet_[static_cast<size_t>(k)] =
            2.0 * llt.matrixLLT().diagonal().array().log().sum();
      }
    }
  }

  double log_density(const Eigen::VectorXd& y, int k) const {
    const Eigen::VectorXd diff = y - m_.means.col(k);
    double quad = 0.0;
    switch (m_.cov_mode) {
      case CovMode::Identity:
        quad = diff.squaredNorm();
        break;
      case CovMode::Diagonal:
        quad = (diff.array().square() / m_.diag_vars.col(k).array()).sum();
        break;
      case CovMode::Full:
        quad = llts_[static_cast<size_t>(k)].matrixL().solve(diff).squaredNorm();
        break;
    }
    return -0.5 * (static_cast<double>(m_.dim()) * kLog2Pi + logdet_[static_cast<size_t>(k)] + quad);
  }

 private:
  const GmmModel& m_;
  std::vector<double> logdet_;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> llts_;
};

}  // namespace

GmmModel init_gmm(const RectifiedSet& R, const GalleryDictionary& P,
                  PriorsMode priors_mode, const EmConfig& cfg) {
  cfg.validate();
  const int K = static_cast<int>(P.atoms.cols());
  for (int k = 0; k < K; ++k)
    if (P.class_ids[static_cast<size_t>(k)] != k + 1)
      throw DimensionError("init_gmm: gallery must carry exactly one column per class");
  if (P.atoms.rows() != R.data.rows())
    throw DimensionError("init_gmm: gallery dimension does not match rectified set");

  GmmModel m;
  m.means = P.atoms;
  m.cov_mode = cfg.cov_mode;
  if (cfg.cov_mode == CovMode::Diagonal)
    m.diag_vars = Eigen::MatrixXd::Ones(P.atoms.rows(), K);
  else if (cfg.cov_mode == CovMode::Full)
    m.full_covs.assign(static_cast<size_t>(K),
                       Eigen::MatrixXd::Identity(P.atoms.rows(), P.atoms.rows()));
  m.ridge = cfg.cov_mode == CovMode::Full ? cfg.ridge : 0.0;

  m.priors.resize(K);
  if (priors_mode == PriorsMode::Uniform) {
    m.priors.setConstant(1.0 / K);
  } else {
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(K);
    for (int l : R.labels)
      if (l > 0) {
        if (l > K) throw DimensionError("init_gmm: label exceeds gallery class count");
        counts(l - 1) += 1.0;
      }
    const double n = counts.sum();
    if (n <= 0)
      throw DegenerateInputError("init_gmm: proportional priors need labeled samples");
    for (int k = 0; k < K; ++k)
      if (counts(k) <= 0)
        throw DegenerateInputError("init_gmm: class " + std::to_string(k + 1) +
                                   " has no labeled samples");
    m.priors = counts / n;
  }
  return m;
}

ResponsibilityMatrix e_step(const GmmModel& m, const RectifiedSet& R) {
  m.validate();
  check_alignment(m, R);
  const int N = R.count();
  const int K = m.num_classes();
  const DensityEval de(m);
  const Eigen::ArrayXd log_priors = m.priors.array().log();

  ResponsibilityMatrix out;
  out.Z.resize(N, K);
  for (int i = 0; i < N; ++i) {
    const int l = R.labels[static_cast<size_t>(i)];
    if (l > 0) {
      out.Z.row(i).setZero();
      out.Z(i, l - 1) = 1.0;
      continue;
    }
    Eigen::ArrayXd lw(K);
    for (int k = 0; k < K; ++k) {
      const double ld = de.log_density(R.data.col(i), k);
      if (std::isnan(ld) || ld == std::numeric_limits<double>::infinity())
        throw NumericalError("e_step: non-finite log-density for sample " + std::to_string(i) +
                             ", class " + std::to_string(k + 1));
      lw(k) = log_priors(k) + ld;
    }
    const double mx = lw.maxCoeff();
    if (!std::isfinite(mx))
      throw NumericalError("e_step: all class densities vanished for sample " + std::to_string(i));
    const Eigen::ArrayXd w = (lw - mx).exp();
    out.Z.row(i) = (w / w.sum()).matrix().transpose();
  }
  return out;
}

GmmModel m_step(const RectifiedSet& R, const ResponsibilityMatrix& Z, const EmConfig& cfg,
                const GmmModel* previous) {
  cfg.validate();
  const int N = R.count();
  const int K = static_cast<int>(Z.Z.cols());
  if (Z.Z.rows() != N) throw DimensionError("m_step: responsibility row count mismatch");
  const int d = static_cast<int>(R.data.rows());

  GmmModel m;
  m.cov_mode = cfg.cov_mode;
  m.ridge = cfg.cov_mode == CovMode::Full ? cfg.ridge : 0.0;
  m.means.resize(d, K);
  if (cfg.cov_mode == CovMode::Diagonal) m.diag_vars.resize(d, K);
  if (cfg.cov_mode == CovMode::Full) m.full_covs.resize(static_cast<size_t>(K));
  m.priors.resize(K);

  const Eigen::VectorXd soft_count = Z.Z.colwise().sum();
  for (int k = 0; k < K; ++k) {
    const double nk = soft_count(k);
    if (nk < cfg.prior_floor * N) {
      // Empty cluster: a class is a recognition target and must not vanish.
      m.means.col(k) = previous ? previous->means.col(k)
                                : Eigen::VectorXd(R.data.rowwise().mean());
      if (cfg.cov_mode == CovMode::Diagonal)
        m.diag_vars.col(k) = previous && previous->cov_mode == CovMode::Diagonal
                                 ? Eigen::VectorXd(previous->diag_vars.col(k))
                                 : Eigen::VectorXd(Eigen::VectorXd::Ones(d));
      else if (cfg.cov_mode == CovMode::Full)
        m.full_covs[static_cast<size_t>(k)] =
            previous && previous->cov_mode == CovMode::Full
                ? previous->full_covs[static_cast<size_t>(k)]
                : Eigen::MatrixXd::Identity(d, d);
      m.priors(k) = cfg.prior_floor;
      continue;
    }
    const Eigen::VectorXd mean = (R.data * Z.Z.col(k)) / nk;
    m.means.col(k) = mean;
    m.priors(k) = nk / N;
    if (cfg.cov_mode == CovMode::Diagonal) {
      const Eigen::MatrixXd diff = R.data.colwise() - mean;
      m.diag_vars.col(k) =
          ((diff.array().square().matrix() * Z.Z.col(k)) / nk).cwiseMax(cfg.variance_floor);
    } else if (cfg.cov_mode == CovMode::Full) {
      const Eigen::MatrixXd diff = R.data.colwise() - mean;
      Eigen::MatrixXd S = (diff * Z.Z.col(k).asDiagonal() * diff.transpose()) / nk;
      S = 0.5 * (S + S.transpose());  // enforce exact symmetry
      S += cfg.ridge * Eigen::MatrixXd::Identity(d, d);
      m.full_covs[static_cast<size_t>(k)] = std::move(S);
    }
  }

  m.priors = m.priors.cwiseMax(cfg.prior_floor);
  m.priors /= m.priors.sum();
  return m;
}

double log_likelihood(const GmmModel& m, const RectifiedSet& R) {
  m.validate();
  check_alignment(m, R);
  const DensityEval de(m);
  const Eigen::ArrayXd log_priors = m.priors.array().log();
  const int K = m.num_classes();

  double total = 0.0;
  for (int i = 0; i < R.count(); ++i) {
    const int l = R.labels[static_cast<size_t>(i)];
    if (l > 0) {
      total += log_priors(l - 1) + de.log_density(R.data.col(i), l - 1);
    } else {
      Eigen::ArrayXd lw(K);
      for (int k = 0; k < K; ++k) lw(k) = log_priors(k) + de.log_density(R.data.col(i), k);
      const double mx = lw.maxCoeff();
      total += mx + std::log((lw - mx).exp().sum());
    }
  }
  if (!std::isfinite(total)) throw NumericalError("log_likelihood: non-finite value");
  return total;
}

std::pair<GmmModel, EmTrace> fit_em(const RectifiedSet& R, const GmmModel& init,
                                    const EmConfig& cfg) {
  cfg.validate();
  GmmModel model = init;
  EmTrace trace;
  trace.log_likelihoods.push_back(log_likelihood(model, R));
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    const ResponsibilityMatrix Z = e_step(model, R);
    model = m_step(R, Z, cfg, &model);
    const double ll = log_likelihood(model, R);
    const double prev = trace.log_likelihoods.back();
    trace.log_likelihoods.push_back(ll);
    if (std::abs(ll - prev) / (std::abs(ll) + 1.0) < cfg.rel_tol) {
      trace.converged = true;
      break;
    }
  }
  return {std::move(model), std::move(trace)};
}

}  // namespace s3rc
