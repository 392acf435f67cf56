#include <cmath>

#include "s3rc/dataio.hpp"
#include "s3rc/errors.hpp"
#include "s3rc/rng.hpp"

namespace s3rc {

void SynthSpec::validate() const {
  if (K < 1 || d < 1 || n_l < 1 || n_u < 1)
    throw ConfigError("synth: K, d, n_l, n_u must all be at least 1");
  if (m < 0) throw ConfigError("synth: m must be nonnegative");
  if (eta < 0 || rho < 0 || sigma < 0)
    throw ConfigError("synth: eta, rho, sigma must be nonnegative");
}

namespace {

// Distinct rng streams; each (stream, counter) pair is drawn at most once.
enum Stream : uint64_t {
  kBase = 1,
  kSessionL = 2,
  kSessionU = 3,
  kAtoms = 4,
  kSupport = 5,
  kValues = 6,
  kNoise = 7,
};

Eigen::VectorXd unit_gaussian(uint64_t seed, uint64_t stream, uint64_t block, int d) {
  Eigen::VectorXd v(d);
  for (int r = 0; r < d; ++r)
    v(r) = rng::gaussian(seed, stream, block * static_cast<uint64_t>(d) + static_cast<uint64_t>(r));
  const double n = v.norm();
  if (n < 1e-12) {  // unreachable in any practical draw
    v.setZero();
    v(0) = 1.0;
    return v;
  }
  return v / n;
}

}  // namespace

std::pair<FeatureMatrix, SynthTruth> generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  const int N = spec.K * (spec.n_l + spec.n_u);

  SynthTruth truth;
  truth.base.resize(spec.d, spec.K);
  truth.proto_l.resize(spec.d, spec.K);
  truth.proto_u.resize(spec.d, spec.K);
  for (int k = 0; k < spec.K; ++k) {
    truth.base.col(k) = unit_gaussian(spec.seed, kBase, static_cast<uint64_t>(k), spec.d);
    if (spec.eta == 0.0) {
      // keep g_k bit-exact; renormalizing a unit vector drifts an ulp
      truth.proto_l.col(k) = truth.base.col(k);
      truth.proto_u.col(k) = truth.base.col(k);
      continue;
    }
    const Eigen::VectorXd ul = unit_gaussian(spec.seed, kSessionL, static_cast<uint64_t>(k), spec.d);
    const Eigen::VectorXd uu = unit_gaussian(spec.seed, kSessionU, static_cast<uint64_t>(k), spec.d);
    truth.proto_l.col(k) = (truth.base.col(k) + spec.eta * ul).normalized();
    truth.proto_u.col(k) = (truth.base.col(k) + spec.eta * uu).normalized();
  }

  truth.atoms.resize(spec.d, spec.m);
  for (int t = 0; t < spec.m; ++t)
    truth.atoms.col(t) = unit_gaussian(spec.seed, kAtoms, static_cast<uint64_t>(t), spec.d);

  truth.codes = Eigen::MatrixXd::Zero(spec.m, N);
  truth.true_class.resize(static_cast<size_t>(N));
  truth.from_unlabeled_session.resize(static_cast<size_t>(N));

  FeatureMatrix X;
  X.data.resize(spec.d, N);
  X.labels.resize(static_cast<size_t>(N));
  for (int k = 0; k < spec.K; ++k) X.class_names.push_back(std::to_string(k + 1));

  int col = 0;
  for (int session = 0; session < 2; ++session) {
    const bool unlabeled = session == 1;
    const int per_class = unlabeled ? spec.n_u : spec.n_l;
    for (int k = 0; k < spec.K; ++k) {
      for (int t = 0; t < per_class; ++t, ++col) {
        const uint64_t si = static_cast<uint64_t>(col);
        Eigen::VectorXd x = unlabeled ? truth.proto_u.col(k) : truth.proto_l.col(k);
        if (spec.m > 0) {
          const uint64_t i1 = rng::below(spec.seed, kSupport, 2 * si, static_cast<uint64_t>(spec.m));
          uint64_t i2 = i1;
          if (spec.m > 1) {
            const uint64_t j = rng::below(spec.seed, kSupport, 2 * si + 1,
                                          static_cast<uint64_t>(spec.m) - 1);
            i2 = j + (j >= i1 ? 1 : 0);
          }
          truth.codes(static_cast<Eigen::Index>(i1), col) += rng::uniform_pm(spec.seed, kValues, 2 * si);
          truth.codes(static_cast<Eigen::Index>(i2), col) += rng::uniform_pm(spec.seed, kValues, 2 * si + 1);
          x += spec.rho * (truth.atoms * truth.codes.col(col));
        }
        if (spec.sigma > 0) {
          for (int r = 0; r < spec.d; ++r)
            x(r) += spec.sigma * rng::gaussian(spec.seed, kNoise,
                                               si * static_cast<uint64_t>(spec.d) +
                                                   static_cast<uint64_t>(r));
        }
        X.data.col(col) = x;
        X.labels[static_cast<size_t>(col)] = unlabeled ? 0 : k + 1;
        truth.true_class[static_cast<size_t>(col)] = k + 1;
        truth.from_unlabeled_session[static_cast<size_t>(col)] = unlabeled ? 1 : 0;
      }
    }
  }
  return {std::move(X), std::move(truth)};
}

}  // namespace s3rc
