#include "s3rc/rectifier.hpp"

#include <iostream>

#include "s3rc/errors.hpp"
#include "s3rc/matrix_core.hpp"

namespace s3rc {

Eigen::VectorXd rectify_unlabeled(const Eigen::VectorXd& y, const VariationDictionary& V,
                                  const Eigen::VectorXd& beta) {
  if (beta.size() != V.atoms.cols())
    throw DimensionError("rectify_unlabeled: beta length does not match V");
  if (!V.empty() && V.atoms.rows() != y.size())
    throw DimensionError("rectify_unlabeled: V rows do not match sample dimension");
  Eigen::VectorXd r = V.empty() ? y : Eigen::VectorXd(y - V.atoms * beta);
  const double n = r.norm();
  if (n < 1e-10)
    throw DegenerateInputError("rectify_unlabeled: rectified vector is numerically zero");
  return r / n;
}

RectifiedSet build_rectified_set(const LabeledSet& L, const Eigen::MatrixXd& U,
                                 const GalleryDictionary& P, const VariationDictionary& V,
                                 const SolverConfig& cfg) {
  L.validate();
  if (U.cols() > 0 && U.rows() != L.dim())
    throw DimensionError("build_rectified_set: unlabeled dimension does not match labeled");

  RectifiedSet out;
  out.data.resize(L.dim(), L.total() + U.cols());
  Eigen::Index col = 0;

  for (int k = 0; k < L.num_classes(); ++k) {
    const auto& A = L.classes[static_cast<size_t>(k)];
    Eigen::VectorXd c = A.rowwise().mean();
    const double n = c.norm();
    if (n < 1e-12)
      throw DegenerateInputError("build_rectified_set: class " + std::to_string(k + 1) +
                                 " centroid is zero");
    c /= n;
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      out.data.col(col++) = c;
      out.labels.push_back(k + 1);
      out.provenance.push_back(Provenance::LabeledCentroid);
    }
  }

  for (Eigen::Index j = 0; j < U.cols(); ++j) {
    const SparseCode code = solve_joint(P, V, U.col(j), cfg);
    Eigen::VectorXd r = V.empty() ? Eigen::VectorXd(U.col(j))
                                  : Eigen::VectorXd(U.col(j) - V.atoms * code.beta);
    const double n = r.norm();
    if (n < 1e-10) {
      std::cerr << "warning: unlabeled column " << j
                << " rectified to a zero vector; excluded\n";
      out.excluded_unlabeled.push_back(static_cast<int>(j));
      continue;
    }
    out.data.col(col++) = r / n;
    out.labels.push_back(0);
    out.provenance.push_back(Provenance::UnlabeledRectified);
  }
  out.data.conservativeResize(Eigen::NoChange, col);
  return out;
}

}  // namespace s3rc
