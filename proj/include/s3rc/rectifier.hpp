#pragma once

#include <Eigen/Dense>
#include <vector>

#include "s3rc/dictionaries.hpp"
#include "s3rc/l1_solver.hpp"

namespace s3rc {

enum class Provenance { LabeledCentroid, UnlabeledRectified };

// The rectified dataset fed to the GMM: unit columns, labeled columns carry
// their class's centroid (duplicated per sample so class weight reflects the
// sample count), unlabeled columns carry normalize(y - V*beta).
struct RectifiedSet {
  Eigen::MatrixXd data;
  std::vector<int> labels;  // class id, or 0 for unlabeled
  std::vector<Provenance> provenance;
  std::vector<int> excluded_unlabeled;  // column indices into the original U

  int count() const { return static_cast<int>(data.cols()); }
};

// normalize(y - V*beta).  Norm below 1e-10 raises DegenerateInputError.
Eigen::VectorXd rectify_unlabeled(const Eigen::VectorXd& y, const VariationDictionary& V,
                                  const Eigen::VectorXd& beta);

// Labeled block (normalized class centroids, one column per labeled sample)
// followed by the unlabeled block (each column rectified with its own sparse
// code beta from the joint solve on [P V]).  Degenerate rectified columns are
// skipped and recorded in excluded_unlabeled, with a warning on stderr.
RectifiedSet build_rectified_set(const LabeledSet& L, const Eigen::MatrixXd& U,
                                 const GalleryDictionary& P, const VariationDictionary& V,
                                 const SolverConfig& cfg);

}  // namespace s3rc
