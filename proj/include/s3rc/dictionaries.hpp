#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "s3rc/matrix_core.hpp"

namespace s3rc {

// Labeled training data grouped by class: classes[i] holds the samples of
// class i+1, one per column.  All matrices share the row dimension.
struct LabeledSet {
  std::vector<Eigen::MatrixXd> classes;

  int num_classes() const { return static_cast<int>(classes.size()); }
  int dim() const { return classes.empty() ? 0 : static_cast<int>(classes[0].rows()); }
  int total() const;
  void validate() const;
};

// Auxiliary labeled data from classes disjoint from the gallery; same layout.
struct GenericSet {
  std::vector<Eigen::MatrixXd> classes;

  int num_classes() const { return static_cast<int>(classes.size()); }
  int total() const;
};

// Gallery dictionary P: unit columns, class_ids[j] gives the class of column j.
// One column per class for the prototype galleries, several for sample
// galleries (the per-sample baseline).
struct GalleryDictionary {
  Eigen::MatrixXd atoms;
  std::vector<int> class_ids;

  int num_classes() const;
};

// Variation dictionary V: unit columns spanning nuisance directions; may be
// empty (m = 0).
struct VariationDictionary {
  Eigen::MatrixXd atoms;

  int size() const { return static_cast<int>(atoms.cols()); }
  bool empty() const { return atoms.cols() == 0; }
};

// Groups the labeled columns of X by class (input order preserved within a
// class).  Classes with no labeled sample raise DegenerateInputError.
LabeledSet labeled_set_from(const FeatureMatrix& X);

// P with one unit column per class: normalize(mean of the class samples).
GalleryDictionary gallery_from_centroids(const LabeledSet& L);

// P with one unit column per labeled sample, grouped by class then input order.
GalleryDictionary gallery_from_samples(const LabeledSet& L);

// V from within-class deviations: columns A_i - c_i, stacked over classes.
// Columns with pre-normalization norm below 1e-10 are dropped.
VariationDictionary variation_centroid_subtraction(const LabeledSet& L);

// V from deviations against one designated prototype sample per class;
// prototype_index[i] is a column index into classes[i].
VariationDictionary variation_prototype_subtraction(const LabeledSet& L,
                                                    const std::vector<int>& prototype_index);

// Single-sample-per-person construction: P = normalized T (one column per
// class), V from within-class deviations of the generic set.
std::pair<GalleryDictionary, VariationDictionary> slspp_dictionaries(
    const Eigen::MatrixXd& T, const GenericSet& G);

// Reads a matrix CSV (one row per line, comma-separated) and normalizes its
// columns.  expected_rows > 0 enforces the row count (the active feature
// dimension).  An empty file yields an empty dictionary.
VariationDictionary load_variation_dictionary(const std::string& path,
                                              int expected_rows = 0);

}  // namespace s3rc
