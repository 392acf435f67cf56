#include "s3rc/dictionaries.hpp"

#include <algorithm>

#include "s3rc/dataio.hpp"
#include "s3rc/errors.hpp"

namespace s3rc {

int LabeledSet::total() const {
  int n = 0;
  for (const auto& A : classes) n += static_cast<int>(A.cols());
  return n;
}

void LabeledSet::validate() const {
  if (classes.empty()) throw DegenerateInputError("labeled set has no classes");
  for (size_t i = 0; i < classes.size(); ++i) {
    if (classes[i].cols() < 1)
      throw DegenerateInputError("class " + std::to_string(i + 1) + " has no samples");
    if (classes[i].rows() != classes[0].rows())
      throw DimensionError("class " + std::to_string(i + 1) + " has mismatched dimension");
    if (!classes[i].allFinite())
      throw DegenerateInputError("class " + std::to_string(i + 1) + " has non-finite samples");
  }
}

int GenericSet::total() const {
  int n = 0;
  for (const auto& G : classes) n += static_cast<int>(G.cols());
  return n;
}

int GalleryDictionary::num_classes() const {
  int k = 0;
  for (int c : class_ids) k = std::max(k, c);
  return k;
}

LabeledSet labeled_set_from(const FeatureMatrix& X) {
  const int K = X.num_classes();
  if (K < 1) throw DegenerateInputError("dataset has no labeled samples");
  std::vector<std::vector<int>> cols(static_cast<size_t>(K));
  for (int j = 0; j < X.count(); ++j)
    if (X.is_labeled(j)) cols[static_cast<size_t>(X.labels[static_cast<size_t>(j)] - 1)].push_back(j);

  LabeledSet L;
  L.classes.resize(static_cast<size_t>(K));
  for (int k = 0; k < K; ++k) {
    const auto& members = cols[static_cast<size_t>(k)];
    if (members.empty())
      throw DegenerateInputError("class " + std::to_string(k + 1) + " has no labeled samples");
    Eigen::MatrixXd A(X.dim(), static_cast<Eigen::Index>(members.size()));
    for (size_t j = 0; j < members.size(); ++j) A.col(static_cast<Eigen::Index>(j)) = X.data.col(members[j]);
    L.classes[static_cast<size_t>(k)] = std::move(A);
  }
  return L;
}

GalleryDictionary gallery_from_centroids(const LabeledSet& L) {
  L.validate();
  GalleryDictionary P;
  P.atoms.resize(L.dim(), L.num_classes());
  P.class_ids.resize(static_cast<size_t>(L.num_classes()));
  for (int k = 0; k < L.num_classes(); ++k) {
    const Eigen::VectorXd c = L.classes[static_cast<size_t>(k)].rowwise().mean();
    const double n = c.norm();
    if (n < 1e-12)
      throw DegenerateInputError("class " + std::to_string(k + 1) + " centroid is zero");
    P.atoms.col(k) = c / n;
    P.class_ids[static_cast<size_t>(k)] = k + 1;
  }
  return P;
}

GalleryDictionary gallery_from_samples(const LabeledSet& L) {
  L.validate();
  GalleryDictionary P;
  P.atoms.resize(L.dim(), L.total());
  P.class_ids.reserve(static_cast<size_t>(L.total()));
  Eigen::Index col = 0;
  for (int k = 0; k < L.num_classes(); ++k) {
    const auto& A = L.classes[static_cast<size_t>(k)];
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      P.atoms.col(col++) = A.col(j);
      P.class_ids.push_back(k + 1);
    }
  }
  P.atoms = normalize_columns(P.atoms);
  return P;
}

namespace {

// Stacks the given difference columns, dropping those below the 1e-10 norm
// floor, and normalizes the survivors.
VariationDictionary collect_variation(const std::vector<Eigen::VectorXd>& diffs, int dim) {
  std::vector<const Eigen::VectorXd*> kept;
  for (const auto& d : diffs)
    if (d.norm() >= 1e-10) kept.push_back(&d);

  VariationDictionary V;
  V.atoms.resize(dim, static_cast<Eigen::Index>(kept.size()));
  for (size_t j = 0; j < kept.size(); ++j) V.atoms.col(static_cast<Eigen::Index>(j)) = *kept[j];
  if (!kept.empty()) V.atoms = normalize_columns(V.atoms);
  return V;
}

std::vector<Eigen::VectorXd> centroid_differences(const std::vector<Eigen::MatrixXd>& classes) {
  std::vector<Eigen::VectorXd> diffs;
  for (const auto& A : classes) {
    const Eigen::VectorXd c = A.rowwise().mean();
    for (Eigen::Index j = 0; j < A.cols(); ++j) diffs.push_back(A.col(j) - c);
  }
  return diffs;
}

}  // namespace

VariationDictionary variation_centroid_subtraction(const LabeledSet& L) {
  L.validate();
  return collect_variation(centroid_differences(L.classes), L.dim());
}

VariationDictionary variation_prototype_subtraction(const LabeledSet& L,
                                                    const std::vector<int>& prototype_index) {
  L.validate();
  if (prototype_index.size() != static_cast<size_t>(L.num_classes()))
    throw DimensionError("prototype index count does not match class count");
  std::vector<Eigen::VectorXd> diffs;
  for (int k = 0; k < L.num_classes(); ++k) {
    const auto& A = L.classes[static_cast<size_t>(k)];
    const int p = prototype_index[static_cast<size_t>(k)];
    if (p < 0 || p >= A.cols())
      throw DimensionError("prototype index " + std::to_string(p) +
                           " out of range for class " + std::to_string(k + 1));
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      if (j != p) diffs.push_back(A.col(j) - A.col(p));
  }
  return collect_variation(diffs, L.dim());
}

std::pair<GalleryDictionary, VariationDictionary> slspp_dictionaries(
    const Eigen::MatrixXd& T, const GenericSet& G) {
  if (T.cols() < 1) throw DimensionError("gallery matrix has no columns");
  if (!T.allFinite()) throw DegenerateInputError("gallery matrix has non-finite entries");
  GalleryDictionary P;
  P.atoms = normalize_columns(T);
  P.class_ids.resize(static_cast<size_t>(T.cols()));
  for (Eigen::Index k = 0; k < T.cols(); ++k) P.class_ids[static_cast<size_t>(k)] = static_cast<int>(k) + 1;

  for (const auto& Gi : G.classes)
    if (Gi.rows() != T.rows())
      throw DimensionError("generic set dimension does not match gallery");
  VariationDictionary V = collect_variation(centroid_differences(G.classes),
                                            static_cast<int>(T.rows()));
  return {std::move(P), std::move(V)};
}

VariationDictionary load_variation_dictionary(const std::string& path, int expected_rows) {
  Eigen::MatrixXd M = load_matrix_csv(path);
  VariationDictionary V;
  if (M.size() == 0) {
    V.atoms.resize(std::max(expected_rows, 0), 0);
    return V;
  }
  if (expected_rows > 0 && M.rows() != expected_rows)
    throw DimensionError("variation dictionary has " + std::to_string(M.rows()) +
                         " rows, expected " + std::to_string(expected_rows));
  V.atoms = normalize_columns(M);
  return V;
}

}  // namespace s3rc
