#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "s3rc/dataio.hpp"
#include "s3rc/errors.hpp"

using namespace s3rc;

namespace {

std::string temp_path(const std::string& stem) {
  static int counter = 0;
  const auto dir = std::filesystem::temp_directory_path() / "s3rc_dataio_tests";
  std::filesystem::create_directories(dir);
  return (dir / (stem + "_" + std::to_string(counter++) + ".csv")).string();
}

std::string write_file(const std::string& stem, const std::string& content) {
  const std::string path = temp_path(stem);
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

// K classes with n samples each, labels interleaved 1,2,...,K,1,2,... and each
// column's features equal to its index so splits can be traced back.
FeatureMatrix traceable(int K, int n) {
  FeatureMatrix X;
  X.data.resize(2, K * n);
  for (int j = 0; j < K * n; ++j) {
    X.data(0, j) = j;
    X.data(1, j) = -j;
    X.labels.push_back(j % K + 1);
  }
  for (int k = 0; k < K; ++k) X.class_names.push_back(std::to_string(k + 1));
  return X;
}

int count_class(const std::vector<int>& cols, const FeatureMatrix& X, int k) {
  int n = 0;
  for (int j : cols)
    if (X.labels[static_cast<size_t>(j)] == k) ++n;
  return n;
}

}  // namespace

TEST_CASE("load_dataset: labels map in first-appearance order and ? is unlabeled") {
  const std::string path = write_file("basic",
                                      "#dim=2\n"
                                      "a,1,2\n"
                                      "?,3,4\n"
                                      "b,5,6\n"
                                      "a,7,8\n");
  const FeatureMatrix X = load_dataset(path);
  REQUIRE(X.dim() == 2);
  REQUIRE(X.count() == 4);
  CHECK(X.labels == std::vector<int>{1, 0, 2, 1});
  CHECK(X.class_names == std::vector<std::string>{"a", "b"});
  CHECK(X.data(0, 0) == 1.0);
  CHECK(X.data(1, 1) == 4.0);
  CHECK(X.data(0, 3) == 7.0);
}

TEST_CASE("load_dataset: a header with no rows is an empty matrix") {
  const FeatureMatrix X = load_dataset(write_file("empty", "#dim=3\n"));
  CHECK(X.dim() == 3);
  CHECK(X.count() == 0);
  CHECK(X.labels.empty());
  CHECK(X.class_names.empty());
}

TEST_CASE("load_dataset: blank lines and trailing CR are tolerated") {
  const std::string path = write_file("crlf", "#dim=1\r\na,0.5\r\n\r\nb,1.5\r\n");
  const FeatureMatrix X = load_dataset(path);
  CHECK(X.count() == 2);
  CHECK(X.data(0, 1) == 1.5);
}

TEST_CASE("load_dataset: malformed inputs raise parse errors naming the line") {
  CHECK_THROWS_WITH_AS(load_dataset(temp_path("missing")), doctest::Contains("cannot open"),
                       ParseError);
  CHECK_THROWS_WITH_AS(load_dataset(write_file("nohdr", "a,1,2\n")),
                       doctest::Contains("line 1"), ParseError);
  CHECK_THROWS_WITH_AS(load_dataset(write_file("dim0", "#dim=0\n")),
                       doctest::Contains("invalid dimension"), ParseError);
  CHECK_THROWS_WITH_AS(load_dataset(write_file("ragged", "#dim=2\na,1\n")),
                       doctest::Contains("line 2"), ParseError);
  CHECK_THROWS_WITH_AS(load_dataset(write_file("alpha", "#dim=1\na,zzz\n")),
                       doctest::Contains("non-numeric"), ParseError);
  CHECK_THROWS_WITH_AS(load_dataset(write_file("nolabel", "#dim=1\n,1\n")),
                       doctest::Contains("empty label"), ParseError);
}

TEST_CASE("save_dataset / load_dataset: round trip is bit-exact") {
  FeatureMatrix X;
  X.data.resize(3, 3);
  X.data << 1.0 / 3.0, -2.5e-7, 3.141592653589793, 0.1, 1e300, -0.0, 7, 1e-300, 2.2250738585072014e-308;
  X.labels = {1, 0, 2};
  X.class_names = {"u", "v"};

  const std::string path = temp_path("roundtrip");
  save_dataset(path, X);
  const FeatureMatrix Y = load_dataset(path);
  CHECK(Y.data == X.data);  // %.17g preserves doubles exactly
  CHECK(Y.labels == X.labels);
  CHECK(Y.class_names == X.class_names);
}

TEST_CASE("load_matrix_csv / save_matrix_csv: round trip and shape checks") {
  Eigen::MatrixXd M(2, 3);
  M << 0.1, 1.0 / 7.0, -5, 2e-9, 0, 42;
  const std::string path = temp_path("matrix");
  save_matrix_csv(path, M);
  CHECK(load_matrix_csv(path) == M);

  CHECK(load_matrix_csv(write_file("mat_empty", "")).size() == 0);
  CHECK_THROWS_WITH_AS(load_matrix_csv(write_file("mat_ragged", "1,2\n3\n")),
                       doctest::Contains("line 2"), ParseError);
}

TEST_CASE("atomic_write: replaces the target and leaves no temporary behind") {
  const std::string path = temp_path("atomic");
  atomic_write(path, "first\n");
  atomic_write(path, "second\n");
  std::ifstream in(path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(content == "second\n");
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
}

TEST_CASE("split: transductive test set aliases the unlabeled pool") {
  const FeatureMatrix X = traceable(3, 8);
  SplitSpec spec;
  spec.labeled_per_class = 2;
  const Split s = split(X, Protocol::Transductive, spec, 11);

  CHECK(s.labeled.size() == 6);
  CHECK(s.unlabeled_train.size() == 18);
  CHECK(s.test == s.unlabeled_train);
  for (int k = 1; k <= 3; ++k) {
    CHECK(count_class(s.labeled, X, k) == 2);
    CHECK(count_class(s.unlabeled_train, X, k) == 6);
  }
  // the two groups partition all 24 columns
  std::vector<int> all = s.labeled;
  all.insert(all.end(), s.unlabeled_train.begin(), s.unlabeled_train.end());
  std::sort(all.begin(), all.end());
  for (int j = 0; j < 24; ++j) CHECK(all[static_cast<size_t>(j)] == j);
}

TEST_CASE("split: inductive halves the rest into unlabeled-train and test") {
  const FeatureMatrix X = traceable(2, 12);
  SplitSpec spec;
  spec.labeled_per_class = 2;
  spec.test_fraction = 0.5;
  const Split s = split(X, Protocol::Inductive, spec, 3);

  CHECK(s.labeled.size() == 4);
  CHECK(s.test.size() == 10);
  CHECK(s.unlabeled_train.size() == 10);
  for (int k = 1; k <= 2; ++k) {
    CHECK(count_class(s.test, X, k) == 5);
    CHECK(count_class(s.unlabeled_train, X, k) == 5);
  }
  std::vector<int> all = s.labeled;
  all.insert(all.end(), s.unlabeled_train.begin(), s.unlabeled_train.end());
  all.insert(all.end(), s.test.begin(), s.test.end());
  std::sort(all.begin(), all.end());
  for (int j = 0; j < 24; ++j) CHECK(all[static_cast<size_t>(j)] == j);
}

TEST_CASE("split: the same seed reproduces the split; another seed moves it") {
  const FeatureMatrix X = traceable(3, 9);
  SplitSpec spec;
  spec.labeled_per_class = 3;
  const Split a = split(X, Protocol::Transductive, spec, 21);
  const Split b = split(X, Protocol::Transductive, spec, 21);
  CHECK(a.labeled == b.labeled);
  CHECK(a.unlabeled_train == b.unlabeled_train);
  const Split c = split(X, Protocol::Transductive, spec, 22);
  CHECK(a.labeled != c.labeled);
}

TEST_CASE("split: rejects unlabeled input, tiny classes, and bad parameters") {
  FeatureMatrix X = traceable(2, 4);
  X.labels[1] = 0;
  SplitSpec spec;
  CHECK_THROWS_WITH_AS(split(X, Protocol::Transductive, spec, 1),
                       doctest::Contains("column 1"), DegenerateInputError);

  // class sizes 3 and 2: class 2 cannot give 2 labeled + 1
  FeatureMatrix Y;
  Y.data.resize(1, 5);
  Y.data << 0, 1, 2, 3, 4;
  Y.labels = {1, 1, 1, 2, 2};
  Y.class_names = {"1", "2"};
  spec.labeled_per_class = 2;
  CHECK_THROWS_WITH_AS(split(Y, Protocol::Transductive, spec, 1),
                       doctest::Contains("class 2"), DegenerateInputError);

  spec.labeled_per_class = 0;
  CHECK_THROWS_AS(split(Y, Protocol::Transductive, spec, 1), ConfigError);

  spec.labeled_per_class = 1;
  spec.test_fraction = 1.0;
  CHECK_THROWS_AS(split(Y, Protocol::Inductive, spec, 1), ConfigError);

  // rest = 1 per class cannot fill unlabeled-train and test
  spec.test_fraction = 0.5;
  const FeatureMatrix Z = traceable(2, 2);
  CHECK_THROWS_WITH_AS(split(Z, Protocol::Inductive, spec, 1),
                       doctest::Contains("cannot fill"), DegenerateInputError);
}

TEST_CASE("generate_synthetic: labeled-session columns come first, grouped by class") {
  SynthSpec spec;
  spec.K = 3;
  spec.d = 8;
  spec.m = 4;
  spec.n_l = 2;
  spec.n_u = 3;
  const auto [X, truth] = generate_synthetic(spec);

  REQUIRE(X.count() == 15);
  REQUIRE(X.dim() == 8);
  CHECK(X.class_names == std::vector<std::string>{"1", "2", "3"});
  for (int k = 0; k < 3; ++k)
    for (int t = 0; t < 2; ++t) {
      const int j = 2 * k + t;
      CHECK(X.labels[static_cast<size_t>(j)] == k + 1);
      CHECK(truth.true_class[static_cast<size_t>(j)] == k + 1);
      CHECK(truth.from_unlabeled_session[static_cast<size_t>(j)] == 0);
    }
  for (int j = 6; j < 15; ++j) {
    CHECK(X.labels[static_cast<size_t>(j)] == 0);
    CHECK(truth.true_class[static_cast<size_t>(j)] == (j - 6) / 3 + 1);
    CHECK(truth.from_unlabeled_session[static_cast<size_t>(j)] == 1);
  }
  CHECK(truth.base.cols() == 3);
  CHECK(truth.atoms.cols() == 4);
  CHECK(truth.codes.rows() == 4);
  CHECK(truth.codes.cols() == 15);
}

TEST_CASE("generate_synthetic: variation codes are 2-sparse with entries in [-1, 1]") {
  SynthSpec spec;
  spec.K = 2;
  spec.d = 6;
  spec.m = 5;
  spec.n_l = 2;
  spec.n_u = 4;
  const auto [X, truth] = generate_synthetic(spec);
  for (int j = 0; j < truth.codes.cols(); ++j) {
    int nnz = 0;
    for (int i = 0; i < truth.codes.rows(); ++i)
      if (truth.codes(i, j) != 0.0) {
        ++nnz;
        CHECK(std::abs(truth.codes(i, j)) <= 1.0);
      }
    CHECK(nnz == 2);
  }
}

TEST_CASE("generate_synthetic: eta = 0 collapses both session prototypes onto the base") {
  SynthSpec spec;
  spec.K = 4;
  spec.d = 10;
  spec.eta = 0.0;
  const auto [X, truth] = generate_synthetic(spec);
  CHECK(truth.proto_l == truth.proto_u);
  CHECK(truth.proto_l == truth.base);
}

TEST_CASE("generate_synthetic: eta = rho = sigma = 0 emits the base prototypes verbatim") {
  SynthSpec spec;
  spec.K = 3;
  spec.d = 7;
  spec.m = 2;
  spec.n_l = 1;
  spec.n_u = 2;
  spec.eta = 0.0;
  spec.rho = 0.0;
  spec.sigma = 0.0;
  const auto [X, truth] = generate_synthetic(spec);
  for (int j = 0; j < X.count(); ++j) {
    const int k = truth.true_class[static_cast<size_t>(j)] - 1;
    CHECK((X.data.col(j) - truth.base.col(k)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("generate_synthetic: noiseless samples reconstruct from the truth exactly") {
  SynthSpec spec;
  spec.K = 2;
  spec.d = 9;
  spec.m = 3;
  spec.n_l = 2;
  spec.n_u = 2;
  spec.eta = 0.3;
  spec.rho = 0.4;
  spec.sigma = 0.0;
  const auto [X, truth] = generate_synthetic(spec);
  for (int j = 0; j < X.count(); ++j) {
    const int k = truth.true_class[static_cast<size_t>(j)] - 1;
    const Eigen::VectorXd proto = truth.from_unlabeled_session[static_cast<size_t>(j)]
                                      ? truth.proto_u.col(k)
                                      : truth.proto_l.col(k);
    const Eigen::VectorXd expect = proto + spec.rho * (truth.atoms * truth.codes.col(j));
    CHECK((X.data.col(j) - expect).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("generate_synthetic: identical specs generate bit-identical data") {
  SynthSpec spec;  // defaults: K=10, d=50, m=8
  spec.n_u = 5;
  const auto [X1, t1] = generate_synthetic(spec);
  const auto [X2, t2] = generate_synthetic(spec);
  CHECK(X1.data == X2.data);
  CHECK(t1.codes == t2.codes);
  CHECK(t1.base == t2.base);
  spec.seed = 8;
  const auto [X3, t3] = generate_synthetic(spec);
  CHECK(X1.data != X3.data);
}

TEST_CASE("generate_synthetic: invalid specs are config errors") {
  SynthSpec spec;
  spec.K = 0;
  CHECK_THROWS_AS(generate_synthetic(spec), ConfigError);
  spec = SynthSpec{};
  spec.m = -1;
  CHECK_THROWS_AS(generate_synthetic(spec), ConfigError);
  spec = SynthSpec{};
  spec.eta = -0.1;
  CHECK_THROWS_AS(generate_synthetic(spec), ConfigError);
}
