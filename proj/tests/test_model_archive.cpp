#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "s3rc/classifier.hpp"
#include "s3rc/dataio.hpp"
#include "s3rc/errors.hpp"
#include "s3rc/model_archive.hpp"

using namespace s3rc;
using nlohmann::json;

namespace {

std::string temp_path(const std::string& stem) {
  static int counter = 0;
  const auto dir = std::filesystem::temp_directory_path() / "s3rc_archive_tests";
  std::filesystem::create_directories(dir);
  return (dir / (stem + "_" + std::to_string(counter++) + ".json")).string();
}

FittedModel fitted(Method method, CovMode cov = CovMode::Diagonal) {
  SynthSpec sp;
  sp.K = 3;
  sp.d = 12;
  sp.m = 2;
  sp.n_l = 2;
  sp.n_u = 3;
  sp.eta = 0.2;
  sp.rho = 0.3;
  sp.sigma = 0.01;
  sp.seed = 42;
  const auto [X, truth] = generate_synthetic(sp);

  PipelineConfig cfg;
  cfg.method = method;
  cfg.lambda = 1e-3;
  cfg.pca_dim = 6;
  cfg.em.cov_mode = cov;
  cfg.em.max_iters = 5;
  return fit_pipeline(X, cfg);
}

void check_roundtrip(const FittedModel& a, const FittedModel& b) {
  CHECK(b.pca.mean == a.pca.mean);
  CHECK(b.pca.components == a.pca.components);
  CHECK(b.pca.eigenvalues == a.pca.eigenvalues);
  CHECK(b.gallery.atoms == a.gallery.atoms);
  CHECK(b.gallery.class_ids == a.gallery.class_ids);
  CHECK(b.variation.atoms == a.variation.atoms);
  REQUIRE(b.gmm.has_value() == a.gmm.has_value());
  if (a.gmm.has_value()) {
    CHECK(b.gmm->means == a.gmm->means);
    CHECK(b.gmm->priors == a.gmm->priors);
    CHECK(b.gmm->cov_mode == a.gmm->cov_mode);
    CHECK(b.gmm->ridge == a.gmm->ridge);
    CHECK(b.gmm->diag_vars == a.gmm->diag_vars);
    REQUIRE(b.gmm->full_covs.size() == a.gmm->full_covs.size());
    for (size_t k = 0; k < a.gmm->full_covs.size(); ++k)
      CHECK(b.gmm->full_covs[k] == a.gmm->full_covs[k]);
  }
  CHECK(b.trace.log_likelihoods == a.trace.log_likelihoods);
  CHECK(b.trace.converged == a.trace.converged);
  CHECK(b.class_names == a.class_names);

  CHECK(b.config.method == a.config.method);
  CHECK(b.config.lambda == a.config.lambda);
  CHECK(b.config.pca_dim == a.config.pca_dim);
  CHECK(b.config.pca_on_unlabeled == a.config.pca_on_unlabeled);
  CHECK(b.config.priors_mode == a.config.priors_mode);
  CHECK(b.config.variation_source == a.config.variation_source);
  CHECK(b.config.variation_file == a.config.variation_file);
  CHECK(b.config.prototype_index == a.config.prototype_index);
  CHECK(b.config.solver_max_iters == a.config.solver_max_iters);
  CHECK(b.config.kkt_tol == a.config.kkt_tol);
  CHECK(b.config.em.max_iters == a.config.em.max_iters);
  CHECK(b.config.em.rel_tol == a.config.em.rel_tol);
  CHECK(b.config.em.cov_mode == a.config.em.cov_mode);
  CHECK(b.config.em.variance_floor == a.config.em.variance_floor);
  CHECK(b.config.em.ridge == a.config.em.ridge);
  CHECK(b.config.em.prior_floor == a.config.em.prior_floor);
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return json::parse(buf.str());
}

void write_json(const std::string& path, const json& j) { atomic_write(path, j.dump(2) + "\n"); }

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("save_model / load_model: s3rc round trip is exact") {
  const FittedModel M = fitted(Method::S3RC);
  REQUIRE(M.gmm.has_value());
  const std::string path = temp_path("s3rc");
  save_model(path, M);
  check_roundtrip(M, load_model(path));
}

TEST_CASE("save_model / load_model: every covariance mode round trips") {
  for (const CovMode cov : {CovMode::Identity, CovMode::Diagonal, CovMode::Full}) {
    const FittedModel M = fitted(Method::S3RC, cov);
    const std::string path = temp_path("cov");
    save_model(path, M);
    const FittedModel L = load_model(path);
    check_roundtrip(M, L);
    CHECK(L.gmm->cov_mode == cov);
  }
}

TEST_CASE("save_model / load_model: baselines carry no mixture state") {
  for (const Method m : {Method::SRC, Method::ESRC, Method::SSRC}) {
    const FittedModel M = fitted(m);
    CHECK_FALSE(M.gmm.has_value());
    const std::string path = temp_path("baseline");
    save_model(path, M);
    check_roundtrip(M, load_model(path));
  }
}

TEST_CASE("save_model: serialization is byte-deterministic") {
  const FittedModel M = fitted(Method::S3RC);
  const std::string p1 = temp_path("det");
  const std::string p2 = temp_path("det");
  save_model(p1, M);
  save_model(p2, M);
  CHECK(read_bytes(p1) == read_bytes(p2));
}

TEST_CASE("load_model: unknown fields are ignored") {
  const FittedModel M = fitted(Method::S3RC);
  const std::string path = temp_path("future");
  save_model(path, M);
  json j = read_json(path);
  j["future_field"] = {{"anything", 1}};
  j["config"]["new_knob"] = 0.5;
  j["gmm"]["annotation"] = "x";
  write_json(path, j);
  check_roundtrip(M, load_model(path));
}

TEST_CASE("load_model: version and structural problems are parse errors") {
  const FittedModel M = fitted(Method::SSRC);
  const std::string path = temp_path("bad");

  save_model(path, M);
  json j = read_json(path);
  j["format_version"] = 2;
  write_json(path, j);
  CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("format_version"), ParseError);

  save_model(path, M);
  j = read_json(path);
  j.erase("gallery");
  write_json(path, j);
  CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("gallery"), ParseError);

  save_model(path, M);
  j = read_json(path);
  j["pca"]["components"][0][0] = "oops";
  write_json(path, j);
  CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("non-numeric"), ParseError);

  atomic_write(path, "{ not json\n");
  CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("invalid JSON"), ParseError);

  CHECK_THROWS_WITH_AS(load_model(temp_path("missing")), doctest::Contains("cannot open"),
                       ParseError);
}

TEST_CASE("load_model: inconsistent shapes are dimension errors") {
  const FittedModel M = fitted(Method::S3RC);
  const std::string path = temp_path("shape");

  save_model(path, M);
  json j = read_json(path);
  j["gallery"]["class_ids"].push_back(9);
  write_json(path, j);
  CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("class_ids"), DimensionError);

  save_model(path, M);
  j = read_json(path);
  j["pca"]["mean"].erase(0);
  write_json(path, j);
  CHECK_THROWS_AS(load_model(path), DimensionError);

  save_model(path, M);
  j = read_json(path);
  j["gmm"]["means"] = {{1.0, 0.0}};  // wrong shape entirely
  write_json(path, j);
  CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("gmm means"), DimensionError);

  save_model(path, M);
  j = read_json(path);
  j["variation"]["atoms"] = {{1.0}};  // one row, gallery has six
  write_json(path, j);
  CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("variation"), DimensionError);
}

TEST_CASE("load_model: unknown enum strings are config errors") {
  const FittedModel M = fitted(Method::ESRC);
  const std::string path = temp_path("enum");
  save_model(path, M);
  json j = read_json(path);
  j["config"]["method"] = "bogus";
  write_json(path, j);
  CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("bogus"), ConfigError);
}

TEST_CASE("enum string mappings are inverses") {
  for (const Method m : {Method::S3RC, Method::ESRC, Method::SSRC, Method::SRC})
    CHECK(method_from_string(to_string(m)) == m);
  for (const CovMode c : {CovMode::Identity, CovMode::Diagonal, CovMode::Full})
    CHECK(cov_mode_from_string(to_string(c)) == c);
  for (const PriorsMode p : {PriorsMode::LabeledProportion, PriorsMode::Uniform})
    CHECK(priors_mode_from_string(to_string(p)) == p);
  for (const VariationSource v : {VariationSource::Centroid, VariationSource::Prototype,
                                  VariationSource::Generic, VariationSource::File})
    CHECK(variation_source_from_string(to_string(v)) == v);
}
