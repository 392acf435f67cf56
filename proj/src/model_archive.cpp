#include "s3rc/model_archive.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "s3rc/dataio.hpp"
#include "s3rc/errors.hpp"

namespace s3rc {

using nlohmann::json;

std::string to_string(Method m) {
  switch (m) {
    case Method::S3RC: return "s3rc";
    case Method::ESRC: return "esrc";
    case Method::SSRC: return "ssrc";
    case Method::SRC: return "src";
  }
  return "s3rc";
}

std::string to_string(CovMode m) {
  switch (m) {
    case CovMode::Identity: return "identity";
    case CovMode::Diagonal: return "diagonal";
    case CovMode::Full: return "full";
  }
  return "diagonal";
}

std::string to_string(PriorsMode m) {
  return m == PriorsMode::Uniform ? "uniform" : "proportional";
}

std::string to_string(VariationSource v) {
  switch (v) {
    case VariationSource::Centroid: return "centroid";
    case VariationSource::Prototype: return "prototype";
    case VariationSource::Generic: return "generic";
    case VariationSource::File: return "file";
  }
  return "centroid";
}

Method method_from_string(const std::string& s) {
  if (s == "s3rc") return Method::S3RC;
  if (s == "esrc") return Method::ESRC;
  if (s == "ssrc") return Method::SSRC;
  if (s == "src") return Method::SRC;
  throw ConfigError("unknown method '" + s + "'");
}

CovMode cov_mode_from_string(const std::string& s) {
  if (s == "identity") return CovMode::Identity;
  if (s == "diagonal") return CovMode::Diagonal;
  if (s == "full") return CovMode::Full;
  throw ConfigError("unknown covariance mode '" + s + "'");
}

PriorsMode priors_mode_from_string(const std::string& s) {
  if (s == "proportional") return PriorsMode::LabeledProportion;
  if (s == "uniform") return PriorsMode::Uniform;
  throw ConfigError("unknown priors mode '" + s + "'");
}

VariationSource variation_source_from_string(const std::string& s) {
  if (s == "centroid") return VariationSource::Centroid;
  if (s == "prototype") return VariationSource::Prototype;
  if (s == "generic") return VariationSource::Generic;
  if (s == "file") return VariationSource::File;
  throw ConfigError("unknown variation source '" + s + "'");
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& name) {
  if (!j.is_array()) throw ParseError("archive: " + name + " must be an array of rows");
  const size_t rows = j.size();
  size_t cols = 0;
  if (rows > 0) {
    if (!j[0].is_array()) throw ParseError("archive: " + name + " rows must be arrays");
    cols = j[0].size();
  }
  Eigen::MatrixXd M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      throw ParseError("archive: " + name + " row " + std::to_string(i) + " is ragged");
    for (size_t c = 0; c < cols; ++c) {
      if (!j[i][c].is_number()) throw ParseError("archive: " + name + " has a non-numeric entry");
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = j[i][c].get<double>();
    }
  }
  return M;
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& name) {
  if (!j.is_array()) throw ParseError("archive: " + name + " must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ParseError("archive: " + name + " has a non-numeric entry");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

const json& field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ParseError(std::string("archive: missing field '") + key + "'");
  return *it;
}

}  // namespace

void save_model(const std::string& path, const FittedModel& model) {
  json j;
  j["format_version"] = kArchiveFormatVersion;
  j["pca"] = {{"mean", vector_to_json(model.pca.mean)},
              {"components", matrix_to_json(model.pca.components)},
              {"eigenvalues", vector_to_json(model.pca.eigenvalues)}};
  j["gallery"] = {{"atoms", matrix_to_json(model.gallery.atoms)},
                  {"class_ids", model.gallery.class_ids}};
  j["variation"] = {{"atoms", matrix_to_json(model.variation.atoms)}};
  if (model.gmm.has_value()) {
    const GmmModel& g = *model.gmm;
    json cov;
    if (g.cov_mode == CovMode::Diagonal) {
      cov = matrix_to_json(g.diag_vars);
    } else if (g.cov_mode == CovMode::Full) {
      cov = json::array();
      for (const auto& S : g.full_covs) cov.push_back(matrix_to_json(S));
    } else {
      cov = nullptr;
    }
    j["gmm"] = {{"means", matrix_to_json(g.means)},
                {"cov_mode", to_string(g.cov_mode)},
                {"covariances", std::move(cov)},
                {"priors", vector_to_json(g.priors)},
                {"ridge", g.ridge}};
  } else {
    j["gmm"] = nullptr;
  }
  j["em_trace"] = {{"log_likelihoods", model.trace.log_likelihoods},
                   {"converged", model.trace.converged}};
  const PipelineConfig& c = model.config;
  j["config"] = {{"method", to_string(c.method)},
                 {"lambda", c.lambda},
                 {"pca_dim", c.pca_dim},
                 {"pca_on_unlabeled", c.pca_on_unlabeled},
                 {"priors", to_string(c.priors_mode)},
                 {"variation", to_string(c.variation_source)},
                 {"variation_file", c.variation_file},
                 {"prototype_index", c.prototype_index},
                 {"solver_max_iters", c.solver_max_iters},
                 {"kkt_tol", c.kkt_tol},
                 {"em",
                  {{"max_iters", c.em.max_iters},
                   {"rel_tol", c.em.rel_tol},
                   {"cov_mode", to_string(c.em.cov_mode)},
                   {"variance_floor", c.em.variance_floor},
                   {"ridge", c.em.ridge},
                   {"prior_floor", c.em.prior_floor}}}};
  j["class_names"] = model.class_names;
  atomic_write(path, j.dump(2) + "\n");
}

FittedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::exception& e) {
    throw ParseError(path + ": invalid JSON: " + e.what());
  }

  const json& ver = field(j, "format_version");
  if (!ver.is_number_integer() || ver.get<int>() != kArchiveFormatVersion)
    throw ParseError(path + ": unsupported format_version");

  FittedModel M;
  const json& pca = field(j, "pca");
  M.pca.mean = vector_from_json(field(pca, "mean"), "pca.mean");
  M.pca.components = matrix_from_json(field(pca, "components"), "pca.components");
  M.pca.eigenvalues = vector_from_json(field(pca, "eigenvalues"), "pca.eigenvalues");
  if (M.pca.components.cols() != M.pca.mean.size())
    throw DimensionError(path + ": pca components do not match mean length");

  const json& gal = field(j, "gallery");
  M.gallery.atoms = matrix_from_json(field(gal, "atoms"), "gallery.atoms");
  M.gallery.class_ids = field(gal, "class_ids").get<std::vector<int>>();
  if (M.gallery.class_ids.size() != static_cast<size_t>(M.gallery.atoms.cols()))
    throw DimensionError(path + ": gallery class_ids do not match column count");
  if (M.gallery.atoms.rows() != M.pca.components.rows())
    throw DimensionError(path + ": gallery dimension does not match pca output");

  M.variation.atoms = matrix_from_json(field(field(j, "variation"), "atoms"), "variation.atoms");
  if (M.variation.atoms.cols() > 0 && M.variation.atoms.rows() != M.gallery.atoms.rows())
    throw DimensionError(path + ": variation dimension does not match gallery");

  const json& gmm = field(j, "gmm");
  if (!gmm.is_null()) {
    GmmModel g;
    g.means = matrix_from_json(field(gmm, "means"), "gmm.means");
    g.cov_mode = cov_mode_from_string(field(gmm, "cov_mode").get<std::string>());
    g.priors = vector_from_json(field(gmm, "priors"), "gmm.priors");
    g.ridge = field(gmm, "ridge").get<double>();
    const json& cov = field(gmm, "covariances");
    if (g.cov_mode == CovMode::Diagonal) {
      g.diag_vars = matrix_from_json(cov, "gmm.covariances");
    } else if (g.cov_mode == CovMode::Full) {
      if (!cov.is_array()) throw ParseError(path + ": gmm.covariances must be an array");
      for (size_t k = 0; k < cov.size(); ++k)
        g.full_covs.push_back(matrix_from_json(cov[k], "gmm.covariances[" + std::to_string(k) + "]"));
    }
    if (g.means.rows() != M.gallery.atoms.rows() || g.means.cols() != M.gallery.atoms.cols())
      throw DimensionError(path + ": gmm means do not match gallery shape");
    g.validate();
    M.gmm = std::move(g);
  }

  const json& tr = field(j, "em_trace");
  M.trace.log_likelihoods = field(tr, "log_likelihoods").get<std::vector<double>>();
  M.trace.converged = field(tr, "converged").get<bool>();

  const json& c = field(j, "config");
  M.config.method = method_from_string(field(c, "method").get<std::string>());
  M.config.lambda = field(c, "lambda").get<double>();
  M.config.pca_dim = field(c, "pca_dim").get<int>();
  M.config.pca_on_unlabeled = field(c, "pca_on_unlabeled").get<bool>();
  M.config.priors_mode = priors_mode_from_string(field(c, "priors").get<std::string>());
  M.config.variation_source = variation_source_from_string(field(c, "variation").get<std::string>());
  M.config.variation_file = field(c, "variation_file").get<std::string>();
  M.config.prototype_index = field(c, "prototype_index").get<std::vector<int>>();
  M.config.solver_max_iters = field(c, "solver_max_iters").get<int>();
  M.config.kkt_tol = field(c, "kkt_tol").get<double>();
  const json& em = field(c, "em");
  M.config.em.max_iters = field(em, "max_iters").get<int>();
  M.config.em.rel_tol = field(em, "rel_tol").get<double>();
  M.config.em.cov_mode = cov_mode_from_string(field(em, "cov_mode").get<std::string>());
  M.config.em.variance_floor = field(em, "variance_floor").get<double>();
  M.config.em.ridge = field(em, "ridge").get<double>();
  M.config.em.prior_floor = field(em, "prior_floor").get<double>();

  M.class_names = field(j, "class_names").get<std::vector<std::string>>();
  return M;
}

}  // namespace s3rc
