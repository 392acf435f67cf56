#include "s3rc/cli_app.hpp"

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "s3rc/classifier.hpp"
#include "s3rc/dataio.hpp"
#include "s3rc/errors.hpp"
#include "s3rc/model_archive.hpp"
#include "s3rc/rng.hpp"

namespace s3rc {
namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt2(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

// Flags shared by fit and bench, mirroring the pipeline knobs.
struct CommonFlags {
  double lambda = 0.005;
  int pca_dim = 0;  // 0 resolves to min(D, N_fit - 1)
  std::string method = "s3rc";
  std::string cov_mode = "diagonal";
  int max_iter = 50;
  double tol = 1e-5;
  std::string priors = "proportional";
  std::string variation = "centroid";
  std::string generic_path;
  bool pca_labeled_only = false;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_method) {
  cmd->add_option("--lambda", f.lambda, "l1 regularization weight");
  cmd->add_option("--pca-dim", f.pca_dim, "retained PCA dimension (0 = auto)");
  if (with_method) cmd->add_option("--method", f.method, "s3rc|esrc|ssrc|src");
  cmd->add_option("--cov-mode", f.cov_mode, "identity|diagonal|full");
  cmd->add_option("--max-iter", f.max_iter, "EM iteration cap");
  cmd->add_option("--tol", f.tol, "EM relative log-likelihood tolerance");
  cmd->add_option("--priors", f.priors, "proportional|uniform");
  cmd->add_option("--variation", f.variation, "centroid|prototype|generic|file:<path>");
  cmd->add_option("--generic", f.generic_path, "generic dataset CSV for --variation generic");
  cmd->add_flag("--pca-labeled-only", f.pca_labeled_only, "fit PCA on labeled samples only");
}

PipelineConfig build_config(const CommonFlags& f, int resolved_pca_dim) {
  PipelineConfig cfg;
  cfg.method = method_from_string(f.method);
  cfg.lambda = f.lambda;
  cfg.pca_dim = resolved_pca_dim;
  cfg.pca_on_unlabeled = !f.pca_labeled_only;
  cfg.em.max_iters = f.max_iter;
  cfg.em.rel_tol = f.tol;
  cfg.em.cov_mode = cov_mode_from_string(f.cov_mode);
  cfg.priors_mode = priors_mode_from_string(f.priors);
  if (f.variation.rfind("file:", 0) == 0) {
    cfg.variation_source = VariationSource::File;
    cfg.variation_file = f.variation.substr(5);
  } else {
    cfg.variation_source = variation_source_from_string(f.variation);
  }
  return cfg;
}

int count_labeled(const FeatureMatrix& X) {
  int n = 0;
  for (int j = 0; j < X.count(); ++j)
    if (X.is_labeled(j)) ++n;
  return n;
}

int auto_pca_dim(const FeatureMatrix& X, bool pca_on_unlabeled) {
  const int n_fit = pca_on_unlabeled ? X.count() : count_labeled(X);
  return std::max(1, std::min(X.dim(), n_fit - 1));
}

GenericSet generic_from_dataset(const std::string& path) {
  const FeatureMatrix G = load_dataset(path);
  for (int j = 0; j < G.count(); ++j)
    if (!G.is_labeled(j))
      throw DegenerateInputError(path + ": generic dataset must be fully labeled");
  GenericSet out;
  out.classes = labeled_set_from(G).classes;
  return out;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---- fit ----------------------------------------------------------------

struct FitArgs {
  std::string dataset;
  std::string out_path = "model.json";
  CommonFlags common;
};

int cmd_fit(const FitArgs& a, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const FeatureMatrix X = load_dataset(a.dataset);
  const int n_lab = count_labeled(X);
  const int n_unl = X.count() - n_lab;
  if (n_lab == 0) throw DegenerateInputError(a.dataset + ": no labeled rows");

  const int pca_dim =
      a.common.pca_dim > 0 ? a.common.pca_dim : auto_pca_dim(X, !a.common.pca_labeled_only);
  const PipelineConfig cfg = build_config(a.common, pca_dim);
  if (cfg.method == Method::S3RC && n_unl == 0)
    throw DegenerateInputError(a.dataset + ": the s3rc method needs unlabeled rows");

  GenericSet gen;
  const GenericSet* gp = nullptr;
  if (cfg.variation_source == VariationSource::Generic) {
    if (a.common.generic_path.empty())
      throw ConfigError("--variation generic requires --generic <dataset>");
    gen = generic_from_dataset(a.common.generic_path);
    gp = &gen;
  }

  const FittedModel M = fit_pipeline(X, cfg, gp);
  save_model(a.out_path, M);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();

  out << "method\t" << to_string(cfg.method) << "\n";
  out << "samples\t" << X.count() << "\nlabeled\t" << n_lab << "\nunlabeled\t" << n_unl << "\n";
  out << "classes\t" << X.num_classes() << "\n";
  out << "pca_dim\t" << cfg.pca_dim << "\n";
  out << "gallery_atoms\t" << M.gallery.atoms.cols() << "\n";
  out << "variation_atoms\t" << M.variation.size() << "\n";
  if (M.gmm.has_value()) {
    out << "em_iterations\t" << M.trace.iterations() << "\t"
        << (M.trace.converged ? "converged" : "iteration-limit") << "\n";
    out << "log_likelihood";
    for (double ll : M.trace.log_likelihoods) out << "\t" << fmt2(ll);
    out << "\n";
  }
  out << "elapsed_ms\t" << ms << "\n";
  out << "model\t" << a.out_path << "\n";
  return 0;
}

// ---- predict ------------------------------------------------------------

struct PredictArgs {
  std::string model_path;
  std::string dataset;
};

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  const FittedModel M = load_model(a.model_path);
  const FeatureMatrix X = load_dataset(a.dataset);
  if (X.count() == 0) return 0;
  const std::vector<ClassificationResult> res = classify(M, X.data);
  for (size_t i = 0; i < res.size(); ++i) {
    const int label = res[i].label;
    const std::string name = label <= static_cast<int>(M.class_names.size())
                                 ? M.class_names[static_cast<size_t>(label - 1)]
                                 : std::to_string(label);
    double best = res[i].residuals(label - 1);
    double second = best;
    bool have_second = false;
    for (Eigen::Index k = 0; k < res[i].residuals.size(); ++k) {
      if (static_cast<int>(k) == label - 1) continue;
      if (!have_second || res[i].residuals(k) < second) {
        second = res[i].residuals(k);
        have_second = true;
      }
    }
    out << i << ',' << name << ',' << fmt(best) << ',' << fmt(second) << "\n";
  }
  return 0;
}

// ---- bench --------------------------------------------------------------

struct BenchArgs {
  std::string data_path;  // empty = synthetic source
  SynthSpec synth;
  std::string protocol = "transductive";
  int labeled_per_class = 2;
  double test_fraction = 0.5;
  uint64_t seed = 7;
  std::string methods = "src,esrc,ssrc,s3rc";
  CommonFlags common;
};

std::vector<Method> parse_methods(const std::string& list) {
  std::vector<Method> out;
  size_t start = 0;
  while (start <= list.size()) {
    const size_t pos = list.find(',', start);
    const std::string tok =
        pos == std::string::npos ? list.substr(start) : list.substr(start, pos - start);
    if (!tok.empty()) out.push_back(method_from_string(tok));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  if (out.empty()) throw ConfigError("bench: no methods requested");
  return out;
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  Protocol proto;
  if (a.protocol == "transductive")
    proto = Protocol::Transductive;
  else if (a.protocol == "inductive")
    proto = Protocol::Inductive;
  else
    throw ConfigError("bench: unknown protocol '" + a.protocol + "'");
  const std::vector<Method> methods = parse_methods(a.methods);

  FeatureMatrix train;
  Eigen::MatrixXd test;
  std::vector<int> truth;
  std::string source_echo;

  if (!a.data_path.empty()) {
    const FeatureMatrix X = load_dataset(a.data_path);
    const Split s = split(X, proto, {a.labeled_per_class, a.test_fraction}, a.seed);
    std::vector<char> keep(static_cast<size_t>(X.count()), 0);
    std::vector<char> lab(static_cast<size_t>(X.count()), 0);
    for (int j : s.labeled) keep[static_cast<size_t>(j)] = lab[static_cast<size_t>(j)] = 1;
    for (int j : s.unlabeled_train) keep[static_cast<size_t>(j)] = 1;
    std::vector<int> cols;
    for (int j = 0; j < X.count(); ++j)
      if (keep[static_cast<size_t>(j)]) cols.push_back(j);
    train.data.resize(X.dim(), static_cast<Eigen::Index>(cols.size()));
    train.class_names = X.class_names;
    for (size_t j = 0; j < cols.size(); ++j) {
      train.data.col(static_cast<Eigen::Index>(j)) = X.data.col(cols[j]);
      train.labels.push_back(lab[static_cast<size_t>(cols[j])]
                                 ? X.labels[static_cast<size_t>(cols[j])]
                                 : 0);
    }
    test.resize(X.dim(), static_cast<Eigen::Index>(s.test.size()));
    for (size_t j = 0; j < s.test.size(); ++j) {
      test.col(static_cast<Eigen::Index>(j)) = X.data.col(s.test[j]);
      truth.push_back(X.labels[static_cast<size_t>(s.test[j])]);
    }
    source_echo = "# data=" + a.data_path +
                  " labeled_per_class=" + std::to_string(a.labeled_per_class) +
                  " test_fraction=" + fmt(a.test_fraction);
  } else {
    SynthSpec spec = a.synth;
    spec.seed = a.seed;
    auto [X, T] = generate_synthetic(spec);
    std::vector<int> pool;
    for (int j = 0; j < X.count(); ++j)
      if (!X.is_labeled(j)) pool.push_back(j);

    std::vector<int> train_pool;
    std::vector<int> test_cols;
    if (proto == Protocol::Transductive) {
      train_pool = pool;
      test_cols = pool;
    } else {
      // Stratified seeded half-split of the unlabeled pool per class.
      std::vector<std::vector<int>> by_class(static_cast<size_t>(spec.K));
      for (int j : pool)
        by_class[static_cast<size_t>(T.true_class[static_cast<size_t>(j)] - 1)].push_back(j);
      for (int k = 0; k < spec.K; ++k) {
        auto& cols = by_class[static_cast<size_t>(k)];
        uint64_t ctr = 0;
        for (int i = static_cast<int>(cols.size()) - 1; i >= 1; --i) {
          const int j = static_cast<int>(rng::below(a.seed, 2000 + static_cast<uint64_t>(k),
                                                    ctr++, static_cast<uint64_t>(i) + 1));
          std::swap(cols[static_cast<size_t>(i)], cols[static_cast<size_t>(j)]);
        }
        const int n_test = static_cast<int>(std::llround(cols.size() * a.test_fraction));
        if (n_test < 1 || static_cast<int>(cols.size()) - n_test < 1)
          throw DegenerateInputError("bench: class " + std::to_string(k + 1) +
                                     " cannot fill both unlabeled-train and test");
        for (size_t i = 0; i < cols.size(); ++i)
          (static_cast<int>(i) < n_test ? test_cols : train_pool).push_back(cols[i]);
      }
      std::sort(train_pool.begin(), train_pool.end());
      std::sort(test_cols.begin(), test_cols.end());
    }

    std::vector<char> in_train_pool(static_cast<size_t>(X.count()), 0);
    for (int j : train_pool) in_train_pool[static_cast<size_t>(j)] = 1;
    std::vector<int> cols;
    for (int j = 0; j < X.count(); ++j)
      if (X.is_labeled(j) || in_train_pool[static_cast<size_t>(j)]) cols.push_back(j);
    train.data.resize(X.dim(), static_cast<Eigen::Index>(cols.size()));
    train.class_names = X.class_names;
    for (size_t j = 0; j < cols.size(); ++j) {
      train.data.col(static_cast<Eigen::Index>(j)) = X.data.col(cols[j]);
      train.labels.push_back(X.labels[static_cast<size_t>(cols[j])]);
    }
    test.resize(X.dim(), static_cast<Eigen::Index>(test_cols.size()));
    for (size_t j = 0; j < test_cols.size(); ++j) {
      test.col(static_cast<Eigen::Index>(j)) = X.data.col(test_cols[j]);
      truth.push_back(T.true_class[static_cast<size_t>(test_cols[j])]);
    }
    source_echo = "# synth K=" + std::to_string(spec.K) + " d=" + std::to_string(spec.d) +
                  " m=" + std::to_string(spec.m) + " n_l=" + std::to_string(spec.n_l) +
                  " n_u=" + std::to_string(spec.n_u) + " eta=" + fmt(spec.eta) +
                  " rho=" + fmt(spec.rho) + " sigma=" + fmt(spec.sigma);
  }

  if (test.cols() == 0) throw DegenerateInputError("bench: empty test set");
  const int K = train.num_classes();
  const int pca_dim = a.common.pca_dim > 0 ? a.common.pca_dim
                                           : auto_pca_dim(train, !a.common.pca_labeled_only);

  GenericSet gen;
  const GenericSet* gp = nullptr;
  CommonFlags flags = a.common;
  if (flags.variation.rfind("generic", 0) == 0 && !flags.generic_path.empty()) {
    gen = generic_from_dataset(flags.generic_path);
    gp = &gen;
  }

  out << "# s3rc bench\n";
  out << "# seed=" << a.seed << " protocol=" << a.protocol << " lambda=" << fmt(a.common.lambda)
      << " pca_dim=" << pca_dim << " cov_mode=" << a.common.cov_mode
      << " priors=" << a.common.priors << " variation=" << a.common.variation << "\n";
  out << source_echo << "\n";
  out << "method\trate\tcorrect\ttotal\n";

  for (const Method m : methods) {
    CommonFlags mf = flags;
    mf.method = to_string(m);
    const PipelineConfig cfg = build_config(mf, pca_dim);
    const FittedModel fitted = fit_pipeline(train, cfg, gp);
    const std::vector<ClassificationResult> res = classify(fitted, test);
    std::vector<int> predicted;
    predicted.reserve(res.size());
    for (const auto& r : res) predicted.push_back(r.label);
    const EvalReport rep = evaluate(predicted, truth, K);
    out << to_string(m) << "\t" << fmt2(100.0 * rep.rate) << "\t" << rep.correct << "\t"
        << rep.total << "\n";
  }
  return 0;
}

// ---- synth --------------------------------------------------------------

struct SynthArgs {
  std::string out_path = "synth.csv";
  std::string truth_path;
  SynthSpec spec;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  auto [X, T] = generate_synthetic(a.spec);
  save_dataset(a.out_path, X);
  const std::string truth_path =
      a.truth_path.empty() ? a.out_path + ".truth.json" : a.truth_path;

  nlohmann::json t;
  t["spec"] = {{"K", a.spec.K},       {"d", a.spec.d},     {"m", a.spec.m},
               {"n_l", a.spec.n_l},   {"n_u", a.spec.n_u}, {"eta", a.spec.eta},
               {"rho", a.spec.rho},   {"sigma", a.spec.sigma},
               {"seed", a.spec.seed}};
  t["base"] = matrix_to_json(T.base);
  t["proto_l"] = matrix_to_json(T.proto_l);
  t["proto_u"] = matrix_to_json(T.proto_u);
  t["atoms"] = matrix_to_json(T.atoms);
  t["codes"] = matrix_to_json(T.codes);
  t["true_class"] = T.true_class;
  std::vector<int> sessions;
  for (char c : T.from_unlabeled_session) sessions.push_back(c ? 1 : 0);
  t["from_unlabeled_session"] = sessions;
  atomic_write(truth_path, t.dump(2) + "\n");

  out << "dataset\t" << a.out_path << "\n";
  out << "truth\t" << truth_path << "\n";
  out << "rows\t" << X.count() << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"semi-supervised sparse representation classification"};
  app.require_subcommand(1);

  FitArgs fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "fit a model on a dataset");
  fit_cmd->add_option("dataset", fit.dataset, "dataset CSV")->required();
  fit_cmd->add_option("--out", fit.out_path, "model archive path");
  add_common(fit_cmd, fit.common, true);

  PredictArgs pred;
  CLI::App* pred_cmd = app.add_subcommand("predict", "classify samples with a fitted model");
  pred_cmd->add_option("model", pred.model_path, "model archive")->required();
  pred_cmd->add_option("dataset", pred.dataset, "dataset CSV")->required();

  BenchArgs bench;
  CLI::App* bench_cmd = app.add_subcommand("bench", "compare methods under one split");
  bench_cmd->add_option("--data", bench.data_path, "fully labeled dataset CSV");
  bench_cmd->add_option("--methods", bench.methods, "comma-separated method list");
  bench_cmd->add_option("--protocol", bench.protocol, "transductive|inductive");
  bench_cmd->add_option("--labeled-per-class", bench.labeled_per_class,
                        "labeled samples per class (--data source)");
  bench_cmd->add_option("--test-fraction", bench.test_fraction, "inductive test share");
  bench_cmd->add_option("--seed", bench.seed, "split / generator seed");
  bench_cmd->add_option("--K", bench.synth.K, "synth: classes");
  bench_cmd->add_option("--d", bench.synth.d, "synth: feature dimension");
  bench_cmd->add_option("--m", bench.synth.m, "synth: variation atoms");
  bench_cmd->add_option("--n-l", bench.synth.n_l, "synth: labeled per class");
  bench_cmd->add_option("--n-u", bench.synth.n_u, "synth: unlabeled per class");
  bench_cmd->add_option("--eta", bench.synth.eta, "synth: session gap");
  bench_cmd->add_option("--rho", bench.synth.rho, "synth: variation scale");
  bench_cmd->add_option("--sigma", bench.synth.sigma, "synth: noise std");
  add_common(bench_cmd, bench.common, false);

  SynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
  synth_cmd->add_option("--out", synth.out_path, "dataset CSV path");
  synth_cmd->add_option("--truth", synth.truth_path, "ground-truth JSON path");
  synth_cmd->add_option("--K", synth.spec.K, "classes");
  synth_cmd->add_option("--d", synth.spec.d, "feature dimension");
  synth_cmd->add_option("--m", synth.spec.m, "variation atoms");
  synth_cmd->add_option("--n-l", synth.spec.n_l, "labeled per class");
  synth_cmd->add_option("--n-u", synth.spec.n_u, "unlabeled per class");
  synth_cmd->add_option("--eta", synth.spec.eta, "session gap");
  synth_cmd->add_option("--rho", synth.spec.rho, "variation scale");
  synth_cmd->add_option("--sigma", synth.spec.sigma, "noise std");
  synth_cmd->add_option("--seed", synth.spec.seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (app.got_subcommand(fit_cmd)) return cmd_fit(fit, out);
    if (app.got_subcommand(pred_cmd)) return cmd_predict(pred, out);
    if (app.got_subcommand(bench_cmd)) return cmd_bench(bench, out);
    if (app.got_subcommand(synth_cmd)) return cmd_synth(synth, out);
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const IterationLimitError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  err << "error: no subcommand\n";
  return 2;
}

}  // namespace s3rc
