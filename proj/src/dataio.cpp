#include "s3rc/dataio.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "s3rc/errors.hpp"
#include "s3rc/rng.hpp"

namespace s3rc {

namespace {

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_double(const std::string& field, const std::string& where) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw ParseError(where + ": non-numeric field '" + field + "'");
  return v;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

FeatureMatrix load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": line 1: empty file");
  line = strip_cr(line);
  if (line.rfind("#dim=", 0) != 0)
    throw ParseError(path + ": line 1: expected '#dim=<D>' header");
  int D = 0;
  {
    const std::string num = line.substr(5);
    const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), D);
    if (ec != std::errc() || ptr != num.data() + num.size() || D < 1)
      throw ParseError(path + ": line 1: invalid dimension '" + num + "'");
  }

  std::vector<std::string> names;
  std::vector<int> labels;
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::string where = path + ": line " + std::to_string(lineno);
    const std::vector<std::string> fields = split_fields(line);
    if (static_cast<int>(fields.size()) != D + 1)
      throw ParseError(where + ": expected " + std::to_string(D + 1) + " fields, got " +
                       std::to_string(fields.size()));
    const std::string& lab = fields[0];
    if (lab.empty()) throw ParseError(where + ": empty label");
    if (lab == "?") {
      labels.push_back(0);
    } else {
      const auto it = std::find(names.begin(), names.end(), lab);
      if (it == names.end()) {
        names.push_back(lab);
        labels.push_back(static_cast<int>(names.size()));
      } else {
        labels.push_back(static_cast<int>(it - names.begin()) + 1);
      }
    }
    std::vector<double> row(static_cast<size_t>(D));
    for (int f = 0; f < D; ++f) row[static_cast<size_t>(f)] = parse_double(fields[static_cast<size_t>(f) + 1], where);
    rows.push_back(std::move(row));
  }

  FeatureMatrix X;
  X.data.resize(D, static_cast<Eigen::Index>(rows.size()));
  for (size_t j = 0; j < rows.size(); ++j)
    for (int r = 0; r < D; ++r) X.data(r, static_cast<Eigen::Index>(j)) = rows[j][static_cast<size_t>(r)];
  X.labels = std::move(labels);
  X.class_names = std::move(names);
  return X;
}

void save_dataset(const std::string& path, const FeatureMatrix& X) {
  std::ostringstream out;
  out << "#dim=" << X.dim() << "\n";
  for (int j = 0; j < X.count(); ++j) {
    if (X.is_labeled(j))
      out << X.class_names[static_cast<size_t>(X.labels[static_cast<size_t>(j)] - 1)];
    else
      out << '?';
    for (int r = 0; r < X.dim(); ++r) out << ',' << format_double(X.data(r, j));
    out << '\n';
  }
  atomic_write(path, out.str());
}

Eigen::MatrixXd load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open");
  std::string line;
  std::vector<std::vector<double>> rows;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::string where = path + ": line " + std::to_string(lineno);
    const std::vector<std::string> fields = split_fields(line);
    std::vector<double> row(fields.size());
    for (size_t f = 0; f < fields.size(); ++f) row[f] = parse_double(fields[f], where);
    if (!rows.empty() && row.size() != rows[0].size())
      throw ParseError(where + ": expected " + std::to_string(rows[0].size()) +
                       " fields, got " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return Eigen::MatrixXd(0, 0);
  Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[0].size(); ++j)
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return M;
}

void save_matrix_csv(const std::string& path, const Eigen::MatrixXd& M) {
  std::ostringstream out;
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(M(i, j));
    }
    out << '\n';
  }
  atomic_write(path, out.str());
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(tmp + ": cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(tmp + ": write failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw Error(path + ": rename failed: " + std::strerror(errno));
}

Split split(const FeatureMatrix& X, Protocol protocol, const SplitSpec& spec, uint64_t seed) {
  X.validate();
  if (spec.labeled_per_class < 1) throw ConfigError("split: labeled_per_class must be >= 1");
  if (protocol == Protocol::Inductive &&
      (spec.test_fraction <= 0.0 || spec.test_fraction >= 1.0))
    throw ConfigError("split: test_fraction must be in (0,1)");
  for (int j = 0; j < X.count(); ++j)
    if (!X.is_labeled(j))
      throw DegenerateInputError("split: column " + std::to_string(j) +
                                 " is unlabeled; splits need fully labeled data");

  const int K = X.num_classes();
  std::vector<std::vector<int>> by_class(static_cast<size_t>(K));
  for (int j = 0; j < X.count(); ++j)
    by_class[static_cast<size_t>(X.labels[static_cast<size_t>(j)] - 1)].push_back(j);

  Split out;
  for (int k = 0; k < K; ++k) {
    auto& cols = by_class[static_cast<size_t>(k)];
    const int n = static_cast<int>(cols.size());
    uint64_t ctr = 0;
    for (int i = n - 1; i >= 1; --i) {
      const int j = static_cast<int>(rng::below(seed, 1000 + static_cast<uint64_t>(k), ctr++,
                                                static_cast<uint64_t>(i) + 1));
      std::swap(cols[static_cast<size_t>(i)], cols[static_cast<size_t>(j)]);
    }
    const int rest = n - spec.labeled_per_class;
    if (rest < 1)
      throw DegenerateInputError("split: class " + std::to_string(k + 1) + " has " +
                                 std::to_string(n) + " samples, too few for " +
                                 std::to_string(spec.labeled_per_class) + " labeled + 1");
    for (int i = 0; i < spec.labeled_per_class; ++i)
      out.labeled.push_back(cols[static_cast<size_t>(i)]);
    if (protocol == Protocol::Transductive) {
      for (int i = spec.labeled_per_class; i < n; ++i) {
        out.unlabeled_train.push_back(cols[static_cast<size_t>(i)]);
        out.test.push_back(cols[static_cast<size_t>(i)]);
      }
    } else {
      const int n_test = static_cast<int>(std::llround(rest * spec.test_fraction));
      if (n_test < 1 || rest - n_test < 1)
        throw DegenerateInputError("split: class " + std::to_string(k + 1) +
                                   " cannot fill both unlabeled-train and test");
      for (int i = spec.labeled_per_class; i < spec.labeled_per_class + n_test; ++i)
        out.test.push_back(cols[static_cast<size_t>(i)]);
      for (int i = spec.labeled_per_class + n_test; i < n; ++i)
        out.unlabeled_train.push_back(cols[static_cast<size_t>(i)]);
    }
  }
  std::sort(out.labeled.begin(), out.labeled.end());
  std::sort(out.unlabeled_train.begin(), out.unlabeled_train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

}  // namespace s3rc
