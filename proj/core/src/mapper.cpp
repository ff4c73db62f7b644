#include "zsx/mapper.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>
#include <fmt/format.h>

namespace zsx {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Relative reciprocal condition number below which the normal equations are
// treated as singular.
constexpr double kMinRcond = 1e-13;

RowMatrix stack_rows(const VectorTable& table, const CommonVocab& vocab) {
  RowMatrix out(static_cast<Eigen::Index>(vocab.tokens.size()),
                static_cast<Eigen::Index>(table.dim()));
  for (std::size_t i = 0; i < vocab.tokens.size(); ++i) {
    const Vector* v = table.find(vocab.tokens[i]);
    if (v == nullptr) {
      throw Error(ErrorCode::kEmptyIntersection,
                  fmt::format("vocabulary token '{}' missing from table '{}'", vocab.tokens[i],
                              table.name()));
    }
    for (std::size_t j = 0; j < v->size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (*v)[j];
    }
  }
  return out;
}

ProjectionMatrix solve_ridge(const VectorTable& src, const VectorTable& tgt,
                             const CommonVocab& vocab, double lambda, Warnings* warnings) {
  if (vocab.tokens.empty()) {
    throw Error(ErrorCode::kEmptyIntersection, "cannot fit a projection on an empty vocabulary");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::kConfig, fmt::format("ridge lambda must be >= 0, got {}", lambda));
  }
  if (vocab.tokens.size() < src.dim()) {
    warn(warnings, fmt::format("vocabulary of {} tokens is smaller than source dimension {}",
                               vocab.tokens.size(), src.dim()));
  }

  const RowMatrix x = stack_rows(src, vocab);
  const RowMatrix y = stack_rows(tgt, vocab);
  Eigen::MatrixXd gram = x.transpose() * x;
  gram.diagonal().array() += lambda;
  const Eigen::MatrixXd rhs = x.transpose() * y;

  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success || llt.rcond() < kMinRcond) {
    throw Error(ErrorCode::kSingularSystem,
                fmt::format("normal equations are singular (|vocab|={}, dim={}, lambda={}); "
                            "use a ridge lambda > 0",
                            vocab.tokens.size(), src.dim(), lambda));
  }
  const Eigen::MatrixXd m = llt.solve(rhs);

  std::vector<double> values(src.dim() * tgt.dim());
  for (std::size_t r = 0; r < src.dim(); ++r) {
    for (std::size_t c = 0; c < tgt.dim(); ++c) {
      values[r * tgt.dim() + c] = m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
  }
  return ProjectionMatrix(src.dim(), tgt.dim(), std::move(values), lambda, src.name(),
                          tgt.name());
}

}  // namespace

ProjectionMatrix::ProjectionMatrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                                   double ridge_lambda, std::string source_name,
                                   std::string target_name)
    : rows_(rows),
      cols_(cols),
      values_(std::move(values)),
      ridge_lambda_(ridge_lambda),
      source_name_(std::move(source_name)),
      target_name_(std::move(target_name)) {
  if (rows_ == 0 || cols_ == 0 || values_.size() != rows_ * cols_) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("matrix {}x{} with {} values", rows_, cols_, values_.size()));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFinite, "projection matrix is not finite");
  }
}

ProjectionMatrix ProjectionMatrix::identity(std::size_t dim) {
  std::vector<double> values(dim * dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) values[i * dim + i] = 1.0;
  return ProjectionMatrix(dim, dim, std::move(values));
}

CommonVocab common_vocab(const VectorTable& src, const VectorTable& tgt) {
  if (src.empty() || tgt.empty()) {
    throw Error(ErrorCode::kEmptyIntersection, "common vocabulary of an empty table");
  }
  CommonVocab vocab;
  for (const auto& token : src.tokens()) {
    if (tgt.contains(token)) vocab.tokens.push_back(token);
  }
  if (vocab.tokens.empty()) {
    throw Error(ErrorCode::kEmptyIntersection,
                fmt::format("tables '{}' and '{}' share no tokens", src.name(), tgt.name()));
  }
  std::sort(vocab.tokens.begin(), vocab.tokens.end());
  return vocab;
}

ProjectionMatrix fit(const VectorTable& src, const VectorTable& tgt, const CommonVocab& vocab,
                     double lambda, Warnings* warnings) {
  return solve_ridge(src, tgt, vocab, lambda, warnings);
}

ProjectionMatrix fit_sentence_to_word(const VectorTable& sent_table,
                                      const VectorTable& word_table, const CommonVocab& vocab,
                                      double lambda, Warnings* warnings) {
  return solve_ridge(sent_table, word_table, vocab, lambda, warnings);
}

Vector apply(const ProjectionMatrix& m, std::span<const double> v) {
  if (v.size() != m.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("vector of length {} applied to {}x{} matrix", v.size(), m.rows(),
                            m.cols()));
  }
  Vector out(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (v[r] == 0.0) continue;
    for (std::size_t c = 0; c < m.cols(); ++c) out[c] += v[r] * m.at(r, c);
  }
  return out;
}

VectorTable map_table(const VectorTable& table, const ProjectionMatrix& m) {
  VectorTable out(table.name() + "-mapped", m.cols());
  for (const auto& token : table.tokens()) out.insert(token, zsx::apply(m, *table.find(token)));
  return out;
}

double residual_squared(const VectorTable& src, const VectorTable& tgt,
                        const CommonVocab& vocab, const ProjectionMatrix& m) {
  double total = 0.0;
  for (const auto& token : vocab.tokens) {
    const Vector* x = src.find(token);
    const Vector* y = tgt.find(token);
    if (x == nullptr || y == nullptr) {
      throw Error(ErrorCode::kEmptyIntersection,
                  fmt::format("vocabulary token '{}' missing from a table", token));
    }
    const Vector mapped = zsx::apply(m, *x);
    if (mapped.size() != y->size()) {
      throw Error(ErrorCode::kDimensionMismatch, "matrix does not map into the target dimension");
    }
    for (std::size_t j = 0; j < mapped.size(); ++j) {
      const double d = mapped[j] - (*y)[j];
      total += d * d;
    }
  }
  return total;
}

void write_matrix(const ProjectionMatrix& m, std::ostream& out) {
  out << m.rows() << ' ' << m.cols() << ' ' << fmt::format("{}", m.ridge_lambda()) << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c > 0) out << ' ';
      out << fmt::format("{}", m.at(r, c));
    }
    out << '\n';
  }
}

void save_matrix(const ProjectionMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, fmt::format("cannot write matrix '{}'", path.string()));
  write_matrix(m, out);
  if (!out) throw Error(ErrorCode::kIo, fmt::format("failed writing matrix '{}'", path.string()));
}

ProjectionMatrix read_matrix(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw Error(ErrorCode::kParse, "matrix file is empty");
  std::istringstream hs(header);
  std::size_t rows = 0;
  std::size_t cols = 0;
  double lambda = 0.0;
  if (!(hs >> rows >> cols >> lambda) || rows == 0 || cols == 0) {
    throw Error(ErrorCode::kParse, fmt::format("bad matrix header '{}'", header));
  }
  std::vector<double> values;
  values.reserve(rows * cols);
  std::string line;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!std::getline(in, line)) {
      throw Error(ErrorCode::kParse, fmt::format("matrix file ends at row {} of {}", r, rows));
    }
    std::istringstream ls(line);
    std::string field;
    std::size_t count = 0;
    while (ls >> field) {
      double v = 0.0;
      const char* first = field.data();
      if (*first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, field.data() + field.size(), v);
      if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw Error(ErrorCode::kParse, fmt::format("matrix row {}: bad number '{}'", r, field));
      }
      values.push_back(v);
      ++count;
    }
    if (count != cols) {
      throw Error(ErrorCode::kDimensionMismatch,
                  fmt::format("matrix row {} has {} values, expected {}", r, count, cols));
    }
  }
  return ProjectionMatrix(rows, cols, std::move(values), lambda);
}

ProjectionMatrix load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("cannot open matrix '{}'", path.string()));
  return read_matrix(in);
}

}  // namespace zsx
