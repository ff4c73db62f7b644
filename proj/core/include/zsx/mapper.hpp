#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "zsx/error.hpp"
#include "zsx/vecstore.hpp"

namespace zsx {

// Tokens present in both tables, sorted lexicographically.
struct CommonVocab {
  std::vector<std::string> tokens;
};

// Row-major source_dim x target_dim matrix M applied as v^T M.
class ProjectionMatrix {
 public:
  ProjectionMatrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                   double ridge_lambda = 0.0, std::string source_name = {},
                   std::string target_name = {});

  static ProjectionMatrix identity(std::size_t dim);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  double& at(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  std::span<const double> values() const { return values_; }
  double ridge_lambda() const { return ridge_lambda_; }
  const std::string& source_name() const { return source_name_; }
  const std::string& target_name() const { return target_name_; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
  double ridge_lambda_;
  std::string source_name_;
  std::string target_name_;
};

inline constexpr double kDefaultRidgeLambda = 1e-3;

// Throws kEmptyIntersection when the tables share no token.
CommonVocab common_vocab(const VectorTable& src, const VectorTable& tgt);

// Ridge least squares: argmin_M |XM - Y|_F^2 + lambda |M|_F^2 with X and Y the
// row-stacked source and target vectors of `vocab`. Solved through the
// normal equations (X^T X + lambda I) M = X^T Y with a Cholesky factorization.
// Throws kSingularSystem when the system is not positive definite.
ProjectionMatrix fit(const VectorTable& src, const VectorTable& tgt, const CommonVocab& vocab,
                     double lambda = kDefaultRidgeLambda, Warnings* warnings = nullptr);

// Same solve with X drawn from sentence-encoder vectors of single vocabulary
// words and Y from target word vectors.
ProjectionMatrix fit_sentence_to_word(const VectorTable& sent_table,
                                      const VectorTable& word_table, const CommonVocab& vocab,
                                      double lambda = kDefaultRidgeLambda,
                                      Warnings* warnings = nullptr);

// v^T M. Throws kDimensionMismatch when v.size() != m.rows().
Vector apply(const ProjectionMatrix& m, std::span<const double> v);

// Maps every vector of `table` into the target space.
VectorTable map_table(const VectorTable& table, const ProjectionMatrix& m);

// |XM - Y|_F^2 over `vocab`.
double residual_squared(const VectorTable& src, const VectorTable& tgt,
                        const CommonVocab& vocab, const ProjectionMatrix& m);

// `rows cols lambda` header followed by `rows` lines of `cols` floats.
void write_matrix(const ProjectionMatrix& m, std::ostream& out);
void save_matrix(const ProjectionMatrix& m, const std::filesystem::path& path);
ProjectionMatrix read_matrix(std::istream& in);
ProjectionMatrix load_matrix(const std::filesystem::path& path);

}  // namespace zsx
