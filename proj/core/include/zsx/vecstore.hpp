#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace zsx {

using Vector = std::vector<double>;

// Ordered, lowercase tokens of one text.
using TokenSequence = std::vector<std::string>;

// Token -> dense vector map. Immutable once built; concurrent reads are safe.
class VectorTable {
 public:
  VectorTable(std::string name, std::size_t dim);

  // Throws kDimensionMismatch, kDuplicate, kNonFinite, or kParse (bad token).
  void insert(std::string token, Vector values);

  // nullptr when the token is out of vocabulary.
  const Vector* find(std::string_view token) const;
  bool contains(std::string_view token) const { return find(token) != nullptr; }

  const std::string& name() const { return name_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }

  // Tokens in insertion order.
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::string name_;
  std::size_t dim_;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, Vector> entries_;
};

// Text embedding format: optional `<count> <dim>` header, then
// `<token> <f1> ... <f_dim>` per line. `#` lines and blank lines are skipped.
VectorTable load_table(const std::filesystem::path& path);
VectorTable parse_table(std::istream& in, std::string name);

// Writes a header line and one row per token with round-trip precision.
void write_table(const VectorTable& table, std::ostream& out);

// Lowercases, splits on whitespace, and strips punctuation from token edges.
// Throws kEmptyInput when nothing remains.
TokenSequence tokenize(std::string_view text);

// Normalizes a single raw token the way tokenize() does; may return "".
std::string normalize_token(std::string_view raw);

// Mean of the in-vocabulary token vectors. Throws kEmptyRepresentation when
// every token is out of vocabulary.
Vector avg_vector(std::span<const std::string> tokens, const VectorTable& table);

// dot(u, v) / (|u| |v|). Throws kDimensionMismatch or kDegenerateVector.
double cosine(std::span<const double> u, std::span<const double> v);

std::string join_tokens(std::span<const std::string> tokens);

}  // namespace zsx
