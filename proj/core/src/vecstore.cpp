#include "zsx/vecstore.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>

#include <fmt/format.h>

#include "zsx/error.hpp"

namespace zsx {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  double value = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

std::optional<std::size_t> parse_size(std::string_view s) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

// Unicode punctuation and symbol ranges commonly found at token edges in
// social-media text. ASCII punctuation is handled separately.
bool is_punct_codepoint(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
  }
  switch (cp) {
    case 0x00A1: case 0x00A7: case 0x00AB: case 0x00B6: case 0x00B7:
    case 0x00BB: case 0x00BF: case 0x037E: case 0x0387:
      return true;
    default:
      break;
  }
  return (cp >= 0x2010 && cp <= 0x2027) ||  // dashes, quotes, bullets, ellipsis
         (cp >= 0x2030 && cp <= 0x205E) ||  // per-mille, primes, guillemets
         (cp >= 0x3001 && cp <= 0x3003) ||  // CJK comma, full stop
         (cp >= 0x3008 && cp <= 0x3011) ||  // CJK brackets
         (cp >= 0xFF01 && cp <= 0xFF0F) ||  // fullwidth ASCII punctuation
         (cp >= 0xFF1A && cp <= 0xFF20) ||
         (cp >= 0xFF3B && cp <= 0xFF40) ||
         (cp >= 0xFF5B && cp <= 0xFF65);
}

// Decodes the code point starting at s[pos]; returns (code point, byte length).
// Malformed sequences decode as a single non-punctuation byte.
std::pair<char32_t, std::size_t> decode_at(std::string_view s, std::size_t pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  std::size_t len = 1;
  char32_t cp = b0;
  if (b0 >= 0xF0) { len = 4; cp = b0 & 0x07; }
  else if (b0 >= 0xE0) { len = 3; cp = b0 & 0x0F; }
  else if (b0 >= 0xC0) { len = 2; cp = b0 & 0x1F; }
  else return {b0 < 0x80 ? b0 : 0xFFFD, 1};
  if (pos + len > s.size()) return {0xFFFD, 1};
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[pos + k]);
    if ((b & 0xC0) != 0x80) return {0xFFFD, 1};
    cp = (cp << 6) | (b & 0x3F);
  }
  return {cp, len};
}

// Start offset of the code point that ends at s[end - 1].
std::size_t last_codepoint_start(std::string_view s, std::size_t end) {
  std::size_t pos = end - 1;
  std::size_t steps = 0;
  while (pos > 0 && steps < 3 &&
         (static_cast<unsigned char>(s[pos]) & 0xC0) == 0x80) {
    --pos;
    ++steps;
  }
  return pos;
}

}  // namespace

VectorTable::VectorTable(std::string name, std::size_t dim)
    : name_(std::move(name)), dim_(dim) {
  if (dim_ == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "vector table dimension must be positive");
  }
}

void VectorTable::insert(std::string token, Vector values) {
  if (token.empty()) throw Error(ErrorCode::kParse, "empty token");
  for (char c : token) {
    if (is_space(c)) {
      throw Error(ErrorCode::kParse, fmt::format("token '{}' contains whitespace", token));
    }
  }
  if (values.size() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("token '{}' has {} components, expected {}", token,
                            values.size(), dim_));
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonFinite,
                  fmt::format("token '{}' has a non-finite component", token));
    }
  }
  if (entries_.contains(token)) {
    throw Error(ErrorCode::kDuplicate, fmt::format("duplicate token '{}'", token));
  }
  tokens_.push_back(token);
  entries_.emplace(std::move(token), std::move(values));
}

const Vector* VectorTable::find(std::string_view token) const {
  const auto it = entries_.find(std::string(token));
  return it == entries_.end() ? nullptr : &it->second;
}

VectorTable load_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIo, fmt::format("cannot open embedding file '{}'", path.string()));
  }
  return parse_table(in, path.stem().string());
}

VectorTable parse_table(std::istream& in, std::string name) {
  std::optional<VectorTable> table;
  std::optional<std::size_t> declared_count;
  std::optional<std::size_t> declared_dim;
  std::string line;
  std::size_t line_no = 0;
  bool first_data_line = true;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line.front() == '#') continue;
    const auto fields = split_ws(line);
    if (fields.empty()) continue;

    if (first_data_line) {
      first_data_line = false;
      if (fields.size() == 2) {
        const auto count = parse_size(fields[0]);
        const auto dim = parse_size(fields[1]);
        if (count && dim) {
          declared_count = count;
          declared_dim = dim;
          table.emplace(name, *dim);
          continue;
        }
      }
    }

    if (fields.size() < 2) {
      throw Error(ErrorCode::kDimensionMismatch,
                  fmt::format("line {}: token without vector components", line_no));
    }
    Vector values;
    values.reserve(fields.size() - 1);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      const auto v = parse_double(fields[i]);
      if (!v) {
        throw Error(ErrorCode::kParse,
                    fmt::format("line {}: cannot parse '{}' as a number", line_no, fields[i]));
      }
      if (!std::isfinite(*v)) {
        throw Error(ErrorCode::kNonFinite,
                    fmt::format("line {}: non-finite component '{}'", line_no, fields[i]));
      }
      values.push_back(*v);
    }
    if (!table) table.emplace(name, values.size());
    try {
      table->insert(std::string(fields[0]), std::move(values));
    } catch (const Error& e) {
      throw Error(e.code(), fmt::format("line {}: {}", line_no, e.what()));
    }
  }

  if (!table || table->empty()) {
    throw Error(ErrorCode::kEmptyInput, fmt::format("embedding table '{}' has no rows", name));
  }
  if (declared_count && *declared_count != table->size()) {
    throw Error(ErrorCode::kParse,
                fmt::format("header declares {} rows of dim {}, found {}", *declared_count,
                            *declared_dim, table->size()));
  }
  return std::move(*table);
}

void write_table(const VectorTable& table, std::ostream& out) {
  out << table.size() << ' ' << table.dim() << '\n';
  for (const auto& token : table.tokens()) {
    out << token;
    for (double v : *table.find(token)) out << ' ' << fmt::format("{}", v);
    out << '\n';
  }
}

std::string normalize_token(std::string_view raw) {
  std::size_t begin = 0;
  std::size_t end = raw.size();
  while (begin < end) {
    const auto [cp, len] = decode_at(raw, begin);
    if (!is_punct_codepoint(cp)) break;
    begin += len;
  }
  while (end > begin) {
    const std::size_t start = last_codepoint_start(raw, end);
    const auto [cp, len] = decode_at(raw, start);
    if (start + len != end || !is_punct_codepoint(cp)) break;
    end = start;
  }
  std::string out(raw.substr(begin, end - begin));
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

TokenSequence tokenize(std::string_view text) {
  TokenSequence tokens;
  for (const auto raw : split_ws(text)) {
    auto token = normalize_token(raw);
    if (!token.empty()) tokens.push_back(std::move(token));
  }
  if (tokens.empty()) {
    throw Error(ErrorCode::kEmptyInput, "text has no tokens after normalization");
  }
  return tokens;
}

Vector avg_vector(std::span<const std::string> tokens, const VectorTable& table) {
  Vector sum(table.dim(), 0.0);
  std::size_t used = 0;
  for (const auto& token : tokens) {
    const Vector* v = table.find(token);
    if (v == nullptr) continue;
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += (*v)[i];
    ++used;
  }
  if (used == 0) {
    throw Error(ErrorCode::kEmptyRepresentation,
                fmt::format("no token of '{}' is in vocabulary '{}'", join_tokens(tokens),
                            table.name()));
  }
  for (double& x : sum) x /= static_cast<double>(used);
  return sum;
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("cosine of vectors with lengths {} and {}", u.size(), v.size()));
  }
  double dot = 0.0;
  double uu = 0.0;
  double vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) {
    throw Error(ErrorCode::kDegenerateVector, "cosine of a zero-norm vector");
  }
  const double c = dot / (std::sqrt(uu) * std::sqrt(vv));
  return std::clamp(c, -1.0, 1.0);
}

std::string join_tokens(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace zsx
