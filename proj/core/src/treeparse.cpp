#include "zsx/treeparse.hpp"

#include <deque>
#include <unordered_map>

#include <fmt/format.h>

#include "zsx/error.hpp"

namespace zsx {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

class TreeReader {
 public:
  explicit TreeReader(std::string_view s) : s_(s) {}

  SyntaxTree read() {
    skip_space();
    if (pos_ >= s_.size()) throw Error(ErrorCode::kParse, "empty tree string");
    if (s_[pos_] != '(') {
      throw Error(ErrorCode::kParse, fmt::format("tree must start with '(' at offset {}", pos_));
    }
    Node root = read_node();
    skip_space();
    if (pos_ != s_.size()) {
      throw Error(ErrorCode::kParse,
                  fmt::format("unbalanced parentheses: trailing input at offset {}", pos_));
    }
    // Unwrap `( (S ...) )`.
    while (root.tag.empty() && !root.is_leaf() && root.children.size() == 1 &&
           !root.children.front().is_leaf()) {
      Node inner = std::move(root.children.front());
      root = std::move(inner);
    }
    return SyntaxTree{std::move(root)};
  }

 private:
  void skip_space() {
    while (pos_ < s_.size() && is_space(s_[pos_])) ++pos_;
  }

  std::string_view read_atom() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && !is_space(s_[pos_]) && s_[pos_] != '(' && s_[pos_] != ')') ++pos_;
    return s_.substr(start, pos_ - start);
  }

  Node read_node() {
    const std::size_t open = pos_;
    ++pos_;  // '('
    skip_space();
    if (pos_ >= s_.size()) {
      throw Error(ErrorCode::kParse,
                  fmt::format("unbalanced parentheses: node at offset {} is not closed", open));
    }
    if (s_[pos_] == ')') throw Error(ErrorCode::kParse, fmt::format("empty node at offset {}", open));

    Node node;
    if (s_[pos_] != '(') node.tag = std::string(read_atom());

    for (;;) {
      skip_space();
      if (pos_ >= s_.size()) {
        throw Error(ErrorCode::kParse,
                    fmt::format("unbalanced parentheses: node at offset {} is not closed", open));
      }
      if (s_[pos_] == ')') {
        ++pos_;
        break;
      }
      if (s_[pos_] == '(') {
        node.children.push_back(read_node());
      } else {
        node.children.push_back(Node::leaf(std::string(read_atom())));
      }
    }
    if (node.children.empty()) {
      throw Error(ErrorCode::kParse,
                  fmt::format("node '{}' at offset {} has no children", node.tag, open));
    }
    return node;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

void collect_leaves(const Node& node, std::vector<std::string>& out) {
  if (node.is_leaf()) {
    out.push_back(*node.leaf_token);
    return;
  }
  for (const auto& child : node.children) collect_leaves(child, out);
}

std::size_t count_nodes(const Node& node) {
  std::size_t n = 1;
  for (const auto& child : node.children) n += count_nodes(child);
  return n;
}

void write_node(const Node& node, std::string& out) {
  if (node.is_leaf()) {
    out += *node.leaf_token;
    return;
  }
  out += '(';
  out += node.tag;
  for (const auto& child : node.children) {
    if (!(out.back() == '(')) out += ' ';
    write_node(child, out);
  }
  out += ')';
}

std::optional<Node> normalize_node(const Node& node) {
  if (node.is_leaf()) {
    auto token = normalize_token(*node.leaf_token);
    if (token.empty()) return std::nullopt;
    return Node::leaf(std::move(token));
  }
  Node out;
  out.tag = node.tag;
  for (const auto& child : node.children) {
    if (auto kept = normalize_node(child)) out.children.push_back(std::move(*kept));
  }
  if (out.children.empty()) return std::nullopt;
  return out;
}

Node build_balanced(const TokenSequence& tokens, std::size_t begin, std::size_t end) {
  if (end - begin == 1) return Node::leaf(tokens[begin]);
  const std::size_t mid = begin + (end - begin + 1) / 2;
  Node node;
  node.tag = "X";
  node.children.push_back(build_balanced(tokens, begin, mid));
  node.children.push_back(build_balanced(tokens, mid, end));
  return node;
}

}  // namespace

std::vector<std::string> SyntaxTree::leaves() const {
  std::vector<std::string> out;
  collect_leaves(root, out);
  return out;
}

std::size_t SyntaxTree::node_count() const { return count_nodes(root); }

SyntaxTree parse_tree(std::string_view s) { return TreeReader(s).read(); }

std::string to_bracketed(const SyntaxTree& tree) {
  std::string out;
  write_node(tree.root, out);
  return out;
}

SyntaxTree normalize_leaves(const SyntaxTree& tree) {
  auto root = normalize_node(tree.root);
  if (!root) throw Error(ErrorCode::kTreeMismatch, "tree has no word leaves");
  return SyntaxTree{std::move(*root)};
}

void validate_against(const SyntaxTree& tree, const TokenSequence& tokens) {
  std::vector<std::string> leaves;
  for (const auto& leaf : tree.leaves()) {
    auto token = normalize_token(leaf);
    if (!token.empty()) leaves.push_back(std::move(token));
  }
  const std::size_t common = std::min(leaves.size(), tokens.size());
  for (std::size_t i = 0; i < common; ++i) {
    if (leaves[i] != tokens[i]) {
      throw Error(ErrorCode::kTreeMismatch,
                  fmt::format("tree leaf '{}' differs from token '{}' at position {}", leaves[i],
                              tokens[i], i));
    }
  }
  if (leaves.size() != tokens.size()) {
    throw Error(ErrorCode::kTreeMismatch,
                fmt::format("tree has {} leaves but text has {} tokens (first divergence at "
                            "position {})",
                            leaves.size(), tokens.size(), common));
  }
}

std::vector<NodeSpan> bfs_spans(const SyntaxTree& tree) {
  const auto leaves = tree.leaves();

  std::unordered_map<const Node*, std::size_t> widths;
  const auto measure = [&widths](const Node& node, const auto& self) -> std::size_t {
    std::size_t w = node.is_leaf() ? 1 : 0;
    for (const auto& child : node.children) w += self(child, self);
    widths[&node] = w;
    return w;
  };
  measure(tree.root, measure);

  struct Pending {
    const Node* node;
    std::size_t depth;
    std::size_t begin;
  };
  std::vector<NodeSpan> spans;
  std::deque<Pending> queue{{&tree.root, 0, 0}};
  while (!queue.empty()) {
    const Pending cur = queue.front();
    queue.pop_front();

    NodeSpan span;
    span.node_index = spans.size();
    span.tag = cur.node->tag;
    span.depth = cur.depth;
    span.begin = cur.begin;
    span.end = cur.begin + widths.at(cur.node);
    span.is_leaf = cur.node->is_leaf();
    span.tokens.assign(leaves.begin() + static_cast<std::ptrdiff_t>(span.begin),
                       leaves.begin() + static_cast<std::ptrdiff_t>(span.end));
    spans.push_back(std::move(span));

    std::size_t offset = cur.begin;
    for (const auto& child : cur.node->children) {
      queue.push_back({&child, cur.depth + 1, offset});
      offset += widths.at(&child);
    }
  }
  return spans;
}

SyntaxTree fallback_tree(const TokenSequence& tokens) {
  if (tokens.empty()) throw Error(ErrorCode::kEmptyInput, "fallback tree over no tokens");
  return SyntaxTree{build_balanced(tokens, 0, tokens.size())};
}

}  // namespace zsx
