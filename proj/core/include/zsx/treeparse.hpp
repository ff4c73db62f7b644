#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "zsx/vecstore.hpp"

namespace zsx {

// A constituency-tree node: either internal (tag + children) or a leaf
// carrying one token. Leaf nodes have an empty tag.
struct Node {
  std::string tag;
  std::vector<Node> children;
  std::optional<std::string> leaf_token;

  bool is_leaf() const { return leaf_token.has_value(); }

  static Node leaf(std::string token) { return Node{{}, {}, std::move(token)}; }

  friend bool operator==(const Node&, const Node&) = default;
};

struct SyntaxTree {
  Node root;

  // Leaf tokens, left to right.
  std::vector<std::string> leaves() const;
  std::size_t node_count() const;

  friend bool operator==(const SyntaxTree&, const SyntaxTree&) = default;
};

// The leaf n-gram under one node. [begin, end) indexes into the tree leaves.
struct NodeSpan {
  std::size_t node_index = 0;  // BFS ordinal
  std::string tag;
  std::vector<std::string> tokens;
  std::size_t depth = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
  bool is_leaf = false;
};

// Parses `(TAG child ...)` where each child is a bracketed node or a bare
// token. An untagged wrapper such as `( (S ...) )` is accepted. Throws kParse
// for unbalanced parentheses, empty nodes, and nodes without children.
SyntaxTree parse_tree(std::string_view s);

// Inverse of parse_tree.
std::string to_bracketed(const SyntaxTree& tree);

// Normalizes leaves with the tokenizer rule and drops those that become empty
// (punctuation-only leaves), pruning internal nodes left without children.
// Throws kTreeMismatch if no leaf survives.
SyntaxTree normalize_leaves(const SyntaxTree& tree);

// Succeeds iff the normalized leaves equal `tokens` in order; otherwise throws
// kTreeMismatch naming the first divergent position.
void validate_against(const SyntaxTree& tree, const TokenSequence& tokens);

// Spans of every node, root and leaves included, in breadth-first order with
// siblings left to right.
std::vector<NodeSpan> bfs_spans(const SyntaxTree& tree);

// Balanced binary tree over `tokens`, splitting at ceil(n/2); internal tag "X".
// A single token yields a tree whose root is the leaf.
SyntaxTree fallback_tree(const TokenSequence& tokens);

}  // namespace zsx
