#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "zsx/error.hpp"
#include "zsx/scorer.hpp"
#include "zsx/treeparse.hpp"

namespace zsx {

enum class ExplainerKind { kStep, kNgramex };

std::string_view explainer_name(ExplainerKind kind);

struct Explanation {
  std::vector<std::string> tokens;
  ExplainerKind source = ExplainerKind::kStep;
  std::optional<std::string> node_tag;
  double membership_score = 0.0;
  std::size_t rank = 0;
  std::string label_id;
};

struct ExplanationSet {
  ExplainerKind explainer = ExplainerKind::kStep;
  TokenSequence tweet_tokens;
  std::string tweet_label;
  std::vector<Explanation> items;  // descending score, ranks 0..n-1
  double ei_score = 0.0;
};

// Syntax-tree guided explanation. The tweet label is the top label of the full
// text; every BFS node whose own top label matches it becomes a candidate
// scored by that label's membership score. Identical token spans keep their
// best score. The root span reuses the full-text ranking.
//
// Throws kTreeMismatch when the tree leaves do not match tokenize(text).
// Unscoreable spans are skipped with a warning.
ExplanationSet step(const TextRef& text, const SyntaxTree& tree, const Scorer& scorer,
                    std::size_t k_label = 1, Warnings* warnings = nullptr);

// Sliding-window n-gram baseline (stride 1). A text shorter than n yields the
// whole text as its only candidate.
ExplanationSet ngramex(const TextRef& text, std::size_t n, const Scorer& scorer,
                       std::size_t k_label = 1, Warnings* warnings = nullptr);

// Explainability index: mean over items of
//   (1 - |e_i| / |tweet|) * (1 - rank_i / n) * [label_i == tweet_label]
// with 0-based ranks. An empty set scores 0.
double ei_score(const ExplanationSet& set);

// EI_i of a single item within its set.
double ei_component(const ExplanationSet& set, const Explanation& item);

enum class Agreement { kStepWins, kNgramexWins, kTie };

std::string_view agreement_name(Agreement a);
Agreement agreement_of(double ei_step, double ei_ngramex);

struct ExplainerComparison {
  ExplanationSet step_set;
  ExplanationSet ngramex_set;
  double ei_step = 0.0;
  double ei_ngramex = 0.0;
  Agreement agreement = Agreement::kTie;
};

ExplainerComparison compare_explainers(const TextRef& text, const SyntaxTree& tree, std::size_t n,
                                       const Scorer& scorer, std::size_t k_label = 1,
                                       Warnings* warnings = nullptr);

}  // namespace zsx
