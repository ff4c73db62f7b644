#include "zsx/explain.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>

namespace zsx {
namespace {

struct Candidate {
  std::vector<std::string> tokens;
  std::optional<std::string> node_tag;
  double score = 0.0;
  std::size_t order = 0;  // BFS ordinal or window start
};

bool is_unscoreable(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kEmptyRepresentation:
    case ErrorCode::kEmptyInput:
    case ErrorCode::kEmptyRanking:
    case ErrorCode::kDegenerateVector:
      return true;
    default:
      return false;
  }
}

// Top-1 (label, score) of a phrase, or nullopt when the phrase is unscoreable.
std::optional<RankedItem> top_of_phrase(const std::vector<std::string>& tokens,
                                        const Scorer& scorer, Warnings* warnings) {
  const std::string phrase = join_tokens(tokens);
  try {
    const auto ranking = scorer.rank(TextRef{phrase, phrase});
    return ranking.items.front();
  } catch (const Error& e) {
    if (!is_unscoreable(e)) throw;
    warn(warnings, fmt::format("span '{}' skipped: {}", phrase, e.what()));
    return std::nullopt;
  }
}

ExplanationSet finalize(ExplainerKind kind, TokenSequence tweet_tokens, std::string tweet_label,
                        std::vector<Candidate> candidates) {
  // Deduplicate identical token sequences, keeping the best score and, on
  // equal scores, the earliest candidate.
  std::map<std::vector<std::string>, Candidate> best;
  for (auto& c : candidates) {
    auto it = best.find(c.tokens);
    if (it == best.end()) {
      best.emplace(c.tokens, std::move(c));
    } else if (c.score > it->second.score) {
      const std::size_t first_seen = std::min(it->second.order, c.order);
      it->second = std::move(c);
      it->second.order = first_seen;
    } else {
      it->second.order = std::min(it->second.order, c.order);
    }
  }
  std::vector<Candidate> unique;
  unique.reserve(best.size());
  for (auto& [_, c] : best) unique.push_back(std::move(c));
  std::sort(unique.begin(), unique.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.order < b.order;
  });

  ExplanationSet set;
  set.explainer = kind;
  set.tweet_tokens = std::move(tweet_tokens);
  set.tweet_label = std::move(tweet_label);
  for (std::size_t r = 0; r < unique.size(); ++r) {
    Explanation e;
    e.tokens = std::move(unique[r].tokens);
    e.source = kind;
    e.node_tag = std::move(unique[r].node_tag);
    e.membership_score = unique[r].score;
    e.rank = r;
    e.label_id = set.tweet_label;
    set.items.push_back(std::move(e));
  }
  set.ei_score = ei_score(set);
  return set;
}

struct TweetLabel {
  TokenSequence tokens;
  std::string label;
  double score = 0.0;
};

TweetLabel label_tweet(const TextRef& text, const Scorer& scorer, std::size_t k_label,
                       Warnings* warnings) {
  TweetLabel out;
  out.tokens = tokenize(text.text);
  const auto ranking = scorer.rank(text, warnings);
  const auto prediction = predict_labels(ranking, k_label);
  out.label = prediction.label_ids.front();
  out.score = ranking.items.front().score;
  return out;
}

}  // namespace

std::string_view explainer_name(ExplainerKind kind) {
  return kind == ExplainerKind::kStep ? "step" : "ngramex";
}

ExplanationSet step(const TextRef& text, const SyntaxTree& tree, const Scorer& scorer,
                    std::size_t k_label, Warnings* warnings) {
  const TweetLabel tweet = label_tweet(text, scorer, k_label, warnings);
  const SyntaxTree normalized = normalize_leaves(tree);
  validate_against(normalized, tweet.tokens);

  std::vector<Candidate> candidates;
  for (const auto& span : bfs_spans(normalized)) {
    RankedItem top;
    if (span.begin == 0 && span.end == tweet.tokens.size()) {
      top = RankedItem{"", tweet.label, tweet.score};
    } else {
      auto scored = top_of_phrase(span.tokens, scorer, warnings);
      if (!scored) continue;
      top = std::move(*scored);
    }
    if (top.label_id != tweet.label) continue;
    std::optional<std::string> tag;
    if (!span.tag.empty()) tag = span.tag;
    candidates.push_back({span.tokens, std::move(tag), top.score, span.node_index});
  }
  return finalize(ExplainerKind::kStep, tweet.tokens, tweet.label, std::move(candidates));
}

ExplanationSet ngramex(const TextRef& text, std::size_t n, const Scorer& scorer,
                       std::size_t k_label, Warnings* warnings) {
  if (n == 0) throw Error(ErrorCode::kConfig, "n-gram length must be at least 1");
  const TweetLabel tweet = label_tweet(text, scorer, k_label, warnings);
  const auto& tokens = tweet.tokens;

  std::vector<Candidate> candidates;
  if (tokens.size() <= n) {
    candidates.push_back({tokens, std::nullopt, tweet.score, 0});
  } else {
    for (std::size_t start = 0; start + n <= tokens.size(); ++start) {
      std::vector<std::string> window(tokens.begin() + static_cast<std::ptrdiff_t>(start),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(start + n));
      auto scored = top_of_phrase(window, scorer, warnings);
      if (!scored || scored->label_id != tweet.label) continue;
      candidates.push_back({std::move(window), std::nullopt, scored->score, start});
    }
  }
  return finalize(ExplainerKind::kNgramex, tokens, tweet.label, std::move(candidates));
}

double ei_component(const ExplanationSet& set, const Explanation& item) {
  if (set.tweet_tokens.empty() || set.items.empty()) return 0.0;
  const double n = static_cast<double>(set.items.size());
  const double length_score =
      1.0 - static_cast<double>(item.tokens.size()) / static_cast<double>(set.tweet_tokens.size());
  const double rank_score = 1.0 - static_cast<double>(item.rank) / n;
  const double relevance = item.label_id == set.tweet_label ? 1.0 : 0.0;
  return length_score * rank_score * relevance;
}

double ei_score(const ExplanationSet& set) {
  if (set.items.empty() || set.tweet_tokens.empty()) return 0.0;
  double total = 0.0;
  for (const auto& item : set.items) total += ei_component(set, item);
  return total / static_cast<double>(set.items.size());
}

std::string_view agreement_name(Agreement a) {
  switch (a) {
    case Agreement::kStepWins: return "step_wins";
    case Agreement::kNgramexWins: return "ngramex_wins";
    case Agreement::kTie: return "tie";
  }
  return "?";
}

Agreement agreement_of(double ei_step, double ei_ngramex) {
  if (ei_step > ei_ngramex) return Agreement::kStepWins;
  if (ei_step < ei_ngramex) return Agreement::kNgramexWins;
  return Agreement::kTie;
}

ExplainerComparison compare_explainers(const TextRef& text, const SyntaxTree& tree, std::size_t n,
                                       const Scorer& scorer, std::size_t k_label,
                                       Warnings* warnings) {
  ExplainerComparison out;
  out.step_set = step(text, tree, scorer, k_label, warnings);
  out.ngramex_set = ngramex(text, n, scorer, k_label, warnings);
  out.ei_step = out.step_set.ei_score;
  out.ei_ngramex = out.ngramex_set.ei_score;
  out.agreement = agreement_of(out.ei_step, out.ei_ngramex);
  return out;
}

}  // namespace zsx
