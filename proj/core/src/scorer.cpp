#include "zsx/scorer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>

#include <fmt/format.h>

namespace zsx {
namespace {

void sort_ranking(std::vector<RankedItem>& items) {
  std::sort(items.begin(), items.end(), [](const RankedItem& a, const RankedItem& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.label_id != b.label_id) return a.label_id < b.label_id;
    return a.descriptor < b.descriptor;
  });
}

// Text vector for cosine scoring; throws when the text is unrepresentable.
Vector text_vector(const TextRef& text, const VectorTable& table) {
  const auto tokens = tokenize(text.text);
  return avg_vector(tokens, table);
}

std::optional<Vector> descriptor_vector(const std::string& descriptor, const VectorTable& table) {
  try {
    const auto tokens = tokenize(descriptor);
    auto v = avg_vector(tokens, table);
    if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) return std::nullopt;
    return v;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kEmptyRepresentation || e.code() == ErrorCode::kEmptyInput) {
      return std::nullopt;
    }
    throw;
  }
}

Vector mean_of(const std::vector<const Vector*>& vectors) {
  Vector out(vectors.front()->size(), 0.0);
  for (const Vector* v : vectors) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += (*v)[i];
  }
  for (double& x : out) x /= static_cast<double>(vectors.size());
  return out;
}

MembershipRanking centroid_impl(const TextRef& text, const LabelCatalog& catalog,
                                const VectorTable& table, std::optional<std::size_t> k_desc,
                                Warnings* warnings) {
  const Vector tv = text_vector(text, table);
  MembershipRanking ranking;
  ranking.text_ref = text.id;
  ranking.strategy = k_desc ? Strategy::kCentroidTopK : Strategy::kCentroid;

  for (const auto& label : catalog.labels()) {
    // Distinct descriptor texts of this label, in catalog order.
    std::set<std::string> seen;
    std::vector<std::pair<std::string, Vector>> members;
    for (const Descriptor* d : catalog.descriptors_of(label.id)) {
      if (!seen.insert(d->text).second) continue;
      if (auto v = descriptor_vector(d->text, table)) members.emplace_back(d->text, std::move(*v));
    }
    if (members.empty()) {
      warn(warnings, fmt::format("label '{}' has no representable descriptor; dropped", label.id));
      continue;
    }
    if (k_desc && *k_desc < members.size()) {
      std::vector<std::pair<double, std::size_t>> closeness;
      for (std::size_t i = 0; i < members.size(); ++i) {
        closeness.emplace_back(cosine(tv, members[i].second), i);
      }
      std::sort(closeness.begin(), closeness.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return members[a.second].first < members[b.second].first;
      });
      closeness.resize(*k_desc);
      std::vector<std::pair<std::string, Vector>> chosen;
      for (const auto& [_, idx] : closeness) chosen.push_back(std::move(members[idx]));
      members = std::move(chosen);
    }
    std::vector<const Vector*> ptrs;
    for (const auto& m : members) ptrs.push_back(&m.second);
    const Vector centroid = mean_of(ptrs);
    try {
      ranking.items.push_back({"", label.id, cosine(tv, centroid)});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateVector) throw;
      warn(warnings, fmt::format("label '{}' has a zero centroid; dropped", label.id));
    }
  }
  if (ranking.items.empty()) {
    throw Error(ErrorCode::kEmptyRanking,
                fmt::format("text '{}': no label has a usable centroid", text.id));
  }
  sort_ranking(ranking.items);
  return ranking;
}

}  // namespace

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kDirect: return "direct";
    case Strategy::kCentroid: return "centroid";
    case Strategy::kCentroidTopK: return "centroid-topk";
  }
  return "?";
}

Strategy parse_strategy(std::string_view name) {
  for (Strategy s : {Strategy::kDirect, Strategy::kCentroid, Strategy::kCentroidTopK}) {
    if (name == strategy_name(s)) return s;
  }
  throw Error(ErrorCode::kConfig, fmt::format("unknown strategy '{}'", name));
}

std::string_view provider_name(ProviderKind k) {
  switch (k) {
    case ProviderKind::kEmbeddingCosine: return "embedding-cosine";
    case ProviderKind::kNliFile: return "nli-file";
    case ProviderKind::kNliRemote: return "nli-remote";
  }
  return "?";
}

ProviderKind parse_provider(std::string_view name) {
  for (ProviderKind k :
       {ProviderKind::kEmbeddingCosine, ProviderKind::kNliFile, ProviderKind::kNliRemote}) {
    if (name == provider_name(k)) return k;
  }
  throw Error(ErrorCode::kConfig, fmt::format("unknown provider '{}'", name));
}

EmbeddingCosineProvider::EmbeddingCosineProvider(std::shared_ptr<const VectorTable> table)
    : table_(std::move(table)) {
  if (!table_) throw Error(ErrorCode::kConfig, "embedding provider needs a vector table");
}

std::vector<std::optional<double>> EmbeddingCosineProvider::score(
    const TextRef& text, std::span<const std::string> descriptors) const {
  const Vector tv = text_vector(text, *table_);
  std::vector<std::optional<double>> out;
  out.reserve(descriptors.size());
  for (const auto& d : descriptors) {
    const auto dv = descriptor_vector(d, *table_);
    if (dv) {
      out.push_back(cosine(tv, *dv));
    } else {
      out.push_back(std::nullopt);
    }
  }
  return out;
}

NliFileProvider NliFileProvider::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("cannot open score file '{}'", path.string()));
  return parse(in);
}

NliFileProvider NliFileProvider::parse(std::istream& in) {
  NliFileProvider provider;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab1 = line.find('\t');
    const auto tab2 = tab1 == std::string::npos ? tab1 : line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos || line.find('\t', tab2 + 1) != std::string::npos) {
      throw Error(ErrorCode::kParse,
                  fmt::format("score file line {}: expected text_id<TAB>descriptor<TAB>prob",
                              line_no));
    }
    std::string text_id = line.substr(0, tab1);
    std::string descriptor = line.substr(tab1 + 1, tab2 - tab1 - 1);
    const std::string_view prob_text = std::string_view(line).substr(tab2 + 1);
    double prob = 0.0;
    const auto [ptr, ec] = std::from_chars(prob_text.data(), prob_text.data() + prob_text.size(), prob);
    if (ec != std::errc() || ptr != prob_text.data() + prob_text.size()) {
      throw Error(ErrorCode::kParse,
                  fmt::format("score file line {}: bad probability '{}'", line_no, prob_text));
    }
    if (!std::isfinite(prob) || prob < 0.0 || prob > 1.0) {
      throw Error(ErrorCode::kOutOfRange,
                  fmt::format("score file line {}: probability {} outside [0,1]", line_no, prob));
    }
    if (!provider.scores_.emplace(std::pair{text_id, descriptor}, prob).second) {
      throw Error(ErrorCode::kDuplicate,
                  fmt::format("score file line {}: duplicate pair ({}, {})", line_no, text_id,
                              descriptor));
    }
  }
  return provider;
}

std::optional<double> NliFileProvider::lookup(std::string_view text_id,
                                              std::string_view descriptor) const {
  const auto it = scores_.find(std::pair{std::string(text_id), std::string(descriptor)});
  if (it == scores_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::optional<double>> NliFileProvider::score(
    const TextRef& text, std::span<const std::string> descriptors) const {
  std::vector<std::optional<double>> out;
  out.reserve(descriptors.size());
  for (const auto& d : descriptors) {
    const auto p = lookup(text.id, d);
    if (!p) {
      throw Error(ErrorCode::kMissingScore,
                  fmt::format("missing score for ({}, {})", text.id, d));
    }
    out.push_back(*p);
  }
  return out;
}

MembershipRanking sorted_descriptors(const TextRef& text, const LabelCatalog& catalog,
                                     const ScoreProvider& provider, Warnings* warnings) {
  std::set<std::pair<std::string, std::string>> seen;
  std::vector<const Descriptor*> unique;
  std::vector<std::string> texts;
  for (const auto& d : catalog.descriptors()) {
    if (!seen.emplace(d.label_id, d.text).second) continue;
    unique.push_back(&d);
    texts.push_back(d.text);
  }

  const auto scores = provider.score(text, texts);
  if (scores.size() != texts.size()) {
    throw Error(ErrorCode::kProviderProtocol,
                fmt::format("provider returned {} scores for {} descriptors", scores.size(),
                            texts.size()));
  }

  MembershipRanking ranking;
  ranking.text_ref = text.id;
  ranking.strategy = Strategy::kDirect;
  ranking.items.reserve(unique.size());
  for (std::size_t i = 0; i < unique.size(); ++i) {
    if (!scores[i]) {
      warn(warnings, fmt::format("descriptor '{}' ({}) is not scoreable; skipped",
                                 unique[i]->text, unique[i]->label_id));
      continue;
    }
    if (!std::isfinite(*scores[i])) {
      throw Error(ErrorCode::kNonFinite,
                  fmt::format("non-finite score for ({}, {})", text.id, unique[i]->text));
    }
    ranking.items.push_back({unique[i]->text, unique[i]->label_id, *scores[i]});
  }
  if (ranking.items.empty()) {
    throw Error(ErrorCode::kEmptyRanking,
                fmt::format("text '{}': no descriptor is scoreable", text.id));
  }
  sort_ranking(ranking.items);
  return ranking;
}

LabelPrediction predict_labels(const MembershipRanking& ranking, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::kConfig, "k must be at least 1");
  if (ranking.items.empty()) {
    throw Error(ErrorCode::kEmptyRanking,
                fmt::format("cannot predict labels from an empty ranking ('{}')", ranking.text_ref));
  }
  LabelPrediction prediction;
  prediction.k = k;
  prediction.strategy = ranking.strategy;
  const std::size_t take = std::min(k, ranking.items.size());
  for (std::size_t i = 0; i < take; ++i) {
    const auto& item = ranking.items[i];
    const auto [it, inserted] = prediction.per_label_best_score.emplace(item.label_id, item.score);
    if (inserted) {
      prediction.label_ids.push_back(item.label_id);
    } else {
      it->second = std::max(it->second, item.score);
    }
  }
  return prediction;
}

MembershipRanking centroid_ranking(const TextRef& text, const LabelCatalog& catalog,
                                   const VectorTable& table, Warnings* warnings) {
  return centroid_impl(text, catalog, table, std::nullopt, warnings);
}

MembershipRanking topk_centroid_ranking(const TextRef& text, const LabelCatalog& catalog,
                                        const VectorTable& table, std::size_t k_desc,
                                        Warnings* warnings) {
  if (k_desc == 0) throw Error(ErrorCode::kConfig, "k_desc must be at least 1");
  return centroid_impl(text, catalog, table, k_desc, warnings);
}

std::map<std::string, double> nli_scores(const TextRef& text,
                                         std::span<const std::string> descriptors,
                                         const ScoreProvider& provider) {
  const auto scores = provider.score(text, descriptors);
  if (scores.size() != descriptors.size()) {
    throw Error(ErrorCode::kProviderProtocol, "provider returned a misaligned score list");
  }
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < descriptors.size(); ++i) {
    if (!scores[i]) {
      throw Error(ErrorCode::kMissingScore,
                  fmt::format("missing score for ({}, {})", text.id, descriptors[i]));
    }
    const double p = *scores[i];
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw Error(ErrorCode::kOutOfRange,
                  fmt::format("entailment score {} for ({}, {}) outside [0,1]", p, text.id,
                              descriptors[i]));
    }
    out[descriptors[i]] = p;
  }
  return out;
}

Scorer::Scorer(std::shared_ptr<const LabelCatalog> catalog,
               std::shared_ptr<const ScoreProvider> provider, ScoringConfig config)
    : catalog_(std::move(catalog)), provider_(std::move(provider)), config_(config) {
  if (!catalog_ || !provider_) throw Error(ErrorCode::kConfig, "scorer needs a catalog and provider");
  if (config_.strategy != Strategy::kDirect) {
    const auto* embedding = dynamic_cast<const EmbeddingCosineProvider*>(provider_.get());
    if (embedding == nullptr) {
      throw Error(ErrorCode::kConfig,
                  fmt::format("strategy '{}' requires the embedding-cosine provider",
                              strategy_name(config_.strategy)));
    }
    table_ = &embedding->table();
  }
  if (config_.strategy == Strategy::kCentroidTopK && config_.k_desc == 0) {
    throw Error(ErrorCode::kConfig, "centroid-topk requires k_desc >= 1");
  }
}

MembershipRanking Scorer::rank(const TextRef& text, Warnings* warnings) const {
  switch (config_.strategy) {
    case Strategy::kDirect:
      return sorted_descriptors(text, *catalog_, *provider_, warnings);
    case Strategy::kCentroid:
      return centroid_ranking(text, *catalog_, *table_, warnings);
    case Strategy::kCentroidTopK:
      return topk_centroid_ranking(text, *catalog_, *table_, config_.k_desc, warnings);
  }
  throw Error(ErrorCode::kConfig, "unknown strategy");
}

}  // namespace zsx
