#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "zsx/catalog.hpp"
#include "zsx/error.hpp"
#include "zsx/vecstore.hpp"

namespace zsx {

enum class Strategy { kDirect, kCentroid, kCentroidTopK };
enum class ProviderKind { kEmbeddingCosine, kNliFile, kNliRemote };

std::string_view strategy_name(Strategy s);
Strategy parse_strategy(std::string_view name);  // throws kConfig
std::string_view provider_name(ProviderKind k);
ProviderKind parse_provider(std::string_view name);  // throws kConfig

// A text to score. `id` keys precomputed score files; `text` is the raw text.
struct TextRef {
  std::string id;
  std::string text;
};

// Membership-score source for (text, descriptor) pairs.
class ScoreProvider {
 public:
  virtual ~ScoreProvider() = default;

  virtual ProviderKind kind() const = 0;

  // One entry per descriptor, index-aligned. std::nullopt marks a descriptor
  // the provider cannot represent (e.g. every word out of vocabulary); such
  // descriptors are skipped. Failures affecting the whole text throw.
  virtual std::vector<std::optional<double>> score(
      const TextRef& text, std::span<const std::string> descriptors) const = 0;
};

// Cosine between averaged word vectors of the text and of each descriptor.
class EmbeddingCosineProvider final : public ScoreProvider {
 public:
  explicit EmbeddingCosineProvider(std::shared_ptr<const VectorTable> table);

  ProviderKind kind() const override { return ProviderKind::kEmbeddingCosine; }
  std::vector<std::optional<double>> score(
      const TextRef& text, std::span<const std::string> descriptors) const override;

  const VectorTable& table() const { return *table_; }

 private:
  std::shared_ptr<const VectorTable> table_;
};

// Precomputed entailment probabilities from a `text_id<TAB>descriptor<TAB>prob`
// file. Lookups are keyed by TextRef::id.
class NliFileProvider final : public ScoreProvider {
 public:
  static NliFileProvider load(const std::filesystem::path& path);
  static NliFileProvider parse(std::istream& in);

  ProviderKind kind() const override { return ProviderKind::kNliFile; }
  // Throws kMissingScore naming the first absent (text_id, descriptor) pair.
  std::vector<std::optional<double>> score(
      const TextRef& text, std::span<const std::string> descriptors) const override;

  std::optional<double> lookup(std::string_view text_id, std::string_view descriptor) const;
  std::size_t size() const { return scores_.size(); }

 private:
  std::map<std::pair<std::string, std::string>, double, std::less<>> scores_;
};

struct RankedItem {
  std::string descriptor;  // empty for label-level (centroid) rankings
  std::string label_id;
  double score = 0.0;

  friend bool operator==(const RankedItem&, const RankedItem&) = default;
};

// Items sorted by descending score; ties by (label_id, descriptor).
struct MembershipRanking {
  std::string text_ref;
  Strategy strategy = Strategy::kDirect;
  std::vector<RankedItem> items;
};

struct LabelPrediction {
  std::vector<std::string> label_ids;  // first-occurrence order
  std::size_t k = 1;
  Strategy strategy = Strategy::kDirect;
  std::map<std::string, double> per_label_best_score;
};

// Scores every descriptor of the catalog against the text and sorts them.
// Identical (label_id, descriptor text) pairs from different modes are scored
// once. Throws kEmptyRanking if no descriptor is scoreable.
MembershipRanking sorted_descriptors(const TextRef& text, const LabelCatalog& catalog,
                                     const ScoreProvider& provider, Warnings* warnings = nullptr);

// Labels of the first min(k, |ranking|) items, deduplicated.
LabelPrediction predict_labels(const MembershipRanking& ranking, std::size_t k);

// One item per label: cosine between the text vector and the mean vector of
// the label's descriptors.
MembershipRanking centroid_ranking(const TextRef& text, const LabelCatalog& catalog,
                                   const VectorTable& table, Warnings* warnings = nullptr);

// Like centroid_ranking, but each centroid averages only the `k_desc`
// descriptors closest to the text.
MembershipRanking topk_centroid_ranking(const TextRef& text, const LabelCatalog& catalog,
                                        const VectorTable& table, std::size_t k_desc,
                                        Warnings* warnings = nullptr);

// Entailment probabilities keyed by descriptor. Throws kOutOfRange when the
// provider returns anything outside [0, 1].
std::map<std::string, double> nli_scores(const TextRef& text,
                                         std::span<const std::string> descriptors,
                                         const ScoreProvider& provider);

struct ScoringConfig {
  Strategy strategy = Strategy::kDirect;
  std::size_t k_desc = 1;  // centroid-topk only
};

// Binds a catalog, provider, and strategy into a text -> ranking function.
// Centroid strategies require an EmbeddingCosineProvider.
class Scorer {
 public:
  Scorer(std::shared_ptr<const LabelCatalog> catalog, std::shared_ptr<const ScoreProvider> provider,
         ScoringConfig config = {});

  MembershipRanking rank(const TextRef& text, Warnings* warnings = nullptr) const;

  const LabelCatalog& catalog() const { return *catalog_; }
  const ScoreProvider& provider() const { return *provider_; }
  const ScoringConfig& config() const { return config_; }

 private:
  std::shared_ptr<const LabelCatalog> catalog_;
  std::shared_ptr<const ScoreProvider> provider_;
  const VectorTable* table_ = nullptr;
  ScoringConfig config_;
};

}  // namespace zsx
