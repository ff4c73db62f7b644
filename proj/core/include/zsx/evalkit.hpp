#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "zsx/catalog.hpp"
#include "zsx/error.hpp"
#include "zsx/explain.hpp"
#include "zsx/scorer.hpp"
#include "zsx/treeparse.hpp"

namespace zsx {

using LabelSet = std::set<std::string>;

enum class BinaryLabel { kControl = 0, kDepressive = 1 };

struct DatasetRow {
  std::string id;
  std::string text;
  LabelSet gold_labels;  // empty when unlabeled
  std::optional<SyntaxTree> tree;
  std::optional<BinaryLabel> binary_label;
};

// TSV `id<TAB>text<TAB>gold_labels<TAB>tree<TAB>binary_label`; trailing columns
// may be omitted. When `catalog` is given, gold labels must resolve in it.
std::vector<DatasetRow> load_dataset(const std::filesystem::path& path,
                                     const LabelCatalog* catalog = nullptr);
std::vector<DatasetRow> parse_dataset(std::istream& in, const LabelCatalog* catalog = nullptr);

struct MicroCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  // 2TP / (2TP + FP + FN); 0 when the denominator is 0.
  double f1() const;
};

MicroCounts micro_counts(std::span<const LabelSet> gold, std::span<const LabelSet> pred);
double micro_f1(std::span<const LabelSet> gold, std::span<const LabelSet> pred);

// F1 of the positive (depressive) class.
double binary_f1(std::span<const BinaryLabel> gold, std::span<const BinaryLabel> pred);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for fewer than two values
  std::size_t n = 0;
};

MeanStd mean_std(std::span<const double> values);

// ---------------------------------------------------------------------------
// Splits and seeding

struct SplitPlan {
  std::uint64_t seed = 42;
  double train_fraction = 0.8;
  std::size_t n_repeats = 3;
  bool stratified = false;
};

struct Split {
  std::vector<std::size_t> train;  // ascending row indices
  std::vector<std::size_t> test;
};

// Per-stream generator derived from (seed, repeat, stream); independent of
// how repeats are scheduled.
std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t repeat, std::uint64_t stream);

// Uniform integer in [0, bound) by rejection sampling; portable across
// standard libraries.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);
void shuffle_indices(std::vector<std::size_t>& v, std::mt19937_64& rng);

// One split per repeat. With `stratified`, each class (given by `strata`)
// contributes floor(train_fraction * class_count) rows to train; otherwise
// floor(train_fraction * n) rows are drawn overall.
std::vector<Split> make_splits(std::span<const int> strata, const SplitPlan& plan);

// ---------------------------------------------------------------------------
// Symptom detection (multi-label)

struct DsdConfig {
  std::vector<std::size_t> k_labels{1};
  SplitPlan plan;
  std::size_t jobs = 1;
};

struct DsdSplitResult {
  std::size_t repeat = 0;
  std::size_t k = 1;
  double micro_f1 = 0.0;
  std::size_t n_test = 0;
};

struct DsdSummary {
  std::size_t k = 1;
  MeanStd micro_f1;
};

struct DsdReport {
  std::vector<std::size_t> row_index;  // evaluated dataset rows (labeled ones)
  std::vector<std::optional<MembershipRanking>> rankings;  // per evaluated row
  std::vector<Split> splits;  // indices into row_index
  std::vector<DsdSplitResult> per_split;  // ordered by (repeat, k)
  std::vector<DsdSummary> summary;        // one per k, in config order
};

// Scores each labeled row once, then computes test-set Micro-F1 per split for
// every k. Rows whose text cannot be represented predict the empty set.
DsdReport evaluate_dsd(std::span<const DatasetRow> rows, const Scorer& scorer,
                       const DsdConfig& config, Warnings* warnings = nullptr);

struct EiConfig {
  std::size_t ngram_n = 3;
  std::size_t k_label = 1;
  std::size_t jobs = 1;
};

struct EiSummary {
  MeanStd step;
  MeanStd ngramex;
  std::size_t step_wins = 0;
  std::size_t ngramex_wins = 0;
  std::size_t ties = 0;
};

// Mean and std of EI for both explainers over correctly predicted (top label
// in gold) test rows, pooled over all repeats. Rows without a usable tree use
// fallback_tree.
EiSummary evaluate_ei(std::span<const DatasetRow> rows, const Scorer& scorer,
                      const DsdReport& report, const EiConfig& config,
                      Warnings* warnings = nullptr);

// ---------------------------------------------------------------------------
// Depressive post detection (binary)

struct FeatureVector {
  std::vector<double> values;
};

struct FeatureSet {
  std::vector<std::string> label_order;
  std::vector<FeatureVector> features;
  std::vector<std::size_t> row_index;  // dataset row of each feature vector
};

// One value per catalog label: the label's best membership score for the text
// (0 for labels with no scoreable descriptor). Unscoreable rows are dropped.
FeatureSet featurize_dpd(std::span<const DatasetRow> rows, const Scorer& scorer,
                         std::size_t jobs = 1, Warnings* warnings = nullptr);

struct LinearHyperparams {
  double lr = 0.01;
  double lambda = 1e-3;
  std::size_t epochs = 200;
  std::uint64_t seed = 42;
};

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  LinearHyperparams hyperparams;

  double decision(std::span<const double> x) const;
  BinaryLabel predict(std::span<const double> x) const;
};

// Z-score scaling fitted on training features only.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(std::span<const FeatureVector> features);
  FeatureVector apply(const FeatureVector& f) const;
};

// Hinge loss + L2 minimized by SGD with a per-epoch shuffle drawn from
// `hyperparams.seed`. Inputs are expected to be standardized. Throws
// kSingleClass unless both classes are present. When `epoch_loss` is
// non-null it receives the regularized objective after each epoch.
LinearModel train_linear(std::span<const FeatureVector> features,
                         std::span<const BinaryLabel> labels, const LinearHyperparams& hyperparams,
                         std::vector<double>* epoch_loss = nullptr);

// Mean hinge loss + lambda/2 |w|^2.
double hinge_objective(const LinearModel& model, std::span<const FeatureVector> features,
                       std::span<const BinaryLabel> labels);

struct DpdSplitResult {
  std::size_t repeat = 0;
  double model_f1 = 0.0;
  double random_f1 = 0.0;
  double majority_f1 = 0.0;
  std::size_t n_test = 0;
};

struct DpdReport {
  std::vector<DpdSplitResult> per_split;
  MeanStd model;
  MeanStd random_uniform;
  MeanStd majority;
};

// Stratified repeats (plan.stratified is ignored): standardize on train, fit
// the linear model, and compare against a seeded p=0.5 random baseline and a
// train-majority baseline (ties favor the positive class).
DpdReport evaluate_dpd(std::span<const FeatureVector> features,
                       std::span<const BinaryLabel> labels, const SplitPlan& plan,
                       const LinearHyperparams& hyperparams, std::size_t jobs = 1);

}  // namespace zsx
