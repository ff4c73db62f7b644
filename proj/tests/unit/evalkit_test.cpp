#include "zsx/evalkit.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "support/fake_provider.hpp"
#include "support/fixtures.hpp"

namespace zsx {
namespace {

using test::error_code_of;

std::vector<DatasetRow> rows_from(const std::string& text, const LabelCatalog* catalog = nullptr) {
  std::istringstream in(text);
  return parse_dataset(in, catalog);
}

// n orthogonal labels "l0".."l{n-1}", each with one descriptor word "w{i}".
struct Separable {
  std::shared_ptr<LabelCatalog> catalog;
  std::shared_ptr<VectorTable> table;
  Scorer scorer;
};

Separable separable(std::size_t n_labels) {
  auto table = std::make_shared<VectorTable>("onehot", n_labels);
  std::vector<Label> labels;
  std::vector<Descriptor> descriptors;
  for (std::size_t i = 0; i < n_labels; ++i) {
    Vector v(n_labels, 0.0);
    v[i] = 1.0;
    table->insert("w" + std::to_string(i), v);
    labels.push_back({"l" + std::to_string(i), ""});
    descriptors.push_back({"w" + std::to_string(i), "l" + std::to_string(i), Mode::kALL});
  }
  auto catalog = std::make_shared<LabelCatalog>(labels, descriptors);
  return {catalog, table, Scorer(catalog, std::make_shared<EmbeddingCosineProvider>(table))};
}

std::vector<DatasetRow> separable_rows(std::size_t n_labels, std::size_t n_rows) {
  std::vector<DatasetRow> rows;
  for (std::size_t i = 0; i < n_rows; ++i) {
    const auto c = std::to_string(i % n_labels);
    rows.push_back({"r" + std::to_string(i), "w" + c, {"l" + c}, std::nullopt, std::nullopt});
  }
  return rows;
}

TEST(LoadDataset, Examples) {
  const auto rows = rows_from(
      "a\tI can't sleep\tdisturbed_sleep\t(S (NP I) (VP can't sleep))\t1\n"
      "b\tnothing matters\tanhedonia;disturbed_sleep\t\t0\n"
      "c\tunlabeled\n");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].gold_labels, LabelSet{"disturbed_sleep"});
  ASSERT_TRUE(rows[0].tree);
  EXPECT_EQ(rows[0].tree->leaves().size(), 3u);
  EXPECT_EQ(rows[0].binary_label, BinaryLabel::kDepressive);
  EXPECT_EQ(rows[1].gold_labels.size(), 2u);
  EXPECT_FALSE(rows[1].tree);
  EXPECT_EQ(rows[1].binary_label, BinaryLabel::kControl);
  EXPECT_TRUE(rows[2].gold_labels.empty());
  EXPECT_FALSE(rows[2].binary_label);
}

TEST(LoadDataset, Errors) {
  const LabelCatalog catalog({{"anhedonia", "Anhedonia"}}, {{"x", "anhedonia", Mode::kDH}});
  EXPECT_EQ(error_code_of([&] { rows_from("a\tt\tnosuch\n", &catalog); }),
            ErrorCode::kUnknownLabel);
  EXPECT_EQ(error_code_of([] { rows_from("a\tt\na\tu\n"); }), ErrorCode::kDuplicate);
  EXPECT_EQ(error_code_of([] { rows_from("a\tt\t\t(S (x)\n"); }), ErrorCode::kParse);
  EXPECT_EQ(error_code_of([] { rows_from("a\tt\t\t\t2\n"); }), ErrorCode::kParse);
  EXPECT_EQ(error_code_of([] { rows_from("lonely\n"); }), ErrorCode::kParse);
}

TEST(MicroF1, Examples) {
  const std::vector<LabelSet> gold{{"A"}, {"B"}};
  const std::vector<LabelSet> pred{{"A"}, {"A"}};
  const auto c = micro_counts(gold, pred);
  EXPECT_EQ(c.tp, 1u);
  EXPECT_EQ(c.fp, 1u);
  EXPECT_EQ(c.fn, 1u);
  EXPECT_DOUBLE_EQ(micro_f1(gold, pred), 0.5);
  EXPECT_DOUBLE_EQ(micro_f1(gold, gold), 1.0);
  const std::vector<LabelSet> empty(2);
  EXPECT_DOUBLE_EQ(micro_f1(gold, empty), 0.0);
  EXPECT_DOUBLE_EQ(micro_f1(empty, empty), 0.0);
  EXPECT_EQ(error_code_of([&] { micro_f1(gold, std::vector<LabelSet>(1)); }),
            ErrorCode::kLengthMismatch);
}

TEST(MicroF1, SymmetricAndSelfPerfect) {
  std::mt19937_64 rng(3);
  const std::vector<std::string> universe{"A", "B", "C", "D"};
  auto random_set = [&] {
    LabelSet s;
    for (const auto& l : universe) {
      if (rng() % 3 == 0) s.insert(l);
    }
    return s;
  };
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<LabelSet> g;
    std::vector<LabelSet> p;
    for (int i = 0; i < 6; ++i) {
      g.push_back(random_set());
      p.push_back(random_set());
    }
    EXPECT_DOUBLE_EQ(micro_f1(g, p), micro_f1(p, g));
    const bool any = std::any_of(g.begin(), g.end(), [](const LabelSet& s) { return !s.empty(); });
    if (any) EXPECT_DOUBLE_EQ(micro_f1(g, g), 1.0);
  }
}

TEST(MeanStd, SampleStd) {
  const std::vector<double> v{1, 2, 3, 4};
  const auto s = mean_std(v);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.std, std::sqrt(5.0 / 3.0), 1e-12);
  EXPECT_DOUBLE_EQ(mean_std(std::vector<double>{7}).std, 0.0);
}

TEST(Splits, EveryRowOnceAndStratifiedBounds) {
  std::vector<int> strata;
  for (int i = 0; i < 37; ++i) strata.push_back(i % 3 == 0 ? 1 : 0);
  SplitPlan plan;
  plan.n_repeats = 10;
  plan.stratified = true;
  plan.train_fraction = 0.7;
  const auto splits = make_splits(strata, plan);
  ASSERT_EQ(splits.size(), 10u);
  std::map<int, std::size_t> class_count;
  for (int s : strata) ++class_count[s];
  for (const auto& split : splits) {
    std::vector<std::size_t> all = split.train;
    all.insert(all.end(), split.test.begin(), split.test.end());
    std::sort(all.begin(), all.end());
    ASSERT_EQ(all.size(), strata.size());
    for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);
    EXPECT_TRUE(std::is_sorted(split.train.begin(), split.train.end()));
    std::map<int, std::size_t> in_train;
    for (auto i : split.train) ++in_train[strata[i]];
    for (const auto& [cls, count] : class_count) {
      const auto want = static_cast<long>(std::floor(0.7 * static_cast<double>(count)));
      EXPECT_LE(std::abs(static_cast<long>(in_train[cls]) - want), 1);
    }
  }
  EXPECT_NE(splits[0].train, splits[1].train);
  EXPECT_EQ(make_splits(strata, plan)[3].train, splits[3].train);
}

TEST(Splits, UniformBelowStaysInRange) {
  auto rng = stream_rng(1, 2, 3);
  for (std::uint64_t bound : {1ull, 2ull, 3ull, 1000ull, (1ull << 63) + 5}) {
    for (int i = 0; i < 200; ++i) EXPECT_LT(uniform_below(rng, bound), bound);
  }
}

TEST(EvaluateDsd, SeparableIsPerfectAtKOne) {
  const auto fx = separable(4);
  const auto rows = separable_rows(4, 40);
  DsdConfig config;
  config.k_labels = {1};
  const auto report = evaluate_dsd(rows, fx.scorer, config);
  ASSERT_EQ(report.summary.size(), 1u);
  EXPECT_DOUBLE_EQ(report.summary[0].micro_f1.mean, 1.0);
  EXPECT_EQ(report.per_split.size(), 3u);
  for (const auto& s : report.per_split) EXPECT_EQ(s.n_test, 8u);
}

TEST(EvaluateDsd, KEqualsLabelCountGivesPrecisionFloor) {
  for (std::size_t n_labels : {2u, 3u, 5u}) {
    const auto fx = separable(n_labels);
    const auto rows = separable_rows(n_labels, 30);
    DsdConfig config;
    config.k_labels = {n_labels};
    const auto report = evaluate_dsd(rows, fx.scorer, config);
    for (const auto& s : report.per_split) {
      EXPECT_NEAR(s.micro_f1, 2.0 / (1.0 + static_cast<double>(n_labels)), 1e-12);
    }
  }
}

TEST(EvaluateDsd, SweepRowsAndBeatsConstant) {
  const auto fx = separable(9);
  const auto rows = separable_rows(9, 45);
  DsdConfig config;
  config.k_labels = {1, 3, 6, 9};
  const auto report = evaluate_dsd(rows, fx.scorer, config);
  EXPECT_EQ(report.summary.size(), 4u);
  EXPECT_EQ(report.per_split.size(), 12u);
  for (std::size_t i = 1; i < report.summary.size(); ++i) {
    EXPECT_LE(report.summary[i].micro_f1.mean, report.summary[i - 1].micro_f1.mean);
  }
  std::vector<LabelSet> gold;
  std::vector<LabelSet> constant;
  for (const auto& r : rows) {
    gold.push_back(r.gold_labels);
    constant.push_back({"l0"});
  }
  EXPECT_GE(report.summary[0].micro_f1.mean, micro_f1(gold, constant));
}

TEST(EvaluateDsd, UnlabeledAndUnscoreableRows) {
  const auto fx = separable(2);
  auto rows = separable_rows(2, 10);
  rows.push_back({"x", "w0", {}, std::nullopt, std::nullopt});
  rows.push_back({"y", "unknownword", {"l1"}, std::nullopt, std::nullopt});
  Warnings w;
  DsdConfig config;
  config.plan.train_fraction = 0.5;
  const auto report = evaluate_dsd(rows, fx.scorer, config, &w);
  EXPECT_EQ(report.row_index.size(), 11u);
  EXPECT_FALSE(report.rankings.back());
  EXPECT_GE(w.size(), 2u);
}

TEST(EvaluateDsd, JobsDoNotChangeResults) {
  const auto fx = separable(3);
  const auto rows = separable_rows(3, 30);
  DsdConfig one;
  one.k_labels = {1, 2};
  DsdConfig four = one;
  four.jobs = 4;
  const auto a = evaluate_dsd(rows, fx.scorer, one);
  const auto b = evaluate_dsd(rows, fx.scorer, four);
  ASSERT_EQ(a.per_split.size(), b.per_split.size());
  for (std::size_t i = 0; i < a.per_split.size(); ++i) {
    EXPECT_EQ(a.per_split[i].micro_f1, b.per_split[i].micro_f1);
  }
}

TEST(FeaturizeDpd, Examples) {
  const auto fx = separable(2);
  const std::vector<DatasetRow> rows{{"a", "w0", {}, std::nullopt, BinaryLabel::kDepressive},
                                     {"b", "oov", {}, std::nullopt, BinaryLabel::kControl}};
  Warnings w;
  const auto fs = featurize_dpd(rows, fx.scorer, 1, &w);
  EXPECT_EQ(fs.label_order, (std::vector<std::string>{"l0", "l1"}));
  ASSERT_EQ(fs.features.size(), 1u);
  EXPECT_EQ(fs.features[0].values, (std::vector<double>{1.0, 0.0}));
  EXPECT_EQ(fs.row_index, std::vector<std::size_t>{0});
  ASSERT_FALSE(w.empty());
  EXPECT_NE(w.back().find("'b'"), std::string::npos);
}

TEST(FeaturizeDpd, NliFileEchoesPerLabelMax) {
  auto catalog = std::make_shared<LabelCatalog>(
      std::vector<Label>{{"A", ""}, {"B", ""}},
      std::vector<Descriptor>{{"a1", "A", Mode::kDH}, {"a2", "A", Mode::kMH},
                              {"b1", "B", Mode::kDH}});
  std::istringstream in("t\ta1\t0.2\nt\ta2\t0.7\nt\tb1\t0.4\n");
  const Scorer scorer(catalog, std::make_shared<NliFileProvider>(NliFileProvider::parse(in)));
  const std::vector<DatasetRow> rows{{"t", "whatever", {}, std::nullopt, std::nullopt}};
  const auto fs = featurize_dpd(rows, scorer);
  ASSERT_EQ(fs.features.size(), 1u);
  EXPECT_EQ(fs.features[0].values, (std::vector<double>{0.7, 0.4}));
}

struct Blobs {
  std::vector<FeatureVector> x;
  std::vector<BinaryLabel> y;
};

Blobs blobs(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.5, 0.5);
  Blobs b;
  for (std::size_t i = 0; i < n; ++i) {
    const bool pos = i % 2 == 0;
    const double c = pos ? 2.0 : -2.0;
    b.x.push_back({{c + jitter(rng), c + jitter(rng)}});
    b.y.push_back(pos ? BinaryLabel::kDepressive : BinaryLabel::kControl);
  }
  return b;
}

TEST(TrainLinear, SeparableBlobs) {
  const auto b = blobs(100, 1);
  const auto scaler = Standardizer::fit(b.x);
  std::vector<FeatureVector> xs;
  for (const auto& f : b.x) xs.push_back(scaler.apply(f));
  std::vector<double> loss;
  const auto model = train_linear(xs, b.y, {}, &loss);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) correct += model.predict(xs[i].values) == b.y[i];
  EXPECT_EQ(correct, xs.size());
  ASSERT_EQ(loss.size(), 200u);
  LinearModel zero{{0.0, 0.0}, 0.0, {}};
  EXPECT_LT(loss.back(), hinge_objective(zero, xs, b.y));
  EXPECT_LT(loss.back(), loss.front());
}

TEST(TrainLinear, Deterministic) {
  const auto b = blobs(60, 2);
  const auto m1 = train_linear(b.x, b.y, {});
  const auto m2 = train_linear(b.x, b.y, {});
  EXPECT_EQ(m1.weights, m2.weights);
  EXPECT_EQ(m1.bias, m2.bias);
  LinearHyperparams other;
  other.seed = 7;
  EXPECT_NE(train_linear(b.x, b.y, other).weights, m1.weights);
}

TEST(TrainLinear, SingleClass) {
  const std::vector<FeatureVector> x{{{1.0}}, {{2.0}}};
  const std::vector<BinaryLabel> y{BinaryLabel::kControl, BinaryLabel::kControl};
  EXPECT_EQ(error_code_of([&] { train_linear(x, y, {}); }), ErrorCode::kSingleClass);
}

TEST(Standardizer, ConstantColumnKeepsUnitScale) {
  const std::vector<FeatureVector> x{{{1.0, 5.0}}, {{3.0, 5.0}}};
  const auto s = Standardizer::fit(x);
  EXPECT_EQ(s.apply(x[0]).values, (std::vector<double>{-1.0, 0.0}));
}

TEST(EvaluateDpd, SeparableAndBaselines) {
  const auto b = blobs(200, 3);
  SplitPlan plan;
  plan.n_repeats = 30;
  const auto report = evaluate_dpd(b.x, b.y, plan, {});
  ASSERT_EQ(report.per_split.size(), 30u);
  for (const auto& s : report.per_split) EXPECT_DOUBLE_EQ(s.model_f1, 1.0);
  EXPECT_NEAR(report.majority.mean, 2.0 / 3.0, 1e-9);
}

TEST(EvaluateDpd, MajorityPositiveClosedForm) {
  // 60 positive, 40 negative: test split is 12 positive, 8 negative.
  std::vector<FeatureVector> x;
  std::vector<BinaryLabel> y;
  for (int i = 0; i < 100; ++i) {
    x.push_back({{static_cast<double>(i)}});
    y.push_back(i < 60 ? BinaryLabel::kDepressive : BinaryLabel::kControl);
  }
  SplitPlan plan;
  plan.n_repeats = 5;
  const auto report = evaluate_dpd(x, y, plan, {});
  const double p = 12.0 / 20.0;
  EXPECT_NEAR(report.majority.mean, 2 * p / (p + 1), 1e-12);
}

TEST(EvaluateDpd, RandomBaselineNearHalf) {
  const auto b = blobs(2000, 4);
  SplitPlan plan;
  plan.n_repeats = 30;
  const auto report = evaluate_dpd(b.x, b.y, plan, {});
  EXPECT_NEAR(report.random_uniform.mean, 0.5, 0.05);
}

}  // namespace
}  // namespace zsx
