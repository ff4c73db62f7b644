#include "zsx/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <istream>
#include <map>
#include <numeric>
#include <unordered_set>

#include <fmt/format.h>

#include "zsx/parallel.hpp"

namespace zsx {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double sign_of(BinaryLabel y) { return y == BinaryLabel::kDepressive ? 1.0 : -1.0; }

// Per-row scoring with row-local warnings merged in row order afterwards.
std::vector<std::optional<MembershipRanking>> rank_rows(std::span<const DatasetRow> rows,
                                                        std::span<const std::size_t> index,
                                                        const Scorer& scorer, std::size_t jobs,
                                                        Warnings* warnings) {
  std::vector<std::optional<MembershipRanking>> rankings(index.size());
  std::vector<Warnings> local(index.size());
  parallel_for(index.size(), jobs, [&](std::size_t i) {
    const DatasetRow& row = rows[index[i]];
    try {
      rankings[i] = scorer.rank(TextRef{row.id, row.text}, &local[i]);
    } catch (const Error& e) {
      switch (e.code()) {
        case ErrorCode::kEmptyRepresentation:
        case ErrorCode::kEmptyInput:
        case ErrorCode::kEmptyRanking:
        case ErrorCode::kDegenerateVector:
          local[i].push_back(fmt::format("row '{}' is not scoreable: {}", row.id, e.what()));
          break;
        default:
          throw;
      }
    }
  });
  for (auto& w : local) {
    for (auto& msg : w) warn(warnings, std::move(msg));
  }
  return rankings;
}

}  // namespace

// ---------------------------------------------------------------------------
// Dataset

std::vector<DatasetRow> load_dataset(const std::filesystem::path& path,
                                     const LabelCatalog* catalog) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("cannot open dataset '{}'", path.string()));
  return parse_dataset(in, catalog);
}

std::vector<DatasetRow> parse_dataset(std::istream& in, const LabelCatalog* catalog) {
  std::vector<DatasetRow> rows;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_tabs(line);
    if (fields.size() < 2 || fields.size() > 5) {
      throw Error(ErrorCode::kParse,
                  fmt::format("dataset line {}: expected 2 to 5 tab-separated columns, got {}",
                              line_no, fields.size()));
    }
    DatasetRow row;
    row.id = trim(fields[0]);
    if (row.id.empty()) throw Error(ErrorCode::kParse, fmt::format("dataset line {}: empty id", line_no));
    if (!ids.insert(row.id).second) {
      throw Error(ErrorCode::kDuplicate, fmt::format("dataset line {}: duplicate id '{}'", line_no, row.id));
    }
    row.text = std::string(fields[1]);

    if (fields.size() > 2) {
      std::string_view labels = fields[2];
      std::size_t start = 0;
      while (start <= labels.size()) {
        const auto semi = labels.find(';', start);
        auto label = trim(labels.substr(start, semi == std::string_view::npos ? std::string_view::npos
                                                                               : semi - start));
        if (!label.empty()) {
          if (catalog != nullptr && !catalog->has_label(label)) {
            throw Error(ErrorCode::kUnknownLabel,
                        fmt::format("dataset line {}: unknown label '{}' for row '{}'", line_no,
                                    label, row.id));
          }
          row.gold_labels.insert(std::move(label));
        }
        if (semi == std::string_view::npos) break;
        start = semi + 1;
      }
    }
    if (fields.size() > 3) {
      const auto tree_text = trim(fields[3]);
      if (!tree_text.empty()) {
        try {
          row.tree = parse_tree(tree_text);
        } catch (const Error& e) {
          throw Error(ErrorCode::kParse,
                      fmt::format("dataset line {}: malformed tree for row '{}': {}", line_no,
                                  row.id, e.what()));
        }
      }
    }
    if (fields.size() > 4) {
      const auto bin = trim(fields[4]);
      if (bin == "1") {
        row.binary_label = BinaryLabel::kDepressive;
      } else if (bin == "0") {
        row.binary_label = BinaryLabel::kControl;
      } else if (!bin.empty()) {
        throw Error(ErrorCode::kParse,
                    fmt::format("dataset line {}: binary label must be 1, 0, or empty, got '{}'",
                                line_no, bin));
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Metrics

double MicroCounts::f1() const {
  const std::size_t denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : static_cast<double>(2 * tp) / static_cast<double>(denom);
}

MicroCounts micro_counts(std::span<const LabelSet> gold, std::span<const LabelSet> pred) {
  if (gold.size() != pred.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                fmt::format("micro-F1 over {} gold and {} predicted sets", gold.size(), pred.size()));
  }
  MicroCounts c;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    for (const auto& p : pred[i]) {
      if (gold[i].contains(p)) {
        ++c.tp;
      } else {
        ++c.fp;
      }
    }
    for (const auto& g : gold[i]) {
      if (!pred[i].contains(g)) ++c.fn;
    }
  }
  return c;
}

double micro_f1(std::span<const LabelSet> gold, std::span<const LabelSet> pred) {
  return micro_counts(gold, pred).f1();
}

double binary_f1(std::span<const BinaryLabel> gold, std::span<const BinaryLabel> pred) {
  if (gold.size() != pred.size()) {
    throw Error(ErrorCode::kLengthMismatch, "binary F1 over sequences of different length");
  }
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool g = gold[i] == BinaryLabel::kDepressive;
    const bool p = pred[i] == BinaryLabel::kDepressive;
    if (g && p) ++tp;
    if (!g && p) ++fp;
    if (g && !p) ++fn;
  }
  const std::size_t denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : static_cast<double>(2 * tp) / static_cast<double>(denom);
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  out.n = values.size();
  if (values.empty()) return out;
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Splits

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t repeat, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(repeat), static_cast<std::uint32_t>(repeat >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound <= 1) return 0;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  for (;;) {
    const std::uint64_t x = rng();
    if (x < limit) return x % bound;
  }
}

void shuffle_indices(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

std::vector<Split> make_splits(std::span<const int> strata, const SplitPlan& plan) {
  if (!(plan.train_fraction > 0.0 && plan.train_fraction < 1.0)) {
    throw Error(ErrorCode::kConfig, fmt::format("train fraction {} not in (0,1)", plan.train_fraction));
  }
  if (plan.n_repeats == 0) throw Error(ErrorCode::kConfig, "at least one repeat is required");

  // Groups of row indices that are split independently.
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < strata.size(); ++i) {
    groups[plan.stratified ? strata[i] : 0].push_back(i);
  }

  std::vector<Split> splits;
  splits.reserve(plan.n_repeats);
  for (std::size_t r = 0; r < plan.n_repeats; ++r) {
    auto rng = stream_rng(plan.seed, r, 0);
    Split split;
    for (auto [_, members] : groups) {
      shuffle_indices(members, rng);
      const auto n_train = static_cast<std::size_t>(
          std::floor(plan.train_fraction * static_cast<double>(members.size())));
      split.train.insert(split.train.end(), members.begin(),
                         members.begin() + static_cast<std::ptrdiff_t>(n_train));
      split.test.insert(split.test.end(), members.begin() + static_cast<std::ptrdiff_t>(n_train),
                        members.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    splits.push_back(std::move(split));
  }
  return splits;
}

// ---------------------------------------------------------------------------
// DSD

DsdReport evaluate_dsd(std::span<const DatasetRow> rows, const Scorer& scorer,
                       const DsdConfig& config, Warnings* warnings) {
  if (config.k_labels.empty()) throw Error(ErrorCode::kConfig, "no k values to evaluate");
  for (std::size_t k : config.k_labels) {
    if (k == 0) throw Error(ErrorCode::kConfig, "k must be at least 1");
  }

  DsdReport report;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].gold_labels.empty()) {
      warn(warnings, fmt::format("row '{}' has no gold labels; excluded from DSD", rows[i].id));
    } else {
      report.row_index.push_back(i);
    }
  }
  if (report.row_index.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no labeled rows for symptom detection");
  }

  report.rankings = rank_rows(rows, report.row_index, scorer, config.jobs, warnings);
  const std::vector<int> strata(report.row_index.size(), 0);
  report.splits = make_splits(strata, config.plan);

  for (std::size_t r = 0; r < report.splits.size(); ++r) {
    const auto& test = report.splits[r].test;
    std::vector<LabelSet> gold;
    gold.reserve(test.size());
    for (std::size_t t : test) gold.push_back(rows[report.row_index[t]].gold_labels);
    for (std::size_t k : config.k_labels) {
      std::vector<LabelSet> pred;
      pred.reserve(test.size());
      for (std::size_t t : test) {
        const auto& ranking = report.rankings[t];
        if (!ranking) {
          pred.emplace_back();
          continue;
        }
        const auto prediction = predict_labels(*ranking, k);
        pred.emplace_back(prediction.label_ids.begin(), prediction.label_ids.end());
      }
      report.per_split.push_back({r, k, micro_f1(gold, pred), test.size()});
    }
  }

  for (std::size_t k : config.k_labels) {
    std::vector<double> values;
    for (const auto& s : report.per_split) {
      if (s.k == k) values.push_back(s.micro_f1);
    }
    report.summary.push_back({k, mean_std(values)});
  }
  return report;
}

EiSummary evaluate_ei(std::span<const DatasetRow> rows, const Scorer& scorer,
                      const DsdReport& report, const EiConfig& config, Warnings* warnings) {
  // Rows correctly predicted at top-1 (independent of the split).
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < report.row_index.size(); ++i) {
    const auto& ranking = report.rankings[i];
    if (!ranking) continue;
    const auto top = predict_labels(*ranking, config.k_label).label_ids.front();
    if (rows[report.row_index[i]].gold_labels.contains(top)) candidates.push_back(i);
  }

  struct RowEi {
    bool ok = false;
    double step = 0.0;
    double ngramex = 0.0;
  };
  std::vector<RowEi> per_row(report.row_index.size());
  std::vector<Warnings> local(candidates.size());
  parallel_for(candidates.size(), config.jobs, [&](std::size_t c) {
    const std::size_t i = candidates[c];
    const DatasetRow& row = rows[report.row_index[i]];
    const TextRef text{row.id, row.text};
    try {
      const auto tokens = tokenize(row.text);
      SyntaxTree tree;
      bool have_tree = false;
      if (row.tree) {
        try {
          validate_against(normalize_leaves(*row.tree), tokens);
          tree = *row.tree;
          have_tree = true;
        } catch (const Error& e) {
          local[c].push_back(fmt::format("row '{}': {}; using fallback tree", row.id, e.what()));
        }
      }
      if (!have_tree) tree = fallback_tree(tokens);
      const auto cmp = compare_explainers(text, tree, config.ngram_n, scorer, config.k_label, &local[c]);
      per_row[i] = {true, cmp.ei_step, cmp.ei_ngramex};
    } catch (const Error& e) {
      local[c].push_back(fmt::format("row '{}': explanation failed: {}", row.id, e.what()));
    }
  });
  for (auto& w : local) {
    for (auto& msg : w) warn(warnings, std::move(msg));
  }

  std::vector<double> step_values;
  std::vector<double> ngram_values;
  EiSummary summary;
  for (const auto& split : report.splits) {
    for (std::size_t t : split.test) {
      if (!per_row[t].ok) continue;
      step_values.push_back(per_row[t].step);
      ngram_values.push_back(per_row[t].ngramex);
      switch (agreement_of(per_row[t].step, per_row[t].ngramex)) {
        case Agreement::kStepWins: ++summary.step_wins; break;
        case Agreement::kNgramexWins: ++summary.ngramex_wins; break;
        case Agreement::kTie: ++summary.ties; break;
      }
    }
  }
  summary.step = mean_std(step_values);
  summary.ngramex = mean_std(ngram_values);
  return summary;
}

// ---------------------------------------------------------------------------
// DPD

FeatureSet featurize_dpd(std::span<const DatasetRow> rows, const Scorer& scorer, std::size_t jobs,
                         Warnings* warnings) {
  FeatureSet out;
  out.label_order = scorer.catalog().label_ids();
  std::vector<std::size_t> all(rows.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const auto rankings = rank_rows(rows, all, scorer, jobs, warnings);

  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rankings[i]) {
      warn(warnings, fmt::format("row '{}' dropped from features", rows[i].id));
      continue;
    }
    std::map<std::string, double> best;
    for (const auto& item : rankings[i]->items) {
      const auto [it, inserted] = best.emplace(item.label_id, item.score);
      if (!inserted) it->second = std::max(it->second, item.score);
    }
    FeatureVector f;
    f.values.reserve(out.label_order.size());
    for (const auto& label : out.label_order) {
      const auto it = best.find(label);
      f.values.push_back(it == best.end() ? 0.0 : it->second);
    }
    out.features.push_back(std::move(f));
    out.row_index.push_back(i);
  }
  return out;
}

double LinearModel::decision(std::span<const double> x) const { return dot(weights, x) + bias; }

BinaryLabel LinearModel::predict(std::span<const double> x) const {
  return decision(x) >= 0.0 ? BinaryLabel::kDepressive : BinaryLabel::kControl;
}

Standardizer Standardizer::fit(std::span<const FeatureVector> features) {
  Standardizer s;
  if (features.empty()) return s;
  const std::size_t d = features.front().values.size();
  s.mean.assign(d, 0.0);
  s.scale.assign(d, 0.0);
  for (const auto& f : features) {
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += f.values[j];
  }
  for (double& m : s.mean) m /= static_cast<double>(features.size());
  for (const auto& f : features) {
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = f.values[j] - s.mean[j];
      s.scale[j] += diff * diff;
    }
  }
  for (double& v : s.scale) {
    v = std::sqrt(v / static_cast<double>(features.size()));
    if (v == 0.0) v = 1.0;
  }
  return s;
}

FeatureVector Standardizer::apply(const FeatureVector& f) const {
  FeatureVector out;
  out.values.resize(f.values.size());
  for (std::size_t j = 0; j < f.values.size(); ++j) {
    out.values[j] = (f.values[j] - mean[j]) / scale[j];
  }
  return out;
}

double hinge_objective(const LinearModel& model, std::span<const FeatureVector> features,
                       std::span<const BinaryLabel> labels) {
  if (features.empty()) return 0.0;
  double loss = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    loss += std::max(0.0, 1.0 - sign_of(labels[i]) * model.decision(features[i].values));
  }
  loss /= static_cast<double>(features.size());
  return loss + 0.5 * model.hyperparams.lambda * dot(model.weights, model.weights);
}

LinearModel train_linear(std::span<const FeatureVector> features,
                         std::span<const BinaryLabel> labels, const LinearHyperparams& hyperparams,
                         std::vector<double>* epoch_loss) {
  if (features.size() != labels.size()) {
    throw Error(ErrorCode::kLengthMismatch, "features and labels differ in length");
  }
  const bool has_pos = std::find(labels.begin(), labels.end(), BinaryLabel::kDepressive) != labels.end();
  const bool has_neg = std::find(labels.begin(), labels.end(), BinaryLabel::kControl) != labels.end();
  if (!has_pos || !has_neg) {
    throw Error(ErrorCode::kSingleClass, "training data must contain both classes");
  }
  const std::size_t d = features.front().values.size();
  for (const auto& f : features) {
    if (f.values.size() != d) throw Error(ErrorCode::kDimensionMismatch, "ragged feature vectors");
  }

  LinearModel model;
  model.weights.assign(d, 0.0);
  model.hyperparams = hyperparams;
  auto rng = stream_rng(hyperparams.seed, 0, 0);
  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  const double lr = hyperparams.lr;
  const double lambda = hyperparams.lambda;
  for (std::size_t epoch = 0; epoch < hyperparams.epochs; ++epoch) {
    shuffle_indices(order, rng);
    for (std::size_t i : order) {
      const auto& x = features[i].values;
      const double y = sign_of(labels[i]);
      const double margin = y * model.decision(x);
      for (double& w : model.weights) w -= lr * lambda * w;
      if (margin < 1.0) {
        for (std::size_t j = 0; j < d; ++j) model.weights[j] += lr * y * x[j];
        model.bias += lr * y;
      }
    }
    if (epoch_loss != nullptr) epoch_loss->push_back(hinge_objective(model, features, labels));
  }
  return model;
}

DpdReport evaluate_dpd(std::span<const FeatureVector> features,
                       std::span<const BinaryLabel> labels, const SplitPlan& plan,
                       const LinearHyperparams& hyperparams, std::size_t jobs) {
  if (features.size() != labels.size()) {
    throw Error(ErrorCode::kLengthMismatch, "features and labels differ in length");
  }
  std::vector<int> strata;
  strata.reserve(labels.size());
  for (auto y : labels) strata.push_back(static_cast<int>(y));
  SplitPlan stratified = plan;
  stratified.stratified = true;
  const auto splits = make_splits(strata, stratified);

  DpdReport report;
  report.per_split.resize(splits.size());
  parallel_for(splits.size(), jobs, [&](std::size_t r) {
    const Split& split = splits[r];
    std::vector<FeatureVector> train_raw;
    std::vector<BinaryLabel> train_y;
    for (std::size_t i : split.train) {
      train_raw.push_back(features[i]);
      train_y.push_back(labels[i]);
    }
    const auto scaler = Standardizer::fit(train_raw);
    std::vector<FeatureVector> train_x;
    train_x.reserve(train_raw.size());
    for (const auto& f : train_raw) train_x.push_back(scaler.apply(f));

    LinearHyperparams hp = hyperparams;
    hp.seed = stream_rng(hyperparams.seed, r, 1)();
    const auto model = train_linear(train_x, train_y, hp);

    const auto n_pos = static_cast<std::size_t>(
        std::count(train_y.begin(), train_y.end(), BinaryLabel::kDepressive));
    const BinaryLabel majority =
        2 * n_pos >= train_y.size() ? BinaryLabel::kDepressive : BinaryLabel::kControl;
    auto coin = stream_rng(hyperparams.seed, r, 2);

    std::vector<BinaryLabel> gold;
    std::vector<BinaryLabel> pred_model;
    std::vector<BinaryLabel> pred_random;
    std::vector<BinaryLabel> pred_majority;
    for (std::size_t i : split.test) {
      gold.push_back(labels[i]);
      pred_model.push_back(model.predict(scaler.apply(features[i]).values));
      pred_random.push_back((coin() >> 63) != 0 ? BinaryLabel::kDepressive : BinaryLabel::kControl);
      pred_majority.push_back(majority);
    }
    report.per_split[r] = {r, binary_f1(gold, pred_model), binary_f1(gold, pred_random),
                           binary_f1(gold, pred_majority), split.test.size()};
  });

  std::vector<double> model_f1;
  std::vector<double> random_f1;
  std::vector<double> majority_f1;
  for (const auto& s : report.per_split) {
    model_f1.push_back(s.model_f1);
    random_f1.push_back(s.random_f1);
    majority_f1.push_back(s.majority_f1);
  }
  report.model = mean_std(model_f1);
  report.random_uniform = mean_std(random_f1);
  report.majority = mean_std(majority_f1);
  return report;
}

}  // namespace zsx
