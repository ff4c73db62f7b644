#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "zsx/catalog.hpp"
#include "zsx/error.hpp"
#include "zsx/evalkit.hpp"
#include "zsx/explain.hpp"
#include "zsx/mapper.hpp"
#include "zsx/nli_remote.hpp"
#include "zsx/parallel.hpp"
#include "zsx/scorer.hpp"
#include "zsx/treeparse.hpp"
#include "zsx/vecstore.hpp"

namespace zsx::cli {
namespace {

struct RunConfig {
  std::string command;

  // Inputs
  std::string embeddings;
  std::string catalog;
  std::string data;
  std::string text;
  std::string tree;
  std::string scores;
  std::string mapper;

  // Scoring
  std::string modes;
  std::string strategy = "direct";
  std::string provider = "embedding-cosine";
  std::string nli_url;
  double nli_timeout = 30.0;
  std::size_t max_in_flight = 4;
  std::size_t k_label = 1;
  std::size_t k_desc = 0;
  std::vector<std::size_t> sweep_k;

  // Explanations
  std::size_t ngram_n = 3;
  std::string explainer = "step";
  bool report_ei = false;

  // Evaluation
  std::uint64_t seed = 42;
  std::size_t repeats = 0;  // 0 -> command default
  double train_fraction = 0.8;
  double lr = 0.01;
  double l2 = 1e-3;
  std::size_t epochs = 200;

  // Mapper training
  std::string source;
  std::string target;
  double lambda = kDefaultRidgeLambda;
  bool sentence_source = false;

  std::string output;
  std::size_t jobs = 0;
};

Error config_error(const std::string& message) { return Error(ErrorCode::kConfig, message); }

std::string fmt6(double v) { return fmt::format("{:.6f}", v); }

// Full validation before any file is opened.
void validate(const RunConfig& c) {
  const bool scoring = c.command == "predict" || c.command == "explain" ||
                       c.command == "evaluate-dsd" || c.command == "evaluate-dpd";
  if (scoring) {
    if (c.catalog.empty()) throw config_error("--catalog is required");
    const Strategy strategy = parse_strategy(c.strategy);
    const ProviderKind provider = parse_provider(c.provider);
    if (!c.modes.empty()) {
      try {
        if (parse_modes(c.modes).empty()) throw config_error("--modes selects no mode");
      } catch (const Error& e) {
        throw config_error(e.what());
      }
    }
    switch (provider) {
      case ProviderKind::kEmbeddingCosine:
        if (c.embeddings.empty()) throw config_error("provider embedding-cosine requires --embeddings");
        break;
      case ProviderKind::kNliFile:
        if (c.scores.empty()) throw config_error("provider nli-file requires --scores");
        break;
      case ProviderKind::kNliRemote:
        if (c.nli_url.empty()) {
          throw config_error(fmt::format("provider nli-remote requires --nli-url or {}", kNliUrlEnv));
        }
        if (c.nli_url.rfind("http://", 0) != 0) throw config_error("--nli-url must start with http://");
        if (!(c.nli_timeout > 0.0)) throw config_error("--nli-timeout must be positive");
        if (c.max_in_flight == 0 || c.max_in_flight > 1024) {
          throw config_error("--max-in-flight must be in [1, 1024]");
        }
        break;
    }
    if (!c.mapper.empty() && provider != ProviderKind::kEmbeddingCosine) {
      throw config_error("--mapper only applies to the embedding-cosine provider");
    }
    if (strategy != Strategy::kDirect && provider != ProviderKind::kEmbeddingCosine) {
      throw config_error(fmt::format("strategy {} requires the embedding-cosine provider", c.strategy));
    }
    if (strategy == Strategy::kCentroidTopK && c.k_desc == 0) {
      throw config_error("strategy centroid-topk requires --k-desc >= 1");
    }
    if (c.k_label == 0) throw config_error("--k-label must be at least 1");
  }

  if (c.command == "predict" || c.command == "explain") {
    if (c.data.empty() == c.text.empty()) throw config_error("give exactly one of --data or --text");
    if (!c.tree.empty() && c.text.empty()) throw config_error("--tree requires --text");
  }
  if (c.command == "explain") {
    if (c.explainer != "step" && c.explainer != "ngramex" && c.explainer != "both") {
      throw config_error("--explainer must be step, ngramex, or both");
    }
    if (c.ngram_n == 0) throw config_error("--ngram-n must be at least 1");
  }
  if (c.command == "evaluate-dsd" || c.command == "evaluate-dpd") {
    if (c.data.empty()) throw config_error("--data is required");
    if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0)) {
      throw config_error("--train-fraction must be in (0, 1)");
    }
  }
  if (c.command == "evaluate-dsd") {
    for (std::size_t k : c.sweep_k) {
      if (k == 0) throw config_error("--sweep-k values must be at least 1");
    }
    if (c.report_ei && c.ngram_n == 0) throw config_error("--ngram-n must be at least 1");
  }
  if (c.command == "evaluate-dpd") {
    if (!(c.lr > 0.0)) throw config_error("--lr must be positive");
    if (!(c.l2 >= 0.0)) throw config_error("--l2 must be non-negative");
    if (c.epochs == 0) throw config_error("--epochs must be at least 1");
  }
  if (c.command == "train-mapper") {
    if (c.source.empty() || c.target.empty()) throw config_error("--source and --target are required");
    if (c.output.empty()) throw config_error("--output is required for train-mapper");
    if (!(c.lambda >= 0.0) || !std::isfinite(c.lambda)) throw config_error("--lambda must be >= 0");
  }
}

std::size_t effective_repeats(const RunConfig& c) {
  if (c.repeats > 0) return c.repeats;
  return c.command == "evaluate-dpd" ? 30 : 3;
}

std::string k_desc_text(const RunConfig& c) {
  return c.strategy == "centroid-topk" ? std::to_string(c.k_desc) : "-";
}

// Provenance header. --jobs and --config are left out: they do not change the
// report contents.
void write_header(const RunConfig& c, std::ostream& out) {
  out << "# zsx " << c.command << '\n';
  if (c.command == "train-mapper") {
    out << fmt::format("# source={} target={} lambda={} sentence_source={}\n", c.source, c.target,
                       c.lambda, c.sentence_source);
    return;
  }
  out << fmt::format("# seed={} strategy={} provider={} modes={} k_label={} k_desc={}\n", c.seed,
                     c.strategy, c.provider, c.modes.empty() ? "all" : c.modes, c.k_label,
                     k_desc_text(c));
  out << fmt::format("# catalog={} embeddings={} scores={} mapper={} data={}\n",
                     c.catalog.empty() ? "-" : c.catalog, c.embeddings.empty() ? "-" : c.embeddings,
                     c.scores.empty() ? "-" : c.scores, c.mapper.empty() ? "-" : c.mapper,
                     c.data.empty() ? "-" : c.data);
  if (c.command == "explain") {
    out << fmt::format("# explainer={} ngram_n={}\n", c.explainer, c.ngram_n);
  }
  if (c.command == "evaluate-dsd" || c.command == "evaluate-dpd") {
    out << fmt::format("# repeats={} train_fraction={}", effective_repeats(c), c.train_fraction);
    if (c.command == "evaluate-dpd") {
      out << fmt::format(" lr={} l2={} epochs={}", c.lr, c.l2, c.epochs);
    }
    if (c.command == "evaluate-dsd" && c.report_ei) out << fmt::format(" report_ei=1 ngram_n={}", c.ngram_n);
    out << '\n';
  }
}

void write_warnings(const Warnings& warnings, std::ostream& out) {
  for (const auto& w : warnings) out << "# warning: " << w << '\n';
}

struct Engine {
  std::shared_ptr<const LabelCatalog> full_catalog;
  std::shared_ptr<const LabelCatalog> catalog;
  std::unique_ptr<Scorer> scorer;
};

Engine build_engine(const RunConfig& c, Warnings& warnings) {
  Engine engine;
  engine.full_catalog = std::make_shared<const LabelCatalog>(load_catalog(c.catalog));
  if (c.modes.empty()) {
    engine.catalog = engine.full_catalog;
  } else {
    engine.catalog = std::make_shared<const LabelCatalog>(
        select_mode(*engine.full_catalog, parse_modes(c.modes), &warnings));
  }

  std::shared_ptr<const ScoreProvider> provider;
  switch (parse_provider(c.provider)) {
    case ProviderKind::kEmbeddingCosine: {
      auto table = std::make_shared<VectorTable>(load_table(c.embeddings));
      if (!c.mapper.empty()) {
        const auto m = load_matrix(c.mapper);
        if (m.rows() != table->dim()) {
          throw Error(ErrorCode::kDimensionMismatch,
                      fmt::format("mapper expects dimension {} but embeddings have {}", m.rows(),
                                  table->dim()));
        }
        table = std::make_shared<VectorTable>(map_table(*table, m));
      }
      provider = std::make_shared<EmbeddingCosineProvider>(std::move(table));
      break;
    }
    case ProviderKind::kNliFile:
      provider = std::make_shared<NliFileProvider>(NliFileProvider::load(c.scores));
      break;
    case ProviderKind::kNliRemote: {
      RemoteConfig rc;
      rc.base_url = c.nli_url;
      rc.timeout = std::chrono::milliseconds(static_cast<long long>(c.nli_timeout * 1000.0));
      rc.max_in_flight = c.max_in_flight;
      provider = std::make_shared<NliRemoteProvider>(rc);
      break;
    }
  }
  ScoringConfig sc;
  sc.strategy = parse_strategy(c.strategy);
  sc.k_desc = c.k_desc == 0 ? 1 : c.k_desc;
  engine.scorer = std::make_unique<Scorer>(engine.catalog, std::move(provider), sc);
  return engine;
}

std::vector<DatasetRow> input_rows(const RunConfig& c, const LabelCatalog& full_catalog) {
  if (!c.data.empty()) return load_dataset(c.data, &full_catalog);
  DatasetRow row;
  row.id = "text";
  row.text = c.text;
  if (!c.tree.empty()) row.tree = parse_tree(c.tree);
  return {std::move(row)};
}

// ---------------------------------------------------------------------------

void cmd_predict(const RunConfig& c, std::ostream& out) {
  Warnings warnings;
  const Engine engine = build_engine(c, warnings);
  const auto rows = input_rows(c, *engine.full_catalog);

  std::vector<std::string> lines(rows.size());
  std::vector<Warnings> local(rows.size());
  parallel_for(rows.size(), c.jobs, [&](std::size_t i) {
    const auto& row = rows[i];
    try {
      const auto ranking = engine.scorer->rank(TextRef{row.id, row.text}, &local[i]);
      const auto prediction = predict_labels(ranking, c.k_label);
      std::string labels;
      std::string scores;
      for (const auto& label : prediction.label_ids) {
        if (!labels.empty()) {
          labels += ';';
          scores += ';';
        }
        labels += label;
        scores += fmt6(prediction.per_label_best_score.at(label));
      }
      lines[i] = fmt::format("{}\t{}\t{}\n", row.id, labels, scores);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyRepresentation && e.code() != ErrorCode::kEmptyInput &&
          e.code() != ErrorCode::kEmptyRanking && e.code() != ErrorCode::kDegenerateVector) {
        throw;
      }
      local[i].push_back(fmt::format("row '{}' is not scoreable: {}", row.id, e.what()));
      lines[i] = fmt::format("{}\t\t\n", row.id);
    }
  });
  for (auto& w : local) warnings.insert(warnings.end(), w.begin(), w.end());

  write_header(c, out);
  write_warnings(warnings, out);
  out << "# columns: id\tlabel_ids\tscores\n";
  for (const auto& line : lines) out << line;
}

void write_explanations(const std::string& id, const ExplanationSet& set, std::ostream& out) {
  const std::string_view name = explainer_name(set.explainer);
  for (const auto& item : set.items) {
    out << fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\n", id, name, item.rank, join_tokens(item.tokens),
                       item.label_id, fmt6(item.membership_score), fmt6(ei_component(set, item)));
  }
  out << fmt::format("{}\t{}\t{}\n", id, name, fmt6(set.ei_score));
}

void cmd_explain(const RunConfig& c, std::ostream& out) {
  Warnings warnings;
  const Engine engine = build_engine(c, warnings);
  const auto rows = input_rows(c, *engine.full_catalog);

  std::vector<std::string> blocks(rows.size());
  std::vector<Warnings> local(rows.size());
  parallel_for(rows.size(), c.jobs, [&](std::size_t i) {
    const auto& row = rows[i];
    const TextRef text{row.id, row.text};
    std::ostringstream block;
    try {
      const auto tokens = tokenize(row.text);
      std::optional<SyntaxTree> tree;
      if (row.tree) {
        try {
          validate_against(normalize_leaves(*row.tree), tokens);
          tree = *row.tree;
        } catch (const Error& e) {
          local[i].push_back(fmt::format("row '{}': {}; using fallback tree", row.id, e.what()));
        }
      } else {
        local[i].push_back(fmt::format("row '{}': no tree; using fallback tree", row.id));
      }
      if (!tree) tree = fallback_tree(tokens);

      if (c.explainer == "both") {
        const auto cmp = compare_explainers(text, *tree, c.ngram_n, *engine.scorer, c.k_label, &local[i]);
        write_explanations(row.id, cmp.step_set, block);
        write_explanations(row.id, cmp.ngramex_set, block);
        block << fmt::format("{}\tagreement\t{}\n", row.id, agreement_name(cmp.agreement));
      } else if (c.explainer == "step") {
        write_explanations(row.id, step(text, *tree, *engine.scorer, c.k_label, &local[i]), block);
      } else {
        write_explanations(row.id, ngramex(text, c.ngram_n, *engine.scorer, c.k_label, &local[i]),
                           block);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyRepresentation && e.code() != ErrorCode::kEmptyInput &&
          e.code() != ErrorCode::kEmptyRanking && e.code() != ErrorCode::kDegenerateVector) {
        throw;
      }
      local[i].push_back(fmt::format("row '{}' is not scoreable: {}", row.id, e.what()));
      block.str("");
    }
    blocks[i] = block.str();
  });
  for (auto& w : local) warnings.insert(warnings.end(), w.begin(), w.end());

  write_header(c, out);
  write_warnings(warnings, out);
  out << "# columns: text_id\texplainer\trank\tphrase\tlabel_id\tmembership_score\tei_component\n";
  out << "# summary: text_id\texplainer\tEI\n";
  for (const auto& b : blocks) out << b;
}

void cmd_evaluate_dsd(const RunConfig& c, std::ostream& out) {
  Warnings warnings;
  const Engine engine = build_engine(c, warnings);
  const auto rows = load_dataset(c.data, engine.full_catalog.get());

  DsdConfig config;
  config.k_labels = c.sweep_k.empty() ? std::vector<std::size_t>{c.k_label} : c.sweep_k;
  config.plan.seed = c.seed;
  config.plan.train_fraction = c.train_fraction;
  config.plan.n_repeats = effective_repeats(c);
  config.plan.stratified = false;
  config.jobs = c.jobs;
  const auto report = evaluate_dsd(rows, *engine.scorer, config, &warnings);

  std::optional<EiSummary> ei;
  if (c.report_ei) {
    EiConfig ec;
    ec.ngram_n = c.ngram_n;
    ec.k_label = 1;
    ec.jobs = c.jobs;
    ei = evaluate_ei(rows, *engine.scorer, report, ec, &warnings);
  }

  const std::string prefix = fmt::format("{}\t{}\t{}\t{}", c.seed, c.strategy, c.provider,
                                         c.modes.empty() ? "all" : c.modes);
  write_header(c, out);
  write_warnings(warnings, out);
  out << "# columns: kind\tseed\tstrategy\tprovider\tmodes\tk_label\tk_desc\t...\n";
  out << "# split rows: repeat\tmicro_f1\tn_test; summary rows: mean\tstd\tn\n";
  for (const auto& s : report.per_split) {
    out << fmt::format("split\t{}\t{}\t{}\t{}\t{}\t{}\n", prefix, s.k, k_desc_text(c), s.repeat,
                       fmt6(s.micro_f1), s.n_test);
  }
  for (const auto& s : report.summary) {
    out << fmt::format("summary\t{}\t{}\t{}\t{}\t{}\t{}\n", prefix, s.k, k_desc_text(c),
                       fmt6(s.micro_f1.mean), fmt6(s.micro_f1.std), s.micro_f1.n);
  }
  if (ei) {
    out << fmt::format("ei\t{}\t1\t{}\tstep\t{}\t{}\t{}\n", prefix, k_desc_text(c),
                       fmt6(ei->step.mean), fmt6(ei->step.std), ei->step.n);
    out << fmt::format("ei\t{}\t1\t{}\tngramex\t{}\t{}\t{}\n", prefix, k_desc_text(c),
                       fmt6(ei->ngramex.mean), fmt6(ei->ngramex.std), ei->ngramex.n);
    out << fmt::format("agreement\t{}\t1\t{}\tstep_wins={}\tngramex_wins={}\ttie={}\n", prefix,
                       k_desc_text(c), ei->step_wins, ei->ngramex_wins, ei->ties);
  }
  for (const auto& s : report.summary) {
    out << fmt::format("# result: k={} micro_f1={} +/- {} over {} splits\n", s.k,
                       fmt6(s.micro_f1.mean), fmt6(s.micro_f1.std), s.micro_f1.n);
  }
}

void cmd_evaluate_dpd(const RunConfig& c, std::ostream& out) {
  Warnings warnings;
  const Engine engine = build_engine(c, warnings);
  const auto rows = load_dataset(c.data, engine.full_catalog.get());

  std::vector<DatasetRow> labeled;
  for (const auto& row : rows) {
    if (row.binary_label) {
      labeled.push_back(row);
    } else {
      warnings.push_back(fmt::format("row '{}' has no binary label; excluded", row.id));
    }
  }
  if (labeled.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no row carries a binary label for depressive post detection");
  }

  const auto features = featurize_dpd(labeled, *engine.scorer, c.jobs, &warnings);
  std::vector<BinaryLabel> labels;
  for (std::size_t i : features.row_index) labels.push_back(*labeled[i].binary_label);

  SplitPlan plan;
  plan.seed = c.seed;
  plan.train_fraction = c.train_fraction;
  plan.n_repeats = effective_repeats(c);
  plan.stratified = true;
  LinearHyperparams hp;
  hp.lr = c.lr;
  hp.lambda = c.l2;
  hp.epochs = c.epochs;
  hp.seed = c.seed;
  const auto report = evaluate_dpd(features.features, labels, plan, hp, c.jobs);

  const std::string prefix = fmt::format("{}\t{}\t{}\t{}\t{}\t{}", c.seed, c.strategy, c.provider,
                                         c.modes.empty() ? "all" : c.modes, c.k_label,
                                         k_desc_text(c));
  write_header(c, out);
  write_warnings(warnings, out);
  out << "# features: " << fmt::format("{}", fmt::join(features.label_order, ",")) << '\n';
  out << "# columns: kind\tseed\tstrategy\tprovider\tmodes\tk_label\tk_desc\t...\n";
  out << "# split rows: repeat\tmodel_f1\trandom_f1\tmajority_f1\tn_test; summary rows: "
         "system\tmean\tstd\tn\n";
  for (const auto& s : report.per_split) {
    out << fmt::format("split\t{}\t{}\t{}\t{}\t{}\t{}\n", prefix, s.repeat, fmt6(s.model_f1),
                       fmt6(s.random_f1), fmt6(s.majority_f1), s.n_test);
  }
  const auto summary_line = [&](std::string_view name, const MeanStd& m) {
    out << fmt::format("summary\t{}\t{}\t{}\t{}\t{}\n", prefix, name, fmt6(m.mean), fmt6(m.std), m.n);
  };
  summary_line("linear", report.model);
  summary_line("random-uniform", report.random_uniform);
  summary_line("majority-class", report.majority);
  out << fmt::format("# result: linear F1={} +/- {}, random={} +/- {}, majority={} +/- {}\n",
                     fmt6(report.model.mean), fmt6(report.model.std),
                     fmt6(report.random_uniform.mean), fmt6(report.random_uniform.std),
                     fmt6(report.majority.mean), fmt6(report.majority.std));
}

void cmd_train_mapper(const RunConfig& c, std::ostream& out) {
  Warnings warnings;
  const auto src = load_table(c.source);
  const auto tgt = load_table(c.target);
  const auto vocab = common_vocab(src, tgt);
  const auto m = c.sentence_source ? fit_sentence_to_word(src, tgt, vocab, c.lambda, &warnings)
                                   : fit(src, tgt, vocab, c.lambda, &warnings);
  save_matrix(m, c.output);
  const double residual = std::sqrt(residual_squared(src, tgt, vocab, m));

  write_header(c, out);
  write_warnings(warnings, out);
  out << fmt::format("matrix\t{}\trows={}\tcols={}\tvocab={}\tresidual_norm={:.6e}\n", c.output,
                     m.rows(), m.cols(), vocab.tokens.size(), residual);
}

void add_options(CLI::App& app, RunConfig& c) {
  app.add_option("--embeddings", c.embeddings, "Embedding table (text format)");
  app.add_option("--catalog", c.catalog, "Label catalog TSV");
  app.add_option("--data", c.data, "Dataset TSV");
  app.add_option("--text", c.text, "Single text to process instead of --data");
  app.add_option("--tree", c.tree, "Bracketed tree for --text");
  app.add_option("--scores", c.scores, "Precomputed entailment scores TSV (nli-file)");
  app.add_option("--mapper", c.mapper, "Projection matrix applied to --embeddings");
  app.add_option("--modes", c.modes, "Descriptor modes, e.g. MH+DH (default: all)");
  app.add_option("--strategy", c.strategy, "direct | centroid | centroid-topk");
  app.add_option("--provider", c.provider, "embedding-cosine | nli-file | nli-remote");
  app.add_option("--nli-url", c.nli_url, "Base URL of the remote scorer")->envname(kNliUrlEnv);
  app.add_option("--nli-timeout", c.nli_timeout, "Remote request timeout in seconds");
  app.add_option("--max-in-flight", c.max_in_flight, "Concurrent remote requests");
  app.add_option("--k-label", c.k_label, "Number of top descriptors used for labels");
  app.add_option("--k-desc", c.k_desc, "Descriptors per centroid (centroid-topk)");
  app.add_option("--sweep-k", c.sweep_k, "Comma-separated k values (evaluate-dsd)")->delimiter(',');
  app.add_option("--ngram-n", c.ngram_n, "n-gram length for ngramex");
  app.add_option("--explainer", c.explainer, "step | ngramex | both");
  app.add_flag("--report-ei", c.report_ei, "Append EI statistics (evaluate-dsd)");
  app.add_option("--seed", c.seed, "Run seed");
  app.add_option("--repeats", c.repeats, "Split repeats (default 3 for DSD, 30 for DPD)");
  app.add_option("--train-fraction", c.train_fraction, "Train share of each split");
  app.add_option("--lr", c.lr, "SGD learning rate (evaluate-dpd)");
  app.add_option("--l2", c.l2, "L2 strength (evaluate-dpd)");
  app.add_option("--epochs", c.epochs, "SGD epochs (evaluate-dpd)");
  app.add_option("--source", c.source, "Source embeddings (train-mapper)");
  app.add_option("--target", c.target, "Target embeddings (train-mapper)");
  app.add_option("--lambda", c.lambda, "Ridge strength (train-mapper)");
  app.add_flag("--sentence-source", c.sentence_source,
               "Source vectors are sentence-encoder outputs per word (train-mapper)");
  app.add_option("--output", c.output, "Output path (default: stdout)");
  app.add_option("--jobs", c.jobs, "Worker threads (default: all cores)");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Zero-shot symptom labeling, explanation, and evaluation", "zsx"};
  app.set_config("--config", "", "TOML-style file of flag values; command line wins");
  app.require_subcommand(1);
  add_options(app, c);
  for (const char* name : {"predict", "explain", "evaluate-dsd", "evaluate-dpd", "train-mapper"}) {
    app.add_subcommand(name)->fallthrough();
  }
  app.get_subcommand("predict")->description("Predict labels for each text");
  app.get_subcommand("explain")->description("Explain the top label of each text");
  app.get_subcommand("evaluate-dsd")->description("Multi-label Micro-F1 over random splits");
  app.get_subcommand("evaluate-dpd")->description("Binary F1 of symptom-score features");
  app.get_subcommand("train-mapper")->description("Fit a least-squares projection between tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "zsx: " << e.what() << '\n';
    return kExitConfig;
  }
  c.command = app.get_subcommands().front()->get_name();

  try {
    validate(c);
    std::ostringstream report;
    if (c.command == "predict") {
      cmd_predict(c, report);
    } else if (c.command == "explain") {
      cmd_explain(c, report);
    } else if (c.command == "evaluate-dsd") {
      cmd_evaluate_dsd(c, report);
    } else if (c.command == "evaluate-dpd") {
      cmd_evaluate_dpd(c, report);
    } else {
      cmd_train_mapper(c, report);
    }

    if (c.output.empty() || c.command == "train-mapper") {
      out << report.str();
    } else {
      std::ofstream file(c.output);
      if (!file) throw Error(ErrorCode::kIo, fmt::format("cannot write '{}'", c.output));
      file << report.str();
      if (!file) throw Error(ErrorCode::kIo, fmt::format("failed writing '{}'", c.output));
    }
  } catch (const Error& e) {
    err << "zsx: " << error_code_name(e.code()) << ": " << e.what() << '\n';
    return e.code() == ErrorCode::kConfig ? kExitConfig : kExitData;
  } catch (const std::exception& e) {
    err << "zsx: error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace zsx::cli
