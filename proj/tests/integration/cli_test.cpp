#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "support/cli_runner.hpp"
#include "support/fixtures.hpp"
#include "support/nli_stub.hpp"
#include "zsx/mapper.hpp"

namespace zsx {
namespace {

using test::data_lines;
using test::run_cli;
using test::split_tabs;

const std::string kData = ZSX_TEST_DATA;
const std::string kCatalog = kData + "/catalog.tsv";
const std::string kVectors = kData + "/toy_vectors.txt";
const std::string kTweets = kData + "/tweets.tsv";

std::vector<std::string> base(std::string command) {
  return {std::move(command), "--catalog", kCatalog, "--embeddings", kVectors, "--jobs", "1"};
}

std::vector<std::string> with(std::vector<std::string> args,
                              std::initializer_list<std::string> more) {
  args.insert(args.end(), more);
  return args;
}

std::size_t count_prefix(const std::vector<std::string>& lines, const std::string& prefix) {
  return static_cast<std::size_t>(std::count_if(
      lines.begin(), lines.end(), [&](const std::string& l) { return l.rfind(prefix, 0) == 0; }));
}

TEST(Predict, OneLabelPerRowAtKOne) {
  const auto r = run_cli(with(base("predict"), {"--data", kTweets}));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = data_lines(r.out);
  ASSERT_EQ(lines.size(), 5u);
  for (const auto& l : lines) {
    const auto cols = split_tabs(l);
    ASSERT_EQ(cols.size(), 3u);
    EXPECT_EQ(cols[1].find(';'), std::string::npos);
    EXPECT_FALSE(cols[1].empty());
  }
  EXPECT_EQ(split_tabs(lines[2])[1], "disturbed_sleep");
  EXPECT_NE(r.out.find("# seed=42 strategy=direct provider=embedding-cosine"), std::string::npos);
}

TEST(Predict, SingleTextAndSweepOfK) {
  const auto r = run_cli(with(base("predict"), {"--text", "I feel sad", "--k-label", "15"}));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = data_lines(r.out);
  ASSERT_EQ(lines.size(), 1u);
  const auto labels = split_tabs(lines[0])[1];
  EXPECT_EQ(labels.rfind("low_mood;", 0), 0u) << labels;
  EXPECT_EQ(std::count(labels.begin(), labels.end(), ';'), 3);
}

TEST(Predict, MapperMatchesManuallyMappedVectors) {
  test::TempDir dir;
  std::mt19937_64 rng(9);
  std::vector<double> values = test::random_vector(rng, 12);
  const ProjectionMatrix m(4, 3, values);
  const auto matrix_path = dir.path() / "m.txt";
  save_matrix(m, matrix_path);

  const auto table = load_table(kVectors);
  const auto mapped = map_table(table, m);
  std::ofstream mapped_file(dir.path() / "mapped.txt");
  write_table(mapped, mapped_file);
  mapped_file.close();

  const auto via_flag =
      run_cli(with(base("predict"), {"--data", kTweets, "--mapper", matrix_path.string(),
                                     "--k-label", "3"}));
  ASSERT_EQ(via_flag.code, 0) << via_flag.err;
  const auto manual = run_cli({"predict", "--catalog", kCatalog, "--embeddings",
                               (dir.path() / "mapped.txt").string(), "--data", kTweets,
                               "--k-label", "3"});
  ASSERT_EQ(manual.code, 0) << manual.err;
  EXPECT_EQ(data_lines(via_flag.out), data_lines(manual.out));
  EXPECT_NE(data_lines(via_flag.out), data_lines(run_cli(with(base("predict"), {"--data", kTweets, "--k-label", "3"})).out));
}

TEST(Predict, ConfigErrorsExitTwoBeforeReadingFiles) {
  auto r = run_cli({"predict", "--provider", "nli-file", "--catalog", kCatalog, "--data", kTweets});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--scores"), std::string::npos);
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);

  // The catalog path does not exist, yet validation fails first.
  r = run_cli({"predict", "--catalog", "/nonexistent", "--embeddings", kVectors, "--data", kTweets,
               "--strategy", "centroid-topk"});
  EXPECT_EQ(r.code, 2);
  r = run_cli({"predict", "--catalog", kCatalog, "--embeddings", kVectors});
  EXPECT_EQ(r.code, 2);
  r = run_cli({"predict", "--bogus"});
  EXPECT_EQ(r.code, 2);
  r = run_cli(with(base("predict"), {"--data", kTweets, "--modes", "XX"}));
  EXPECT_EQ(r.code, 2);
}

TEST(Predict, DataErrorsExitThree) {
  const auto r = run_cli(with(base("predict"), {"--data", "/nonexistent/data.tsv"}));
  EXPECT_EQ(r.code, 3);
  EXPECT_TRUE(r.out.empty());
}

TEST(Predict, NliFileScores) {
  test::TempDir dir;
  std::string scores;
  const std::vector<std::string> descriptors{
      "Insomnia", "Hypersomnia", "Reduced sleep", "Reduced duration of sleep",
      "Reduced depth of sleep", "Loss of interest", "Loss of pleasure", "Inability to feel",
      "Reduced interest in surroundings", "Worthlessness", "Feeling useless",
      "Nobody understands me", "Depressed mood", "Apparent sadness", "I feel sad"};
  for (const auto& d : descriptors) {
    scores += fmt::format("t1\t{}\t{}\n", d, d == "Nobody understands me" ? 0.97 : 0.1);
  }
  const auto scores_path = dir.write("scores.tsv", scores);
  const auto data_path = dir.write("d.tsv", "t1\tNo one understands me\n");
  const auto r = run_cli({"predict", "--provider", "nli-file", "--scores", scores_path.string(),
                          "--catalog", kCatalog, "--data", data_path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(data_lines(r.out), std::vector<std::string>{"t1\tfeeling_worthless\t0.970000"});

  const auto missing = run_cli({"predict", "--provider", "nli-file", "--scores",
                                scores_path.string(), "--catalog", kCatalog, "--data", kTweets});
  EXPECT_EQ(missing.code, 3);
  EXPECT_NE(missing.err.find("missing score"), std::string::npos);
}

TEST(Predict, RemoteProviderFromEnvironment) {
  test::NliStub stub;
  ::setenv("ZSX_NLI_URL", stub.url().c_str(), 1);
  const auto r = run_cli({"predict", "--provider", "nli-remote", "--catalog", kCatalog, "--text",
                          "I feel sad", "--jobs", "2"});
  ::unsetenv("ZSX_NLI_URL");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(data_lines(r.out), std::vector<std::string>{"text\tlow_mood\t1.000000"});
  EXPECT_EQ(stub.requests(), 1);
}

TEST(Predict, RemoteProviderUnavailableExitsThree) {
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  const auto r = run_cli({"predict", "--provider", "nli-remote", "--nli-url",
                          fmt::format("http://127.0.0.1:{}", port), "--nli-timeout", "0.5",
                          "--catalog", kCatalog, "--text", "I feel sad"});
  EXPECT_EQ(r.code, 3);
}

TEST(Explain, StepRowsSortedByScore) {
  const auto r = run_cli(with(base("explain"), {"--data", kTweets}));
  ASSERT_EQ(r.code, 0) << r.err;
  std::map<std::string, std::vector<double>> scores;
  for (const auto& l : data_lines(r.out)) {
    const auto cols = split_tabs(l);
    if (cols.size() == 7) scores[cols[0]].push_back(std::stod(cols[5]));
  }
  EXPECT_EQ(scores.size(), 5u);
  for (const auto& [id, s] : scores) {
    EXPECT_TRUE(std::is_sorted(s.rbegin(), s.rend())) << id;
  }
}

TEST(Explain, BothExplainersEmitSummariesAndAgreement) {
  const auto r = run_cli(with(base("explain"), {"--text", "No one understands me", "--tree",
                                                "(S (NP no one) (VP understands me))",
                                                "--explainer", "both"}));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = data_lines(r.out);
  std::size_t summaries = 0;
  std::size_t agreement = 0;
  for (const auto& l : lines) {
    const auto cols = split_tabs(l);
    if (cols.size() == 3 && cols[1] == "agreement") {
      ++agreement;
      EXPECT_TRUE(cols[2] == "step_wins" || cols[2] == "ngramex_wins" || cols[2] == "tie");
    } else if (cols.size() == 3) {
      ++summaries;
    }
  }
  EXPECT_EQ(summaries, 2u);
  EXPECT_EQ(agreement, 1u);
}

TEST(Explain, FallbackTreeWarning) {
  const auto r = run_cli(with(base("explain"), {"--data", kTweets}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("# warning: row 't4': no tree; using fallback tree"), std::string::npos);
}

TEST(EvaluateDsd, SweepEmitsOneSummaryPerK) {
  const auto r = run_cli(with(base("evaluate-dsd"), {"--data", kTweets, "--sweep-k", "1,3,6,9"}));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = data_lines(r.out);
  EXPECT_EQ(count_prefix(lines, "summary\t"), 4u);
  EXPECT_EQ(count_prefix(lines, "split\t"), 12u);
  EXPECT_EQ(split_tabs(lines.back())[5], "9");
}

TEST(EvaluateDsd, ReportEi) {
  const auto r = run_cli(with(base("evaluate-dsd"), {"--data", kTweets, "--report-ei"}));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = data_lines(r.out);
  EXPECT_EQ(count_prefix(lines, "ei\t"), 2u);
  EXPECT_EQ(count_prefix(lines, "agreement\t"), 1u);
}

TEST(EvaluateDsd, JobsDoNotChangeBytes) {
  const auto one = run_cli({"evaluate-dsd", "--catalog", kCatalog, "--embeddings", kVectors,
                            "--data", kTweets, "--sweep-k", "1,2", "--report-ei", "--jobs", "1"});
  const auto four = run_cli({"evaluate-dsd", "--catalog", kCatalog, "--embeddings", kVectors,
                             "--data", kTweets, "--sweep-k", "1,2", "--report-ei", "--jobs", "4"});
  ASSERT_EQ(one.code, 0) << one.err;
  EXPECT_EQ(one.out, four.out);
  EXPECT_EQ(one.out, run_cli({"evaluate-dsd", "--catalog", kCatalog, "--embeddings", kVectors,
                              "--data", kTweets, "--sweep-k", "1,2", "--report-ei", "--jobs",
                              "1"})
                         .out);
}

TEST(EvaluateDpd, MissingBinaryLabelsExitThree) {
  test::TempDir dir;
  const auto data = dir.write("d.tsv", "a\tI feel sad\tlow_mood\nb\tno sleep\tdisturbed_sleep\n");
  const auto r = run_cli(with(base("evaluate-dpd"), {"--data", data.string()}));
  EXPECT_EQ(r.code, 3);
}

TEST(EvaluateDpd, RunsOnBalancedData) {
  test::TempDir dir;
  std::string rows;
  for (int i = 0; i < 20; ++i) {
    rows += fmt::format("p{}\tI feel sad{}\t\t\t1\n", i, i % 2 ? " today" : "");
    rows += fmt::format("n{}\tinsomnia at night{}\t\t\t0\n", i, i % 2 ? " today" : "");
  }
  const auto data = dir.write("d.tsv", rows);
  const auto r = run_cli(with(base("evaluate-dpd"), {"--data", data.string(), "--repeats", "5"}));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = data_lines(r.out);
  EXPECT_EQ(count_prefix(lines, "split\t"), 5u);
  EXPECT_EQ(count_prefix(lines, "summary\t"), 3u);
  for (const auto& l : lines) {
    const auto cols = split_tabs(l);
    if (cols[0] == "summary" && cols[7] == "linear") EXPECT_EQ(cols[8], "1.000000");
    if (cols[0] == "summary" && cols[7] == "majority-class") EXPECT_EQ(cols[8], "0.666667");
  }
}

TEST(TrainMapper, SameFileGivesIdentity) {
  test::TempDir dir;
  const auto out_path = (dir.path() / "m.txt").string();
  const auto r = run_cli({"train-mapper", "--source", kVectors, "--target", kVectors, "--lambda",
                          "0", "--output", out_path});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto m = load_matrix(out_path);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(m.at(i, j), i == j ? 1.0 : 0.0, 1e-6);
  const auto line = data_lines(r.out).at(0);
  EXPECT_NE(line.find("vocab=42"), std::string::npos) << line;
  const auto residual = std::stod(line.substr(line.find("residual_norm=") + 14));
  EXPECT_LT(residual, 1e-6);
}

TEST(TrainMapper, RecoversSyntheticMap) {
  test::TempDir dir;
  std::mt19937_64 rng(12);
  const auto a = test::random_vector(rng, 20);  // 5 x 4
  VectorTable src("src", 5);
  VectorTable tgt("tgt", 4);
  for (int i = 0; i < 50; ++i) {
    const auto x = test::random_vector(rng, 5);
    Vector y(4, 0.0);
    for (int r = 0; r < 5; ++r)
      for (int c = 0; c < 4; ++c) y[c] += x[r] * a[r * 4 + c];
    src.insert("w" + std::to_string(i), x);
    tgt.insert("w" + std::to_string(i), y);
  }
  const auto src_path = dir.write("src.txt", test::table_text(src));
  const auto tgt_path = dir.write("tgt.txt", test::table_text(tgt));
  const auto out_path = (dir.path() / "m.txt").string();
  const auto r = run_cli({"train-mapper", "--source", src_path.string(), "--target",
                          tgt_path.string(), "--lambda", "0", "--output", out_path});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto m = load_matrix(out_path);
  for (std::size_t i = 0; i < 20; ++i) EXPECT_NEAR(m.values()[i], a[i], 1e-6);
}

TEST(TrainMapper, DisjointVocabulariesExitThree) {
  test::TempDir dir;
  const auto other = dir.write("other.txt", "zebra 1 0 0 0\n");
  const auto r = run_cli({"train-mapper", "--source", kVectors, "--target", other.string(),
                          "--output", (dir.path() / "m.txt").string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("empty-intersection"), std::string::npos) << r.err;
}

TEST(Config, FileSetsFlagsAndCommandLineWins) {
  test::TempDir dir;
  const auto cfg = dir.write("run.toml", fmt::format("catalog = \"{}\"\nembeddings = \"{}\"\n"
                                                     "data = \"{}\"\nk-label = 15\n",
                                                     kCatalog, kVectors, kTweets));
  const auto from_file = run_cli({"predict", "--config", cfg.string()});
  ASSERT_EQ(from_file.code, 0) << from_file.err;
  EXPECT_NE(split_tabs(data_lines(from_file.out)[0])[1].find(';'), std::string::npos);
  const auto overridden = run_cli({"predict", "--config", cfg.string(), "--k-label", "1"});
  ASSERT_EQ(overridden.code, 0) << overridden.err;
  EXPECT_EQ(split_tabs(data_lines(overridden.out)[0])[1].find(';'), std::string::npos);
}

}  // namespace
}  // namespace zsx
