#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "asb/cli.h"
#include "asb/error.h"

namespace asb {
namespace {

namespace fs = std::filesystem;

const char* kMinimal = R"(
seed: 3
corpus:
  synthetic:
    conversations: 2
    messages_per_conversation: 30
tasks: [abd]
splits:
  count: 2
text_tables:
  noise:
    noise_dim: 4
embeddings:
  sgcn:
    epochs: 2
models: [noise, fgsd, "late:noise+fgsd"]
grid:
  kernels: [linear]
  C: [1]
  max_iterations: [200]
  folds: 2
)";

TEST(Config, ParsesSectionsAndResolvesPaths) {
  const auto c = parse_run_config(kMinimal, "/tmp/x/demo.yaml");
  EXPECT_EQ(c.run_id, "demo");
  EXPECT_EQ(c.seed, 3u);
  ASSERT_TRUE(c.synthetic.has_value());
  EXPECT_EQ(c.synthetic->conversations, 2);
  EXPECT_EQ(c.tasks, std::vector<Task>{Task::kAbd});
  EXPECT_EQ(c.n_splits, 2);
  EXPECT_EQ(c.models.size(), 3u);
  EXPECT_EQ(c.grid.configs().size(), 1u);
  EXPECT_EQ(c.cv_folds, 2);
  EXPECT_EQ(c.graph_configs.at(GraphMethod::kSgcn).sgcn.epochs, 2);
  EXPECT_EQ(c.raw, kMinimal);
  const auto p = parse_run_config("corpus: {path: data/c.jsonl}\ntext_tables: {m: t.emb}\nmodels: [m]\n",
                                  "/base/cfg/run.yaml");
  EXPECT_EQ(p.corpus_path, fs::path("/base/cfg/data/c.jsonl"));
  EXPECT_EQ(p.text_sources.at(0).path, fs::path("/base/cfg/t.emb"));
  EXPECT_EQ(p.grid.configs().size(), SvmGrid::full().configs().size());
}

TEST(Config, SeedOverrideRederivesMethodSeeds) {
  auto c = parse_run_config(kMinimal, "demo.yaml");
  const auto before = c.graph_configs.at(GraphMethod::kFgsd).seed;
  apply_seed(c, 99);
  EXPECT_EQ(c.seed, 99u);
  EXPECT_NE(c.graph_configs.at(GraphMethod::kFgsd).seed, before);
}

TEST(Config, RejectsBadInput) {
  const char* bad[] = {
      "corpus: {synthetic: {}}\nmodels: [fgsd]\nbogus: 1\n",
      "models: [fgsd]\n",
      "corpus: {synthetic: {}, path: a}\nmodels: [fgsd]\n",
      "corpus: {synthetic: {}}\nmodels: [mbert]\n",
      "corpus: {synthetic: {}}\nmodels: [fgsd]\nembeddings: {fgsd: {walk_length: 3}}\n",
      "corpus: {synthetic: {}}\nmodels: [fgsd]\ngrid: {C: [x]}\n",
      "corpus: {synthetic: {}}\nmodels: [fgsd]\ntasks: [abc]\n",
      "corpus: {synthetic: {conversations: many}}\nmodels: [fgsd]\n",
      "corpus: [",
  };
  for (const char* text : bad) EXPECT_THROW(parse_run_config(text, "c.yaml"), UsageError) << text;
  try {
    load_run_config("missing.cfg");
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("missing.cfg"), std::string::npos);
  }
}

TEST(Config, NoiseTableIsSeededAndComplete) {
  const Corpus corpus = generate_synthetic_corpus({}, 1);
  const auto a = noise_table(corpus, "noise", 3, 5);
  EXPECT_EQ(a, noise_table(corpus, "noise", 3, 5));
  EXPECT_NE(a, noise_table(corpus, "noise", 3, 6));
  EXPECT_EQ(a.rows.size(), corpus.message_count());
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "asbbench");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return dispatch(static_cast<int>(argv.size()), argv.data());
}

TEST(Dispatch, ExitCodes) {
  EXPECT_EQ(run({"--help"}), 0);
  EXPECT_EQ(run({}), 1);
  EXPECT_EQ(run({"frobnicate"}), 1);
  EXPECT_EQ(run({"run", "--config", "missing.cfg"}), 1);
  EXPECT_EQ(run({"run"}), 1);
  const auto dir = fs::temp_directory_path() / "asb-cli-exit-test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream(dir / "bad.yaml") << "corpus: {path: missing.jsonl}\nmodels: [fgsd]\n";
  }
  EXPECT_EQ(run({"ingest", "--config", (dir / "bad.yaml").string(), "--out", (dir / "out").string()}), 1);
  {
    std::ofstream(dir / "corpus.jsonl") << "{\"conversation_id\":\"c\",\"message_id\":\"m\",\"seq\":0}\n";
    std::ofstream(dir / "data.yaml") << "corpus: {path: corpus.jsonl}\nmodels: [fgsd]\n";
  }
  EXPECT_EQ(run({"ingest", "--config", (dir / "data.yaml").string(), "--out", (dir / "out").string()}), 2);
  fs::remove_all(dir);
}

TEST(Dispatch, RunReportErrorsStayInsideOutputDir) {
  const auto dir = fs::temp_directory_path() / "asb-cli-run-test";
  fs::remove_all(dir);
  fs::create_directories(dir / "cfg");
  {
    std::ofstream(dir / "cfg" / "mini.yaml") << kMinimal;
  }
  const std::string cfg = (dir / "cfg" / "mini.yaml").string();
  const std::string out = (dir / "out").string();
  ASSERT_EQ(run({"run", "--config", cfg, "--out", out, "--jobs", "2", "--seed", "4"}), 0);
  const fs::path rd = dir / "out" / "runs" / "mini";
  for (const char* f : {"config.yaml", "effective.yaml", "folds.csv", "report.md", "report.csv", "errors.md",
                        "errors.csv", "audit.txt", "abd/late-noise+fgsd/0.csv"}) {
    EXPECT_TRUE(fs::exists(rd / f)) << f;
  }
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  };
  const std::string report = slurp(rd / "report.md");
  const std::string errors = slurp(rd / "errors.md");
  EXPECT_EQ(slurp(rd / "config.yaml"), kMinimal);
  EXPECT_NE(slurp(rd / "audit.txt").find("violations 0\n"), std::string::npos);
  ASSERT_EQ(run({"report", "--config", cfg, "--out", out}), 0);
  EXPECT_EQ(slurp(rd / "report.md"), report);
  ASSERT_EQ(run({"errors", "--config", cfg, "--out", out}), 0);
  EXPECT_EQ(slurp(rd / "errors.md"), errors);
  ASSERT_EQ(run({"graphs", "--config", cfg, "--out", out}), 0);
  EXPECT_TRUE(fs::exists(rd / "graphs" / "abd.jsonl"));
  ASSERT_EQ(run({"embed", "--config", cfg, "--out", out}), 0);
  EXPECT_TRUE(fs::exists(rd / "embeddings" / "abd" / "fgsd.emb"));
  EXPECT_EQ(run({"report", "--config", cfg, "--out", out, "--run-id", "nothing"}), 1);
  // Nothing outside the output directory besides the config itself.
  size_t outside = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().string().rfind(out, 0) != 0) ++outside;
  }
  EXPECT_EQ(outside, 1u);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace asb
