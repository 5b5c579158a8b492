#ifndef ASB_CLI_H_
#define ASB_CLI_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "asb/bench.h"
#include "asb/corpus.h"
#include "asb/lexembed.h"

namespace asb {

// Source of one lexical table: a file, Gaussian noise (test fixtures) or a
// remote provider.
struct TextSource {
  std::string name;
  std::filesystem::path path;
  int noise_dim = 0;
  std::optional<ProviderConfig> provider;
};

struct RunConfig {
  std::filesystem::path config_path;
  std::string raw;  // file bytes, copied into the run directory
  std::string run_id;

  std::filesystem::path corpus_path;
  std::optional<SyntheticSpec> synthetic;

  GraphExtractionConfig extraction;
  std::vector<Task> tasks{Task::kAbd, Task::kBba, Task::kBpi};
  int n_splits = 5;
  double train_fraction = 0.70;
  bool undersample = false;
  uint64_t seed = 0;
  std::filesystem::path output;

  std::vector<TextSource> text_sources;
  std::map<GraphMethod, GraphEmbeddingConfig> graph_configs;  // seed applied
  std::vector<ModelSpec> models;
  SvmGrid grid = SvmGrid::full();
  int cv_folds = 5;
};

// Parses a YAML run config. Relative paths are resolved against the config
// file's directory. Throws UsageError (missing file, bad keys) naming the path.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& yaml, const std::filesystem::path& origin);

// Re-derives per-method seeds after a --seed override.
void apply_seed(RunConfig& config, uint64_t seed);

Corpus load_configured_corpus(const RunConfig& config);
std::map<std::string, EmbeddingTable> load_text_tables(const RunConfig& config, const Corpus& corpus,
                                                       const std::filesystem::path& cache_dir);

// Gaussian N(0, 1) table over every message, seeded per table name.
EmbeddingTable noise_table(const Corpus& corpus, const std::string& name, int dim, uint64_t seed);

// Entry point behind the asbbench binary. Returns the process exit code.
int dispatch(int argc, char** argv);

}  // namespace asb

#endif  // ASB_CLI_H_
