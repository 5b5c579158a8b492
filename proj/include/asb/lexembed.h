#ifndef ASB_LEXEMBED_H_
#define ASB_LEXEMBED_H_

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "asb/corpus.h"

namespace asb {

// Message-level vector table. Rows are keyed (and serialized) in message_id
// order. Also used as the on-disk cache format for graph embeddings; extra
// header fields land in `metadata`.
struct EmbeddingTable {
  std::string model_name;
  int dim = 0;
  std::string pooling;  // "mean" | "cls" | "" (graph tables)
  std::map<std::string, std::string> metadata;
  std::map<std::string, std::vector<double>> rows;

  const std::vector<double>& row(const std::string& message_id) const;
  bool operator==(const EmbeddingTable&) const = default;
};

// Default lexical dimension for a known model name (1024 for gemini004,
// 768 otherwise).
int default_lexical_dim(const std::string& model_name);

// Shortest round-trip decimal representation.
std::string format_double(double v);

void write_table(const EmbeddingTable& table, std::ostream& out);
void write_table_file(const EmbeddingTable& table,
                      const std::filesystem::path& path);
EmbeddingTable parse_table(std::istream& in);
EmbeddingTable load_table(const std::filesystem::path& path);

struct CoverageReport {
  std::vector<std::string> missing;  // instance ids absent from the table
  size_t covered = 0;
  size_t extra = 0;                 // table rows not referenced by instances
  bool complete() const { return missing.empty(); }
  double ratio() const;
};

CoverageReport validate_coverage(const EmbeddingTable& table,
                                 const std::vector<TaskInstance>& instances);
// Throws DataError naming the first missing ids when coverage < 100%.
void require_full_coverage(const EmbeddingTable& table,
                           const std::vector<TaskInstance>& instances);

struct ProviderConfig {
  std::string endpoint;  // http(s)://host[:port]/path
  std::string model;
  std::string token_env = "ASB_PROVIDER_TOKEN";
  int batch_size = 32;
  std::chrono::milliseconds timeout{30000};
  int max_attempts = 3;
  std::chrono::milliseconds backoff{200};
  int max_in_flight = 4;
  std::string pooling = "mean";
  std::optional<int> expected_dim;
  std::filesystem::path cache_dir;  // empty disables caching

  void validate() const;
};

struct ProviderStats {
  size_t requests = 0;  // HTTP requests issued, retries included
  size_t retries = 0;
  bool cache_hit = false;
};

// JSON-over-HTTP client: POST {model, texts[]} -> {vectors[][]}, bearer token
// from the environment variable named by config.token_env.
EmbeddingTable fetch_from_provider(const std::vector<Message>& messages,
                                   const ProviderConfig& config,
                                   ProviderStats* stats = nullptr);

}  // namespace asb

#endif  // ASB_LEXEMBED_H_
