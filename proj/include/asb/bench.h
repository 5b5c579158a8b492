#ifndef ASB_BENCH_H_
#define ASB_BENCH_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "asb/audit.h"
#include "asb/classify.h"
#include "asb/convgraph.h"
#include "asb/corpus.h"
#include "asb/fusion.h"
#include "asb/gembed.h"
#include "asb/lexembed.h"
#include "asb/metrics.h"

namespace asb {

struct ModelSpec {
  enum class Kind { kText, kGraph, kFusion };
  Kind kind = Kind::kText;
  std::string text;  // lexical table name
  GraphMethod graph = GraphMethod::kNode2Vec;
  FusionStrategy strategy = FusionStrategy::kLate;

  static ModelSpec text_model(std::string name);
  static ModelSpec graph_model(GraphMethod m);
  static ModelSpec fusion(FusionStrategy s, std::string text, GraphMethod m);
  // Parses "mbert", "wd-sgcn" or "late:mbert+wd-sgcn". Bare names that are
  // graph methods are graph models; anything else is a text table name.
  static ModelSpec parse(std::string_view s);

  std::string name() const;      // "mbert", "wd-sgcn", "mbert+wd-sgcn"
  std::string dir_name() const;  // name, or "<strategy>-<text>+<graph>" for fusion
  std::string group() const;     // "lexical", "graph", "fusion"
  std::string strategy_name() const;  // "" unless fusion
  std::string to_string() const;      // round-trips through parse()
};

struct FoldResult {
  int split = 0;
  Task task = Task::kAbd;
  std::string model;  // ModelSpec::dir_name()
  std::map<std::string, std::string> predictions;  // message_id -> predicted label
  double weighted_f1 = 0.0;
  int dim = 0;        // representation length; text + graph for fusion
  int input_dim = 0;  // length of the final classifier's input
  std::string config;  // selected classifier, SvmConfig::to_string()
  bool converged = true;
};

struct ModelAggregate {
  Task task = Task::kAbd;
  std::string model;     // dir name
  std::string display;   // ModelSpec::name()
  std::string group;
  std::string strategy;
  int dim = 0;
  std::vector<double> per_split;
  MeanStd f1;
};

// Every per-split score of one (task, model) pair, averaged.
std::vector<ModelAggregate> aggregate_results(const std::vector<FoldResult>& results,
                                              const std::vector<ModelSpec>& models);

struct BenchmarkInputs {
  const Corpus* corpus = nullptr;
  std::vector<Task> tasks{Task::kAbd, Task::kBba, Task::kBpi};
  std::vector<ModelSpec> models;
  std::map<std::string, EmbeddingTable> text_tables;
  std::map<GraphMethod, GraphEmbeddingConfig> graph_configs;  // missing = defaults
  GraphExtractionConfig extraction;
  int n_splits = 5;
  double train_fraction = 0.70;
  bool undersample = false;
  uint64_t seed = 0;
  ModelSelection selection;
  int jobs = 1;
  std::filesystem::path cache_dir;  // graph embedding cache; empty disables
};

struct TaskData {
  Task task = Task::kAbd;
  std::vector<TaskInstance> instances;
  SplitPlan plan;
  std::vector<InteractionGraph> graphs;
};

// Instances (optionally undersampled), splits and graphs for one task.
TaskData prepare_task(const BenchmarkInputs& inputs, Task task);

// For each (task, model, split): grid-search on train, fit, predict test.
// Results are ordered by task, model (input order), split.
std::vector<FoldResult> run_benchmark(const BenchmarkInputs& inputs, LeakageAudit* audit = nullptr,
                                      std::vector<TaskData>* prepared = nullptr);

// ---- persisted predictions ----

// runs/<run-id>/<task>/<model>/<split>.csv with message_id,true_label,predicted_label.
void write_predictions(const std::filesystem::path& run_dir, const std::vector<FoldResult>& results,
                       const std::map<Task, std::vector<TaskInstance>>& instances);

struct StoredPrediction {
  std::string message_id;
  std::string true_label;
  std::string predicted_label;
};

struct StoredFold {
  Task task = Task::kAbd;
  std::string model;
  int split = 0;
  std::vector<StoredPrediction> rows;
};

// Reads every prediction file below run_dir in path order.
std::vector<StoredFold> load_predictions(const std::filesystem::path& run_dir);

// runs/<run-id>/folds.csv: task,model,split,weighted_f1,dim,input_dim,config,converged.
// Scores use the shortest round-trip form so reloaded aggregates are exact.
void write_fold_summary(const std::filesystem::path& file, const std::vector<FoldResult>& results);
std::vector<FoldResult> load_fold_summary(const std::filesystem::path& file);  // no predictions

// ---- error analysis ----

struct ErrorCell {
  Task task = Task::kAbd;
  std::string model;
  std::string label;
  size_t misclassified = 0;
  size_t support = 0;  // instances of the label summed over split test sets
  double percentage() const;
};

struct ErrorBreakdown {
  std::vector<ErrorCell> cells;  // task, model, label order
  size_t total_misclassified() const;
};

// Sums per-label misclassifications over split test sets. Labels come from
// the instances of each fold's task.
ErrorBreakdown aggregate_errors(const std::vector<FoldResult>& results,
                                const std::vector<TaskInstance>& instances);
ErrorBreakdown aggregate_errors(const std::vector<StoredFold>& folds);

// ---- rendering ----

enum class ReportFormat { kMarkdown, kCsv };
ReportFormat parse_format(std::string_view s);  // "md" | "csv"

// "0.718±0.02"
std::string format_score(const MeanStd& f1);

// Dimension printed in the published results table for a model, if listed.
std::optional<int> published_dimension(const ModelSpec& spec);

struct ReportContext {
  std::vector<ModelSpec> models;        // row order
  std::vector<std::string> provenance;  // "key: value" lines
};

std::string render_report(const std::vector<ModelAggregate>& aggregates,
                          const ReportContext& context, ReportFormat format);
std::string render_errors(const ErrorBreakdown& breakdown, ReportFormat format);

}  // namespace asb

#endif  // ASB_BENCH_H_
