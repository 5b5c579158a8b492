#ifndef ASB_GEMBED_H_
#define ASB_GEMBED_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "asb/audit.h"
#include "asb/convgraph.h"
#include "asb/corpus.h"
#include "asb/lexembed.h"
#include "asb/nn.h"

namespace asb {

enum class GraphMethod {
  kNode2Vec,
  kWalklets,
  kGraphWave,
  kFgsd,
  kSg2v,
  kWdSg2v,
  kSgcn,
  kWdSgcn,
  kNgnn,
};

inline constexpr GraphMethod kAllGraphMethods[] = {
    GraphMethod::kNode2Vec, GraphMethod::kWalklets, GraphMethod::kGraphWave,
    GraphMethod::kFgsd,     GraphMethod::kSg2v,     GraphMethod::kWdSg2v,
    GraphMethod::kSgcn,     GraphMethod::kWdSgcn,   GraphMethod::kNgnn};

std::string_view method_name(GraphMethod m);  // "wd-sgcn", ...
GraphMethod parse_method(std::string_view s);  // accepts '-' or '_'

enum class EmbeddingSource { kNodeLevel, kGraphLevel };

EmbeddingSource method_source(GraphMethod m);
int default_dim(GraphMethod m);
// Methods whose parameters are fitted on a training collection.
bool method_needs_training(GraphMethod m);
// Methods that only see the undirected unsigned view.
bool method_is_sign_blind(GraphMethod m);

struct EmbeddingVector {
  std::vector<double> values;
  int dim = 0;
  EmbeddingSource source = EmbeddingSource::kNodeLevel;
  GraphMethod method = GraphMethod::kNode2Vec;
};

struct WalkParams {
  int walks_per_node = 10;
  int walk_length = 20;
  int window = 5;
  int negatives = 5;
  int epochs = 5;
  double p = 1.0;
  double q = 1.0;
  double learning_rate = 0.025;
  int walklets_scales = 4;
};

struct GraphWaveParams {
  int points = 50;      // characteristic-function samples per scale
  double t_max = 100.0; // samples are linspace(0, t_max, points)
  // Heat scales come from the spectral gap: s = -ln(eta) / sqrt(l1 * lN).
  double eta_small_scale = 0.95;
  double eta_large_scale = 0.80;
};

struct FgsdParams {
  double bin_width = 0.1;
  int bins = 200;
};

struct Sg2vParams {
  int wl_iterations = 3;
  int epochs = 20;
  int infer_epochs = 20;
  int negatives = 5;
  double learning_rate = 0.025;
};

struct SgcnParams {
  int hidden = 64;  // per channel; output is [B || U]
  int epochs = 15;
  double learning_rate = 0.01;
  int max_pairs_per_graph = 64;
};

struct NgnnParams {
  int hidden = 64;
  int epochs = 20;
  double learning_rate = 0.01;
};

struct GraphEmbeddingConfig {
  GraphMethod method = GraphMethod::kNode2Vec;
  int dim = 0;  // 0 selects default_dim(method)
  uint64_t seed = 0;
  WalkParams walk;
  GraphWaveParams graphwave;
  FgsdParams fgsd;
  Sg2vParams sg2v;
  SgcnParams sgcn;
  NgnnParams ngnn;

  static GraphEmbeddingConfig defaults(GraphMethod method, uint64_t seed = 0);

  int resolved_dim() const;
  void validate() const;
  // Canonical "key=value;..." listing of every parameter the method reads.
  std::string provenance() const;
  std::string hash() const;  // 16 hex digits of provenance()
};

// ---- Per-graph (untrained) methods ----

EmbeddingVector node2vec_embed(const InteractionGraph& g,
                               const GraphEmbeddingConfig& config);
EmbeddingVector walklets_embed(const InteractionGraph& g,
                               const GraphEmbeddingConfig& config);
EmbeddingVector graphwave_embed(const InteractionGraph& g,
                                const GraphEmbeddingConfig& config);
EmbeddingVector fgsd_embed(const InteractionGraph& g,
                           const GraphEmbeddingConfig& config);

// ---- Trained methods ----

// Signed Weisfeiler-Lehman documents embedded with a distributed
// bag-of-labels model (weighted = the WD variant).
class Sg2vModel {
 public:
  static Sg2vModel fit(const std::vector<const InteractionGraph*>& training,
                       const GraphEmbeddingConfig& config,
                       LeakageAudit* audit = nullptr);
  EmbeddingVector embed(const InteractionGraph& g) const;
  bool weighted() const { return weighted_; }
  size_t vocabulary_size() const { return vocab_.size(); }

 private:
  GraphEmbeddingConfig config_;
  bool weighted_ = false;
  std::vector<uint64_t> vocab_;  // sorted label ids
  nn::Matrix label_vectors_;     // output vectors, one row per vocab entry
  std::vector<double> label_counts_;
};

// Balance-theory two-channel signed GCN trained on sign prediction
// (weighted_directed = the WD variant).
class SgcnModel {
 public:
  static SgcnModel untrained(const GraphEmbeddingConfig& config);
  static SgcnModel fit(const std::vector<const InteractionGraph*>& training,
                       const GraphEmbeddingConfig& config,
                       LeakageAudit* audit = nullptr);
  EmbeddingVector embed(const InteractionGraph& g) const;
  // Final [B || U] representation for every node (rows follow g.nodes).
  nn::Matrix node_representations(const InteractionGraph& g) const;
  // Number of (graph, pair) samples drawn by the sign-prediction sampler.
  size_t sampled_pairs() const { return sampled_pairs_; }

 private:
  struct Weights;
  GraphEmbeddingConfig config_;
  bool weighted_directed_ = false;
  std::shared_ptr<Weights> weights_;
  size_t sampled_pairs_ = 0;
};

// Nested GNN: radius-1 rooted subgraphs encoded by an inner sum-aggregation
// network, mean-pooled into a graph vector; trained on task labels.
class NgnnModel {
 public:
  static NgnnModel untrained(const GraphEmbeddingConfig& config, int n_classes);
  static NgnnModel fit(const std::vector<const InteractionGraph*>& training,
                       const std::vector<int>& labels, int n_classes,
                       const GraphEmbeddingConfig& config,
                       LeakageAudit* audit = nullptr);
  EmbeddingVector embed(const InteractionGraph& g) const;

 private:
  struct Weights;
  GraphEmbeddingConfig config_;
  std::shared_ptr<Weights> weights_;
};

// Embeds one graph with an untrained method, dispatching on config.method.
EmbeddingVector embed_untrained(const InteractionGraph& g,
                                const GraphEmbeddingConfig& config);

struct EmbedAllOptions {
  std::filesystem::path cache_dir;  // empty disables caching
  std::string split_prefix;         // e.g. task name; part of the cache key
  int jobs = 1;
  LeakageAudit* audit = nullptr;    // receives one audit per split, merged
};

// Embedding tables per split. Untrained methods produce one shared table.
struct SplitTables {
  bool shared = true;
  std::vector<EmbeddingTable> tables;
  const EmbeddingTable& for_split(int split) const;
};

// graphs[i] is the graph of instances[i] == plan.instance_ids[i]. Trained
// methods are fitted per split on training-fold graphs only, then applied to
// every graph.
SplitTables embed_all(const std::vector<InteractionGraph>& graphs,
                      const GraphEmbeddingConfig& config, const SplitPlan& plan,
                      const std::vector<TaskInstance>& instances,
                      const EmbedAllOptions& options = {});

}  // namespace asb

#endif  // ASB_GEMBED_H_
