#include <algorithm>
#include <cmath>
#include <set>

#include "asb/error.h"
#include "asb/gembed.h"
#include "asb/hash.h"
#include "asb/parallel.h"

namespace asb {

EmbeddingVector embed_untrained(const InteractionGraph& g,
                                const GraphEmbeddingConfig& config) {
  switch (config.method) {
    case GraphMethod::kNode2Vec:
      return node2vec_embed(g, config);
    case GraphMethod::kWalklets:
      return walklets_embed(g, config);
    case GraphMethod::kGraphWave:
      return graphwave_embed(g, config);
    case GraphMethod::kFgsd:
      if (g.nodes.size() < 2) {
        // No node pairs: the empty histogram.
        EmbeddingVector v;
        v.dim = config.resolved_dim();
        v.values.assign(static_cast<size_t>(v.dim), 0.0);
        v.method = GraphMethod::kFgsd;
        v.source = EmbeddingSource::kGraphLevel;
        return v;
      }
      return fgsd_embed(g, config);
    default:
      throw UsageError("embed_untrained: " + std::string(method_name(config.method)) +
                       " needs a training collection");
  }
}

const EmbeddingTable& SplitTables::for_split(int split) const {
  if (shared) {
    if (tables.empty()) throw UsageError("SplitTables: no tables");
    return tables.front();
  }
  if (split < 0 || static_cast<size_t>(split) >= tables.size()) {
    throw UsageError("SplitTables: split " + std::to_string(split) + " out of range");
  }
  return tables[static_cast<size_t>(split)];
}

namespace {

std::string graphs_fingerprint(const std::vector<InteractionGraph>& graphs) {
  Fnv1a h;
  for (const auto& g : graphs) {
    const std::string dump = graph_to_json(g);
    h.bytes(dump);
  }
  return to_hex(h.digest());
}

std::string plan_fingerprint(const SplitPlan& plan, int split) {
  Fnv1a h;
  const auto& a = plan.assignments[static_cast<size_t>(split)];
  for (size_t i = 0; i < a.size(); ++i) {
    h.bytes(plan.instance_ids[i]);
    h.u64(static_cast<uint64_t>(a[i]));
  }
  return to_hex(h.digest());
}

EmbeddingTable to_table(const std::vector<InteractionGraph>& graphs,
                        const std::vector<EmbeddingVector>& vectors,
                        const GraphEmbeddingConfig& config, const std::string& split) {
  EmbeddingTable table;
  table.model_name = std::string(method_name(config.method));
  table.dim = config.resolved_dim();
  table.metadata["config"] = config.hash();
  table.metadata["split"] = split;
  for (size_t i = 0; i < graphs.size(); ++i) {
    const auto& v = vectors[i];
    if (v.dim != table.dim || static_cast<int>(v.values.size()) != table.dim) {
      throw DataError("embedding of " + graphs[i].target_message_id + " has dim " +
                      std::to_string(v.values.size()) + ", config expects " +
                      std::to_string(table.dim));
    }
    for (double x : v.values) {
      if (!std::isfinite(x)) {
        throw DataError("non-finite embedding value for " + graphs[i].target_message_id);
      }
    }
    table.rows[graphs[i].target_message_id] = v.values;
  }
  return table;
}

// Loads a cached table when one exists for `name`; otherwise builds and
// stores it. *hit reports which happened.
template <typename Build>
EmbeddingTable cached(const EmbedAllOptions& options, const std::string& name, Build build,
                      bool* hit = nullptr) {
  if (hit) *hit = false;
  if (options.cache_dir.empty()) return build();
  const auto path = options.cache_dir / name;
  if (std::filesystem::exists(path)) {
    if (hit) *hit = true;
    return load_table(path);
  }
  EmbeddingTable table = build();
  std::filesystem::create_directories(options.cache_dir);
  write_table_file(table, path);
  return table;
}

}  // namespace

SplitTables embed_all(const std::vector<InteractionGraph>& graphs,
                      const GraphEmbeddingConfig& config, const SplitPlan& plan,
                      const std::vector<TaskInstance>& instances,
                      const EmbedAllOptions& options) {
  config.validate();
  if (graphs.size() != instances.size() || graphs.size() != plan.instance_ids.size()) {
    throw DataError("embed_all: graphs, instances and split plan disagree in length");
  }
  for (size_t i = 0; i < graphs.size(); ++i) {
    if (graphs[i].target_message_id != instances[i].message_id ||
        instances[i].message_id != plan.instance_ids[i]) {
      throw DataError("embed_all: graph " + std::to_string(i) + " does not match instance " +
                      instances[i].message_id);
    }
  }
  const std::string prefix =
      (options.split_prefix.empty() ? std::string() : options.split_prefix + "-") +
      std::string(method_name(config.method)) + "-" + config.hash() + "-" +
      graphs_fingerprint(graphs);

  SplitTables result;
  const size_t n = graphs.size();
  if (!method_needs_training(config.method)) {
    result.shared = true;
    result.tables.push_back(cached(options, prefix + "-shared.emb", [&] {
      std::vector<EmbeddingVector> vectors(n);
      parallel_for(n, options.jobs, [&](size_t i) { vectors[i] = embed_untrained(graphs[i], config); });
      return to_table(graphs, vectors, config, "shared");
    }));
    return result;
  }

  result.shared = false;
  for (int s = 0; s < plan.n_splits; ++s) {
    const auto name = prefix + "-split" + std::to_string(s) + "-" + plan_fingerprint(plan, s) + ".emb";
    std::set<std::string> test_ids;
    for (size_t i : plan.test_indices(s)) test_ids.insert(plan.instance_ids[i]);
    bool hit = false;
    result.tables.push_back(cached(options, name, [&] {
      LeakageAudit audit(test_ids);
      std::vector<const InteractionGraph*> training;
      std::vector<int> labels;
      for (size_t i : plan.train_indices(s)) {
        training.push_back(&graphs[i]);
        const auto& vocab = task_labels(instances[i].task);
        labels.push_back(static_cast<int>(
            std::find(vocab.begin(), vocab.end(), instances[i].label) - vocab.begin()));
      }
      std::vector<EmbeddingVector> vectors(n);
      switch (config.method) {
        case GraphMethod::kSg2v:
        case GraphMethod::kWdSg2v: {
          const auto model = Sg2vModel::fit(training, config, &audit);
          parallel_for(n, options.jobs, [&](size_t i) { vectors[i] = model.embed(graphs[i]); });
          break;
        }
        case GraphMethod::kSgcn:
        case GraphMethod::kWdSgcn: {
          const auto model = SgcnModel::fit(training, config, &audit);
          parallel_for(n, options.jobs, [&](size_t i) { vectors[i] = model.embed(graphs[i]); });
          break;
        }
        case GraphMethod::kNgnn: {
          const int classes = static_cast<int>(task_labels(instances.front().task).size());
          const auto model = NgnnModel::fit(training, labels, classes, config, &audit);
          parallel_for(n, options.jobs, [&](size_t i) { vectors[i] = model.embed(graphs[i]); });
          break;
        }
        default:
          throw UsageError("embed_all: unexpected method");
      }
      if (options.audit) options.audit->merge(audit);
      return to_table(graphs, vectors, config, std::to_string(s));
    }, &hit));
    // The cached table was fitted on exactly this split's training graphs
    // (the plan fingerprint is in the name), so the audit sees the same ids.
    if (hit && options.audit) {
      LeakageAudit audit(std::move(test_ids));
      for (size_t i : plan.train_indices(s)) audit.touch("embedding-training", plan.instance_ids[i]);
      options.audit->merge(audit);
    }
  }
  return result;
}

}  // namespace asb
