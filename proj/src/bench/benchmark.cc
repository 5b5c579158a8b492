#include <algorithm>
#include <set>

#include "asb/bench.h"
#include "asb/error.h"
#include "asb/parallel.h"
#include "asb/rng.h"

namespace asb {

ModelSpec ModelSpec::text_model(std::string name) {
  ModelSpec m;
  m.kind = Kind::kText;
  m.text = std::move(name);
  return m;
}

ModelSpec ModelSpec::graph_model(GraphMethod method) {
  ModelSpec m;
  m.kind = Kind::kGraph;
  m.graph = method;
  return m;
}

ModelSpec ModelSpec::fusion(FusionStrategy s, std::string text, GraphMethod method) {
  ModelSpec m;
  m.kind = Kind::kFusion;
  m.strategy = s;
  m.text = std::move(text);
  m.graph = method;
  return m;
}

ModelSpec ModelSpec::parse(std::string_view s) {
  if (s.empty()) throw UsageError("empty model name");
  const auto colon = s.find(':');
  if (colon != std::string_view::npos) {
    const FusionStrategy strategy = parse_strategy(s.substr(0, colon));
    const auto rest = s.substr(colon + 1);
    const auto plus = rest.find('+');
    if (plus == std::string_view::npos || plus == 0 || plus + 1 == rest.size()) {
      throw UsageError("fusion model must look like <strategy>:<text>+<graph>, got \"" +
                       std::string(s) + "\"");
    }
    return fusion(strategy, std::string(rest.substr(0, plus)), parse_method(rest.substr(plus + 1)));
  }
  if (s.find('+') != std::string_view::npos) {
    throw UsageError("fusion model \"" + std::string(s) + "\" needs a strategy prefix");
  }
  try {
    return graph_model(parse_method(s));
  } catch (const UsageError&) {
    return text_model(std::string(s));
  }
}

std::string ModelSpec::name() const {
  switch (kind) {
    case Kind::kText:
      return text;
    case Kind::kGraph:
      return std::string(method_name(graph));
    case Kind::kFusion:
      return text + "+" + std::string(method_name(graph));
  }
  return text;
}

std::string ModelSpec::dir_name() const {
  return kind == Kind::kFusion ? strategy_name() + "-" + name() : name();
}

std::string ModelSpec::group() const {
  switch (kind) {
    case Kind::kText:
      return "lexical";
    case Kind::kGraph:
      return "graph";
    case Kind::kFusion:
      return "fusion";
  }
  return "lexical";
}

std::string ModelSpec::strategy_name() const {
  return kind == Kind::kFusion ? std::string(asb::to_string(strategy)) : std::string();
}

std::string ModelSpec::to_string() const {
  return kind == Kind::kFusion ? strategy_name() + ":" + name() : name();
}

std::vector<ModelAggregate> aggregate_results(const std::vector<FoldResult>& results,
                                              const std::vector<ModelSpec>& models) {
  std::vector<ModelAggregate> out;
  std::set<Task> tasks;
  for (const auto& r : results) tasks.insert(r.task);
  for (Task task : tasks) {
    for (const auto& spec : models) {
      ModelAggregate agg;
      agg.task = task;
      agg.model = spec.dir_name();
      agg.display = spec.name();
      agg.group = spec.group();
      agg.strategy = spec.strategy_name();
      std::vector<const FoldResult*> folds;
      for (const auto& r : results) {
        if (r.task == task && r.model == agg.model) folds.push_back(&r);
      }
      if (folds.empty()) continue;
      std::sort(folds.begin(), folds.end(),
                [](const FoldResult* a, const FoldResult* b) { return a->split < b->split; });
      for (const FoldResult* r : folds) agg.per_split.push_back(r->weighted_f1);
      agg.dim = folds.front()->dim;
      agg.f1 = mean_std(agg.per_split);
      out.push_back(std::move(agg));
    }
  }
  return out;
}

TaskData prepare_task(const BenchmarkInputs& inputs, Task task) {
  if (!inputs.corpus) throw UsageError("benchmark: no corpus");
  TaskData td;
  td.task = task;
  const std::string tag(to_string(task));
  td.instances = build_task_instances(*inputs.corpus, task);
  if (inputs.undersample) {
    td.instances = undersample(td.instances, derive_seed(inputs.seed, "undersample-" + tag));
  }
  td.plan = make_splits(td.instances, inputs.n_splits, inputs.train_fraction,
                        derive_seed(inputs.seed, "splits-" + tag));
  td.graphs.resize(td.instances.size());
  parallel_for(td.instances.size(), inputs.jobs, [&](size_t i) {
    const auto& id = td.instances[i].message_id;
    td.graphs[i] = extract_graph(inputs.corpus->conversation_of(id), id, inputs.extraction);
  });
  return td;
}

namespace {

Eigen::MatrixXd rows_from_table(const EmbeddingTable& table, const std::vector<TaskInstance>& instances,
                                const std::vector<size_t>& idx) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(idx.size()), table.dim);
  for (size_t r = 0; r < idx.size(); ++r) {
    const auto& row = table.row(instances[idx[r]].message_id);
    for (int c = 0; c < table.dim; ++c) m(static_cast<Eigen::Index>(r), c) = row[static_cast<size_t>(c)];
  }
  return m;
}

Block block_for(const EmbeddingTable& table, const std::vector<TaskInstance>& instances,
                const std::vector<size_t>& train, const std::vector<size_t>& test) {
  return Block{rows_from_table(table, instances, train), rows_from_table(table, instances, test)};
}

}  // namespace

std::vector<FoldResult> run_benchmark(const BenchmarkInputs& inputs, LeakageAudit* audit,
                                      std::vector<TaskData>* prepared) {
  if (inputs.models.empty()) throw UsageError("benchmark: no models configured");
  std::vector<FoldResult> results;
  for (Task task : inputs.tasks) {
    TaskData td = prepare_task(inputs, task);
    const std::string tag(to_string(task));

    std::map<GraphMethod, SplitTables> graph_tables;
    for (const auto& spec : inputs.models) {
      if (spec.kind == ModelSpec::Kind::kText) {
        auto it = inputs.text_tables.find(spec.text);
        if (it == inputs.text_tables.end()) {
          throw DataError("no lexical table named \"" + spec.text + "\"");
        }
        require_full_coverage(it->second, td.instances);
        continue;
      }
      if (spec.kind == ModelSpec::Kind::kFusion) {
        auto it = inputs.text_tables.find(spec.text);
        if (it == inputs.text_tables.end()) {
          throw DataError("no lexical table named \"" + spec.text + "\"");
        }
        require_full_coverage(it->second, td.instances);
      }
      if (graph_tables.count(spec.graph)) continue;
      auto cfg_it = inputs.graph_configs.find(spec.graph);
      const GraphEmbeddingConfig cfg = cfg_it != inputs.graph_configs.end()
                                           ? cfg_it->second
                                           : GraphEmbeddingConfig::defaults(spec.graph, inputs.seed);
      EmbedAllOptions opts;
      opts.cache_dir = inputs.cache_dir;
      opts.split_prefix = tag;
      opts.jobs = inputs.jobs;
      opts.audit = audit;
      graph_tables.emplace(spec.graph, embed_all(td.graphs, cfg, td.plan, td.instances, opts));
    }

    const auto& classes = task_labels(task);
    const size_t n_models = inputs.models.size();
    const size_t n_splits = static_cast<size_t>(td.plan.n_splits);
    std::vector<FoldResult> cells(n_models * n_splits);
    parallel_for(cells.size(), inputs.jobs, [&](size_t cell) {
      const ModelSpec& spec = inputs.models[cell / n_splits];
      const int split = static_cast<int>(cell % n_splits);
      const auto train = td.plan.train_indices(split);
      const auto test = td.plan.test_indices(split);

      std::set<std::string> test_ids;
      for (size_t i : test) test_ids.insert(td.instances[i].message_id);
      LeakageAudit cell_audit(std::move(test_ids));

      FoldData fold;
      fold.classes = classes;
      for (size_t i : train) {
        fold.train_ids.push_back(td.instances[i].message_id);
        fold.train_labels.push_back(td.instances[i].label);
      }
      ModelSelection selection = inputs.selection;
      selection.cv.jobs = 1;
      selection.cv.seed = derive_seed(inputs.seed, "cv-" + tag + "-" + std::to_string(split));

      FoldResult r;
      r.split = split;
      r.task = task;
      r.model = spec.dir_name();
      FoldOutcome outcome;
      if (spec.kind == ModelSpec::Kind::kText) {
        const auto& table = inputs.text_tables.at(spec.text);
        outcome = fit_predict_unimodal(block_for(table, td.instances, train, test), fold,
                                       selection, &cell_audit);
        r.dim = table.dim;
      } else if (spec.kind == ModelSpec::Kind::kGraph) {
        const auto& table = graph_tables.at(spec.graph).for_split(split);
        outcome = fit_predict_unimodal(block_for(table, td.instances, train, test), fold,
                                       selection, &cell_audit);
        r.dim = table.dim;
      } else {
        const auto& text = inputs.text_tables.at(spec.text);
        const auto& graph = graph_tables.at(spec.graph).for_split(split);
        outcome = fit_predict_fusion(spec.strategy, block_for(text, td.instances, train, test),
                                     block_for(graph, td.instances, train, test), fold, selection,
                                     &cell_audit);
        r.dim = text.dim + graph.dim;
      }
      std::vector<std::string> truth;
      for (size_t k = 0; k < test.size(); ++k) {
        r.predictions[td.instances[test[k]].message_id] = outcome.predictions[k];
        truth.push_back(td.instances[test[k]].label);
      }
      r.weighted_f1 = weighted_f1(truth, outcome.predictions);
      r.input_dim = static_cast<int>(outcome.input_dim);
      r.config = outcome.config.to_string();
      r.converged = outcome.converged;
      if (audit) audit->merge(cell_audit);
      cells[cell] = std::move(r);
    });
    for (auto& c : cells) results.push_back(std::move(c));
    if (prepared) prepared->push_back(std::move(td));
  }
  return results;
}

}  // namespace asb
