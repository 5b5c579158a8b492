#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <tuple>

#include <yaml-cpp/yaml.h>

#include "asb/cli.h"
#include "asb/error.h"
#include "asb/parallel.h"

namespace asb {

namespace fs = std::filesystem;

namespace {

struct Flags {
  std::string config;
  std::optional<uint64_t> seed;
  int jobs = default_jobs();
  std::string out;
  std::string format = "md";
  std::vector<std::string> tasks;
  std::string run_id;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "Run config (YAML)")->required();
  cmd->add_option("--seed", f.seed, "Overrides the config seed");
  cmd->add_option("--jobs", f.jobs, "Worker threads (default: all cores)")->check(CLI::PositiveNumber);
  cmd->add_option("--out", f.out, "Output directory (overrides config)");
  cmd->add_option("--format", f.format, "Report format")->check(CLI::IsMember({"md", "csv"}));
  cmd->add_option("--task", f.tasks, "Restrict to tasks")->check(CLI::IsMember({"abd", "bba", "bpi"}));
  cmd->add_option("--run-id", f.run_id, "Run directory name (default: config stem)");
}

struct Context {
  RunConfig config;
  fs::path out;
  fs::path run_dir;
  fs::path cache_dir;
  int jobs = 1;
  ReportFormat format = ReportFormat::kMarkdown;
  bool seed_given = false;
  bool tasks_given = false;
};

Context resolve(const Flags& f) {
  Context ctx;
  ctx.config = load_run_config(f.config);
  if (f.seed) apply_seed(ctx.config, *f.seed);
  if (!f.tasks.empty()) {
    std::vector<Task> tasks;
    for (const auto& t : f.tasks) tasks.push_back(parse_task(t));
    ctx.config.tasks = tasks;
  }
  if (!f.run_id.empty()) {
    if (f.run_id.find('/') != std::string::npos || f.run_id == "." || f.run_id == "..") {
      throw UsageError("--run-id must be a plain name, got \"" + f.run_id + "\"");
    }
    ctx.config.run_id = f.run_id;
  }
  ctx.out = !f.out.empty() ? fs::path(f.out) : !ctx.config.output.empty() ? ctx.config.output : fs::path("out");
  ctx.run_dir = ctx.out / "runs" / ctx.config.run_id;
  ctx.cache_dir = ctx.out / "cache";
  ctx.jobs = f.jobs;
  ctx.format = parse_format(f.format);
  ctx.seed_given = f.seed.has_value();
  ctx.tasks_given = !f.tasks.empty();
  return ctx;
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
}

// Config bytes plus the flags that changed its meaning; jobs and paths are
// left out because they do not affect results.
void record_config(const Context& ctx) {
  write_file(ctx.run_dir / "config.yaml", ctx.config.raw);
  std::ostringstream os;
  os << "seed: " << ctx.config.seed << "\ntasks: [";
  for (size_t i = 0; i < ctx.config.tasks.size(); ++i) {
    os << (i ? ", " : "") << to_string(ctx.config.tasks[i]);
  }
  os << "]\n";
  write_file(ctx.run_dir / "effective.yaml", os.str());
}

BenchmarkInputs make_inputs(const Context& ctx, const Corpus& corpus,
                            std::map<std::string, EmbeddingTable> tables) {
  const RunConfig& c = ctx.config;
  BenchmarkInputs in;
  in.corpus = &corpus;
  in.tasks = c.tasks;
  in.models = c.models;
  in.text_tables = std::move(tables);
  in.graph_configs = c.graph_configs;
  in.extraction = c.extraction;
  in.n_splits = c.n_splits;
  in.train_fraction = c.train_fraction;
  in.undersample = c.undersample;
  in.seed = c.seed;
  in.selection.grid = c.grid;
  in.selection.cv.folds = c.cv_folds;
  in.selection.cv.jobs = ctx.jobs;
  in.jobs = ctx.jobs;
  in.cache_dir = ctx.cache_dir;
  return in;
}

std::vector<std::string> provenance(const RunConfig& c) {
  std::vector<std::string> p;
  p.push_back("run_id: " + c.run_id);
  p.push_back("seed: " + std::to_string(c.seed));
  p.push_back("corpus: " + (c.synthetic ? std::string("synthetic") : c.corpus_path.filename().string()));
  std::string tasks;
  for (Task t : c.tasks) tasks += (tasks.empty() ? "" : ",") + std::string(to_string(t));
  p.push_back("tasks: " + tasks);
  p.push_back("splits: " + std::to_string(c.n_splits) + " x " + format_double(c.train_fraction) +
              " train" + (c.undersample ? ", undersampled" : ""));
  p.push_back("graph: context_window=" + std::to_string(c.extraction.context_window) +
              " following=" + std::to_string(c.extraction.following) +
              " recipient_window=" + std::to_string(c.extraction.recipient_window) +
              " neutral_as_positive=" + (c.extraction.neutral_as_positive ? "true" : "false"));
  p.push_back("classifier grid: " + std::to_string(c.grid.configs().size()) + " configs, " +
              std::to_string(c.cv_folds) + "-fold cv");
  for (const auto& s : c.text_sources) {
    std::string src = s.noise_dim > 0            ? "noise dim=" + std::to_string(s.noise_dim)
                      : s.provider.has_value()   ? "provider model=" + s.provider->model
                                                 : s.path.filename().string();
    p.push_back("text table " + s.name + ": " + src);
  }
  return p;
}

std::string render_audit(const LeakageAudit& audit) {
  std::ostringstream os;
  os << "touches " << audit.touches() << "\nviolations " << audit.violations() << "\n";
  const auto v = audit.violations_by_stage();
  for (const auto& [stage, n] : audit.touches_by_stage()) {
    auto it = v.find(stage);
    os << stage << " touches=" << n << " violations=" << (it == v.end() ? 0 : it->second) << "\n";
  }
  return os.str();
}

const char* extension(ReportFormat f) { return f == ReportFormat::kCsv ? "csv" : "md"; }

int cmd_ingest(const Context& ctx) {
  const Corpus corpus = load_configured_corpus(ctx.config);
  const auto tables = load_text_tables(ctx.config, corpus, ctx.cache_dir);
  std::ostringstream os;
  os << "conversations " << corpus.conversations().size() << "\n";
  os << "messages " << corpus.message_count() << "\n";
  os << "unknown_enum_values " << corpus.unknown_enum_count() << "\n";
  bool complete = true;
  for (Task task : ctx.config.tasks) {
    const auto instances = build_task_instances(corpus, task);
    std::map<std::string, size_t> counts;
    for (const auto& i : instances) ++counts[i.label];
    os << "task " << to_string(task) << " instances=" << instances.size();
    for (const auto& label : task_labels(task)) os << " " << label << "=" << counts[label];
    os << "\n";
    for (const auto& [name, table] : tables) {
      const auto cov = validate_coverage(table, instances);
      complete = complete && cov.complete();
      os << "  table " << name << " dim=" << table.dim << " coverage=" << format_double(cov.ratio())
         << " missing=" << cov.missing.size() << "\n";
    }
  }
  record_config(ctx);
  write_file(ctx.run_dir / "ingest.txt", os.str());
  std::cout << os.str();
  if (!complete) throw DataError("lexical tables do not cover every task instance");
  return 0;
}

int cmd_graphs(const Context& ctx) {
  const Corpus corpus = load_configured_corpus(ctx.config);
  BenchmarkInputs in = make_inputs(ctx, corpus, {});
  record_config(ctx);
  for (Task task : ctx.config.tasks) {
    const TaskData td = prepare_task(in, task);
    std::string lines;
    size_t nodes = 0, edges = 0, negative = 0;
    for (const auto& g : td.graphs) {
      lines += graph_to_json(g) + "\n";
      nodes += g.nodes.size();
      edges += g.edges.size();
      for (const auto& e : g.edges) negative += e.sign < 0;
    }
    write_file(ctx.run_dir / "graphs" / (std::string(to_string(task)) + ".jsonl"), lines);
    std::cout << to_string(task) << ": " << td.graphs.size() << " graphs, " << nodes << " nodes, "
              << edges << " edges (" << negative << " negative)\n";
  }
  return 0;
}

int cmd_embed(const Context& ctx) {
  const Corpus corpus = load_configured_corpus(ctx.config);
  BenchmarkInputs in = make_inputs(ctx, corpus, {});
  record_config(ctx);
  LeakageAudit audit;
  for (Task task : ctx.config.tasks) {
    const TaskData td = prepare_task(in, task);
    const std::string tag(to_string(task));
    for (const auto& [method, cfg] : ctx.config.graph_configs) {
      EmbedAllOptions opts;
      opts.cache_dir = ctx.cache_dir;
      opts.split_prefix = tag;
      opts.jobs = ctx.jobs;
      opts.audit = &audit;
      const SplitTables st = embed_all(td.graphs, cfg, td.plan, td.instances, opts);
      const fs::path dir = ctx.run_dir / "embeddings" / tag;
      fs::create_directories(dir);
      const std::string name(method_name(method));
      if (st.shared) {
        write_table_file(st.tables.front(), dir / (name + ".emb"));
      } else {
        for (size_t s = 0; s < st.tables.size(); ++s) {
          write_table_file(st.tables[s], dir / (name + "-split" + std::to_string(s) + ".emb"));
        }
      }
      std::cout << tag << " " << name << ": dim " << st.tables.front().dim << ", "
                << (st.shared ? "shared" : std::to_string(st.tables.size()) + " per-split tables") << "\n";
    }
  }
  write_file(ctx.run_dir / "audit.txt", render_audit(audit));
  if (audit.violations() > 0) throw DataError("leakage audit recorded test-fold touches");
  return 0;
}

int cmd_run(const Context& ctx) {
  const Corpus corpus = load_configured_corpus(ctx.config);
  auto tables = load_text_tables(ctx.config, corpus, ctx.cache_dir);
  BenchmarkInputs in = make_inputs(ctx, corpus, std::move(tables));
  record_config(ctx);

  LeakageAudit audit;
  std::vector<TaskData> prepared;
  const auto results = run_benchmark(in, &audit, &prepared);

  std::map<Task, std::vector<TaskInstance>> instances;
  std::vector<TaskInstance> all;
  for (const auto& td : prepared) {
    instances[td.task] = td.instances;
    all.insert(all.end(), td.instances.begin(), td.instances.end());
  }
  write_predictions(ctx.run_dir, results, instances);
  write_fold_summary(ctx.run_dir / "folds.csv", results);

  const ReportContext rc{ctx.config.models, provenance(ctx.config)};
  const auto aggregates = aggregate_results(results, ctx.config.models);
  write_file(ctx.run_dir / "report.md", render_report(aggregates, rc, ReportFormat::kMarkdown));
  write_file(ctx.run_dir / "report.csv", render_report(aggregates, rc, ReportFormat::kCsv));
  const auto errors = aggregate_errors(results, all);
  write_file(ctx.run_dir / "errors.md", render_errors(errors, ReportFormat::kMarkdown));
  write_file(ctx.run_dir / "errors.csv", render_errors(errors, ReportFormat::kCsv));
  write_file(ctx.run_dir / "audit.txt", render_audit(audit));

  std::cout << render_report(aggregates, rc, ctx.format);
  if (audit.violations() > 0) throw DataError("leakage audit recorded test-fold touches");
  return 0;
}

// report and errors describe the run as it was executed: the seed and tasks
// recorded by `run` apply unless given again on the command line.
Context adopt_recorded(Context ctx) {
  const fs::path file = ctx.run_dir / "effective.yaml";
  if (!fs::exists(file)) return ctx;
  YAML::Node rec;
  try {
    rec = YAML::LoadFile(file.string());
  } catch (const YAML::Exception& e) {
    throw DataError(file.string() + ": " + e.what());
  }
  if (!ctx.seed_given && rec["seed"]) apply_seed(ctx.config, rec["seed"].as<uint64_t>());
  if (!ctx.tasks_given && rec["tasks"]) {
    std::vector<Task> tasks;
    for (const auto& t : rec["tasks"]) tasks.push_back(parse_task(t.as<std::string>()));
    ctx.config.tasks = tasks;
  }
  return ctx;
}

int cmd_report(const Context& given) {
  const Context ctx = adopt_recorded(given);
  const auto results = load_fold_summary(ctx.run_dir / "folds.csv");
  std::set<Task> wanted(ctx.config.tasks.begin(), ctx.config.tasks.end());
  std::vector<FoldResult> kept;
  for (const auto& r : results) {
    if (wanted.count(r.task)) kept.push_back(r);
  }
  const ReportContext rc{ctx.config.models, provenance(ctx.config)};
  const std::string text = render_report(aggregate_results(kept, ctx.config.models), rc, ctx.format);
  write_file(ctx.run_dir / (std::string("report.") + extension(ctx.format)), text);
  std::cout << text;
  return 0;
}

int cmd_errors(const Context& given) {
  const Context ctx = adopt_recorded(given);
  std::set<Task> wanted(ctx.config.tasks.begin(), ctx.config.tasks.end());
  std::vector<StoredFold> folds;
  for (auto& f : load_predictions(ctx.run_dir)) {
    if (wanted.count(f.task)) folds.push_back(std::move(f));
  }
  if (folds.empty()) throw UsageError("no prediction files under " + ctx.run_dir.string());
  // Same column order as the tables written by `run`: config model order.
  std::map<std::string, size_t> rank;
  for (const auto& m : ctx.config.models) rank.emplace(m.dir_name(), rank.size());
  auto rank_of = [&](const StoredFold& f) {
    auto it = rank.find(f.model);
    return it == rank.end() ? rank.size() : it->second;
  };
  std::stable_sort(folds.begin(), folds.end(), [&](const StoredFold& a, const StoredFold& b) {
    return std::make_tuple(a.task, rank_of(a), a.model, a.split) <
           std::make_tuple(b.task, rank_of(b), b.model, b.split);
  });
  const std::string text = render_errors(aggregate_errors(folds), ctx.format);
  write_file(ctx.run_dir / (std::string("errors.") + extension(ctx.format)), text);
  std::cout << text;
  return 0;
}

}  // namespace

int dispatch(int argc, char** argv) {
  CLI::App app{"Antisocial-behavior benchmark: graph extraction, embeddings, SVM evaluation", "asbbench"};
  app.require_subcommand(1);
  Flags flags;
  struct Sub {
    const char* name;
    const char* help;
    int (*fn)(const Context&);
  };
  const Sub subs[] = {
      {"ingest", "Load the corpus and lexical tables and check coverage", cmd_ingest},
      {"graphs", "Extract interaction graphs for every task instance", cmd_graphs},
      {"embed", "Compute graph embedding tables", cmd_embed},
      {"run", "Run the full benchmark and write the run directory", cmd_run},
      {"report", "Render the results table of a finished run", cmd_report},
      {"errors", "Render per-label misclassification counts of a finished run", cmd_errors},
  };
  std::map<const CLI::App*, int (*)(const Context&)> handlers;
  for (const auto& s : subs) {
    CLI::App* cmd = app.add_subcommand(s.name, s.help);
    add_flags(cmd, flags);
    handlers[cmd] = s.fn;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ErrorKind::kUsage);
  }
  try {
    for (const auto* cmd : app.get_subcommands()) {
      return handlers.at(cmd)(resolve(flags));
    }
    return static_cast<int>(ErrorKind::kUsage);
  } catch (const Error& e) {
    std::cerr << "asbbench: " << e.what() << "\n";
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    std::cerr << "asbbench: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::kData);
  }
}

}  // namespace asb
