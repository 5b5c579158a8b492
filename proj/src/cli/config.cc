#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

#include "asb/cli.h"
#include "asb/error.h"
#include "asb/rng.h"

namespace asb {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw UsageError("config " + where + ": " + what);
}

void check_keys(const YAML::Node& node, const std::string& where,
                const std::set<std::string>& allowed) {
  if (!node.IsMap()) bad(where, "expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) bad(where, "unknown key \"" + key + "\"");
  }
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& where) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    bad(where, "invalid value \"" + YAML::Dump(node) + "\"");
  }
}

template <typename T>
void read(const YAML::Node& map, const char* key, T& out, const std::string& where) {
  if (map[key]) out = scalar<T>(map[key], where + "." + key);
}

fs::path resolve(const fs::path& origin, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : origin / path;
}

void read_method_params(GraphEmbeddingConfig& cfg, const YAML::Node& node, const std::string& where) {
  const GraphMethod m = cfg.method;
  std::set<std::string> allowed{"dim"};
  switch (m) {
    case GraphMethod::kNode2Vec:
    case GraphMethod::kWalklets:
      allowed.insert({"walks_per_node", "walk_length", "window", "negatives", "epochs", "p", "q",
                      "learning_rate", "walklets_scales"});
      break;
    case GraphMethod::kGraphWave:
      allowed.insert({"points", "t_max", "eta_small_scale", "eta_large_scale"});
      break;
    case GraphMethod::kFgsd:
      allowed.insert({"bin_width"});
      break;
    case GraphMethod::kSg2v:
    case GraphMethod::kWdSg2v:
      allowed.insert({"wl_iterations", "epochs", "infer_epochs", "negatives", "learning_rate"});
      break;
    case GraphMethod::kSgcn:
    case GraphMethod::kWdSgcn:
      allowed.insert({"epochs", "learning_rate", "max_pairs_per_graph"});
      break;
    case GraphMethod::kNgnn:
      allowed.insert({"epochs", "learning_rate"});
      break;
  }
  check_keys(node, where, allowed);
  read(node, "dim", cfg.dim, where);
  switch (m) {
    case GraphMethod::kNode2Vec:
    case GraphMethod::kWalklets:
      read(node, "walks_per_node", cfg.walk.walks_per_node, where);
      read(node, "walk_length", cfg.walk.walk_length, where);
      read(node, "window", cfg.walk.window, where);
      read(node, "negatives", cfg.walk.negatives, where);
      read(node, "epochs", cfg.walk.epochs, where);
      read(node, "p", cfg.walk.p, where);
      read(node, "q", cfg.walk.q, where);
      read(node, "learning_rate", cfg.walk.learning_rate, where);
      read(node, "walklets_scales", cfg.walk.walklets_scales, where);
      break;
    case GraphMethod::kGraphWave:
      read(node, "points", cfg.graphwave.points, where);
      read(node, "t_max", cfg.graphwave.t_max, where);
      read(node, "eta_small_scale", cfg.graphwave.eta_small_scale, where);
      read(node, "eta_large_scale", cfg.graphwave.eta_large_scale, where);
      break;
    case GraphMethod::kFgsd:
      read(node, "bin_width", cfg.fgsd.bin_width, where);
      break;
    case GraphMethod::kSg2v:
    case GraphMethod::kWdSg2v:
      read(node, "wl_iterations", cfg.sg2v.wl_iterations, where);
      read(node, "epochs", cfg.sg2v.epochs, where);
      read(node, "infer_epochs", cfg.sg2v.infer_epochs, where);
      read(node, "negatives", cfg.sg2v.negatives, where);
      read(node, "learning_rate", cfg.sg2v.learning_rate, where);
      break;
    case GraphMethod::kSgcn:
    case GraphMethod::kWdSgcn:
      read(node, "epochs", cfg.sgcn.epochs, where);
      read(node, "learning_rate", cfg.sgcn.learning_rate, where);
      read(node, "max_pairs_per_graph", cfg.sgcn.max_pairs_per_graph, where);
      break;
    case GraphMethod::kNgnn:
      read(node, "epochs", cfg.ngnn.epochs, where);
      read(node, "learning_rate", cfg.ngnn.learning_rate, where);
      break;
  }
  try {
    cfg.validate();
  } catch (const UsageError& e) {
    bad(where, e.what());
  }
}

ProviderConfig read_provider(const YAML::Node& node, const std::string& where) {
  check_keys(node, where,
             {"endpoint", "model", "token_env", "batch_size", "timeout_ms", "max_attempts",
              "backoff_ms", "max_in_flight", "pooling", "expected_dim"});
  ProviderConfig p;
  read(node, "endpoint", p.endpoint, where);
  read(node, "model", p.model, where);
  read(node, "token_env", p.token_env, where);
  read(node, "batch_size", p.batch_size, where);
  read(node, "max_attempts", p.max_attempts, where);
  read(node, "max_in_flight", p.max_in_flight, where);
  read(node, "pooling", p.pooling, where);
  if (node["timeout_ms"]) p.timeout = std::chrono::milliseconds(scalar<long>(node["timeout_ms"], where));
  if (node["backoff_ms"]) p.backoff = std::chrono::milliseconds(scalar<long>(node["backoff_ms"], where));
  if (node["expected_dim"]) p.expected_dim = scalar<int>(node["expected_dim"], where);
  try {
    p.validate();
  } catch (const UsageError& e) {
    bad(where, e.what());
  }
  return p;
}

template <typename T, typename Fn>
std::vector<T> read_list(const YAML::Node& node, const std::string& where, Fn convert) {
  if (!node.IsSequence()) bad(where, "expected a list");
  std::vector<T> out;
  for (const auto& item : node) {
    const auto text = scalar<std::string>(item, where);
    try {
      out.push_back(convert(text));
    } catch (const std::invalid_argument&) {
      bad(where, "invalid value \"" + text + "\"");
    } catch (const std::out_of_range&) {
      bad(where, "value out of range \"" + text + "\"");
    }
  }
  return out;
}

}  // namespace

void apply_seed(RunConfig& config, uint64_t seed) {
  config.seed = seed;
  for (auto& [method, cfg] : config.graph_configs) {
    cfg.seed = derive_seed(seed, "graph-" + std::string(method_name(method)));
  }
}

RunConfig parse_run_config(const std::string& yaml, const fs::path& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml);
  } catch (const YAML::Exception& e) {
    throw UsageError("config " + origin.string() + ": " + e.what());
  }
  RunConfig rc;
  rc.raw = yaml;
  if (!root || root.IsNull()) bad("root", "empty config");
  check_keys(root, "root",
             {"run_id", "seed", "output", "corpus", "graph", "tasks", "splits", "text_tables",
              "embeddings", "models", "grid"});
  const fs::path base = origin.has_parent_path() ? origin.parent_path() : fs::path(".");

  read(root, "run_id", rc.run_id, "root");
  if (rc.run_id.empty()) rc.run_id = origin.stem().string();
  if (rc.run_id.empty()) rc.run_id = "run";
  read(root, "seed", rc.seed, "root");
  if (root["output"]) rc.output = resolve(base, scalar<std::string>(root["output"], "output"));

  if (!root["corpus"]) bad("root", "missing \"corpus\" section");
  {
    const auto c = root["corpus"];
    check_keys(c, "corpus", {"path", "synthetic"});
    if (c["path"]) rc.corpus_path = resolve(base, scalar<std::string>(c["path"], "corpus.path"));
    if (c["synthetic"]) {
      const auto s = c["synthetic"];
      check_keys(s, "corpus.synthetic",
                 {"conversations", "messages_per_conversation", "victims", "victim_supports",
                  "bullies", "bully_supports", "conciliators", "hostility"});
      SyntheticSpec spec;
      read(s, "conversations", spec.conversations, "corpus.synthetic");
      read(s, "messages_per_conversation", spec.messages_per_conversation, "corpus.synthetic");
      read(s, "victims", spec.victims, "corpus.synthetic");
      read(s, "victim_supports", spec.victim_supports, "corpus.synthetic");
      read(s, "bullies", spec.bullies, "corpus.synthetic");
      read(s, "bully_supports", spec.bully_supports, "corpus.synthetic");
      read(s, "conciliators", spec.conciliators, "corpus.synthetic");
      read(s, "hostility", spec.hostility, "corpus.synthetic");
      rc.synthetic = spec;
    }
    if (rc.corpus_path.empty() == !rc.synthetic.has_value()) {
      bad("corpus", "set exactly one of \"path\" or \"synthetic\"");
    }
  }

  if (root["graph"]) {
    const auto g = root["graph"];
    check_keys(g, "graph", {"context_window", "following", "recipient_window", "neutral_as_positive"});
    read(g, "context_window", rc.extraction.context_window, "graph");
    read(g, "following", rc.extraction.following, "graph");
    read(g, "recipient_window", rc.extraction.recipient_window, "graph");
    read(g, "neutral_as_positive", rc.extraction.neutral_as_positive, "graph");
    try {
      rc.extraction.validate();
    } catch (const UsageError& e) {
      bad("graph", e.what());
    }
  }

  if (root["tasks"]) {
    rc.tasks = read_list<Task>(root["tasks"], "tasks", [](const std::string& s) { return parse_task(s); });
  }

  if (root["splits"]) {
    const auto s = root["splits"];
    check_keys(s, "splits", {"count", "train_fraction", "undersample"});
    read(s, "count", rc.n_splits, "splits");
    read(s, "train_fraction", rc.train_fraction, "splits");
    read(s, "undersample", rc.undersample, "splits");
  }

  if (root["text_tables"]) {
    const auto t = root["text_tables"];
    if (!t.IsMap()) bad("text_tables", "expected a mapping");
    for (const auto& kv : t) {
      TextSource src;
      src.name = kv.first.as<std::string>();
      const std::string where = "text_tables." + src.name;
      if (kv.second.IsScalar()) {
        src.path = resolve(base, scalar<std::string>(kv.second, where));
      } else {
        check_keys(kv.second, where, {"path", "noise_dim", "provider"});
        if (kv.second["path"]) src.path = resolve(base, scalar<std::string>(kv.second["path"], where));
        read(kv.second, "noise_dim", src.noise_dim, where);
        if (kv.second["provider"]) src.provider = read_provider(kv.second["provider"], where + ".provider");
        const int sources = (!src.path.empty()) + (src.noise_dim > 0) + src.provider.has_value();
        if (sources != 1) bad(where, "set exactly one of path, noise_dim, provider");
      }
      rc.text_sources.push_back(std::move(src));
    }
  }

  if (root["models"]) {
    rc.models = read_list<ModelSpec>(root["models"], "models",
                                     [](const std::string& s) { return ModelSpec::parse(s); });
  }
  if (rc.models.empty()) bad("models", "no models configured");
  for (const auto& m : rc.models) {
    if (m.kind == ModelSpec::Kind::kGraph) {
      rc.graph_configs.emplace(m.graph, GraphEmbeddingConfig::defaults(m.graph));
    }
    if (m.kind == ModelSpec::Kind::kFusion) {
      rc.graph_configs.emplace(m.graph, GraphEmbeddingConfig::defaults(m.graph));
    }
    if (m.kind != ModelSpec::Kind::kGraph) {
      bool known = false;
      for (const auto& s : rc.text_sources) known = known || s.name == m.text;
      if (!known) bad("models", "model \"" + m.to_string() + "\" uses undeclared text table \"" + m.text + "\"");
    }
  }

  if (root["embeddings"]) {
    const auto e = root["embeddings"];
    if (!e.IsMap()) bad("embeddings", "expected a mapping");
    for (const auto& kv : e) {
      const std::string name = kv.first.as<std::string>();
      const GraphMethod m = parse_method(name);
      auto it = rc.graph_configs.find(m);
      if (it == rc.graph_configs.end()) {
        it = rc.graph_configs.emplace(m, GraphEmbeddingConfig::defaults(m)).first;
      }
      read_method_params(it->second, kv.second, "embeddings." + name);
    }
  }

  if (root["grid"]) {
    const auto g = root["grid"];
    if (g.IsScalar()) {
      if (scalar<std::string>(g, "grid") != "full") bad("grid", "expected \"full\" or a mapping");
    } else {
      check_keys(g, "grid", {"kernels", "C", "gamma", "degree", "max_iterations", "folds"});
      SvmGrid grid = SvmGrid::full();
      if (g["kernels"]) {
        grid.kernels = read_list<Kernel>(g["kernels"], "grid.kernels",
                                         [](const std::string& s) { return parse_kernel(s); });
      }
      if (g["C"]) {
        grid.C = read_list<double>(g["C"], "grid.C", [](const std::string& s) { return std::stod(s); });
      }
      if (g["gamma"]) {
        grid.gamma = read_list<Gamma>(g["gamma"], "grid.gamma",
                                      [](const std::string& s) { return Gamma::parse(s); });
      }
      if (g["degree"]) {
        grid.degree = read_list<int>(g["degree"], "grid.degree", [](const std::string& s) { return std::stoi(s); });
      }
      if (g["max_iterations"]) {
        grid.max_iterations = read_list<int>(g["max_iterations"], "grid.max_iterations",
                                             [](const std::string& s) { return std::stoi(s); });
      }
      read(g, "folds", rc.cv_folds, "grid");
      try {
        (void)grid.configs();
      } catch (const std::exception& ex) {
        bad("grid", ex.what());
      }
      rc.grid = grid;
    }
  }
  apply_seed(rc, rc.seed);
  rc.config_path = origin;
  return rc;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path);
}

Corpus load_configured_corpus(const RunConfig& config) {
  if (config.synthetic) return generate_synthetic_corpus(*config.synthetic, derive_seed(config.seed, "corpus"));
  return load_corpus(config.corpus_path);
}

EmbeddingTable noise_table(const Corpus& corpus, const std::string& name, int dim, uint64_t seed) {
  if (dim < 1) throw UsageError("noise table dim must be positive");
  EmbeddingTable t;
  t.model_name = name;
  t.dim = dim;
  t.pooling = "mean";
  t.metadata["source"] = "noise";
  Rng rng(derive_seed(seed, "noise-" + name));
  for (const Message* m : corpus.all_messages()) {
    std::vector<double> row(static_cast<size_t>(dim));
    for (auto& x : row) x = rng.normal();
    t.rows[m->message_id] = std::move(row);
  }
  return t;
}

std::map<std::string, EmbeddingTable> load_text_tables(const RunConfig& config, const Corpus& corpus,
                                                       const fs::path& cache_dir) {
  std::map<std::string, EmbeddingTable> out;
  for (const auto& src : config.text_sources) {
    if (src.noise_dim > 0) {
      out[src.name] = noise_table(corpus, src.name, src.noise_dim, config.seed);
    } else if (src.provider) {
      ProviderConfig p = *src.provider;
      if (p.cache_dir.empty()) p.cache_dir = cache_dir;
      std::vector<Message> messages;
      for (const Message* m : corpus.all_messages()) messages.push_back(*m);
      out[src.name] = fetch_from_provider(messages, p);
    } else {
      out[src.name] = load_table(src.path);
    }
  }
  return out;
}

}  // namespace asb
