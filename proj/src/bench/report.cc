#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "asb/bench.h"
#include "asb/error.h"

namespace asb {

namespace fs = std::filesystem;

// ---- prediction files ----

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line, const fs::path& path, size_t lineno) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) {
    throw DataError(path.string() + ":" + std::to_string(lineno) + ": unterminated quote");
  }
  return fields;
}

}  // namespace

void write_predictions(const fs::path& run_dir, const std::vector<FoldResult>& results,
                       const std::map<Task, std::vector<TaskInstance>>& instances) {
  std::map<Task, std::map<std::string, std::string>> truth;
  for (const auto& [task, list] : instances) {
    for (const auto& inst : list) truth[task][inst.message_id] = inst.label;
  }
  for (const auto& r : results) {
    const fs::path dir = run_dir / std::string(to_string(r.task)) / r.model;
    fs::create_directories(dir);
    std::ofstream out(dir / (std::to_string(r.split) + ".csv"), std::ios::binary);
    if (!out) throw DataError("cannot write predictions under " + dir.string());
    out << "message_id,true_label,predicted_label\n";
    const auto& labels = truth[r.task];
    for (const auto& [id, pred] : r.predictions) {
      auto it = labels.find(id);
      if (it == labels.end()) {
        throw DataError("prediction for unknown instance " + id);
      }
      out << csv_field(id) << ',' << csv_field(it->second) << ',' << csv_field(pred) << '\n';
    }
  }
}

std::vector<StoredFold> load_predictions(const fs::path& run_dir) {
  if (!fs::is_directory(run_dir)) {
    throw UsageError("prediction directory " + run_dir.string() + " does not exist");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(run_dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
    const fs::path rel = fs::relative(entry.path(), run_dir);
    if (std::distance(rel.begin(), rel.end()) != 3) continue;  // task/model/split.csv
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<StoredFold> out;
  for (const auto& path : files) {
    const fs::path rel = fs::relative(path, run_dir);
    auto part = rel.begin();
    StoredFold fold;
    try {
      fold.task = parse_task((part++)->string());
    } catch (const UsageError&) {
      continue;  // not a prediction tree entry
    }
    fold.model = (part++)->string();
    try {
      size_t used = 0;
      const std::string stem = path.stem().string();
      fold.split = std::stoi(stem, &used);
      if (used != stem.size()) continue;
    } catch (const std::exception&) {
      continue;
    }
    std::ifstream in(path, std::ios::binary);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (lineno == 1) {
        if (line != "message_id,true_label,predicted_label") {
          throw DataError(path.string() + ": unexpected header");
        }
        continue;
      }
      if (line.empty()) continue;
      const auto f = split_csv_line(line, path, lineno);
      if (f.size() != 3) {
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected 3 fields");
      }
      fold.rows.push_back({f[0], f[1], f[2]});
    }
    out.push_back(std::move(fold));
  }
  return out;
}

namespace {
constexpr const char* kFoldHeader = "task,model,split,weighted_f1,dim,input_dim,config,converged";
}  // namespace

void write_fold_summary(const fs::path& file, const std::vector<FoldResult>& results) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw DataError("cannot write " + file.string());
  out << kFoldHeader << '\n';
  for (const auto& r : results) {
    out << to_string(r.task) << ',' << csv_field(r.model) << ',' << r.split << ','
        << format_double(r.weighted_f1) << ',' << r.dim << ',' << r.input_dim << ','
        << csv_field(r.config) << ',' << (r.converged ? 1 : 0) << '\n';
  }
}

std::vector<FoldResult> load_fold_summary(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw UsageError("fold summary " + file.string() + " does not exist");
  std::vector<FoldResult> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1) {
      if (line != kFoldHeader) throw DataError(file.string() + ": unexpected header");
      continue;
    }
    if (line.empty()) continue;
    const auto f = split_csv_line(line, file, lineno);
    if (f.size() != 8) throw DataError(file.string() + ":" + std::to_string(lineno) + ": expected 8 fields");
    FoldResult r;
    try {
      r.task = parse_task(f[0]);
      r.model = f[1];
      r.split = std::stoi(f[2]);
      r.weighted_f1 = std::stod(f[3]);
      r.dim = std::stoi(f[4]);
      r.input_dim = std::stoi(f[5]);
      r.config = f[6];
      r.converged = f[7] == "1";
    } catch (const std::exception& e) {
      throw DataError(file.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

// ---- error analysis ----

double ErrorCell::percentage() const {
  return support == 0 ? 0.0 : 100.0 * static_cast<double>(misclassified) / static_cast<double>(support);
}

size_t ErrorBreakdown::total_misclassified() const {
  size_t n = 0;
  for (const auto& c : cells) n += c.misclassified;
  return n;
}

namespace {

struct Tally {
  std::vector<std::pair<Task, std::string>> order;
  std::map<std::pair<Task, std::string>, std::map<std::string, std::pair<size_t, size_t>>> counts;

  void add(Task task, const std::string& model, const std::string& truth, const std::string& pred) {
    const auto key = std::make_pair(task, model);
    if (!counts.count(key)) order.push_back(key);
    auto& c = counts[key][truth];
    c.second++;
    if (truth != pred) c.first++;
  }

  ErrorBreakdown finish() const {
    ErrorBreakdown b;
    std::vector<std::pair<Task, std::string>> keys = order;
    std::stable_sort(keys.begin(), keys.end(),
                     [](const auto& a, const auto& c) { return a.first < c.first; });
    for (const auto& key : keys) {
      const auto& per_label = counts.at(key);
      std::vector<std::string> labels = task_labels(key.first);
      for (const auto& [label, c] : per_label) {
        if (std::find(labels.begin(), labels.end(), label) == labels.end()) labels.push_back(label);
      }
      for (const auto& label : labels) {
        ErrorCell cell;
        cell.task = key.first;
        cell.model = key.second;
        cell.label = label;
        auto it = per_label.find(label);
        if (it != per_label.end()) {
          cell.misclassified = it->second.first;
          cell.support = it->second.second;
        }
        b.cells.push_back(cell);
      }
    }
    return b;
  }
};

}  // namespace

ErrorBreakdown aggregate_errors(const std::vector<FoldResult>& results,
                                const std::vector<TaskInstance>& instances) {
  std::map<std::pair<Task, std::string>, std::string> truth;
  for (const auto& inst : instances) truth[{inst.task, inst.message_id}] = inst.label;
  Tally tally;
  for (const auto& r : results) {
    for (const auto& [id, pred] : r.predictions) {
      auto it = truth.find({r.task, id});
      if (it == truth.end()) throw DataError("aggregate_errors: unknown instance " + id);
      tally.add(r.task, r.model, it->second, pred);
    }
  }
  return tally.finish();
}

ErrorBreakdown aggregate_errors(const std::vector<StoredFold>& folds) {
  Tally tally;
  for (const auto& f : folds) {
    for (const auto& row : f.rows) tally.add(f.task, f.model, row.true_label, row.predicted_label);
  }
  return tally.finish();
}

// ---- rendering ----

ReportFormat parse_format(std::string_view s) {
  if (s == "md" || s == "markdown") return ReportFormat::kMarkdown;
  if (s == "csv") return ReportFormat::kCsv;
  throw UsageError("unknown report format \"" + std::string(s) + "\" (expected md or csv)");
}

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string format_score(const MeanStd& f1) { return fixed(f1.mean, 3) + "±" + fixed(f1.std, 2); }

std::optional<int> published_dimension(const ModelSpec& spec) {
  static const std::map<std::string, int> kUnimodal = {
      {"gemini004", 1024}, {"camembert", 768}, {"camemberta", 768}, {"gemini001", 768},
      {"wd-sgcn", 128},    {"fgsd", 200},      {"walklets", 32},    {"wd-sg2v", 128},
      {"ngnn", 64},        {"sg2v", 128},      {"node2vec", 128},   {"graphwave", 200},
  };
  static const std::map<std::string, int> kFusion = {
      {"early-gemini004+graphwave", 1152}, {"early-mbert+sg2v", 896},
      {"early-gemini004+fgsd", 776},       {"late-gemini004+wd-sg2v", 1152},
      {"late-gemini001+walklets", 1032},   {"late-mbert+wd-sgcn", 776},
      {"hybrid-mbert+ngnn", 1032},         {"hybrid-gemini004+node2vec", 896},
      {"hybrid-camemberta+wd-sgcn", 776},
  };
  const auto& table = spec.kind == ModelSpec::Kind::kFusion ? kFusion : kUnimodal;
  auto it = table.find(spec.dir_name());
  if (it == table.end()) return std::nullopt;
  return it->second;
}

std::string render_report(const std::vector<ModelAggregate>& aggregates,
                          const ReportContext& context, ReportFormat format) {
  if (aggregates.empty()) throw UsageError("render_report: nothing to report");
  std::set<Task> task_set;
  for (const auto& a : aggregates) task_set.insert(a.task);
  const std::vector<Task> tasks(task_set.begin(), task_set.end());
  const auto find = [&](Task task, const std::string& model) -> const ModelAggregate* {
    for (const auto& a : aggregates) {
      if (a.task == task && a.model == model) return &a;
    }
    return nullptr;
  };

  std::ostringstream os;
  if (format == ReportFormat::kCsv) {
    os << "task,group,strategy,model,dim,mean_wf1,std_wf1,per_split\n";
    for (const auto& a : aggregates) {
      os << to_string(a.task) << ',' << a.group << ',' << a.strategy << ',' << a.display << ','
         << a.dim << ',' << format_double(a.f1.mean) << ',' << format_double(a.f1.std) << ',';
      for (size_t i = 0; i < a.per_split.size(); ++i) {
        os << (i ? ";" : "") << format_double(a.per_split[i]);
      }
      os << '\n';
    }
    return os.str();
  }

  // Best per task at the printed precision; ties are all bolded.
  std::map<Task, std::string> best;
  for (Task t : tasks) {
    double top = -1.0;
    for (const auto& a : aggregates) {
      if (a.task == t) top = std::max(top, std::stod(fixed(a.f1.mean, 3)));
    }
    best[t] = fixed(top, 3);
  }

  std::vector<ModelSpec> models = context.models;
  if (models.empty()) {
    std::set<std::string> seen;
    for (const auto& a : aggregates) {
      if (seen.insert(a.model).second) models.push_back(ModelSpec::parse(
          a.strategy.empty() ? a.display : a.strategy + ":" + a.display));
    }
  }

  os << "# Benchmark report\n\n";
  os << "Weighted F1, mean ± std over splits. Bold marks the best score per task.\n\n";
  os << "| Embedding Type | Dimension |";
  for (Task t : tasks) os << ' ' << upper(to_string(t)) << " |";
  os << "\n| --- | ---: |";
  for (size_t i = 0; i < tasks.size(); ++i) os << " :---: |";
  os << '\n';

  std::vector<std::string> footnotes;
  const auto emit_row = [&](const ModelSpec& spec) {
    const std::string model = spec.dir_name();
    int dim = 0;
    for (Task t : tasks) {
      if (const auto* a = find(t, model)) dim = a->dim;
    }
    std::string dim_cell = std::to_string(dim);
    if (const auto published = published_dimension(spec); published && *published != dim) {
      dim_cell += "†";
      footnotes.push_back(spec.name() + (spec.kind == ModelSpec::Kind::kFusion
                                             ? " (" + spec.strategy_name() + ")"
                                             : std::string()) +
                          ": published " + std::to_string(*published) + ", actual " +
                          std::to_string(dim));
    }
    os << "| " << spec.name() << " | " << dim_cell << " |";
    for (Task t : tasks) {
      const auto* a = find(t, model);
      if (!a) {
        os << " - |";
        continue;
      }
      const std::string cell = format_score(a->f1);
      os << ' ' << (fixed(a->f1.mean, 3) == best[t] ? "**" + cell + "**" : cell) << " |";
    }
    os << '\n';
  };
  const auto padding = [&] {
    std::string s;
    for (size_t i = 0; i < tasks.size() + 1; ++i) s += " |";
    return s;
  };
  const auto section = [&](const std::string& title, ModelSpec::Kind kind) {
    bool any = false;
    for (const auto& m : models) any = any || m.kind == kind;
    if (!any) return;
    os << "| ***" << title << "*** |" << padding() << '\n';
    if (kind != ModelSpec::Kind::kFusion) {
      for (const auto& m : models) {
        if (m.kind == kind) emit_row(m);
      }
      return;
    }
    for (FusionStrategy s : {FusionStrategy::kEarly, FusionStrategy::kLate, FusionStrategy::kHybrid}) {
      bool has = false;
      for (const auto& m : models) has = has || (m.kind == kind && m.strategy == s);
      if (!has) continue;
      std::string name(to_string(s));
      name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
      os << "| **" << name << " fusion** |" << padding() << '\n';
      for (const auto& m : models) {
        if (m.kind == kind && m.strategy == s) emit_row(m);
      }
    }
  };
  section("Lexical embedding", ModelSpec::Kind::kText);
  section("Graph embedding", ModelSpec::Kind::kGraph);
  section("Fusion embedding", ModelSpec::Kind::kFusion);

  if (!footnotes.empty()) {
    os << "\n† Dimension differs from the published results table:\n\n";
    for (const auto& f : footnotes) os << "- " << f << '\n';
  }
  os << "\n## Provenance\n\n";
  for (const auto& line : context.provenance) os << "- " << line << '\n';
  return os.str();
}

std::string render_errors(const ErrorBreakdown& breakdown, ReportFormat format) {
  std::ostringstream os;
  if (format == ReportFormat::kCsv) {
    os << "task,model,label,misclassified,support,percentage\n";
    for (const auto& c : breakdown.cells) {
      os << to_string(c.task) << ',' << c.model << ',' << c.label << ',' << c.misclassified << ','
         << c.support << ',' << fixed(c.percentage(), 2) << '\n';
    }
    return os.str();
  }
  os << "# Misclassified instances per label\n\n";
  os << "Counts are summed over the test sets of every split; percentages use the summed "
        "per-label test support.\n";
  std::vector<Task> tasks;
  for (const auto& c : breakdown.cells) {
    if (std::find(tasks.begin(), tasks.end(), c.task) == tasks.end()) tasks.push_back(c.task);
  }
  for (Task t : tasks) {
    std::vector<std::string> models, labels;
    for (const auto& c : breakdown.cells) {
      if (c.task != t) continue;
      if (std::find(models.begin(), models.end(), c.model) == models.end()) models.push_back(c.model);
      if (std::find(labels.begin(), labels.end(), c.label) == labels.end()) labels.push_back(c.label);
    }
    os << "\n## " << upper(to_string(t)) << "\n\n| Label |";
    for (const auto& m : models) os << ' ' << m << " |";
    os << "\n| --- |";
    for (size_t i = 0; i < models.size(); ++i) os << " ---: |";
    os << '\n';
    for (const auto& label : labels) {
      os << "| " << label << " |";
      for (const auto& m : models) {
        for (const auto& c : breakdown.cells) {
          if (c.task == t && c.model == m && c.label == label) {
            os << ' ' << fixed(c.percentage(), 2) << "% (" << c.misclassified << ") |";
          }
        }
      }
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace asb
