#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "asb/bench.h"
#include "asb/error.h"

namespace asb {
namespace {

namespace fs = std::filesystem;

TEST(ModelSpec, ParseAndNames) {
  const auto f = ModelSpec::parse("late:mbert+wd-sgcn");
  EXPECT_EQ(f.kind, ModelSpec::Kind::kFusion);
  EXPECT_EQ(f.name(), "mbert+wd-sgcn");
  EXPECT_EQ(f.dir_name(), "late-mbert+wd-sgcn");
  EXPECT_EQ(f.group(), "fusion");
  EXPECT_EQ(ModelSpec::parse(f.to_string()).to_string(), f.to_string());
  EXPECT_EQ(ModelSpec::parse("fgsd").kind, ModelSpec::Kind::kGraph);
  EXPECT_EQ(ModelSpec::parse("camembert").kind, ModelSpec::Kind::kText);
  EXPECT_THROW(ModelSpec::parse("mbert+fgsd"), UsageError);
  EXPECT_THROW(ModelSpec::parse("late:mbert"), UsageError);
  EXPECT_THROW(ModelSpec::parse("late:mbert+deepwalk"), UsageError);
}

TEST(Report, ScoreFormatAndPublishedDims) {
  EXPECT_EQ(format_score({0.7181, 0.0199}), "0.718±0.02");
  EXPECT_EQ(format_score({0.5, 0.0}), "0.500±0.00");
  EXPECT_EQ(published_dimension(ModelSpec::parse("wd-sgcn")), 128);
  EXPECT_EQ(published_dimension(ModelSpec::parse("gemini004")), 1024);
  EXPECT_EQ(published_dimension(ModelSpec::parse("late:mbert+wd-sgcn")), 776);
  EXPECT_FALSE(published_dimension(ModelSpec::parse("noise")).has_value());
}

std::vector<FoldResult> fake_results() {
  std::vector<FoldResult> out;
  const char* models[] = {"mbert", "wd-sgcn", "late-mbert+wd-sgcn"};
  const double base[] = {0.70, 0.55, 0.70};
  const int dims[] = {768, 128, 896};
  for (int m = 0; m < 3; ++m) {
    for (int s = 0; s < 2; ++s) {
      FoldResult r;
      r.task = Task::kAbd;
      r.model = models[m];
      r.split = s;
      r.weighted_f1 = base[m] + (s ? 0.01 : -0.01);
      r.dim = dims[m];
      r.input_dim = dims[m];
      r.config = "linear C=1 max_iter=500";
      out.push_back(r);
    }
  }
  return out;
}

TEST(Report, MarkdownGroupsBoldTiesAndFootnotes) {
  const std::vector<ModelSpec> models{ModelSpec::parse("mbert"), ModelSpec::parse("wd-sgcn"),
                                      ModelSpec::parse("late:mbert+wd-sgcn")};
  const auto agg = aggregate_results(fake_results(), models);
  ASSERT_EQ(agg.size(), 3u);
  EXPECT_NEAR(agg[0].f1.mean, 0.70, 1e-12);
  EXPECT_NEAR(agg[0].f1.std, 0.01, 1e-12);
  const std::string md = render_report(agg, {models, {"seed: 1"}}, ReportFormat::kMarkdown);
  EXPECT_NE(md.find("| mbert | 768 | **0.700±0.01** |"), std::string::npos) << md;
  EXPECT_NE(md.find("| mbert+wd-sgcn | 896† | **0.700±0.01** |"), std::string::npos) << md;
  EXPECT_NE(md.find("| wd-sgcn | 128 | 0.550±0.01 |"), std::string::npos) << md;
  EXPECT_NE(md.find("Late fusion"), std::string::npos);
  EXPECT_NE(md.find("## Provenance"), std::string::npos);
  EXPECT_EQ(md.find("BBA"), std::string::npos);  // only tasks with results
  const std::string csv = render_report(agg, {models, {}}, ReportFormat::kCsv);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "task,group,strategy,model,dim,mean_wf1,std_wf1,per_split");
}

TEST(Errors, PublishedPercentageArithmetic) {
  // Five ABD test folds of non-abusive messages, 298 misclassified in total.
  std::vector<StoredFold> folds;
  const int support[] = {125, 125, 126, 126, 126};
  const int wrong[] = {60, 59, 60, 60, 59};
  for (int s = 0; s < 5; ++s) {
    StoredFold f;
    f.task = Task::kAbd;
    f.model = "camembert";
    f.split = s;
    for (int i = 0; i < support[s]; ++i) {
      f.rows.push_back({"m" + std::to_string(i), "non_abusive", i < wrong[s] ? "abusive" : "non_abusive"});
    }
    folds.push_back(f);
  }
  const auto b = aggregate_errors(folds);
  ASSERT_EQ(b.cells.size(), 2u);
  const auto& cell = b.cells[1];
  EXPECT_EQ(cell.label, "non_abusive");
  EXPECT_EQ(cell.misclassified, 298u);
  EXPECT_EQ(cell.support, 628u);
  EXPECT_NEAR(cell.percentage(), 47.45, 0.01);
  const std::string md = render_errors(b, ReportFormat::kMarkdown);
  EXPECT_NE(md.find("47.45% (298)"), std::string::npos) << md;
}

TEST(PredictionFiles, RoundTripAndFoldSummary) {
  const auto dir = fs::temp_directory_path() / "asb-predictions-test";
  fs::remove_all(dir);
  std::vector<FoldResult> results = fake_results();
  std::map<Task, std::vector<TaskInstance>> inst{{Task::kAbd, {{"a,1", Task::kAbd, "abusive"}, {"b", Task::kAbd, "non_abusive"}}}};
  for (auto& r : results) r.predictions = {{"a,1", "non_abusive"}, {"b", "non_abusive"}};
  write_predictions(dir, results, inst);
  std::ifstream in(dir / "abd" / "late-mbert+wd-sgcn" / "1.csv");
  std::stringstream text;
  text << in.rdbuf();
  EXPECT_EQ(text.str(), "message_id,true_label,predicted_label\n\"a,1\",abusive,non_abusive\nb,non_abusive,non_abusive\n");
  const auto stored = load_predictions(dir);
  ASSERT_EQ(stored.size(), 6u);
  EXPECT_EQ(stored[0].rows[0].message_id, "a,1");
  const auto errors = aggregate_errors(stored);
  EXPECT_EQ(errors.total_misclassified(), 6u);
  EXPECT_EQ(aggregate_errors(results, inst.at(Task::kAbd)).total_misclassified(), 6u);

  write_fold_summary(dir / "folds.csv", results);
  const auto back = load_fold_summary(dir / "folds.csv");
  ASSERT_EQ(back.size(), results.size());
  for (size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].weighted_f1, results[i].weighted_f1);
    EXPECT_EQ(back[i].model, results[i].model);
    EXPECT_EQ(back[i].config, results[i].config);
  }
  fs::remove_all(dir);
}

TEST(Benchmark, SyntheticRunIsDeterministicAndClean) {
  const Corpus corpus = generate_synthetic_corpus({2, 40, 1, 1, 1, 1, 1, 0.9}, 3);
  BenchmarkInputs in;
  in.corpus = &corpus;
  in.tasks = {Task::kAbd};
  in.models = {ModelSpec::parse("fgsd"), ModelSpec::parse("sgcn"), ModelSpec::parse("noise"),
               ModelSpec::parse("early:noise+fgsd")};
  EmbeddingTable t;
  t.model_name = "noise";
  t.dim = 2;
  t.pooling = "mean";
  Rng rng(1);
  for (const Message* m : corpus.all_messages()) t.rows[m->message_id] = {rng.normal(), rng.normal()};
  in.text_tables["noise"] = t;
  auto sgcn = GraphEmbeddingConfig::defaults(GraphMethod::kSgcn, 4);
  sgcn.sgcn.epochs = 2;
  in.graph_configs[GraphMethod::kSgcn] = sgcn;
  in.n_splits = 2;
  in.seed = 8;
  in.selection.grid.kernels = {Kernel::kLinear};
  in.selection.grid.C = {1};
  in.selection.grid.max_iterations = {500};
  in.selection.cv.folds = 2;
  LeakageAudit audit;
  const auto a = run_benchmark(in, &audit);
  in.jobs = 3;
  const auto b = run_benchmark(in);
  ASSERT_EQ(a.size(), 8u);
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].predictions, b[i].predictions);
    EXPECT_EQ(a[i].weighted_f1, b[i].weighted_f1);
  }
  EXPECT_EQ(a[6].dim, 2 + 200);
  EXPECT_EQ(audit.violations(), 0u);
  EXPECT_GT(audit.touches_by_stage().at("embedding-training"), 0u);
  in.text_tables.clear();
  EXPECT_THROW(run_benchmark(in), DataError);
}

}  // namespace
}  // namespace asb
