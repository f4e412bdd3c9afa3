// Copyright 2026 The moocxfer Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// moocxfer command-line tool. Everything goes through the C interface.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "moocxfer/moocxfer.h"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Thrown to unwind with a library status.
struct Failure {
  mx_status status;
  std::string message;
};

void check(mx_status s) {
  if (s != MX_OK) throw Failure{s, mx_last_error()};
}

struct ConfigDel {
  void operator()(mx_config* p) const { mx_config_free(p); }
};
struct CorpusDel {
  void operator()(mx_corpus* p) const { mx_corpus_free(p); }
};
struct ModelDel {
  void operator()(mx_model* p) const { mx_model_free(p); }
};
struct ReportDel {
  void operator()(mx_report* p) const { mx_report_free(p); }
};
using Config = std::unique_ptr<mx_config, ConfigDel>;
using Corpus = std::unique_ptr<mx_corpus, CorpusDel>;
using Model = std::unique_ptr<mx_model, ModelDel>;
using Report = std::unique_ptr<mx_report, ReportDel>;

// Takes ownership of a library string.
std::string take(char* s) {
  std::string out = s ? s : "";
  mx_string_free(s);
  return out;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{MX_ERR_IO, "cannot read " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw Failure{MX_ERR_IO, "cannot write " + path};
}

// Writes to `path`, or stdout when it is empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text(path, text);
  }
}

struct Globals {
  std::optional<uint64_t> seed;
  std::string config;
  std::optional<int> jobs;
  bool verbose = false;
};

struct CorpusSource {
  std::string corpus;
  std::string scenario;
};

class Tool {
 public:
  explicit Tool(const Globals& g) : g_(g) {}

  mx_config* config() {
    if (!config_) {
      mx_config* c = nullptr;
      check(g_.config.empty() ? mx_config_new(&c) : mx_config_load(g_.config.c_str(), &c));
      config_.reset(c);
      if (g_.seed) set("seed", std::to_string(*g_.seed));
      if (g_.jobs) set("jobs", std::to_string(*g_.jobs));
    }
    return config_.get();
  }

  void set(const std::string& key, const std::string& value) {
    check(mx_config_set(config(), key.c_str(), value.c_str()));
  }

  json config_json() {
    char* s = nullptr;
    check(mx_config_json(config(), &s));
    return json::parse(take(s));
  }

  uint64_t seed() { return config_json().at("seed").get<uint64_t>(); }

  // Generates a scenario. Bundled scenarios take the run seed; scenario files
  // keep their own unless --seed was given.
  Corpus generate(const std::string& scenario) {
    const bool bundled = scenario == "small" || scenario == "medium";
    mx_corpus* c = nullptr;
    check(mx_corpus_generate(scenario.c_str(), bundled || g_.seed, seed(), &c));
    return Corpus(c);
  }

  // --corpus, else --scenario, else the config's corpus or scenario.
  Corpus corpus(const CorpusSource& src) {
    std::string dir = src.corpus;
    std::string scenario = src.scenario;
    if (dir.empty() && scenario.empty()) {
      const json j = config_json();
      dir = j.value("corpus", "");
      scenario = j.value("scenario", "small");
    }
    if (!dir.empty()) {
      mx_corpus* c = nullptr;
      check(mx_corpus_load(dir.c_str(), &c));
      return Corpus(c);
    }
    log("generating scenario " + scenario);
    return generate(scenario);
  }

  void log(const std::string& s) const {
    if (g_.verbose) std::cerr << "moocxfer: " << s << "\n";
  }

  bool verbose() const { return g_.verbose; }

 private:
  const Globals& g_;
  Config config_;
};

void add_corpus_options(CLI::App* cmd, CorpusSource& src) {
  cmd->add_option("--corpus", src.corpus, "Corpus directory");
  cmd->add_option("--scenario", src.scenario, "Scenario to synthesise (small, medium or JSON file)");
}

std::string level_option_text() { return "Early prediction level in (0,1]"; }

Report load_reports(const std::vector<std::string>& paths) {
  mx_report* merged = nullptr;
  for (const auto& p : paths) {
    mx_report* r = nullptr;
    check(mx_report_load(p.c_str(), &r));
    if (merged == nullptr) {
      merged = r;
    } else {
      Report owned(r);
      const mx_status s = mx_report_merge(merged, r);
      if (s != MX_OK) {
        mx_report_free(merged);
        check(s);
      }
    }
  }
  return Report(merged);
}

void print_log(const char* message, void* /*user*/) { std::cerr << "moocxfer: " << message << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Early success prediction with course transfer"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(mx_version()));

  Globals g;
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--config", g.config, "Config file (key = JSON value lines)")->check(CLI::ExistingFile);
  app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--verbose,-v", g.verbose, "Progress on stderr");
  Tool tool(g);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  std::string synth_scenario = "small", synth_out, synth_truth;
  synth->add_option("--scenario", synth_scenario, "small, medium or a scenario JSON file");
  synth->add_option("--out", synth_out, "Output corpus directory")->required();
  synth->add_option("--truth", synth_truth, "Ground-truth JSON (default <out>/truth.json)");
  synth->callback([&] {
    auto c = tool.generate(synth_scenario);
    check(mx_corpus_save(c.get(), synth_out.c_str()));
    char* t = nullptr;
    check(mx_corpus_truth(c.get(), &t));
    write_text(synth_truth.empty() ? (fs::path(synth_out) / "truth.json").string() : synth_truth, take(t));
    tool.log("wrote " + synth_out);
  });

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Load and validate a corpus");
  CorpusSource ingest_src;
  std::string ingest_out, ingest_summary;
  add_corpus_options(ingest, ingest_src);
  ingest->add_option("--out", ingest_out, "Re-export the validated corpus here");
  ingest->add_option("--summary", ingest_summary, "Summary JSON (default stdout)");
  ingest->callback([&] {
    auto c = tool.corpus(ingest_src);
    if (!ingest_out.empty()) check(mx_corpus_save(c.get(), ingest_out.c_str()));
    char* s = nullptr;
    check(mx_corpus_summary(c.get(), &s));
    emit(ingest_summary, take(s));
  });

  // filter
  auto* filter = app.add_subcommand("filter", "Fit the early-dropout filter of every course");
  CorpusSource filter_src;
  std::string filter_out;
  add_corpus_options(filter, filter_src);
  filter->add_option("--out", filter_out, "Output directory")->required();
  filter->callback([&] {
    auto c = tool.corpus(filter_src);
    char* s = nullptr;
    check(mx_filter_run(c.get(), tool.config(), &s));
    const json j = json::parse(take(s));
    std::string kept = "course_id,student_id\n", removed = kept;
    for (const auto& [course, r] : j.at("courses").items()) {
      for (const auto& id : r.at("kept")) kept += course + "," + id.get<std::string>() + "\n";
      for (const auto& id : r.at("removed")) removed += course + "," + id.get<std::string>() + "\n";
      tool.log(course + ": threshold " + r.at("threshold").dump() + ", removed " +
               std::to_string(r.at("removed").size()));
    }
    json weights = j;
    for (auto& [_, r] : weights.at("courses").items()) {
      r.erase("kept");
      r.erase("removed");
    }
    const fs::path out(filter_out);
    write_text((out / "filter.json").string(), weights.dump(1) + "\n");
    write_text((out / "kept.csv").string(), kept);
    write_text((out / "removed.csv").string(), removed);
  });

  // features
  auto* feats = app.add_subcommand("features", "Compute normalised behaviour features");
  CorpusSource feats_src;
  double feats_level = 0.4;
  std::string feats_out;
  add_corpus_options(feats, feats_src);
  feats->add_option("--level", feats_level, level_option_text());
  feats->add_option("--out", feats_out, "Output directory")->required();
  feats->callback([&] {
    auto c = tool.corpus(feats_src);
    check(mx_features_write(c.get(), tool.config(), feats_level, feats_out.c_str()));
  });

  // train
  auto* train = app.add_subcommand("train", "Train a model on the training courses");
  CorpusSource train_src;
  std::string train_arch = "bsm", train_grid, train_out;
  double train_level = 0.4;
  add_corpus_options(train, train_src);
  train->add_option("--arch", train_arch, "bo, btm or bsm")
      ->check(CLI::IsMember({"bo", "btm", "bsm"}));
  train->add_option("--level", train_level, level_option_text());
  train->add_option("--grid", train_grid, "Hyper-parameter grid JSON file")->check(CLI::ExistingFile);
  train->add_option("--out", train_out, "Checkpoint path")->required();
  train->callback([&] {
    if (!train_grid.empty()) tool.set("grid", read_text(train_grid));
    auto c = tool.corpus(train_src);
    mx_model* m = nullptr;
    check(mx_train(c.get(), tool.config(), train_arch.c_str(), train_level, &m));
    Model owned(m);
    check(mx_model_save(m, train_out.c_str()));
    tool.log("wrote " + train_out);
  });

  // predict
  auto* predict = app.add_subcommand("predict", "Predict failure for one course");
  std::string predict_model, predict_course, predict_out;
  predict->add_option("--model", predict_model, "Checkpoint")->required();
  predict->add_option("--course", predict_course, "Course directory")->required();
  predict->add_option("--out", predict_out, "CSV output (default stdout)");
  predict->callback([&] {
    mx_model* m = nullptr;
    check(mx_model_load(predict_model.c_str(), &m));
    Model owned(m);
    char* s = nullptr;
    check(mx_model_predict(m, tool.config(), predict_course.c_str(), &s));
    emit(predict_out, take(s));
  });

  // experiment run / table
  auto* experiment = app.add_subcommand("experiment", "Transfer experiments");
  experiment->require_subcommand(1);
  experiment->fallthrough();
  auto* run = experiment->add_subcommand("run", "Run one setting");
  CorpusSource run_src;
  std::string run_setting, run_arch = "bsm", run_out;
  double run_level = 0.4;
  add_corpus_options(run, run_src);
  run->add_option("--setting", run_setting, "OneOneSame, NOneSame, OneOneDiff, NOneDiff, NCDiff or NCDiffFT")
      ->required();
  run->add_option("--arch", run_arch, "bo, btm or bsm")->check(CLI::IsMember({"bo", "btm", "bsm"}));
  run->add_option("--level", run_level, level_option_text());
  run->add_option("--out", run_out, "report.json path (default stdout)");
  run->callback([&] {
    auto c = tool.corpus(run_src);
    mx_report* r = nullptr;
    check(mx_experiment_run(c.get(), tool.config(), run_setting.c_str(), run_arch.c_str(), run_level, &r));
    Report owned(r);
    char* s = nullptr;
    check(mx_report_json(r, &s));
    emit(run_out, take(s));
  });
  auto* table = experiment->add_subcommand("table", "Render reports as a results table");
  std::vector<std::string> table_reports;
  std::string table_out;
  table->add_option("--report", table_reports, "report.json files")->required()->check(CLI::ExistingFile);
  table->add_option("--out", table_out, "CSV output (default stdout)");
  table->callback([&] {
    auto r = load_reports(table_reports);
    char* s = nullptr;
    check(mx_report_table_csv(r.get(), &s));
    emit(table_out, take(s));
  });

  // ablate
  auto* ablate = app.add_subcommand("ablate", "Meta-feature ablation");
  CorpusSource ablate_src;
  double ablate_level = 0.4;
  std::string ablate_out, ablate_report;
  add_corpus_options(ablate, ablate_src);
  ablate->add_option("--level", ablate_level, level_option_text());
  ablate->add_option("--out", ablate_out, "CSV output (default stdout)");
  ablate->add_option("--report", ablate_report, "Also write the report JSON here");
  ablate->callback([&] {
    auto c = tool.corpus(ablate_src);
    mx_report* r = nullptr;
    check(mx_ablation_run(c.get(), tool.config(), ablate_level, &r));
    Report owned(r);
    char* s = nullptr;
    check(mx_report_ablation_csv(r, &s));
    emit(ablate_out, take(s));
    if (!ablate_report.empty()) {
      check(mx_report_json(r, &s));
      write_text(ablate_report, take(s));
    }
  });

  // report
  auto* report = app.add_subcommand("report", "Write table, attention and ablation CSVs of reports");
  std::vector<std::string> report_in;
  std::string report_dir, report_model;
  CorpusSource report_src;
  report->add_option("--report", report_in, "report.json files")->required()->check(CLI::ExistingFile);
  report->add_option("--out-dir", report_dir, "Output directory")->required();
  report->add_option("--attention-model", report_model,
                     "BSM checkpoint whose attention over the transfer courses is added");
  add_corpus_options(report, report_src);
  report->callback([&] {
    auto r = load_reports(report_in);
    if (!report_model.empty()) {
      auto c = tool.corpus(report_src);
      mx_model* m = nullptr;
      check(mx_model_load(report_model.c_str(), &m));
      Model owned(m);
      mx_report* a = nullptr;
      check(mx_attention_run(c.get(), tool.config(), m, &a));
      Report att(a);
      check(mx_report_merge(r.get(), a));
    }
    const fs::path out(report_dir);
    char* s = nullptr;
    check(mx_report_table_csv(r.get(), &s));
    write_text((out / "table.csv").string(), take(s));
    check(mx_report_attention_csv(r.get(), &s));
    write_text((out / "attention.csv").string(), take(s));
    check(mx_report_ablation_csv(r.get(), &s));
    write_text((out / "ablation.csv").string(), take(s));
  });

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "ingest, filter, features, train and evaluate with resume");
  std::string pipe_work;
  CorpusSource pipe_src;
  pipe->add_option("--work", pipe_work, "Work directory (overrides work_dir)");
  add_corpus_options(pipe, pipe_src);
  pipe->callback([&] {
    if (!pipe_work.empty()) tool.set("work_dir", json(pipe_work).dump());
    if (!pipe_src.corpus.empty()) tool.set("corpus", json(pipe_src.corpus).dump());
    if (!pipe_src.scenario.empty()) tool.set("scenario", json(pipe_src.scenario).dump());
    char* s = nullptr;
    check(mx_pipeline_run(tool.config(), tool.verbose() ? print_log : nullptr, nullptr, &s));
    const json j = json::parse(take(s));
    std::cout << j.at("report").get<std::string>() << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return mx_exit_code(MX_ERR_CONFIG);
  } catch (const Failure& f) {
    std::cerr << "moocxfer: " << mx_status_name(f.status) << ": " << f.message << "\n";
    return mx_exit_code(f.status);
  } catch (const json::exception& e) {
    std::cerr << "moocxfer: data error: " << e.what() << "\n";
    return mx_exit_code(MX_ERR_DATA);
  } catch (const std::exception& e) {
    std::cerr << "moocxfer: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
