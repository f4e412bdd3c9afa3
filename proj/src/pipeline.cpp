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

#include "moocxfer/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>

#include "moocxfer/checkpoint.hpp"
#include "moocxfer/common.hpp"
#include "moocxfer/course_io.hpp"
#include "moocxfer/synthgen.hpp"

namespace moocxfer::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kFilterFormat = "moocxfer.filter/1";
constexpr const char* kFeaturesFormat = "moocxfer.features/1";

std::string level_tag(double level) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", level);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<fs::path> files_under(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::exists(dir)) return out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().filename() != "manifest.json") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// {relative path: hash} over every file below `dir`.
json hash_tree(const fs::path& root, const fs::path& dir) {
  json out = json::object();
  for (const auto& p : files_under(dir)) {
    out[p.lexically_relative(root).generic_string()] = file_hash(p.string());
  }
  return out;
}

void merge(json& into, const json& from) {
  for (const auto& [k, v] : from.items()) into[k] = v;
}

json read_json(const fs::path& p) {
  try {
    return json::parse(read_file(p.string()));
  } catch (const json::parse_error& e) {
    throw DataError(p.generic_string() + ": " + e.what());
  }
}

void expect_artifact(const json& j, const char* format, const std::string& hash, const fs::path& p) {
  if (!j.is_object() || j.value("format", "") != format) {
    throw DataError(p.generic_string() + ": not a " + format + " artifact");
  }
  if (j.value("config_hash", "") != hash) {
    throw DataError(p.generic_string() + ": produced by config " + j.value("config_hash", "?") +
                    ", expected " + hash);
  }
}

class Runner {
 public:
  Runner(const fs::path& work, std::string hash, const Logger& log)
      : work_(work), hash_(std::move(hash)), log_(log) {}

  // Runs `body` unless the stage's manifest is current.
  StageStatus stage(const std::string& name, const json& inputs, const std::function<void()>& body) {
    const fs::path dir = work_ / name;
    const fs::path manifest = dir / "manifest.json";
    try {
      if (current(name, manifest, inputs)) {
        say("stage " + name + ": up to date, skipped");
        return {name, true};
      }
      say("stage " + name + ": running");
      fs::remove_all(dir);
      fs::create_directories(dir);
      body();
      json m{{"format", kManifestFormat},
             {"stage", name},
             {"config_hash", hash_},
             {"inputs", inputs},
             {"outputs", hash_tree(work_, dir)}};
      write_file(manifest.string(), m.dump(1) + "\n");
    } catch (const Error& e) {
      throw_error(e.kind(), "stage " + name + ": " + e.what());
    } catch (const json::exception& e) {
      throw DataError("stage " + name + ": " + e.what());
    } catch (const fs::filesystem_error& e) {
      throw IoError("stage " + name + ": " + e.what());
    }
    return {name, false};
  }

  json outputs_of(const std::string& name) const { return hash_tree(work_, work_ / name); }
  const fs::path& work() const { return work_; }
  const std::string& hash() const { return hash_; }

 private:
  bool current(const std::string& name, const fs::path& manifest, const json& inputs) const {
    if (!fs::exists(manifest)) return false;
    json m;
    try {
      m = json::parse(read_file(manifest.string()));
    } catch (const json::parse_error&) {
      return false;
    }
    if (!m.is_object() || m.value("format", "") != kManifestFormat ||
        m.value("config_hash", "") != hash_ || m.value("inputs", json()) != inputs) {
      return false;
    }
    for (const auto& [rel, h] : m.at("outputs").items()) {
      const fs::path p = work_ / rel;
      if (!fs::exists(p) || file_hash(p.string()) != h.get<std::string>()) {
        throw DataError(rel + " does not match the " + name +
                        " manifest (corrupted or edited intermediate)");
      }
    }
    return true;
  }

  void say(const std::string& s) const {
    if (log_) log_(s);
  }

  fs::path work_;
  std::string hash_;
  Logger log_;
};

}  // namespace

std::optional<synth::ScenarioConfig> scenario_of(const PipelineConfig& c) {
  if (!c.corpus.empty()) return std::nullopt;
  if (c.scenario == "small" || c.scenario == "medium") {
    auto s = synth::bundled_scenario(c.scenario);
    s.seed = c.seed();
    return s;
  }
  return synth::scenario_from_json(read_file(c.scenario));
}

experiments::ExperimentConfig experiment_at(const PipelineConfig& c, double level,
                                            const meta::ExternalEmbeddings* embeddings) {
  experiments::ExperimentConfig e = c.experiment;
  e.level = level;
  e.embeddings = embeddings;
  return e;
}

std::vector<std::string> config_keys() {
  return {"corpus",       "scenario",        "work_dir",
          "levels",       "archs",           "settings",
          "ablation",     "attention",       "embeddings",
          "seed",         "jobs",            "epochs",
          "patience",     "batch_size",      "lr",
          "fine_tune_lr", "fine_tune_patience", "validation_fraction",
          "folds",        "held_out",        "evaluate_full",
          "filter",       "filter_grade_weeks", "filter_validation_fraction",
          "bilstm_layers", "bilstm_units",   "head_dense",
          "dropout",      "projection_dim",  "attention_hidden",
          "truncation_window", "title_dim",  "short_dim",
          "long_dim",     "embed_seed",      "meta_features",
          "session_gap",  "pass_threshold",  "grid"};
}

void apply_setting(PipelineConfig& c, const std::string& key, const json& v) {
  auto& e = c.experiment;
  try {
    if (key == "corpus") c.corpus = v.get<std::string>();
    else if (key == "scenario") c.scenario = v.get<std::string>();
    else if (key == "work_dir") c.work_dir = v.get<std::string>();
    else if (key == "levels") c.levels = v.get<std::vector<double>>();
    else if (key == "archs") {
      c.archs.clear();
      for (const auto& a : v) c.archs.push_back(model::parse_arch(a.get<std::string>()));
    } else if (key == "settings") {
      c.settings.clear();
      for (const auto& s : v) {
        auto k = experiments::parse_setting(s.get<std::string>());
        if (!k) throw ConfigError("unknown setting '" + s.get<std::string>() + "'");
        c.settings.push_back(*k);
      }
    } else if (key == "ablation") c.ablation = v.get<bool>();
    else if (key == "attention") c.attention = v.get<bool>();
    else if (key == "embeddings") c.embeddings = v.get<std::string>();
    else if (key == "seed") e.seed = v.get<uint64_t>();
    else if (key == "jobs") e.jobs = v.get<int>();
    else if (key == "epochs") e.train.max_epochs = v.get<int>();
    else if (key == "patience") e.train.patience = v.get<int>();
    else if (key == "batch_size") e.train.batch_size = v.get<int>();
    else if (key == "lr") e.train.lr = v.get<double>();
    else if (key == "fine_tune_lr") e.fine_tune_lr = v.get<double>();
    else if (key == "fine_tune_patience") e.fine_tune_patience = v.get<int>();
    else if (key == "validation_fraction") e.validation_fraction = v.get<double>();
    else if (key == "folds") e.folds = v.get<int>();
    else if (key == "held_out") e.held_out = v.get<std::string>();
    else if (key == "evaluate_full") e.evaluate_full = v.get<bool>();
    else if (key == "filter") e.filter_enabled = v.get<bool>();
    else if (key == "filter_grade_weeks") e.filter.grade_weeks = v.get<int>();
    else if (key == "filter_validation_fraction") e.filter.validation_fraction = v.get<double>();
    else if (key == "bilstm_layers") e.spec.bilstm_layers = v.get<int>();
    else if (key == "bilstm_units") e.spec.bilstm_units = v.get<int>();
    else if (key == "head_dense") e.spec.head_dense = v.get<std::vector<int>>();
    else if (key == "dropout") e.spec.dropout = v.get<double>();
    else if (key == "projection_dim") e.spec.projection_dim = v.get<int>();
    else if (key == "attention_hidden") e.spec.attention_hidden = v.get<int>();
    else if (key == "truncation_window") e.spec.truncation_window = v.get<int>();
    else if (key == "title_dim") e.spec.meta.title_dim = v.get<int>();
    else if (key == "short_dim") e.spec.meta.short_dim = v.get<int>();
    else if (key == "long_dim") e.spec.meta.long_dim = v.get<int>();
    else if (key == "embed_seed") e.spec.meta.embed_seed = v.get<uint64_t>();
    else if (key == "meta_features") {
      e.spec.meta.enabled.fill(false);
      for (const auto& n : v) {
        auto s = meta::parse_slice(n.get<std::string>());
        if (!s) throw ConfigError("unknown meta feature '" + n.get<std::string>() + "'");
        e.spec.meta.enabled[static_cast<size_t>(*s)] = true;
      }
    } else if (key == "session_gap") e.features.session_gap = v.get<int64_t>();
    else if (key == "pass_threshold") e.features.pass_threshold = v.get<double>();
    else if (key == "grid") {
      if (v.is_null()) e.grid.reset();
      else e.grid = model::grid_from_json(v);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const json::exception& ex) {
    throw ConfigError("config key '" + key + "': " + ex.what());
  } catch (const ArgumentError& ex) {
    throw ConfigError("config key '" + key + "': " + ex.what());
  }
}

PipelineConfig parse_config(const std::string& text) {
  PipelineConfig c;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(n) + ": expected key = value");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string raw = trim(t.substr(eq + 1));
    json value;
    try {
      value = json::parse(raw);
    } catch (const json::parse_error&) {
      value = raw;
    }
    try {
      apply_setting(c, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(n) + ": " + e.what());
    }
  }
  if (c.levels.empty()) throw ConfigError("levels must not be empty");
  if (c.archs.empty()) throw ConfigError("archs must not be empty");
  for (double l : c.levels) {
    experiments::ExperimentConfig probe = c.experiment;
    probe.level = l;
    probe.validate();
  }
  return c;
}

PipelineConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

json config_to_json(const PipelineConfig& c) {
  const auto& e = c.experiment;
  json archs = json::array();
  for (auto a : c.archs) archs.push_back(std::string(model::arch_name(a)));
  json settings = json::array();
  for (auto s : c.settings) settings.push_back(std::string(experiments::setting_name(s)));
  json meta_features = json::array();
  for (int i = 0; i < meta::kSliceCount; ++i) {
    if (e.spec.meta.enabled[i]) meta_features.push_back(meta::slice_name(static_cast<meta::Slice>(i)));
  }
  return json{{"corpus", c.corpus},
              {"scenario", c.corpus.empty() ? c.scenario : ""},
              {"levels", c.levels},
              {"archs", archs},
              {"settings", settings},
              {"ablation", c.ablation},
              {"attention", c.attention},
              {"embeddings", c.embeddings},
              {"seed", e.seed},
              {"epochs", e.train.max_epochs},
              {"patience", e.train.patience},
              {"batch_size", e.train.batch_size},
              {"lr", e.train.lr},
              {"fine_tune_lr", e.fine_tune_lr},
              {"fine_tune_patience", e.fine_tune_patience},
              {"validation_fraction", e.validation_fraction},
              {"folds", e.folds},
              {"held_out", e.held_out},
              {"evaluate_full", e.evaluate_full},
              {"filter", e.filter_enabled},
              {"filter_grade_weeks", e.filter.grade_weeks},
              {"filter_validation_fraction", e.filter.validation_fraction},
              {"bilstm_layers", e.spec.bilstm_layers},
              {"bilstm_units", e.spec.bilstm_units},
              {"head_dense", e.spec.head_dense},
              {"dropout", e.spec.dropout},
              {"projection_dim", e.spec.projection_dim},
              {"attention_hidden", e.spec.attention_hidden},
              {"truncation_window", e.spec.truncation_window},
              {"title_dim", e.spec.meta.title_dim},
              {"short_dim", e.spec.meta.short_dim},
              {"long_dim", e.spec.meta.long_dim},
              {"embed_seed", e.spec.meta.embed_seed},
              {"meta_features", meta_features},
              {"session_gap", e.features.session_gap},
              {"pass_threshold", e.features.pass_threshold},
              {"grid", e.grid ? model::grid_to_json(*e.grid) : json()}};
}

std::string config_hash(const PipelineConfig& c) { return hex64(fnv1a64(config_to_json(c).dump())); }

json filter_to_json(const std::map<std::string, experiments::FilterOutcome>& f) {
  json out = json::object();
  for (const auto& [id, o] : f) {
    out[id] = {{"threshold", o.threshold}, {"kept", o.kept}, {"removed", o.removed}};
  }
  return out;
}

std::map<std::string, experiments::FilterOutcome> filter_from_json(const json& j) {
  std::map<std::string, experiments::FilterOutcome> out;
  for (const auto& [id, o] : j.items()) {
    experiments::FilterOutcome f;
    f.threshold = o.at("threshold").get<double>();
    f.kept = o.at("kept").get<std::set<std::string>>();
    f.removed = o.at("removed").get<std::set<std::string>>();
    out.emplace(id, std::move(f));
  }
  return out;
}

json features_to_json(const std::map<std::string, features::FeatureBlock>& blocks) {
  json out = json::object();
  for (const auto& [id, b] : blocks) {
    out[id] = {{"weeks", b.weeks}, {"width", b.width}, {"students", b.students}, {"values", b.values}};
  }
  return out;
}

std::map<std::string, features::FeatureBlock> features_from_json(const json& j) {
  std::map<std::string, features::FeatureBlock> out;
  for (const auto& [id, o] : j.items()) {
    features::FeatureBlock b;
    b.weeks = o.at("weeks").get<int>();
    b.width = o.at("width").get<int>();
    b.students = o.at("students").get<std::vector<std::string>>();
    b.values = o.at("values").get<std::vector<double>>();
    if (b.values.size() != b.students.size() * static_cast<size_t>(b.weeks) * b.width) {
      throw DataError("features of " + id + " have the wrong number of values");
    }
    out.emplace(id, std::move(b));
  }
  return out;
}

PipelineResult run_pipeline(const PipelineConfig& config, const Logger& log) {
  const fs::path work(config.work_dir);
  fs::create_directories(work);
  Runner run(work, config_hash(config), log);
  PipelineResult result;
  const fs::path corpus_dir = work / "ingest" / "corpus";

  // ingest
  json ingest_in = json::object();
  const auto scenario = scenario_of(config);
  if (scenario) {
    ingest_in["scenario"] = hex64(fnv1a64(synth::scenario_to_json(*scenario)));
  } else {
    if (!fs::is_directory(config.corpus)) throw IoError("corpus directory '" + config.corpus + "' not found");
    for (const auto& [rel, h] : hash_tree(config.corpus, config.corpus).items()) ingest_in["corpus/" + rel] = h;
  }
  result.stages.push_back(run.stage("ingest", ingest_in, [&]() {
    if (scenario) {
      const auto g = synth::generate_corpus(*scenario);
      save_corpus(g.corpus, corpus_dir.string());
      write_file((work / "ingest" / "truth.json").string(), g.truth.to_json());
    } else {
      save_corpus(load_corpus(config.corpus), corpus_dir.string());
    }
  }));
  const json ingest_out = run.outputs_of("ingest");

  // Loaded lazily: a fully current pipeline never parses the corpus.
  std::optional<Corpus> corpus;
  auto get_corpus = [&]() -> const Corpus& {
    if (!corpus) corpus = load_corpus(corpus_dir.string());
    return *corpus;
  };

  // filter
  const fs::path filter_path = work / "filter" / "filter.json";
  result.stages.push_back(run.stage("filter", ingest_out, [&]() {
    const auto& e = config.experiment;
    const auto f = experiments::filter_corpus(get_corpus(), e.filter, e.filter_enabled);
    json j{{"format", kFilterFormat}, {"config_hash", run.hash()}, {"courses", filter_to_json(f)}};
    write_file(filter_path.string(), j.dump(1) + "\n");
  }));

  // features
  auto features_path = [&](double level) { return work / "features" / ("level-" + level_tag(level) + ".json"); };
  result.stages.push_back(run.stage("features", ingest_out, [&]() {
    for (double level : config.levels) {
      const auto blocks = experiments::corpus_features(get_corpus(), level, config.experiment.features,
                                                       config.experiment.jobs);
      json j{{"format", kFeaturesFormat}, {"config_hash", run.hash()}, {"level", level},
             {"courses", features_to_json(blocks)}};
      write_file(features_path(level).string(), j.dump() + "\n");
    }
  }));

  std::optional<meta::ExternalEmbeddings> embeddings;
  if (!config.embeddings.empty()) {
    embeddings = meta::load_external_embeddings(config.embeddings, config.experiment.spec.meta);
  }
  auto level_config = [&](double level) {
    return experiment_at(config, level, embeddings ? &*embeddings : nullptr);
  };
  auto prepared = [&](double level) {
    const json fj = read_json(filter_path);
    expect_artifact(fj, kFilterFormat, run.hash(), filter_path);
    const json xj = read_json(features_path(level));
    expect_artifact(xj, kFeaturesFormat, run.hash(), features_path(level));
    return experiments::PreparedCorpus(get_corpus(), level_config(level), filter_from_json(fj.at("courses")),
                                       features_from_json(xj.at("courses")));
  };
  auto checkpoint_path = [&](model::ArchKind a, double level) {
    return work / "train" / (std::string(model::arch_name(a)) + "-" + level_tag(level) + ".json");
  };

  // train: the N-1 Diff model of every architecture and level
  json train_in = ingest_out;
  merge(train_in, run.outputs_of("filter"));
  merge(train_in, run.outputs_of("features"));
  if (!config.embeddings.empty()) train_in["embeddings"] = file_hash(config.embeddings);
  result.stages.push_back(run.stage("train", train_in, [&]() {
    for (double level : config.levels) {
      const auto data = prepared(level);
      const std::vector<std::string> ids(data.corpus().train_ids.begin(), data.corpus().train_ids.end());
      for (auto arch : config.archs) {
        auto e = level_config(level);
        e.spec.kind = arch;
        const auto tm = experiments::train_on(data, ids, e,
                                              experiments::run_tag(experiments::Setting::kNOneDiff, arch, level));
        json ck = json::parse(model::checkpoint_to_string(tm));
        ck["config_hash"] = run.hash();
        write_file(checkpoint_path(arch, level).string(), ck.dump(1) + "\n");
      }
    }
  }));

  // evaluate
  json eval_in = train_in;
  merge(eval_in, run.outputs_of("train"));
  const fs::path report_path = work / "evaluate" / "report.json";
  result.stages.push_back(run.stage("evaluate", eval_in, [&]() {
    experiments::Report report;
    report.seed = config.seed();
    report.config_hash = run.hash();
    for (double level : config.levels) {
      const auto data = prepared(level);
      const std::vector<std::string> transfer(data.corpus().transfer_ids.begin(),
                                              data.corpus().transfer_ids.end());
      for (auto arch : config.archs) {
        auto e = level_config(level);
        e.spec.kind = arch;
        const auto ck = checkpoint_path(arch, level);
        const json cj = read_json(ck);
        if (cj.value("config_hash", "") != run.hash()) {
          throw DataError(ck.generic_string() + ": produced by a different config");
        }
        const auto tm = model::checkpoint_from_string(cj.dump());
        for (auto s : config.settings) {
          const auto rows = s == experiments::Setting::kNOneDiff
                                ? experiments::evaluate_transfer(tm, data, e)
                                : experiments::run_transfer(s, data, e);
          report.rows.insert(report.rows.end(), rows.begin(), rows.end());
        }
        if (config.attention && arch == model::ArchKind::kBSM && !transfer.empty()) {
          const auto a = experiments::attention_report(tm, data, transfer);
          report.attention.insert(report.attention.end(), a.begin(), a.end());
        }
      }
      if (config.ablation) {
        const auto a = experiments::run_ablation(data, level_config(level));
        report.ablation.insert(report.ablation.end(), a.begin(), a.end());
      }
    }
    const std::string stamp = "# config_hash " + run.hash() + "\n";
    write_file(report_path.string(), experiments::report_to_json(report));
    write_file((work / "evaluate" / "table.csv").string(), stamp + experiments::table_csv(report));
    write_file((work / "evaluate" / "attention.csv").string(),
               stamp + experiments::attention_csv(report.attention));
    write_file((work / "evaluate" / "ablation.csv").string(),
               stamp + experiments::ablation_csv(report.ablation));
  }));
  result.report_path = report_path.string();
  return result;
}

}  // namespace moocxfer::pipeline
