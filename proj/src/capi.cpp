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

#include "moocxfer/moocxfer.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <new>
#include <optional>
#include <string>

#include "json.hpp"
#include "moocxfer/checkpoint.hpp"
#include "moocxfer/common.hpp"
#include "moocxfer/course_io.hpp"
#include "moocxfer/experiments.hpp"
#include "moocxfer/pipeline.hpp"
#include "moocxfer/synthgen.hpp"

using nlohmann::json;
using namespace moocxfer;

struct mx_config {
  pipeline::PipelineConfig c;
};

struct mx_corpus {
  Corpus corpus;
  std::optional<synth::GroundTruth> truth;
};

struct mx_model {
  model::TrainedModel m;
};

struct mx_report {
  experiments::Report r;
};

namespace {

thread_local std::string last_error;

mx_status status_of(ErrorKind k) {
  switch (k) {
    case ErrorKind::kArgument: return MX_ERR_ARGUMENT;
    case ErrorKind::kConfig: return MX_ERR_CONFIG;
    case ErrorKind::kData: return MX_ERR_DATA;
    case ErrorKind::kTraining: return MX_ERR_TRAINING;
    case ErrorKind::kIo: return MX_ERR_IO;
  }
  return MX_ERR_INTERNAL;
}

mx_status fail(mx_status s, const std::string& what) {
  last_error = what;
  return s;
}

template <typename F>
mx_status guard(F&& f) {
  try {
    f();
    return MX_OK;
  } catch (const Error& e) {
    return fail(status_of(e.kind()), e.what());
  } catch (const json::exception& e) {
    return fail(MX_ERR_DATA, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(MX_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(MX_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MX_ERR_INTERNAL, e.what());
  }
}

void need(const void* p, const char* name) {
  if (p == nullptr) throw ArgumentError(std::string(name) + " is null");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::optional<meta::ExternalEmbeddings> embeddings_of(const pipeline::PipelineConfig& c) {
  if (c.embeddings.empty()) return std::nullopt;
  return meta::load_external_embeddings(c.embeddings, c.experiment.spec.meta);
}

std::vector<std::string> ids_of(const std::set<std::string>& s) { return {s.begin(), s.end()}; }

std::string num(double v) { return json(v).dump(); }

}  // namespace

extern "C" {

const char* mx_version(void) { return "1.0.0"; }

const char* mx_last_error(void) { return last_error.c_str(); }

const char* mx_status_name(mx_status status) {
  switch (status) {
    case MX_OK: return "ok";
    case MX_ERR_ARGUMENT: return "argument error";
    case MX_ERR_CONFIG: return "config error";
    case MX_ERR_DATA: return "data error";
    case MX_ERR_TRAINING: return "training failure";
    case MX_ERR_IO: return "i/o error";
    case MX_ERR_INTERNAL: return "internal error";
  }
  return "unknown";
}

int mx_exit_code(mx_status status) {
  switch (status) {
    case MX_OK: return 0;
    case MX_ERR_ARGUMENT:
    case MX_ERR_CONFIG: return 2;
    case MX_ERR_DATA:
    case MX_ERR_IO: return 3;
    case MX_ERR_TRAINING: return 4;
    default: return 1;
  }
}

void mx_string_free(char* s) { std::free(s); }

mx_status mx_config_new(mx_config** out) {
  return guard([&] {
    need(out, "out");
    *out = new mx_config();
  });
}

mx_status mx_config_parse(const char* text, mx_config** out) {
  return guard([&] {
    need(text, "text");
    need(out, "out");
    *out = new mx_config{pipeline::parse_config(text)};
  });
}

mx_status mx_config_load(const char* path, mx_config** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new mx_config{pipeline::load_config(path)};
  });
}

mx_status mx_config_set(mx_config* config, const char* key, const char* value) {
  return guard([&] {
    need(config, "config");
    need(key, "key");
    need(value, "value");
    json v = json::parse(value, nullptr, false);
    if (v.is_discarded()) v = std::string(value);
    pipeline::apply_setting(config->c, key, v);
  });
}

mx_status mx_config_json(const mx_config* config, char** out) {
  return guard([&] {
    need(config, "config");
    need(out, "out");
    json j = pipeline::config_to_json(config->c);
    j["work_dir"] = config->c.work_dir;
    j["jobs"] = config->c.experiment.jobs;
    *out = dup(j.dump(1) + "\n");
  });
}

mx_status mx_config_hash(const mx_config* config, char** out) {
  return guard([&] {
    need(config, "config");
    need(out, "out");
    *out = dup(pipeline::config_hash(config->c));
  });
}

void mx_config_free(mx_config* config) { delete config; }

mx_status mx_corpus_generate(const char* scenario, int override_seed, uint64_t seed,
                             mx_corpus** out) {
  return guard([&] {
    need(scenario, "scenario");
    need(out, "out");
    const std::string name = scenario;
    synth::ScenarioConfig sc = name == "small" || name == "medium"
                                   ? synth::bundled_scenario(name)
                                   : synth::scenario_from_json(read_file(name));
    if (override_seed) sc.seed = seed;
    auto g = synth::generate_corpus(sc);
    *out = new mx_corpus{std::move(g.corpus), std::move(g.truth)};
  });
}

mx_status mx_corpus_load(const char* dir, mx_corpus** out) {
  return guard([&] {
    need(dir, "dir");
    need(out, "out");
    *out = new mx_corpus{load_corpus(dir), std::nullopt};
  });
}

mx_status mx_corpus_save(const mx_corpus* corpus, const char* dir) {
  return guard([&] {
    need(corpus, "corpus");
    need(dir, "dir");
    save_corpus(corpus->corpus, dir);
  });
}

mx_status mx_corpus_truth(const mx_corpus* corpus, char** out) {
  return guard([&] {
    need(corpus, "corpus");
    need(out, "out");
    if (!corpus->truth) throw ArgumentError("corpus was loaded, not generated: no ground truth");
    *out = dup(corpus->truth->to_json());
  });
}

mx_status mx_corpus_summary(const mx_corpus* corpus, char** out) {
  return guard([&] {
    need(corpus, "corpus");
    need(out, "out");
    json courses = json::array();
    for (const auto& c : corpus->corpus.courses) {
      int fails = 0;
      size_t events = 0;
      for (const auto& [_, o] : c.labels) fails += o == Outcome::kFail;
      for (const auto& [_, log] : c.logs) events += log.size();
      courses.push_back({{"id", c.id()},
                         {"split", corpus->corpus.train_ids.count(c.id()) ? "train" : "transfer"},
                         {"weeks", c.duration_weeks},
                         {"level", level_name(c.meta.level)},
                         {"language", language_name(c.meta.language)},
                         {"students", c.labels.size()},
                         {"fail", fails},
                         {"events", events}});
    }
    json j{{"courses", courses},
           {"train", ids_of(corpus->corpus.train_ids)},
           {"transfer", ids_of(corpus->corpus.transfer_ids)}};
    *out = dup(j.dump(1) + "\n");
  });
}

void mx_corpus_free(mx_corpus* corpus) { delete corpus; }

mx_status mx_filter_run(const mx_corpus* corpus, const mx_config* config, char** out) {
  return guard([&] {
    need(corpus, "corpus");
    need(config, "config");
    need(out, "out");
    const auto& e = config->c.experiment;
    json courses = json::object();
    for (const auto& c : corpus->corpus.courses) {
      const auto r = filter::run_filter(c, e.filter);
      courses[c.id()] = {{"threshold", r.threshold},
                         {"weights", r.model.weights},
                         {"bias", r.model.bias},
                         {"kept", ids_of(r.kept)},
                         {"removed", ids_of(r.removed)}};
    }
    json j{{"format", "moocxfer.filter/1"},
           {"grade_weeks", e.filter.grade_weeks},
           {"courses", courses}};
    *out = dup(j.dump(1) + "\n");
  });
}

mx_status mx_features_write(const mx_corpus* corpus, const mx_config* config, double level,
                            const char* dir) {
  return guard([&] {
    need(corpus, "corpus");
    need(config, "config");
    need(dir, "dir");
    const auto emb = embeddings_of(config->c);
    const auto e = pipeline::experiment_at(config->c, level, emb ? &*emb : nullptr);
    const experiments::PreparedCorpus data(corpus->corpus, e);
    const auto stats = data.fit_behavior(ids_of(corpus->corpus.train_ids));
    const std::filesystem::path root(dir);
    std::filesystem::create_directories(root);
    const auto& names = features::feature_names();
    json files = json::array();
    for (const auto& id : data.course_ids()) {
      const auto& pc = data.course(id);
      const auto t = features::normalize(pc.raw, stats, pc.weeks);
      std::string csv = "student,week";
      for (auto n : names) csv += "," + std::string(n);
      csv += "\n";
      for (size_t s = 0; s < t.students.size(); ++s) {
        const auto row = t.student(s);
        for (int w = 0; w < t.weeks; ++w) {
          csv += t.students[s] + "," + std::to_string(w);
          for (size_t f = 0; f < t.width(); ++f) csv += "," + num(row[w * t.width() + f]);
          csv += "\n";
        }
      }
      write_file((root / (id + ".csv")).string(), csv);
      files.push_back({{"course", id},
                       {"file", id + ".csv"},
                       {"shape", {t.students.size(), t.weeks, t.width()}},
                       {"kept", pc.kept.size()},
                       {"removed", pc.removed.size()}});
    }
    json j{{"format", "moocxfer.features/1"},
           {"level", level},
           {"max_weeks", data.max_weeks()},
           {"names", std::vector<std::string>(names.begin(), names.end())},
           {"norm_stats", model::norm_stats_to_json(stats)},
           {"courses", files}};
    write_file((root / "features.json").string(), j.dump(1) + "\n");
  });
}

mx_status mx_train(const mx_corpus* corpus, const mx_config* config, const char* arch,
                   double level, mx_model** out) {
  return guard([&] {
    need(corpus, "corpus");
    need(config, "config");
    need(arch, "arch");
    need(out, "out");
    const auto emb = embeddings_of(config->c);
    auto e = pipeline::experiment_at(config->c, level, emb ? &*emb : nullptr);
    e.spec.kind = model::parse_arch(arch);
    const experiments::PreparedCorpus data(corpus->corpus, e);
    auto tm = experiments::train_on(
        data, ids_of(corpus->corpus.train_ids), e,
        experiments::run_tag(experiments::Setting::kNOneDiff, e.spec.kind, level));
    *out = new mx_model{std::move(tm)};
  });
}

mx_status mx_model_save(const mx_model* m, const char* path) {
  return guard([&] {
    need(m, "model");
    need(path, "path");
    model::save_checkpoint(m->m, path);
  });
}

mx_status mx_model_load(const char* path, mx_model** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new mx_model{model::load_checkpoint(path)};
  });
}

mx_status mx_model_predict(const mx_model* m, const mx_config* config, const char* course_dir,
                           char** out) {
  return guard([&] {
    need(m, "model");
    need(course_dir, "course_dir");
    need(out, "out");
    Corpus corpus;
    corpus.courses.push_back(load_course(course_dir));
    corpus.transfer_ids.insert(corpus.courses[0].id());
    experiments::ExperimentConfig e;
    if (config != nullptr) e = config->c.experiment;
    e.level = m->m.level;
    e.filter_enabled = false;
    const experiments::PreparedCorpus data(corpus, e);
    const auto row = experiments::evaluate(m->m, data, corpus.courses[0].id(),
                                           experiments::Population::kFull);
    std::string csv = "student_id,p_fail,predicted_label\n";
    for (const auto& p : row.predictions) {
      csv += p.student + "," + num(p.p_fail) + "," + (p.p_fail >= 0.5 ? "fail" : "pass") + "\n";
    }
    *out = dup(csv);
  });
}

void mx_model_free(mx_model* m) { delete m; }

mx_status mx_experiment_run(const mx_corpus* corpus, const mx_config* config, const char* setting,
                            const char* arch, double level, mx_report** out) {
  return guard([&] {
    need(corpus, "corpus");
    need(config, "config");
    need(setting, "setting");
    need(arch, "arch");
    need(out, "out");
    const auto s = experiments::parse_setting(setting);
    if (!s) throw ArgumentError(std::string("unknown setting '") + setting + "'");
    const auto emb = embeddings_of(config->c);
    auto e = pipeline::experiment_at(config->c, level, emb ? &*emb : nullptr);
    e.spec.kind = model::parse_arch(arch);
    const experiments::PreparedCorpus data(corpus->corpus, e);
    auto r = std::make_unique<mx_report>();
    r->r.seed = config->c.seed();
    r->r.config_hash = pipeline::config_hash(config->c);
    r->r.rows = experiments::run_transfer(*s, data, e);
    *out = r.release();
  });
}

mx_status mx_ablation_run(const mx_corpus* corpus, const mx_config* config, double level,
                          mx_report** out) {
  return guard([&] {
    need(corpus, "corpus");
    need(config, "config");
    need(out, "out");
    const auto emb = embeddings_of(config->c);
    const auto e = pipeline::experiment_at(config->c, level, emb ? &*emb : nullptr);
    const experiments::PreparedCorpus data(corpus->corpus, e);
    auto r = std::make_unique<mx_report>();
    r->r.seed = config->c.seed();
    r->r.config_hash = pipeline::config_hash(config->c);
    r->r.ablation = experiments::run_ablation(data, e);
    *out = r.release();
  });
}

mx_status mx_attention_run(const mx_corpus* corpus, const mx_config* config, const mx_model* m,
                           mx_report** out) {
  return guard([&] {
    need(corpus, "corpus");
    need(config, "config");
    need(m, "model");
    need(out, "out");
    const auto emb = embeddings_of(config->c);
    auto e = pipeline::experiment_at(config->c, m->m.level, emb ? &*emb : nullptr);
    e.filter_enabled = false;
    const experiments::PreparedCorpus data(corpus->corpus, e);
    auto r = std::make_unique<mx_report>();
    r->r.seed = config->c.seed();
    r->r.config_hash = pipeline::config_hash(config->c);
    r->r.attention = experiments::attention_report(m->m, data, ids_of(corpus->corpus.transfer_ids));
    *out = r.release();
  });
}

mx_status mx_report_load(const char* path, mx_report** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new mx_report{experiments::report_from_json(read_file(path))};
  });
}

mx_status mx_report_merge(mx_report* dst, const mx_report* src) {
  return guard([&] {
    need(dst, "dst");
    need(src, "src");
    auto& d = dst->r;
    const auto& s = src->r;
    if (d.rows.empty() && d.ablation.empty() && d.attention.empty()) {
      d.seed = s.seed;
      d.config_hash = s.config_hash;
    }
    d.rows.insert(d.rows.end(), s.rows.begin(), s.rows.end());
    d.ablation.insert(d.ablation.end(), s.ablation.begin(), s.ablation.end());
    d.attention.insert(d.attention.end(), s.attention.begin(), s.attention.end());
  });
}

mx_status mx_report_json(const mx_report* report, char** out) {
  return guard([&] {
    need(report, "report");
    need(out, "out");
    *out = dup(experiments::report_to_json(report->r));
  });
}

mx_status mx_report_table_csv(const mx_report* report, char** out) {
  return guard([&] {
    need(report, "report");
    need(out, "out");
    *out = dup(experiments::table_csv(report->r));
  });
}

mx_status mx_report_attention_csv(const mx_report* report, char** out) {
  return guard([&] {
    need(report, "report");
    need(out, "out");
    *out = dup(experiments::attention_csv(report->r.attention));
  });
}

mx_status mx_report_ablation_csv(const mx_report* report, char** out) {
  return guard([&] {
    need(report, "report");
    need(out, "out");
    *out = dup(experiments::ablation_csv(report->r.ablation));
  });
}

void mx_report_free(mx_report* report) { delete report; }

mx_status mx_pipeline_run(const mx_config* config, mx_log_fn log, void* user, char** out) {
  return guard([&] {
    need(config, "config");
    pipeline::Logger logger;
    if (log != nullptr) logger = [log, user](const std::string& s) { log(s.c_str(), user); };
    const auto r = pipeline::run_pipeline(config->c, logger);
    if (out != nullptr) {
      json stages = json::array();
      for (const auto& s : r.stages) stages.push_back({{"stage", s.name}, {"skipped", s.skipped}});
      *out = dup(json{{"stages", stages}, {"report", r.report_path}}.dump(1) + "\n");
    }
  });
}

}  // extern "C"
