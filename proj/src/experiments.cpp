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

#include "moocxfer/experiments.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <memory>
#include <sstream>
#include <tuple>

#include "json.hpp"
#include "moocxfer/common.hpp"

namespace moocxfer::experiments {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, kSettingCount> kSettingNames = {
    "OneOneSame", "NOneSame", "OneOneDiff", "NOneDiff", "NCDiff", "NCDiffFT"};

std::string level_tag(double level) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", level);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

features::FeatureBlock select_rows(const features::FeatureBlock& block,
                                   const std::set<std::string>& keep) {
  features::FeatureBlock out;
  out.weeks = block.weeks;
  out.width = block.width;
  const size_t n = static_cast<size_t>(block.weeks) * block.width;
  for (size_t s = 0; s < block.students.size(); ++s) {
    if (!keep.count(block.students[s])) continue;
    out.students.push_back(block.students[s]);
    out.values.insert(out.values.end(), block.values.begin() + s * n,
                      block.values.begin() + (s + 1) * n);
  }
  return out;
}

Dataset pick(const Dataset& d, const std::set<std::string>& students) {
  std::vector<size_t> idx;
  for (size_t i = 0; i < d.size(); ++i) {
    if (students.count(d.student_of(i))) idx.push_back(i);
  }
  return d.subset(idx);
}

std::vector<Population> populations(const ExperimentConfig& config) {
  if (config.evaluate_full) return {Population::kFiltered, Population::kFull};
  return {Population::kFiltered};
}

struct Fitted {
  std::unique_ptr<model::Model> model;
  model::ArchitectureSpec spec;
  model::TrainResult result;
};

Fitted fit(const model::ArchitectureSpec& spec, const ExperimentConfig& config,
           const model::DataProvider& provider, const model::TrainConfig& tc) {
  Fitted f;
  if (config.grid) {
    auto g = model::grid_search(spec, *config.grid, provider, tc, config.jobs);
    f.model = std::move(g.model);
    f.spec = g.spec;
    f.result = std::move(g.train);
  } else {
    const model::SplitData d = provider(spec.meta);
    f.model = std::make_unique<model::Model>(spec);
    f.spec = spec;
    f.result = model::train(*f.model, d.train, d.val, tc);
  }
  return f;
}

// Seeds of one training run, derived from the master seed and `tag`.
void seed_run(const ExperimentConfig& config, const std::string& tag, model::ArchitectureSpec& spec,
              model::TrainConfig& tc) {
  spec.seed = derive_seed(config.seed, tag + "/init");
  tc.seed = derive_seed(config.seed, tag + "/train");
}

EvalRow mean_row(const std::vector<EvalRow>& rows) {
  EvalRow m = rows.front();
  m.source = "mean";
  m.predictions.clear();
  m.confusion = {};
  m.evaluated = 0;
  std::vector<double> bac, acc;
  for (const auto& r : rows) {
    m.confusion.tp += r.confusion.tp;
    m.confusion.fn += r.confusion.fn;
    m.confusion.tn += r.confusion.tn;
    m.confusion.fp += r.confusion.fp;
    m.evaluated += r.evaluated;
    if (r.status == "ok") {
      bac.push_back(r.bac);
      acc.push_back(r.accuracy);
    }
  }
  m.status = bac.empty() ? "undefined" : "ok";
  m.bac = bac.empty() ? 0.0 : mean(bac);
  m.accuracy = acc.empty() ? 0.0 : mean(acc);
  m.note = std::to_string(bac.size()) + " of " + std::to_string(rows.size()) + " models";
  return m;
}

EvalRow inapplicable(const std::string& course, Population p, const std::string& why) {
  EvalRow r;
  r.course = course;
  r.population = std::string(population_name(p));
  r.status = "inapplicable";
  r.note = "setting inapplicable: " + why;
  return r;
}

void stamp(std::vector<EvalRow>& rows, size_t from, Setting s, const ExperimentConfig& config) {
  for (size_t i = from; i < rows.size(); ++i) {
    rows[i].setting = std::string(setting_name(s));
    rows[i].arch = std::string(model::arch_name(config.spec.kind));
    rows[i].level = config.level;
  }
}

std::vector<std::string> sorted(const std::set<std::string>& ids) { return {ids.begin(), ids.end()}; }

}  // namespace

std::string_view setting_name(Setting s) { return kSettingNames[static_cast<size_t>(s)]; }

std::optional<Setting> parse_setting(std::string_view name) {
  for (size_t i = 0; i < kSettingNames.size(); ++i) {
    if (kSettingNames[i] == name) return static_cast<Setting>(i);
  }
  return std::nullopt;
}

std::string_view population_name(Population p) {
  return p == Population::kFiltered ? "filtered" : "full";
}

void ExperimentConfig::validate() const {
  if (!(level > 0.0 && level <= 1.0)) throw ConfigError("level must lie in (0, 1]");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("validation_fraction must lie in (0, 1)");
  }
  if (folds < 3) throw ConfigError("folds must be >= 3");
  if (!(fine_tune_lr > 0.0)) throw ConfigError("fine_tune_lr must be positive");
  if (fine_tune_patience < 1) throw ConfigError("fine_tune_patience must be >= 1");
  spec.validate();
  train.validate();
}

std::map<std::string, FilterOutcome> filter_corpus(const Corpus& corpus,
                                                   const filter::FilterConfig& config, bool enabled) {
  std::map<std::string, FilterOutcome> out;
  for (const auto& c : corpus.courses) {
    FilterOutcome o;
    if (enabled) {
      auto f = filter::run_filter(c, config);
      o.kept = std::move(f.kept);
      o.removed = std::move(f.removed);
      o.threshold = f.threshold;
    } else {
      for (const auto& [s, _] : c.labels) o.kept.insert(s);
    }
    out.emplace(c.id(), std::move(o));
  }
  return out;
}

std::map<std::string, features::FeatureBlock> corpus_features(const Corpus& corpus, double level,
                                                              const features::FeatureConfig& config,
                                                              int jobs) {
  std::map<std::string, features::FeatureBlock> out;
  for (const auto& c : corpus.courses) {
    out.emplace(c.id(), features::compute_raw(truncate_to_level(c, level), weeks_kept(c, level),
                                              config, jobs));
  }
  return out;
}

PreparedCorpus::PreparedCorpus(const Corpus& corpus, const ExperimentConfig& config)
    : PreparedCorpus(corpus, config, filter_corpus(corpus, config.filter, config.filter_enabled),
                     corpus_features(corpus, config.level, config.features, config.jobs)) {}

PreparedCorpus::PreparedCorpus(const Corpus& corpus, const ExperimentConfig& config,
                               const std::map<std::string, FilterOutcome>& filtered,
                               std::map<std::string, features::FeatureBlock> raw)
    : corpus_(&corpus), level_(config.level), embeddings_(config.embeddings) {
  config.validate();
  for (const auto& c : corpus.courses) {
    PreparedCourse pc;
    pc.id = c.id();
    pc.course_set = c.course_set_id;
    pc.iteration = c.iteration_index;
    pc.course = &c;
    pc.weeks = weeks_kept(c, level_);
    auto f = filtered.find(pc.id);
    auto r = raw.find(pc.id);
    if (f == filtered.end() || r == raw.end()) {
      throw DataError("course " + pc.id + ": missing filter outcome or features");
    }
    pc.raw = std::move(r->second);
    if (pc.raw.weeks != pc.weeks || pc.raw.width != features::kBehaviorFeatureCount ||
        pc.raw.students.size() != c.labels.size()) {
      throw DataError("course " + pc.id + ": features do not match the course at level " +
                      level_tag(level_));
    }
    pc.kept = f->second.kept;
    pc.removed = f->second.removed;
    for (const auto& s : pc.kept) {
      if (!c.labels.count(s)) throw DataError("course " + pc.id + ": filter keeps unknown student " + s);
    }
    max_weeks_ = std::max(max_weeks_, pc.weeks);
    courses_.emplace(pc.id, std::move(pc));
  }
}

const PreparedCourse& PreparedCorpus::course(const std::string& id) const {
  auto it = courses_.find(id);
  if (it == courses_.end()) throw DataError("unknown course '" + id + "'");
  return it->second;
}

std::vector<std::string> PreparedCorpus::course_ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : courses_) out.push_back(id);
  return out;
}

features::NormStats PreparedCorpus::fit_behavior(const std::vector<std::string>& ids) const {
  std::vector<features::FeatureBlock> blocks;
  blocks.reserve(ids.size());
  for (const auto& id : ids) blocks.push_back(select_rows(course(id).raw, course(id).kept));
  std::vector<const features::FeatureBlock*> ptrs;
  for (const auto& b : blocks) ptrs.push_back(&b);
  return features::fit_norm_stats(ptrs);
}

meta::MetaNormStats PreparedCorpus::fit_meta(const std::vector<std::string>& ids,
                                             const meta::MetaConfig& cfg) const {
  std::vector<std::vector<double>> raw;
  for (const auto& id : ids) raw.push_back(meta::raw_meta(course(id).course->meta, id, cfg, embeddings_));
  return meta::fit_meta_stats(raw, cfg);
}

Dataset PreparedCorpus::dataset(const std::vector<std::string>& ids,
                                const model::ArchitectureSpec& spec,
                                const features::NormStats& behavior,
                                const std::optional<meta::MetaNormStats>& meta_stats,
                                Population population) const {
  Dataset d(max_weeks_, features::kBehaviorFeatureCount);
  for (const auto& id : ids) {
    const PreparedCourse& pc = course(id);
    const auto tensor = population == Population::kFiltered
                            ? features::normalize(select_rows(pc.raw, pc.kept), behavior, max_weeks_)
                            : features::normalize(pc.raw, behavior, max_weeks_);
    std::vector<double> mv;
    if (spec.kind != model::ArchKind::kBO) {
      mv = meta::assemble_meta(pc.course->meta, id, spec.meta, meta_stats, embeddings_).values;
    }
    d.add_course(id, tensor, mv, pc.course->labels);
  }
  return d;
}

Dataset PreparedCorpus::dataset(const std::vector<std::string>& ids, const model::TrainedModel& m,
                                Population population) const {
  return dataset(ids, m.model->spec(), m.behavior_stats, m.meta_stats, population);
}

model::TrainedModel train_on(const PreparedCorpus& data, const std::vector<std::string>& ids,
                             const ExperimentConfig& config, const std::string& tag) {
  if (ids.empty()) throw DataError(tag + ": no training courses");
  model::ArchitectureSpec spec = config.spec;
  model::TrainConfig tc = config.train;
  seed_run(config, tag, spec, tc);
  const auto behavior = data.fit_behavior(ids);
  const std::vector<double> fractions = {1.0 - config.validation_fraction, config.validation_fraction};
  auto provider = [&](const meta::MetaConfig& mc) {
    model::ArchitectureSpec s = spec;
    s.meta = mc;
    std::optional<meta::MetaNormStats> ms;
    if (s.kind != model::ArchKind::kBO) ms = data.fit_meta(ids, mc);
    const Dataset all = data.dataset(ids, s, behavior, ms, Population::kFiltered);
    const auto parts = split_by_course(all, fractions, derive_seed(config.seed, tag + "/split"));
    return model::SplitData{all.subset(parts[0]), all.subset(parts[1])};
  };
  Fitted f = fit(spec, config, provider, tc);
  model::TrainedModel tm;
  tm.model = std::move(f.model);
  tm.behavior_stats = behavior;
  if (f.spec.kind != model::ArchKind::kBO) tm.meta_stats = data.fit_meta(ids, f.spec.meta);
  tm.max_weeks = data.max_weeks();
  tm.level = data.level();
  tm.log = f.result.log;
  return tm;
}

EvalRow evaluate(const model::Model& m, const Dataset& data) {
  EvalRow row;
  const auto p = model::predict(m, data);
  const auto& y = data.labels();
  row.confusion = confusion(to_predictions(p), y);
  row.evaluated = static_cast<int>(data.size());
  row.accuracy = data.empty() ? 0.0 : row.confusion.accuracy();
  if (row.confusion.defined()) {
    row.bac = row.confusion.balanced_accuracy();
  } else {
    row.status = "undefined";
    row.note = "BAC undefined: single-class labels";
  }
  for (size_t i = 0; i < data.size(); ++i) row.predictions.push_back({data.student_of(i), p[i], y[i]});
  return row;
}

EvalRow evaluate(const model::TrainedModel& m, const PreparedCorpus& data,
                 const std::string& course_id, Population population) {
  EvalRow row = evaluate(*m.model, data.dataset({course_id}, m, population));
  row.course = course_id;
  row.population = std::string(population_name(population));
  return row;
}

std::vector<EvalRow> run_one_one_same(const PreparedCorpus& data, const std::string& course_id,
                                      const ExperimentConfig& config) {
  const PreparedCourse& pc = data.course(course_id);
  const std::string tag = run_tag(Setting::kOneOneSame, config.spec.kind, config.level) + "/" + course_id;
  const std::vector<std::string> kept(pc.kept.begin(), pc.kept.end());
  std::vector<int> y;
  for (const auto& s : kept) y.push_back(pc.course->labels.at(s) == Outcome::kFail ? 1 : 0);
  const int k = config.folds;
  std::vector<std::vector<size_t>> folds;
  try {
    folds = stratified_kfold(y, k, derive_seed(config.seed, tag + "/folds"));
  } catch (const DataError& e) {
    std::vector<EvalRow> out;
    for (Population p : populations(config)) {
      out.push_back(inapplicable(course_id, p, std::to_string(k) + "-fold split impossible (" + e.what() + ")"));
    }
    stamp(out, 0, Setting::kOneOneSame, config);
    return out;
  }
  std::vector<std::set<std::string>> fold_ids(k), removed(k);
  for (int f = 0; f < k; ++f) {
    for (size_t i : folds[f]) fold_ids[f].insert(kept[i]);
  }
  int r = 0;
  for (const auto& s : pc.removed) removed[r++ % k].insert(s);

  std::map<Population, std::vector<EvalRow>> per_pop;
  for (int f = 0; f < k; ++f) {
    const int v = (f + 1) % k;
    std::set<std::string> train_ids;
    for (int g = 0; g < k; ++g) {
      if (g != f && g != v) train_ids.insert(fold_ids[g].begin(), fold_ids[g].end());
    }
    const std::string fold_tag = tag + "/fold" + std::to_string(f);
    model::ArchitectureSpec spec = config.spec;
    model::TrainConfig tc = config.train;
    seed_run(config, fold_tag, spec, tc);
    const auto block = select_rows(pc.raw, train_ids);
    const std::vector<const features::FeatureBlock*> ptrs = {&block};
    const auto behavior = features::fit_norm_stats(ptrs);
    auto featurise = [&](const meta::MetaConfig& mc) {
      model::ArchitectureSpec s = spec;
      s.meta = mc;
      std::optional<meta::MetaNormStats> ms;
      if (s.kind != model::ArchKind::kBO) ms = data.fit_meta({course_id}, mc);
      return data.dataset({course_id}, s, behavior, ms, Population::kFull);
    };
    auto provider = [&](const meta::MetaConfig& mc) {
      const Dataset all = featurise(mc);
      return model::SplitData{pick(all, train_ids), pick(all, fold_ids[v])};
    };
    Fitted fitted = fit(spec, config, provider, tc);
    const Dataset all = featurise(fitted.spec.meta);
    for (Population p : populations(config)) {
      std::set<std::string> test = fold_ids[f];
      if (p == Population::kFull) test.insert(removed[f].begin(), removed[f].end());
      EvalRow row = evaluate(*fitted.model, pick(all, test));
      row.course = course_id;
      row.population = std::string(population_name(p));
      row.source = "fold" + std::to_string(f);
      per_pop[p].push_back(std::move(row));
    }
  }
  std::vector<EvalRow> out;
  for (Population p : populations(config)) {
    auto& rows = per_pop[p];
    EvalRow m = mean_row(rows);
    for (auto& row : rows) out.push_back(std::move(row));
    out.push_back(std::move(m));
  }
  stamp(out, 0, Setting::kOneOneSame, config);
  return out;
}

std::string run_tag(Setting setting, model::ArchKind arch, double level) {
  return std::string(setting_name(setting)) + "/" + std::string(model::arch_name(arch)) + "/" +
         level_tag(level);
}

std::string held_out_set(const Corpus& corpus, const std::string& requested) {
  std::map<std::string, std::vector<const CourseIteration*>> sets;
  for (const auto& c : corpus.courses) sets[c.course_set_id].push_back(&c);
  if (!requested.empty()) {
    if (!sets.count(requested)) throw ConfigError("held-out course set '" + requested + "' not in corpus");
    return requested;
  }
  auto last_id = [](const std::vector<const CourseIteration*>& v) {
    return (*std::max_element(v.begin(), v.end(), [](auto* a, auto* b) {
             return a->iteration_index < b->iteration_index;
           }))->id();
  };
  for (const auto& [name, v] : sets) {
    if (v.size() >= 2 && corpus.transfer_ids.count(last_id(v))) return name;
  }
  for (const auto& [name, v] : sets) {
    if (v.size() >= 2) return name;
  }
  if (sets.empty()) throw DataError("empty corpus");
  return sets.begin()->first;
}

std::vector<EvalRow> run_transfer(Setting setting, const PreparedCorpus& data,
                                  const ExperimentConfig& config) {
  const Corpus& corpus = data.corpus();
  const std::string prefix = run_tag(setting, config.spec.kind, config.level);
  const auto transfer = sorted(corpus.transfer_ids);
  const auto pops = populations(config);
  std::vector<EvalRow> out;

  switch (setting) {
    case Setting::kOneOneSame:
      for (const auto& t : transfer) {
        auto rows = run_one_one_same(data, t, config);
        out.insert(out.end(), rows.begin(), rows.end());
      }
      return out;

    case Setting::kNOneSame:
      for (const auto& t : transfer) {
        const PreparedCourse& target = data.course(t);
        std::vector<std::string> priors;
        for (const auto& id : corpus.train_ids) {
          const PreparedCourse& c = data.course(id);
          if (c.course_set == target.course_set && c.iteration < target.iteration) priors.push_back(id);
        }
        if (priors.empty()) {
          for (Population p : pops) out.push_back(inapplicable(t, p, "no prior iterations of " + target.course_set));
          continue;
        }
        const auto tm = train_on(data, priors, config, prefix + "/" + t);
        for (Population p : pops) out.push_back(evaluate(tm, data, t, p));
      }
      break;

    case Setting::kOneOneDiff: {
      if (transfer.size() < 2) {
        for (const auto& t : transfer) {
          for (Population p : pops) out.push_back(inapplicable(t, p, "needs two transfer courses"));
        }
        break;
      }
      std::map<std::string, model::TrainedModel> models;
      for (const auto& s : transfer) models.emplace(s, train_on(data, {s}, config, prefix + "/" + s));
      for (const auto& t : transfer) {
        for (Population p : pops) {
          std::vector<EvalRow> rows;
          for (const auto& s : transfer) {
            if (s == t) continue;
            rows.push_back(evaluate(models.at(s), data, t, p));
            rows.back().source = s;
          }
          EvalRow m = mean_row(rows);
          out.insert(out.end(), rows.begin(), rows.end());
          out.push_back(std::move(m));
        }
      }
      break;
    }

    case Setting::kNOneDiff:
      return evaluate_transfer(train_on(data, sorted(corpus.train_ids), config, prefix), data, config);

    case Setting::kNCDiff:
    case Setting::kNCDiffFT: {
      const std::string held = held_out_set(corpus, config.held_out);
      std::vector<const PreparedCourse*> members;
      std::vector<std::string> rest;
      for (const auto& id : data.course_ids()) {
        const PreparedCourse& c = data.course(id);
        if (c.course_set == held) {
          members.push_back(&c);
        } else {
          rest.push_back(id);
        }
      }
      std::sort(members.begin(), members.end(),
                [](auto* a, auto* b) { return a->iteration < b->iteration; });
      const std::string last = members.back()->id;
      if (rest.empty()) {
        for (Population p : pops) out.push_back(inapplicable(last, p, "no courses outside " + held));
        break;
      }
      const std::string tag = run_tag(Setting::kNCDiff, config.spec.kind, config.level) + "/" + held;
      auto tm = train_on(data, rest, config, tag);
      for (Population p : pops) out.push_back(evaluate(tm, data, last, p));
      stamp(out, 0, Setting::kNCDiff, config);
      if (setting == Setting::kNCDiff) return out;

      const size_t from = out.size();
      if (members.size() < 2) {
        for (Population p : pops) out.push_back(inapplicable(last, p, "no prior iterations of " + held));
      } else {
        std::vector<std::string> priors;
        for (size_t i = 0; i + 1 < members.size(); ++i) priors.push_back(members[i]->id);
        model::TrainConfig tc = config.train;
        tc.lr = config.fine_tune_lr;
        tc.patience = config.fine_tune_patience;
        tc.seed = derive_seed(config.seed, prefix + "/" + held + "/fine-tune");
        auto tuned = model::fine_tune(*tm.model, data.dataset(priors, tm, Population::kFiltered), tc);
        tm.log.insert(tm.log.end(), tuned.log.begin(), tuned.log.end());
        for (Population p : pops) out.push_back(evaluate(tm, data, last, p));
      }
      stamp(out, from, Setting::kNCDiffFT, config);
      return out;
    }
  }
  stamp(out, 0, setting, config);
  return out;
}

std::vector<EvalRow> evaluate_transfer(const model::TrainedModel& m, const PreparedCorpus& data,
                                       const ExperimentConfig& config) {
  std::vector<EvalRow> out;
  for (const auto& t : sorted(data.corpus().transfer_ids)) {
    for (Population p : populations(config)) out.push_back(evaluate(m, data, t, p));
  }
  stamp(out, 0, Setting::kNOneDiff, config);
  return out;
}

std::vector<AblationRow> run_ablation(const PreparedCorpus& data, const ExperimentConfig& config) {
  const auto ids = sorted(data.corpus().train_ids);
  if (ids.empty()) throw DataError("ablation: no training courses");
  const std::string prefix = "ablation/" + level_tag(config.level);
  const auto behavior = data.fit_behavior(ids);
  model::ArchitectureSpec bo = config.spec;
  bo.kind = model::ArchKind::kBO;
  const std::vector<double> fractions = {0.8, 0.1, 0.1};
  const auto parts = split_by_course(data.dataset(ids, bo, behavior, std::nullopt, Population::kFiltered),
                                     fractions, derive_seed(config.seed, prefix + "/split"));

  std::vector<std::pair<std::string, model::ArchitectureSpec>> rows;
  for (int i = 0; i < meta::kSliceCount; ++i) {
    model::ArchitectureSpec s = config.spec;
    s.kind = model::ArchKind::kBTM;
    s.meta.enabled.fill(false);
    s.meta.enabled[i] = true;
    rows.emplace_back(std::string(meta::slice_name(static_cast<meta::Slice>(i))), s);
  }
  rows.emplace_back("behavior_only", bo);

  std::vector<AblationRow> out;
  for (auto& [name, spec] : rows) {
    model::TrainConfig tc = config.train;
    seed_run(config, prefix + "/" + name, spec, tc);
    std::optional<meta::MetaNormStats> ms;
    if (spec.kind != model::ArchKind::kBO) ms = data.fit_meta(ids, spec.meta);
    const Dataset all = data.dataset(ids, spec, behavior, ms, Population::kFiltered);
    model::Model m(spec);
    model::train(m, all.subset(parts[0]), all.subset(parts[2]), tc);
    const EvalRow e = evaluate(m, all.subset(parts[1]));
    out.push_back({config.level, name, e.bac, e.accuracy, e.evaluated});
  }
  return out;
}

std::vector<AttentionRow> attention_report(const model::TrainedModel& m, const PreparedCorpus& data,
                                           const std::vector<std::string>& course_ids) {
  if (!m.model || m.model->spec().kind != model::ArchKind::kBSM) {
    throw ArgumentError("attention report needs a BSM model");
  }
  const Dataset d = data.dataset(course_ids, m, Population::kFiltered);
  if (d.empty()) throw DataError("attention report: no students");
  std::vector<std::vector<double>> values(meta::kSliceCount + 2);
  for (size_t i = 0; i < d.size(); ++i) {
    const auto a = m.model->attention(d.sample(i));
    for (int s = 0; s < meta::kSliceCount; ++s) values[s].push_back(a.slice_sums[s]);
    values[meta::kSliceCount].push_back(a.behavior_mass);
    values[meta::kSliceCount + 1].push_back(a.meta_mass);
  }
  std::vector<AttentionRow> out;
  for (size_t c = 0; c < values.size(); ++c) {
    AttentionRow r;
    r.level = data.level();
    if (c < meta::kSliceCount) {
      r.component = std::string(meta::slice_name(static_cast<meta::Slice>(c)));
    } else {
      r.component = c == meta::kSliceCount ? "behavior" : "meta";
    }
    r.mean = mean(values[c]);
    r.q1 = quantile(values[c], 0.25);
    r.q2 = quantile(values[c], 0.5);
    r.q3 = quantile(values[c], 0.75);
    out.push_back(r);
  }
  return out;
}

std::string report_to_json(const Report& r) {
  json rows = json::array();
  for (const auto& e : r.rows) {
    json preds = json::array();
    for (const auto& p : e.predictions) preds.push_back(json::array({p.student, p.p_fail, p.label}));
    rows.push_back({{"setting", e.setting},
                    {"arch", e.arch},
                    {"level", e.level},
                    {"course", e.course},
                    {"population", e.population},
                    {"source", e.source},
                    {"status", e.status},
                    {"note", e.note},
                    {"tp", e.confusion.tp},
                    {"fn", e.confusion.fn},
                    {"tn", e.confusion.tn},
                    {"fp", e.confusion.fp},
                    {"bac", e.bac},
                    {"accuracy", e.accuracy},
                    {"evaluated", e.evaluated},
                    {"predictions", preds}});
  }
  json ablation = json::array();
  for (const auto& a : r.ablation) {
    ablation.push_back({{"level", a.level}, {"feature", a.feature}, {"bac", a.bac}, {"accuracy", a.accuracy},
                        {"evaluated", a.evaluated}});
  }
  json attention = json::array();
  for (const auto& a : r.attention) {
    attention.push_back({{"level", a.level}, {"component", a.component}, {"mean", a.mean},
                         {"q1", a.q1}, {"q2", a.q2}, {"q3", a.q3}});
  }
  json j{{"format", kReportFormat}, {"seed", r.seed},         {"config_hash", r.config_hash},
         {"rows", rows},            {"ablation", ablation}, {"attention", attention}};
  return j.dump(1) + "\n";
}

Report report_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != kReportFormat) {
      throw DataError("unsupported report format '" + j.at("format").get<std::string>() + "'");
    }
    Report r;
    r.seed = j.at("seed").get<uint64_t>();
    r.config_hash = j.at("config_hash").get<std::string>();
    for (const auto& e : j.at("rows")) {
      EvalRow row;
      row.setting = e.at("setting").get<std::string>();
      row.arch = e.at("arch").get<std::string>();
      row.level = e.at("level").get<double>();
      row.course = e.at("course").get<std::string>();
      row.population = e.at("population").get<std::string>();
      row.source = e.at("source").get<std::string>();
      row.status = e.at("status").get<std::string>();
      row.note = e.at("note").get<std::string>();
      row.confusion.tp = e.at("tp").get<int>();
      row.confusion.fn = e.at("fn").get<int>();
      row.confusion.tn = e.at("tn").get<int>();
      row.confusion.fp = e.at("fp").get<int>();
      row.bac = e.at("bac").get<double>();
      row.accuracy = e.at("accuracy").get<double>();
      row.evaluated = e.at("evaluated").get<int>();
      for (const auto& p : e.at("predictions")) {
        row.predictions.push_back({p.at(0).get<std::string>(), p.at(1).get<double>(), p.at(2).get<int>()});
      }
      r.rows.push_back(std::move(row));
    }
    for (const auto& a : j.at("ablation")) {
      r.ablation.push_back({a.at("level").get<double>(), a.at("feature").get<std::string>(), a.at("bac").get<double>(),
                            a.at("accuracy").get<double>(), a.at("evaluated").get<int>()});
    }
    for (const auto& a : j.at("attention")) {
      r.attention.push_back({a.at("level").get<double>(), a.at("component").get<std::string>(),
                             a.at("mean").get<double>(), a.at("q1").get<double>(),
                             a.at("q2").get<double>(), a.at("q3").get<double>()});
    }
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("report: ") + e.what());
  }
}

std::string table_csv(const Report& r) {
  std::vector<std::string> columns;
  using Key = std::tuple<std::string, double, std::string>;
  std::map<Key, std::map<std::string, std::string>> cells;
  for (const auto& e : r.rows) {
    if (!e.source.empty() && e.source != "mean") continue;
    const std::string col = e.arch + " " + e.setting;
    if (std::find(columns.begin(), columns.end(), col) == columns.end()) columns.push_back(col);
    std::string v = e.status == "ok" ? fixed(e.bac, 4) : e.status == "inapplicable" ? "-" : "nan";
    cells[{e.course, e.level, e.population}][col] = v;
  }
  std::ostringstream out;
  out << "course,level,population";
  for (const auto& c : columns) out << "," << c;
  out << "\n";
  for (const auto& [key, row] : cells) {
    out << std::get<0>(key) << "," << level_tag(std::get<1>(key)) << "," << std::get<2>(key);
    for (const auto& c : columns) {
      auto it = row.find(c);
      out << "," << (it == row.end() ? "" : it->second);
    }
    out << "\n";
  }
  return out.str();
}

std::string attention_csv(const std::vector<AttentionRow>& rows) {
  std::ostringstream out;
  out << "level,component,mean,q1,q2,q3\n";
  for (const auto& r : rows) {
    out << level_tag(r.level) << "," << r.component << "," << fixed(r.mean, 6) << ","
        << fixed(r.q1, 6) << "," << fixed(r.q2, 6) << "," << fixed(r.q3, 6) << "\n";
  }
  return out.str();
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  out << "level,feature,bac,accuracy,evaluated\n";
  for (const auto& r : rows) {
    out << level_tag(r.level) << "," << r.feature << "," << fixed(r.bac, 4) << "," << fixed(r.accuracy, 4) << "," << r.evaluated
        << "\n";
  }
  return out.str();
}

}  // namespace moocxfer::experiments
