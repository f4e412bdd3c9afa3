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

#include "moocxfer/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"
#include "moocxfer/common.hpp"

namespace moocxfer::synth {
namespace {

using nlohmann::json;

// Monday 2014-01-06 00:00:00 UTC.
constexpr int64_t kBaseEpoch = 1388966400;

struct Topic {
  const char* name;
  std::vector<const char*> words;
};

const std::vector<Topic>& topics() {
  static const std::vector<Topic> kTopics = {
      {"linalg", {"linear", "algebra", "matrix", "vector", "eigenvalue", "basis", "space"}},
      {"signals", {"signal", "processing", "fourier", "filter", "sampling", "spectrum", "digital"}},
      {"ecology", {"ecology", "water", "treatment", "climate", "soil", "species", "environment"}},
      {"finance", {"finance", "venture", "market", "startup", "capital", "business", "risk"}},
      {"geometry", {"geometry", "mapping", "survey", "coordinates", "projection", "terrain", "measure"}},
      {"programming", {"programming", "functional", "object", "compiler", "types", "recursion", "code"}},
      {"architecture", {"structures", "architecture", "bridge", "load", "design", "form", "material"}},
      {"numerics", {"numerical", "analysis", "approximation", "error", "iteration", "convergence", "solver"}},
  };
  return kTopics;
}

const char* level_phrase(Level l) {
  switch (l) {
    case Level::kBachelor: return "introductory undergraduate";
    case Level::kMaster: return "advanced graduate";
    case Level::kPropedeutic: return "preparatory foundation";
  }
  return "";
}

struct Profile {
  double hour_mean = 14.0;
  double hour_sd = 1.0;
  double weekend_prob = 0.15;
  double quiz_attempt_prob = 1.0;
  double grade_a = 7.0;
  double grade_b = 1.5;
  int max_attempts = 3;
  double future_pick_prob = 0.0;
  double seek_forward_rate = 0.05;
  double speed_change_rate = 0.02;
  double pause_rate = 0.4;
};

Profile profile_for(Archetype a, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Profile p;
  switch (a) {
    case Archetype::kEngaged:
      p.hour_mean = 9.0 + 9.0 * u(rng);
      p.hour_sd = 0.8;
      break;
    case Archetype::kDisengaged:
      p.hour_mean = 12.0 + 10.0 * u(rng);
      p.hour_sd = 3.0;
      p.weekend_prob = 0.3;
      p.quiz_attempt_prob = 0.45;
      p.grade_a = 2.0;
      p.grade_b = 4.0;
      p.max_attempts = 1;
      p.pause_rate = 0.6;
      break;
    case Archetype::kEarlyDropout:
      p.hour_mean = 10.0 + 12.0 * u(rng);
      p.hour_sd = 3.0;
      p.weekend_prob = 0.3;
      p.quiz_attempt_prob = 0.0;
      p.pause_rate = 0.6;
      break;
    case Archetype::kErratic:
      p.hour_mean = 12.0;
      p.hour_sd = 7.0;
      p.weekend_prob = 0.45;
      p.quiz_attempt_prob = 0.75;
      p.grade_a = 3.5;
      p.grade_b = 2.5;
      p.max_attempts = 4;
      p.future_pick_prob = 0.3;
      p.seek_forward_rate = 0.45;
      p.speed_change_rate = 0.3;
      p.pause_rate = 0.25;
      break;
  }
  return p;
}

double sample_beta(Rng& rng, double a, double b) {
  std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  return x / (x + y);
}

double sessions_lambda(Archetype a, int week, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  switch (a) {
    case Archetype::kEngaged: return 3.5;
    case Archetype::kDisengaged: return 1.4 * std::pow(0.85, week);
    case Archetype::kEarlyDropout: return week < 2 ? 1.5 : 0.0;
    case Archetype::kErratic: return u(rng) < 0.4 ? 5.0 : 0.6;
  }
  return 0.0;
}

class StudentSimulator {
 public:
  StudentSimulator(const CourseIteration& course, std::string student,
                   Archetype archetype, Rng& rng)
      : course_(course),
        student_(std::move(student)),
        archetype_(archetype),
        rng_(rng),
        profile_(profile_for(archetype, rng)) {
    for (const auto& o : course.schedule) {
      if (o.kind == ObjectKind::kVideo) videos_.push_back(&o);
      else quizzes_.push_back(&o);
    }
  }

  std::vector<InteractionEvent> run() {
    std::vector<InteractionEvent> events;
    for (int week = 0; week < course_.duration_weeks; ++week) {
      if (archetype_ == Archetype::kEarlyDropout && week >= 2) break;
      std::poisson_distribution<int> pd(sessions_lambda(archetype_, week, rng_));
      int n = pd(rng_);
      if (week < 2 && archetype_ != Archetype::kEarlyDropout) n = std::max(n, 1);
      std::vector<int64_t> starts;
      for (int i = 0; i < n; ++i) starts.push_back(session_start(week));
      std::sort(starts.begin(), starts.end());
      int64_t cursor = 0;
      for (int64_t s : starts) {
        const int64_t t0 = std::max(s, cursor + 2400);
        cursor = session(week, t0, events);
      }
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const InteractionEvent& a, const InteractionEvent& b) {
                       return a.timestamp < b.timestamp;
                     });
    if (archetype_ == Archetype::kEarlyDropout) {
      const int64_t cutoff = course_.week_start(2);
      std::erase_if(events, [&](const InteractionEvent& e) { return e.timestamp >= cutoff; });
    }
    return events;
  }

 private:
  int64_t session_start(int week) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> hour(profile_.hour_mean, profile_.hour_sd);
    int day;
    if (u(rng_) < profile_.weekend_prob) {
      day = 5 + static_cast<int>(u(rng_) * 2.0);  // course weeks start on Monday
    } else {
      day = static_cast<int>(u(rng_) * 5.0);
    }
    double h = std::fmod(hour(rng_), 24.0);
    if (h < 0) h += 24.0;
    return course_.week_start(week) + day * kSecondsPerDay +
           static_cast<int64_t>(h * 3600.0);
  }

  int64_t gap(int64_t lo, int64_t hi) {
    std::uniform_int_distribution<int64_t> d(lo, hi);
    return d(rng_);
  }

  void emit(std::vector<InteractionEvent>& out, int64_t t, Action a,
            const LearningObject& o, std::optional<double> grade = std::nullopt,
            std::optional<double> seek = std::nullopt) {
    InteractionEvent e;
    e.student_id = student_;
    e.timestamp = t;
    e.action = a;
    e.object_id = o.object_id;
    e.grade = grade;
    e.seek_seconds = seek;
    out.push_back(std::move(e));
  }

  const LearningObject* pick_video(int week) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<const LearningObject*> current, released, future;
    for (const auto* v : videos_) {
      if (v->release_week == week) current.push_back(v);
      if (v->release_week <= week) released.push_back(v);
      else future.push_back(v);
    }
    if (!future.empty() && u(rng_) < profile_.future_pick_prob) {
      return future[static_cast<size_t>(u(rng_) * future.size())];
    }
    if (archetype_ == Archetype::kEngaged) {
      for (const auto* v : current) {
        if (!watched_.count(v->object_id)) return v;
      }
    }
    if (!current.empty() && u(rng_) < 0.6) {
      return current[static_cast<size_t>(u(rng_) * current.size())];
    }
    if (released.empty()) return nullptr;
    return released[static_cast<size_t>(u(rng_) * released.size())];
  }

  int64_t watch(const LearningObject& v, int64_t t, std::vector<InteractionEvent>& out) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    emit(out, t, Action::kVideoLoad, v);
    t += gap(3, 20);
    emit(out, t, Action::kVideoPlay, v);
    watched_.insert(v.object_id);
    const int steps = archetype_ == Archetype::kDisengaged ? 1 : 2 + static_cast<int>(u(rng_) * 4);
    for (int i = 0; i < steps; ++i) {
      t += gap(30, 400);
      const double r = u(rng_);
      if (r < profile_.seek_forward_rate) {
        emit(out, t, Action::kVideoSeekForward, v, std::nullopt, 20.0 + std::floor(u(rng_) * 180.0));
      } else if (r < profile_.seek_forward_rate + profile_.speed_change_rate) {
        emit(out, t, Action::kVideoSpeedChange, v);
      } else if (r < profile_.seek_forward_rate + profile_.speed_change_rate + profile_.pause_rate) {
        emit(out, t, Action::kVideoPause, v);
        if (archetype_ == Archetype::kDisengaged && u(rng_) < 0.6) return t;
        t += gap(20, 600);
        emit(out, t, Action::kVideoPlay, v);
      } else if (r < 0.9) {
        emit(out, t, Action::kVideoSeekBackward, v, std::nullopt, -(5.0 + std::floor(u(rng_) * 60.0)));
      } else {
        emit(out, t, Action::kVideoPlay, v);
      }
    }
    if (u(rng_) < 0.5) {
      t += gap(30, 300);
      emit(out, t, Action::kVideoStop, v);
    }
    return t;
  }

  int64_t take_quizzes(int week, int64_t t, std::vector<InteractionEvent>& out) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const auto* q : quizzes_) {
      const bool future = q->release_week > week;
      if (future && u(rng_) >= profile_.future_pick_prob) continue;
      if (!future && q->release_week != week && archetype_ != Archetype::kErratic) continue;
      if (attempted_.count(q->object_id)) continue;
      // Only early dropouts skip the graded quizzes of the first two weeks.
      const bool required = q->graded && week < 2 && archetype_ != Archetype::kEarlyDropout;
      if (!required && u(rng_) >= profile_.quiz_attempt_prob) {
        attempted_.insert(q->object_id);
        continue;
      }
      attempted_.insert(q->object_id);
      for (int attempt = 0; attempt < profile_.max_attempts; ++attempt) {
        t += gap(120, 900);
        std::optional<double> grade;
        double g = 0.0;
        if (q->graded) {
          g = std::max(0.05, std::round(sample_beta(rng_, profile_.grade_a, profile_.grade_b) * 20.0) / 20.0);
          grade = g;
        }
        emit(out, t, Action::kQuizSubmit, *q, grade);
        if (!q->graded || g >= 0.8 || u(rng_) < 0.3) break;
      }
    }
    return t;
  }

  int64_t session(int week, int64_t t, std::vector<InteractionEvent>& out) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int n_videos = 1;
    switch (archetype_) {
      case Archetype::kEngaged: n_videos = 1 + static_cast<int>(u(rng_) * 3); break;
      case Archetype::kErratic: n_videos = 1 + static_cast<int>(u(rng_) * 4); break;
      case Archetype::kEarlyDropout: n_videos = 1 + static_cast<int>(u(rng_) * 2); break;
      case Archetype::kDisengaged: n_videos = 1; break;
    }
    for (int i = 0; i < n_videos; ++i) {
      const LearningObject* v = pick_video(week);
      if (v == nullptr) break;
      t = watch(*v, t, out) + gap(10, 120);
    }
    return take_quizzes(week, t, out);
  }

  const CourseIteration& course_;
  std::string student_;
  Archetype archetype_;
  Rng& rng_;
  Profile profile_;
  std::vector<const LearningObject*> videos_;
  std::vector<const LearningObject*> quizzes_;
  std::set<std::string> watched_;
  std::set<std::string> attempted_;
};

std::vector<LearningObject> make_schedule(int duration, int64_t start, Rng& rng) {
  std::uniform_int_distribution<int> n_videos(3, 5);
  std::uniform_int_distribution<int> n_quizzes(1, 2);
  std::uniform_real_distribution<double> len(300.0, 900.0);
  std::vector<LearningObject> out;
  for (int w = 0; w < duration; ++w) {
    const int nv = n_videos(rng);
    for (int i = 0; i < nv; ++i) {
      LearningObject o;
      o.object_id = "v" + std::to_string(w) + "_" + std::to_string(i);
      o.kind = ObjectKind::kVideo;
      o.release_week = w;
      o.release_time = start + w * kSecondsPerWeek;
      o.video_duration = std::round(len(rng));
      out.push_back(o);
    }
    const int nq = n_quizzes(rng);
    for (int i = 0; i < nq; ++i) {
      LearningObject o;
      o.object_id = "q" + std::to_string(w) + "_" + std::to_string(i);
      o.kind = ObjectKind::kQuiz;
      o.release_week = w;
      o.release_time = start + w * kSecondsPerWeek;
      o.graded = true;
      out.push_back(o);
    }
    if (w % 2 == 1) {
      LearningObject o;
      o.object_id = "p" + std::to_string(w);
      o.kind = ObjectKind::kQuiz;
      o.release_week = w;
      o.release_time = start + w * kSecondsPerWeek;
      o.graded = false;
      out.push_back(o);
    }
  }
  return out;
}

std::string sentence(const Topic& topic, Rng& rng, int words) {
  std::uniform_int_distribution<size_t> pick(0, topic.words.size() - 1);
  std::string s;
  for (int i = 0; i < words; ++i) {
    if (i) s += ' ';
    s += topic.words[pick(rng)];
  }
  return s;
}

CourseMetaRaw make_meta(const Topic& topic, Level level, Language language,
                        int duration, Rng& rng) {
  CourseMetaRaw m;
  m.duration_weeks = duration;
  m.level = level;
  m.language = language;
  m.title = std::string(level_phrase(level)) + " " + sentence(topic, rng, 3);
  m.short_description = "A " + std::string(level_phrase(level)) + " course on " +
                        sentence(topic, rng, 5) + ".";
  m.long_description = "Students study " + sentence(topic, rng, 6) + ". The " +
                       std::string(level_phrase(level)) + " program covers " +
                       sentence(topic, rng, 6) + ". Weekly quizzes assess " +
                       sentence(topic, rng, 4) + ".";
  return m;
}

Archetype draw_archetype(const ArchetypeMix& mix, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = u(rng);
  if (r < mix.engaged) return Archetype::kEngaged;
  if (r < mix.engaged + mix.disengaged) return Archetype::kDisengaged;
  if (r < mix.engaged + mix.disengaged + mix.early_dropout) return Archetype::kEarlyDropout;
  return Archetype::kErratic;
}

double level_sign(Level l) { return l == Level::kMaster ? -1.0 : 1.0; }

}  // namespace

std::string_view archetype_name(Archetype a) {
  switch (a) {
    case Archetype::kEngaged: return "engaged";
    case Archetype::kDisengaged: return "disengaged";
    case Archetype::kEarlyDropout: return "early_dropout";
    case Archetype::kErratic: return "erratic";
  }
  return "engaged";
}

double erratic_pass_probability(const ScenarioConfig& c, Level level) {
  return std::clamp(c.erratic_pass + 0.45 * c.coupling * level_sign(level), 0.0, 1.0);
}

void validate_scenario(const ScenarioConfig& c) {
  const auto& m = c.mix;
  for (double p : {m.engaged, m.disengaged, m.early_dropout, m.erratic}) {
    if (p < 0.0) throw ConfigError("archetype shares must be non-negative");
  }
  if (std::abs(m.engaged + m.disengaged + m.early_dropout + m.erratic - 1.0) > 1e-9) {
    throw ConfigError("archetype mixture must sum to 1");
  }
  for (double p : {c.engaged_pass, c.disengaged_pass, c.erratic_pass}) {
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("pass rates must lie in (0,1)");
  }
  if (c.coupling < 0.0 || c.coupling > 1.0) throw ConfigError("coupling must lie in [0,1]");
  if (c.course_sets.empty()) throw ConfigError("scenario has no course sets");
  if (c.duration_min < 3 || c.duration_max < c.duration_min) {
    throw ConfigError("duration range must satisfy 3 <= min <= max");
  }
  int n_courses = 0;
  bool any_train = false;
  std::set<std::string> names;
  for (const auto& s : c.course_sets) {
    if (s.iterations < 1) throw ConfigError("course set " + s.name + " needs >= 1 iteration");
    if (!names.insert(s.name).second) throw ConfigError("duplicate course set " + s.name);
    if (s.name.empty() || s.name.find_first_of("/\\ ") != std::string::npos) {
      throw ConfigError("course set names must be non-empty path-safe tokens");
    }
    n_courses += s.iterations;
    if (!s.transfer_last || s.iterations > 1) any_train = true;
    if (s.erratic_pass_override && !(*s.erratic_pass_override >= 0.0 && *s.erratic_pass_override <= 1.0)) {
      throw ConfigError("erratic_pass_override must lie in [0,1]");
    }
  }
  if (!any_train) throw ConfigError("scenario has no training course");
  if (c.students_total < 10 * n_courses) {
    throw ConfigError("need at least 10 students per course");
  }
}

Generated generate_corpus(const ScenarioConfig& config) {
  validate_scenario(config);
  Generated g;
  int n_courses = 0;
  for (const auto& s : config.course_sets) n_courses += s.iterations;
  const int base = config.students_total / n_courses;
  int extra = config.students_total % n_courses;

  for (size_t si = 0; si < config.course_sets.size(); ++si) {
    const CourseSetSpec& set = config.course_sets[si];
    Rng set_rng(derive_seed(config.seed, "set:" + set.name));
    const Topic& topic = topics()[fnv1a64(set.name) % topics().size()];
    const Level level = set.level.value_or(static_cast<Level>(si % 3));
    const Language language = set.language.value_or(si % 2 ? Language::kFrench : Language::kEnglish);
    std::uniform_int_distribution<int> dur(config.duration_min, config.duration_max);
    const int duration = dur(set_rng);
    const CourseMetaRaw meta = make_meta(topic, level, language, duration, set_rng);
    const double erratic_pass = set.erratic_pass_override.value_or(
        erratic_pass_probability(config, level));

    for (int it = 1; it <= set.iterations; ++it) {
      CourseIteration c;
      c.course_set_id = set.name;
      c.iteration_index = it;
      c.duration_weeks = duration;
      c.start_time = kBaseEpoch + static_cast<int64_t>(it - 1) * 52 * kSecondsPerWeek +
                     static_cast<int64_t>(si) * 2 * kSecondsPerWeek;
      c.meta = meta;
      const std::string id = c.id();
      Rng rng(derive_seed(config.seed, "course:" + id));
      c.schedule = make_schedule(duration, c.start_time, rng);

      const bool last = it == set.iterations;
      const bool flip = set.flip_prior_labels && !last;
      int n_students = base + (extra > 0 ? 1 : 0);
      if (extra > 0) --extra;
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (int k = 0; k < n_students; ++k) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "s%04d", k);
        const std::string student = id + ":" + buf;
        StudentTruth truth;
        truth.archetype = draw_archetype(config.mix, rng);
        truth.early_dropout = truth.archetype == Archetype::kEarlyDropout;
        double p_pass = 0.0;
        switch (truth.archetype) {
          case Archetype::kEngaged: p_pass = config.engaged_pass; break;
          case Archetype::kDisengaged: p_pass = config.disengaged_pass; break;
          case Archetype::kEarlyDropout: p_pass = 0.0; break;
          case Archetype::kErratic: p_pass = erratic_pass; break;
        }
        const bool pass = u(rng) < p_pass;
        truth.label = (pass != flip) ? Outcome::kPass : Outcome::kFail;
        StudentSimulator sim(c, student, truth.archetype, rng);
        auto events = sim.run();
        if (!events.empty()) c.logs.emplace(student, std::move(events));
        c.labels.emplace(student, truth.label);
        g.truth.students[id][student] = truth;
      }
      char desc[128];
      std::snprintf(desc, sizeof(desc), "level=%s;erratic_pass=%.4f;flipped=%d",
                    std::string(level_name(level)).c_str(), erratic_pass, flip ? 1 : 0);
      g.truth.course_descriptor[id] = desc;
      validate_course(c);
      if (set.transfer_last && last) {
        g.corpus.transfer_ids.insert(id);
      } else {
        g.corpus.train_ids.insert(id);
      }
      g.corpus.courses.push_back(std::move(c));
    }
  }
  validate_corpus(g.corpus);
  return g;
}

ScenarioConfig bundled_scenario(const std::string& name) {
  ScenarioConfig c;
  c.name = name;
  if (name == "small") {
    c.students_total = 200;
    c.duration_min = 5;
    c.duration_max = 8;
    c.course_sets = {
        {"linalg", 2, Level::kBachelor, Language::kEnglish, true, std::nullopt, false},
        {"signals", 1, Level::kMaster, Language::kFrench, false, std::nullopt, false},
    };
  } else if (name == "medium") {
    c.students_total = 2000;
    c.course_sets = {
        {"linalg", 3, Level::kBachelor, Language::kEnglish, true, std::nullopt, false},
        {"signals", 3, Level::kMaster, Language::kEnglish, true, std::nullopt, false},
        {"ecology", 2, Level::kPropedeutic, Language::kFrench, false, std::nullopt, false},
        {"finance", 1, Level::kMaster, Language::kFrench, false, std::nullopt, false},
        {"geometry", 1, Level::kBachelor, Language::kFrench, true, std::nullopt, false},
    };
  } else {
    throw ConfigError("unknown bundled scenario '" + name + "' (expected small or medium)");
  }
  return c;
}

ScenarioConfig scenario_from_json(const std::string& text) {
  static const std::set<std::string> kKeys = {
      "name", "course_sets", "students_total", "duration_min", "duration_max", "mix",
      "engaged_pass", "disengaged_pass", "erratic_pass", "coupling", "seed", "base"};
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (!kKeys.count(k)) throw ConfigError("scenario: unknown key '" + k + "'");
  }
  ScenarioConfig c;
  try {
    if (j.contains("base")) c = bundled_scenario(j["base"].get<std::string>());
    c.name = j.value("name", c.name);
    c.students_total = j.value("students_total", c.students_total);
    c.duration_min = j.value("duration_min", c.duration_min);
    c.duration_max = j.value("duration_max", c.duration_max);
    c.engaged_pass = j.value("engaged_pass", c.engaged_pass);
    c.disengaged_pass = j.value("disengaged_pass", c.disengaged_pass);
    c.erratic_pass = j.value("erratic_pass", c.erratic_pass);
    c.coupling = j.value("coupling", c.coupling);
    c.seed = j.value("seed", c.seed);
    if (j.contains("mix")) {
      const auto& m = j["mix"];
      c.mix.engaged = m.value("engaged", c.mix.engaged);
      c.mix.disengaged = m.value("disengaged", c.mix.disengaged);
      c.mix.early_dropout = m.value("early_dropout", c.mix.early_dropout);
      c.mix.erratic = m.value("erratic", c.mix.erratic);
    }
    if (j.contains("course_sets")) {
      c.course_sets.clear();
      for (const auto& s : j["course_sets"]) {
        CourseSetSpec spec;
        spec.name = s.at("name").get<std::string>();
        spec.iterations = s.value("iterations", 1);
        if (s.contains("level")) {
          auto l = parse_level(s["level"].get<std::string>());
          if (!l) throw ConfigError("scenario: unknown level in set " + spec.name);
          spec.level = l;
        }
        if (s.contains("language")) {
          auto l = parse_language(s["language"].get<std::string>());
          if (!l) throw ConfigError("scenario: unknown language in set " + spec.name);
          spec.language = l;
        }
        spec.transfer_last = s.value("transfer_last", false);
        if (s.contains("erratic_pass_override")) {
          spec.erratic_pass_override = s["erratic_pass_override"].get<double>();
        }
        spec.flip_prior_labels = s.value("flip_prior_labels", false);
        c.course_sets.push_back(spec);
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  validate_scenario(c);
  return c;
}

std::string scenario_to_json(const ScenarioConfig& c) {
  json j;
  j["name"] = c.name;
  j["students_total"] = c.students_total;
  j["duration_min"] = c.duration_min;
  j["duration_max"] = c.duration_max;
  j["engaged_pass"] = c.engaged_pass;
  j["disengaged_pass"] = c.disengaged_pass;
  j["erratic_pass"] = c.erratic_pass;
  j["coupling"] = c.coupling;
  j["seed"] = c.seed;
  j["mix"] = {{"engaged", c.mix.engaged},
              {"disengaged", c.mix.disengaged},
              {"early_dropout", c.mix.early_dropout},
              {"erratic", c.mix.erratic}};
  j["course_sets"] = json::array();
  for (const auto& s : c.course_sets) {
    json o;
    o["name"] = s.name;
    o["iterations"] = s.iterations;
    if (s.level) o["level"] = level_name(*s.level);
    if (s.language) o["language"] = language_name(*s.language);
    o["transfer_last"] = s.transfer_last;
    if (s.erratic_pass_override) o["erratic_pass_override"] = *s.erratic_pass_override;
    o["flip_prior_labels"] = s.flip_prior_labels;
    j["course_sets"].push_back(o);
  }
  return j.dump(2);
}

std::string GroundTruth::to_json() const {
  json j;
  j["courses"] = json::object();
  for (const auto& [course, desc] : course_descriptor) {
    j["courses"][course]["descriptor"] = desc;
  }
  for (const auto& [course, students] : this->students) {
    json s = json::object();
    for (const auto& [id, t] : students) {
      s[id] = {{"archetype", archetype_name(t.archetype)},
               {"label", t.label == Outcome::kPass ? "pass" : "fail"},
               {"early_dropout", t.early_dropout}};
    }
    j["courses"][course]["students"] = s;
  }
  return j.dump(1);
}

}  // namespace moocxfer::synth
