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

#include "moocxfer/datamodel.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "moocxfer/common.hpp"

namespace moocxfer {
namespace {

constexpr std::array<std::string_view, kNumActions> kActionNames = {
    "Video.Load",         "Video.Play",        "Video.Pause",
    "Video.Stop",         "Video.SeekBackward", "Video.SeekForward",
    "Video.SpeedChange",  "Quiz.Submit",
};

}  // namespace

std::string_view action_name(Action a) {
  return kActionNames[static_cast<size_t>(a)];
}

std::optional<Action> parse_action(std::string_view s) {
  for (size_t i = 0; i < kActionNames.size(); ++i) {
    if (kActionNames[i] == s) return static_cast<Action>(i);
  }
  return std::nullopt;
}

std::string_view level_name(Level l) {
  switch (l) {
    case Level::kBachelor: return "bachelor";
    case Level::kMaster: return "master";
    case Level::kPropedeutic: return "propedeutic";
  }
  return "bachelor";
}

std::optional<Level> parse_level(std::string_view s) {
  if (s == "bachelor") return Level::kBachelor;
  if (s == "master") return Level::kMaster;
  if (s == "propedeutic") return Level::kPropedeutic;
  return std::nullopt;
}

std::string_view language_name(Language l) {
  return l == Language::kFrench ? "french" : "english";
}

std::optional<Language> parse_language(std::string_view s) {
  if (s == "french") return Language::kFrench;
  if (s == "english") return Language::kEnglish;
  return std::nullopt;
}

std::string course_id(std::string_view course_set, int iteration) {
  return std::string(course_set) + "-" + std::to_string(iteration);
}

std::string CourseIteration::id() const {
  return course_id(course_set_id, iteration_index);
}

ScheduleIndex::ScheduleIndex(const std::vector<LearningObject>& schedule)
    : schedule_(&schedule) {
  for (size_t i = 0; i < schedule.size(); ++i) {
    index_.emplace(schedule[i].object_id, static_cast<int>(i));
  }
}

const LearningObject* ScheduleIndex::find(const std::string& object_id) const {
  const int i = index_of(object_id);
  return i < 0 ? nullptr : &(*schedule_)[static_cast<size_t>(i)];
}

int ScheduleIndex::index_of(const std::string& object_id) const {
  auto it = index_.find(object_id);
  return it == index_.end() ? -1 : it->second;
}

void validate_course(const CourseIteration& c) {
  const std::string id = c.id();
  if (c.duration_weeks < 1) throw DataError(id + ": duration_weeks must be positive");
  if (c.iteration_index < 1) throw DataError(id + ": iteration must be >= 1");
  if (c.meta.duration_weeks != c.duration_weeks) {
    throw DataError(id + ": meta duration does not match course duration");
  }
  if (c.meta.title.empty() || c.meta.short_description.empty() ||
      c.meta.long_description.empty()) {
    throw DataError(id + ": meta strings must be non-empty");
  }
  std::set<std::string> seen;
  for (const auto& o : c.schedule) {
    if (!seen.insert(o.object_id).second) {
      throw DataError(id + ": duplicate object " + o.object_id);
    }
    if (o.release_week < 0 || o.release_week >= c.duration_weeks) {
      throw DataError(id + ": object " + o.object_id + " released outside course");
    }
    if ((o.kind == ObjectKind::kVideo) != o.video_duration.has_value()) {
      throw DataError(id + ": object " + o.object_id +
                      " video_duration present iff kind = video");
    }
    if (o.kind == ObjectKind::kVideo && o.graded) {
      throw DataError(id + ": video " + o.object_id + " cannot be graded");
    }
  }
  ScheduleIndex index(c.schedule);
  for (const auto& [student, events] : c.logs) {
    if (!c.labels.count(student)) {
      throw DataError(id + ": student " + student + " has events but no label");
    }
    int64_t prev = 0;
    for (const auto& e : events) {
      if (e.student_id != student) throw DataError(id + ": event filed under wrong student");
      if (e.timestamp < 0) throw DataError(id + ": negative timestamp");
      if (e.timestamp < prev) throw DataError(id + ": events of " + student + " not time-sorted");
      prev = e.timestamp;
      const LearningObject* o = index.find(e.object_id);
      if (o == nullptr) {
        throw DataError(id + ": unknown object " + e.object_id + " (student " + student + ")");
      }
      const bool video = o->kind == ObjectKind::kVideo;
      if (video != is_video_action(e.action)) {
        throw DataError(id + ": action " + std::string(action_name(e.action)) +
                        " on object " + e.object_id + " of the wrong kind");
      }
      if (e.grade && e.action != Action::kQuizSubmit) {
        throw DataError(id + ": grade on non-submit event");
      }
      if (e.grade && (*e.grade < 0.0 || *e.grade > 1.0)) {
        throw DataError(id + ": grade out of range");
      }
      if (e.seek_seconds && !is_seek(e.action)) {
        throw DataError(id + ": seek_seconds on non-seek event");
      }
    }
  }
}

const CourseIteration& Corpus::course(const std::string& id) const {
  for (const auto& c : courses) {
    if (c.id() == id) return c;
  }
  throw DataError("unknown course " + id);
}

std::vector<const CourseIteration*> Corpus::select(const std::set<std::string>& ids) const {
  std::vector<const CourseIteration*> out;
  for (const auto& c : courses) {
    if (ids.count(c.id())) out.push_back(&c);
  }
  return out;
}

int Corpus::max_duration() const {
  int m = 0;
  for (const auto& c : courses) m = std::max(m, c.duration_weeks);
  return m;
}

void validate_corpus(const Corpus& corpus) {
  std::set<std::string> all;
  for (const auto& c : corpus.courses) {
    if (!all.insert(c.id()).second) throw DataError("duplicate course " + c.id());
  }
  for (const auto& id : corpus.train_ids) {
    if (corpus.transfer_ids.count(id)) {
      throw DataError("course " + id + " is in both train and transfer sets");
    }
    if (!all.count(id)) throw DataError("train set names unknown course " + id);
  }
  for (const auto& id : corpus.transfer_ids) {
    if (!all.count(id)) throw DataError("transfer set names unknown course " + id);
  }
  for (const auto& id : all) {
    if (!corpus.train_ids.count(id) && !corpus.transfer_ids.count(id)) {
      throw DataError("course " + id + " is in neither train nor transfer set");
    }
  }
}

int weeks_kept(const CourseIteration& course, double level) {
  if (!(level > 0.0 && level <= 1.0)) {
    throw ArgumentError("early level must be in (0,1], got " + std::to_string(level));
  }
  // The epsilon keeps products such as 0.6 * 10 = 5.999... on the right side.
  return static_cast<int>(std::floor(level * course.duration_weeks + 1e-9));
}

CourseIteration truncate_to_level(const CourseIteration& course, double level) {
  const int kept = weeks_kept(course, level);
  if (kept == 0) throw ArgumentError("early level too small for " + course.id());
  if (kept >= course.duration_weeks) return course;
  const int64_t cutoff = course.week_start(kept);
  CourseIteration out = course;
  for (auto& [student, events] : out.logs) {
    auto end = std::lower_bound(
        events.begin(), events.end(), cutoff,
        [](const InteractionEvent& e, int64_t t) { return e.timestamp < t; });
    events.erase(end, events.end());
  }
  return out;
}

}  // namespace moocxfer
