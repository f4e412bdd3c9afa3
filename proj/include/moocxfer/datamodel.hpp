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

#ifndef MOOCXFER_DATAMODEL_HPP_
#define MOOCXFER_DATAMODEL_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace moocxfer {

inline constexpr int64_t kSecondsPerWeek = 604800;
inline constexpr int64_t kSecondsPerDay = 86400;

enum class Action : uint8_t {
  kVideoLoad,
  kVideoPlay,
  kVideoPause,
  kVideoStop,
  kVideoSeekBackward,
  kVideoSeekForward,
  kVideoSpeedChange,
  kQuizSubmit,
};
inline constexpr int kNumActions = 8;

// Dotted wire names, e.g. "Video.Play", "Quiz.Submit".
std::string_view action_name(Action a);
std::optional<Action> parse_action(std::string_view s);
inline bool is_video_action(Action a) { return a != Action::kQuizSubmit; }
inline bool is_seek(Action a) {
  return a == Action::kVideoSeekBackward || a == Action::kVideoSeekForward;
}

struct InteractionEvent {
  std::string student_id;
  int64_t timestamp = 0;
  Action action = Action::kVideoLoad;
  std::string object_id;
  std::optional<double> grade;         // Quiz.Submit on graded quizzes only
  std::optional<double> seek_seconds;  // seek events only

  bool operator==(const InteractionEvent&) const = default;
};

enum class ObjectKind { kVideo, kQuiz };

struct LearningObject {
  std::string object_id;
  ObjectKind kind = ObjectKind::kVideo;
  int release_week = 0;
  int64_t release_time = 0;
  bool graded = false;
  std::optional<double> video_duration;

  bool operator==(const LearningObject&) const = default;
};

enum class Level { kBachelor, kMaster, kPropedeutic };
enum class Language { kFrench, kEnglish };
enum class Outcome { kPass, kFail };

std::string_view level_name(Level l);
std::optional<Level> parse_level(std::string_view s);
std::string_view language_name(Language l);
std::optional<Language> parse_language(std::string_view s);

struct CourseMetaRaw {
  int duration_weeks = 0;
  Level level = Level::kBachelor;
  Language language = Language::kEnglish;
  std::string title;
  std::string short_description;
  std::string long_description;

  bool operator==(const CourseMetaRaw&) const = default;
};

struct CourseIteration {
  std::string course_set_id;
  int iteration_index = 1;
  int duration_weeks = 1;
  int64_t start_time = 0;
  std::vector<LearningObject> schedule;
  CourseMetaRaw meta;
  // Ordered by student id; events per student sorted by timestamp.
  std::map<std::string, std::vector<InteractionEvent>> logs;
  std::map<std::string, Outcome> labels;

  // "<course_set>-<iteration>", also the directory name on disk.
  std::string id() const;
  int64_t week_start(int week) const { return start_time + week * kSecondsPerWeek; }

  bool operator==(const CourseIteration&) const = default;
};

std::string course_id(std::string_view course_set, int iteration);

// Object-id lookup over a schedule.
class ScheduleIndex {
 public:
  explicit ScheduleIndex(const std::vector<LearningObject>& schedule);
  const LearningObject* find(const std::string& object_id) const;
  int index_of(const std::string& object_id) const;  // -1 when absent

 private:
  const std::vector<LearningObject>* schedule_;
  std::unordered_map<std::string, int> index_;
};

// Structural checks shared by the loader and the generator. Throws DataError.
void validate_course(const CourseIteration& course);

struct Corpus {
  std::vector<CourseIteration> courses;
  std::set<std::string> train_ids;
  std::set<std::string> transfer_ids;

  const CourseIteration& course(const std::string& id) const;
  std::vector<const CourseIteration*> select(const std::set<std::string>& ids) const;
  int max_duration() const;
};

void validate_corpus(const Corpus& corpus);

// Weeks visible at early-prediction level e: floor(e * duration).
int weeks_kept(const CourseIteration& course, double level);

// Keeps events strictly before start + weeks_kept * week; everything else is
// unchanged. Throws ArgumentError for e outside (0,1] or zero weeks kept.
CourseIteration truncate_to_level(const CourseIteration& course, double level);

}  // namespace moocxfer

#endif  // MOOCXFER_DATAMODEL_HPP_
