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

#include "moocxfer/course_io.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "moocxfer/common.hpp"

namespace moocxfer {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

InteractionEvent event_from_json(const json& j, size_t line) {
  const std::string where = "line " + std::to_string(line) + ": ";
  if (!j.is_object()) throw DataError(where + "event record must be an object");
  InteractionEvent e;
  try {
    e.student_id = j.at("student").get<std::string>();
    e.timestamp = j.at("t").get<int64_t>();
    e.object_id = j.at("object").get<std::string>();
    const auto action = j.at("action").get<std::string>();
    auto parsed = parse_action(action);
    if (!parsed) throw DataError(where + "unknown action '" + action + "'");
    e.action = *parsed;
    if (j.contains("grade")) e.grade = j.at("grade").get<double>();
    if (j.contains("seek_seconds")) e.seek_seconds = j.at("seek_seconds").get<double>();
  } catch (const json::exception& ex) {
    throw DataError(where + "malformed event: " + ex.what());
  }
  if (e.timestamp < 0) throw DataError(where + "negative timestamp");
  if (e.grade) {
    if (e.action != Action::kQuizSubmit) throw DataError(where + "grade on non-submit event");
    if (!(*e.grade >= 0.0 && *e.grade <= 1.0)) throw DataError(where + "grade out of range");
  }
  if (e.seek_seconds && !is_seek(e.action)) {
    throw DataError(where + "seek_seconds on non-seek event");
  }
  return e;
}

json object_to_json(const LearningObject& o) {
  json j;
  j["object"] = o.object_id;
  j["kind"] = o.kind == ObjectKind::kVideo ? "video" : "quiz";
  j["release_week"] = o.release_week;
  j["release_time"] = o.release_time;
  if (o.kind == ObjectKind::kQuiz) j["graded"] = o.graded;
  if (o.video_duration) j["video_duration"] = *o.video_duration;
  return j;
}

LearningObject object_from_json(const json& j) {
  LearningObject o;
  o.object_id = j.at("object").get<std::string>();
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "video") {
    o.kind = ObjectKind::kVideo;
  } else if (kind == "quiz") {
    o.kind = ObjectKind::kQuiz;
  } else {
    throw DataError("schedule: unknown object kind '" + kind + "'");
  }
  o.release_week = j.at("release_week").get<int>();
  o.release_time = j.at("release_time").get<int64_t>();
  o.graded = j.value("graded", false);
  if (j.contains("video_duration")) o.video_duration = j.at("video_duration").get<double>();
  return o;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  size_t i = 0;
  while (i < s.size() && s[i] == ' ') ++i;
  return s.substr(i);
}

std::map<std::string, Outcome> parse_labels(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  size_t n = 0;
  std::map<std::string, Outcome> labels;
  while (std::getline(in, line)) {
    ++n;
    line = trim(line);
    if (n == 1) {
      if (line != "student_id,label") throw DataError(path + ": expected header student_id,label");
      continue;
    }
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw DataError(path + ": line " + std::to_string(n) + ": expected two columns");
    }
    const std::string student = line.substr(0, comma);
    const std::string label = line.substr(comma + 1);
    Outcome o;
    if (label == "pass") {
      o = Outcome::kPass;
    } else if (label == "fail") {
      o = Outcome::kFail;
    } else {
      throw DataError(path + ": line " + std::to_string(n) + ": unknown label '" + label + "'");
    }
    if (!labels.emplace(student, o).second) {
      throw DataError(path + ": duplicate student " + student);
    }
  }
  return labels;
}

}  // namespace

std::vector<InteractionEvent> parse_event_lines(std::istream& in) {
  std::vector<InteractionEvent> events;
  std::string line;
  size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& ex) {
      throw DataError("line " + std::to_string(n) + ": malformed JSON: " + ex.what());
    }
    events.push_back(event_from_json(j, n));
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const InteractionEvent& a, const InteractionEvent& b) {
                     if (a.student_id != b.student_id) return a.student_id < b.student_id;
                     return a.timestamp < b.timestamp;
                   });
  return events;
}

std::vector<InteractionEvent> parse_event_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return parse_event_lines(in);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::string format_event_line(const InteractionEvent& e) {
  json j;
  j["student"] = e.student_id;
  j["t"] = e.timestamp;
  j["action"] = action_name(e.action);
  j["object"] = e.object_id;
  if (e.grade) j["grade"] = *e.grade;
  if (e.seek_seconds) j["seek_seconds"] = *e.seek_seconds;
  return j.dump();
}

CourseIteration load_course(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError("course directory '" + dir + "' not found");
  for (const char* f : {"events.jsonl", "schedule.json", "meta.json", "labels.csv"}) {
    if (!fs::exists(fs::path(dir) / f)) throw DataError(dir + ": missing " + f);
  }
  CourseIteration c;
  try {
    const json meta = json::parse(read_file((fs::path(dir) / "meta.json").string()));
    c.course_set_id = meta.at("course_set").get<std::string>();
    c.iteration_index = meta.at("iteration").get<int>();
    c.duration_weeks = meta.at("duration_weeks").get<int>();
    c.start_time = meta.at("start_time").get<int64_t>();
    c.meta.duration_weeks = c.duration_weeks;
    const auto level = meta.at("level").get<std::string>();
    const auto language = meta.at("language").get<std::string>();
    auto l = parse_level(level);
    if (!l) throw DataError(dir + ": unknown level '" + level + "'");
    auto g = parse_language(language);
    if (!g) throw DataError(dir + ": unknown language '" + language + "'");
    c.meta.level = *l;
    c.meta.language = *g;
    c.meta.title = meta.at("title").get<std::string>();
    c.meta.short_description = meta.at("short_description").get<std::string>();
    c.meta.long_description = meta.at("long_description").get<std::string>();

    const json schedule = json::parse(read_file((fs::path(dir) / "schedule.json").string()));
    if (!schedule.is_array()) throw DataError(dir + ": schedule.json must be an array");
    for (const auto& o : schedule) c.schedule.push_back(object_from_json(o));
  } catch (const json::exception& ex) {
    throw DataError(dir + ": " + ex.what());
  }
  c.labels = parse_labels((fs::path(dir) / "labels.csv").string());
  for (auto& e : parse_event_log((fs::path(dir) / "events.jsonl").string())) {
    auto& list = c.logs[e.student_id];
    list.push_back(std::move(e));
  }
  validate_course(c);
  return c;
}

void save_course(const CourseIteration& c, const std::string& dir) {
  fs::create_directories(dir);
  json meta;
  meta["course_set"] = c.course_set_id;
  meta["iteration"] = c.iteration_index;
  meta["duration_weeks"] = c.duration_weeks;
  meta["start_time"] = c.start_time;
  meta["level"] = level_name(c.meta.level);
  meta["language"] = language_name(c.meta.language);
  meta["title"] = c.meta.title;
  meta["short_description"] = c.meta.short_description;
  meta["long_description"] = c.meta.long_description;
  write_file((fs::path(dir) / "meta.json").string(), meta.dump(2) + "\n");

  json schedule = json::array();
  for (const auto& o : c.schedule) schedule.push_back(object_to_json(o));
  write_file((fs::path(dir) / "schedule.json").string(), schedule.dump(2) + "\n");

  std::string labels = "student_id,label\n";
  for (const auto& [s, o] : c.labels) {
    labels += s + "," + (o == Outcome::kPass ? "pass" : "fail") + "\n";
  }
  write_file((fs::path(dir) / "labels.csv").string(), labels);

  std::string events;
  for (const auto& [s, list] : c.logs) {
    for (const auto& e : list) events += format_event_line(e) + "\n";
  }
  write_file((fs::path(dir) / "events.jsonl").string(), events);
}

Corpus load_corpus(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError("corpus directory '" + dir + "' not found");
  const auto manifest_path = (fs::path(dir) / "corpus.json").string();
  if (!fs::exists(manifest_path)) throw DataError(dir + ": missing corpus.json");
  Corpus corpus;
  json manifest;
  try {
    manifest = json::parse(read_file(manifest_path));
    corpus.train_ids = manifest.at("train").get<std::set<std::string>>();
    corpus.transfer_ids = manifest.at("transfer").get<std::set<std::string>>();
  } catch (const json::exception& ex) {
    throw DataError(manifest_path + ": " + ex.what());
  }
  std::set<std::string> ids = corpus.train_ids;
  ids.insert(corpus.transfer_ids.begin(), corpus.transfer_ids.end());
  for (const auto& id : ids) {
    corpus.courses.push_back(load_course((fs::path(dir) / id).string()));
    if (corpus.courses.back().id() != id) {
      throw DataError(dir + "/" + id + ": meta.json names course " + corpus.courses.back().id());
    }
  }
  validate_corpus(corpus);
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& dir) {
  fs::create_directories(dir);
  json manifest;
  manifest["train"] = corpus.train_ids;
  manifest["transfer"] = corpus.transfer_ids;
  write_file((fs::path(dir) / "corpus.json").string(), manifest.dump(2) + "\n");
  for (const auto& c : corpus.courses) save_course(c, (fs::path(dir) / c.id()).string());
}

}  // namespace moocxfer
