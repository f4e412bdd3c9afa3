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

#ifndef MOOCXFER_COURSE_IO_HPP_
#define MOOCXFER_COURSE_IO_HPP_

#include <istream>
#include <string>
#include <vector>

#include "moocxfer/datamodel.hpp"

namespace moocxfer {

// One JSON object per line:
//   {"student":"s1","t":100,"action":"Video.Play","object":"v1"}
// with optional "grade" (Quiz.Submit) and "seek_seconds" (seeks). Output is
// sorted by (student, t), stable for equal timestamps. Errors carry the
// 1-based line number.
std::vector<InteractionEvent> parse_event_lines(std::istream& in);
std::vector<InteractionEvent> parse_event_log(const std::string& path);

std::string format_event_line(const InteractionEvent& e);

// Reads events.jsonl, schedule.json, meta.json and labels.csv from `dir`.
CourseIteration load_course(const std::string& dir);
void save_course(const CourseIteration& course, const std::string& dir);

// A corpus directory holds one sub-directory per course iteration plus
// corpus.json: {"train": [ids], "transfer": [ids]}.
Corpus load_corpus(const std::string& dir);
void save_corpus(const Corpus& corpus, const std::string& dir);

}  // namespace moocxfer

#endif  // MOOCXFER_COURSE_IO_HPP_
