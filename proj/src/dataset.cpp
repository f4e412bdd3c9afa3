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

#include "moocxfer/dataset.hpp"

#include <algorithm>

#include "moocxfer/common.hpp"
#include "moocxfer/metrics.hpp"

namespace moocxfer {

void Dataset::add_course(const std::string& course_id, const features::BehaviorTensor& tensor,
                         const std::vector<double>& meta,
                         const std::map<std::string, Outcome>& labels) {
  if (tensor.weeks != weeks_ || static_cast<int>(tensor.width()) != behavior_dim_) {
    throw ArgumentError("course " + course_id + ": tensor is " + std::to_string(tensor.weeks) +
                        "x" + std::to_string(tensor.width()) + ", dataset expects " +
                        std::to_string(weeks_) + "x" + std::to_string(behavior_dim_));
  }
  if (std::find(courses_.begin(), courses_.end(), course_id) != courses_.end()) {
    throw ArgumentError("course " + course_id + " added twice");
  }
  const size_t c = courses_.size();
  courses_.push_back(course_id);
  meta_.push_back(meta);
  for (size_t s = 0; s < tensor.students.size(); ++s) {
    auto it = labels.find(tensor.students[s]);
    if (it == labels.end()) {
      throw DataError("course " + course_id + ": no label for " + tensor.students[s]);
    }
    const auto row = tensor.student(s);
    behavior_.insert(behavior_.end(), row.begin(), row.end());
    students_.push_back(tensor.students[s]);
    course_index_.push_back(c);
    labels_.push_back(it->second == Outcome::kFail ? 1 : 0);
  }
}

model::Sample Dataset::sample(size_t i) const {
  const size_t n = static_cast<size_t>(weeks_) * behavior_dim_;
  model::Sample s;
  s.behavior = std::span<const double>(behavior_.data() + i * n, n);
  s.weeks = weeks_;
  s.meta = meta_[course_index_[i]];
  return s;
}

std::vector<size_t> Dataset::indices_of_course(const std::string& course_id) const {
  std::vector<size_t> out;
  for (size_t i = 0; i < size(); ++i) {
    if (courses_[course_index_[i]] == course_id) out.push_back(i);
  }
  return out;
}

Dataset Dataset::subset(const std::vector<size_t>& indices) const {
  Dataset d(weeks_, behavior_dim_);
  d.courses_ = courses_;
  d.meta_ = meta_;
  const size_t n = static_cast<size_t>(weeks_) * behavior_dim_;
  for (size_t i : indices) {
    d.behavior_.insert(d.behavior_.end(), behavior_.begin() + i * n, behavior_.begin() + (i + 1) * n);
    d.students_.push_back(students_[i]);
    d.course_index_.push_back(course_index_[i]);
    d.labels_.push_back(labels_[i]);
  }
  return d;
}

void Dataset::append(const Dataset& other) {
  if (empty() && courses_.empty()) {
    weeks_ = other.weeks_;
    behavior_dim_ = other.behavior_dim_;
  }
  if (other.weeks_ != weeks_ || other.behavior_dim_ != behavior_dim_) {
    throw ArgumentError("cannot append datasets of different shapes");
  }
  std::vector<size_t> remap(other.courses_.size());
  for (size_t c = 0; c < other.courses_.size(); ++c) {
    auto it = std::find(courses_.begin(), courses_.end(), other.courses_[c]);
    if (it == courses_.end()) {
      remap[c] = courses_.size();
      courses_.push_back(other.courses_[c]);
      meta_.push_back(other.meta_[c]);
    } else {
      remap[c] = static_cast<size_t>(it - courses_.begin());
    }
  }
  behavior_.insert(behavior_.end(), other.behavior_.begin(), other.behavior_.end());
  students_.insert(students_.end(), other.students_.begin(), other.students_.end());
  for (size_t ci : other.course_index_) course_index_.push_back(remap[ci]);
  labels_.insert(labels_.end(), other.labels_.begin(), other.labels_.end());
}

std::vector<std::vector<size_t>> split_by_course(const Dataset& data,
                                                 const std::vector<double>& fractions,
                                                 uint64_t seed) {
  std::vector<std::vector<size_t>> parts(fractions.size());
  for (const auto& course : data.course_ids()) {
    const auto idx = data.indices_of_course(course);
    if (idx.empty()) continue;
    std::vector<int> y;
    for (size_t i : idx) y.push_back(data.label(i));
    const auto local = stratified_split(y, fractions, derive_seed(seed, "course:" + course));
    for (size_t k = 0; k < parts.size(); ++k) {
      for (size_t j : local[k]) parts[k].push_back(idx[j]);
    }
  }
  for (auto& p : parts) std::sort(p.begin(), p.end());
  return parts;
}

}  // namespace moocxfer
