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

#ifndef MOOCXFER_DATASET_HPP_
#define MOOCXFER_DATASET_HPP_

#include <map>
#include <string>
#include <vector>

#include "moocxfer/behavior_features.hpp"
#include "moocxfer/datamodel.hpp"
#include "moocxfer/models.hpp"

namespace moocxfer {

// Students of one or more courses, ready for a model: padded behaviour
// sequences, one meta vector per course, binary labels (1 = fail).
class Dataset {
 public:
  Dataset() = default;
  Dataset(int weeks, int behavior_dim) : weeks_(weeks), behavior_dim_(behavior_dim) {}

  // Adds every student of `tensor`; labels are looked up by student id.
  void add_course(const std::string& course_id, const features::BehaviorTensor& tensor,
                  const std::vector<double>& meta, const std::map<std::string, Outcome>& labels);

  size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  int weeks() const { return weeks_; }
  int behavior_dim() const { return behavior_dim_; }

  model::Sample sample(size_t i) const;
  int label(size_t i) const { return labels_[i]; }
  const std::vector<int>& labels() const { return labels_; }
  const std::string& course_of(size_t i) const { return courses_[course_index_[i]]; }
  const std::string& student_of(size_t i) const { return students_[i]; }
  // "<course>/<student>", unique across courses.
  std::string key(size_t i) const { return course_of(i) + "/" + student_of(i); }

  std::vector<std::string> course_ids() const { return courses_; }
  std::vector<size_t> indices_of_course(const std::string& course_id) const;

  Dataset subset(const std::vector<size_t>& indices) const;
  // Concatenation; both must share weeks and width.
  void append(const Dataset& other);

 private:
  int weeks_ = 0;
  int behavior_dim_ = features::kBehaviorFeatureCount;
  std::vector<double> behavior_;  // size x weeks x behavior_dim
  std::vector<std::string> students_;
  std::vector<size_t> course_index_;
  std::vector<int> labels_;
  std::vector<std::string> courses_;
  std::vector<std::vector<double>> meta_;  // per course
};

// Stratified split of each course's students (course x label strata), so
// every course contributes proportionally to every partition.
std::vector<std::vector<size_t>> split_by_course(const Dataset& data,
                                                 const std::vector<double>& fractions,
                                                 uint64_t seed);

}  // namespace moocxfer

#endif  // MOOCXFER_DATASET_HPP_
