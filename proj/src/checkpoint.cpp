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

#include "moocxfer/checkpoint.hpp"

#include "moocxfer/common.hpp"

namespace moocxfer::model {

using nlohmann::json;

json norm_stats_to_json(const features::NormStats& s) {
  return json{{"names", s.names}, {"min", s.min}, {"max", s.max}};
}

features::NormStats norm_stats_from_json(const json& j) {
  features::NormStats s;
  s.names = j.at("names").get<std::vector<std::string>>();
  s.min = j.at("min").get<std::vector<double>>();
  s.max = j.at("max").get<std::vector<double>>();
  if (s.min.size() != s.names.size() || s.max.size() != s.names.size()) {
    throw DataError("normalisation statistics have mismatched lengths");
  }
  return s;
}

json meta_stats_to_json(const meta::MetaNormStats& s) {
  return json{{"min", s.min}, {"max", s.max}, {"scaled", s.scaled}};
}

meta::MetaNormStats meta_stats_from_json(const json& j) {
  meta::MetaNormStats s;
  s.min = j.at("min").get<std::vector<double>>();
  s.max = j.at("max").get<std::vector<double>>();
  s.scaled = j.at("scaled").get<std::vector<bool>>();
  if (s.max.size() != s.min.size() || s.scaled.size() != s.min.size()) {
    throw DataError("meta statistics have mismatched lengths");
  }
  return s;
}

std::string checkpoint_to_string(const TrainedModel& m) {
  if (!m.model) throw ArgumentError("checkpoint of an empty model");
  json params = json::object();
  for (const auto& [name, p] : m.model->params().params()) {
    params[name] = json{{"shape", p.value.shape()}, {"data", p.value.values()}};
  }
  json log = json::array();
  for (const auto& e : m.log) {
    log.push_back({{"epoch", e.epoch}, {"loss", e.loss}, {"val_score", e.val_score}});
  }
  json j{{"format", kCheckpointFormat},
         {"spec", spec_to_json(m.model->spec())},
         {"seed", m.model->spec().seed},
         {"max_weeks", m.max_weeks},
         {"level", m.level},
         {"behavior_stats", norm_stats_to_json(m.behavior_stats)},
         {"params", params},
         {"log", log}};
  if (m.meta_stats) j["meta_stats"] = meta_stats_to_json(*m.meta_stats);
  return j.dump(1);
}

TrainedModel checkpoint_from_string(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != kCheckpointFormat) {
      throw DataError("unsupported checkpoint format '" + j.at("format").get<std::string>() + "'");
    }
    TrainedModel m;
    m.model = std::make_unique<Model>(spec_from_json(j.at("spec")));
    m.max_weeks = j.at("max_weeks").get<int>();
    m.level = j.at("level").get<double>();
    m.behavior_stats = norm_stats_from_json(j.at("behavior_stats"));
    if (j.contains("meta_stats")) m.meta_stats = meta_stats_from_json(j.at("meta_stats"));
    std::map<std::string, nn::Tensor> values;
    for (const auto& [name, t] : j.at("params").items()) {
      values.emplace(name, nn::Tensor(t.at("shape").get<std::vector<int>>(),
                                      t.at("data").get<std::vector<double>>()));
    }
    if (values.size() != m.model->params().params().size()) {
      throw DataError("checkpoint has " + std::to_string(values.size()) + " parameters, model has " +
                      std::to_string(m.model->params().params().size()));
    }
    m.model->params().restore(values);
    for (const auto& e : j.at("log")) {
      EpochLog l;
      l.epoch = e.at("epoch").get<int>();
      l.loss = e.at("loss").get<double>();
      l.val_score = e.at("val_score").get<double>();
      m.log.push_back(l);
    }
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  } catch (const ArgumentError& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const TrainedModel& m, const std::string& path) {
  write_file(path, checkpoint_to_string(m));
}

TrainedModel load_checkpoint(const std::string& path) {
  return checkpoint_from_string(read_file(path));
}

}  // namespace moocxfer::model
