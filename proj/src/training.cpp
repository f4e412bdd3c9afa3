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

#include "moocxfer/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include "moocxfer/common.hpp"
#include "moocxfer/metrics.hpp"
#include "moocxfer/optim.hpp"

namespace moocxfer::model {

using nlohmann::json;

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (max_epochs < 0) throw ConfigError("max_epochs must be >= 0");
  if (patience < 1) throw ConfigError("patience must be >= 1");
}

std::vector<double> predict(const Model& model, const Dataset& data) {
  std::vector<double> p(data.size());
  for (size_t i = 0; i < data.size(); ++i) p[i] = model.predict(data.sample(i));
  return p;
}

namespace {

double mean_bce(const std::vector<double>& p, const std::vector<int>& y) {
  std::vector<double> yd(y.begin(), y.end());
  return nn::bce_loss(p, yd);
}

double bac_or_neg_loss(const std::vector<double>& p, const std::vector<int>& y) {
  const auto pred = to_predictions(p);
  const Confusion c = confusion(pred, y);
  if (c.defined()) return c.balanced_accuracy();
  return -mean_bce(p, y);
}

}  // namespace

double validation_score(const Model& model, const Dataset& val) {
  if (val.empty()) throw DataError("empty validation set");
  return bac_or_neg_loss(predict(model, val), val.labels());
}

TrainResult train(Model& model, const Dataset& train, const Dataset& val, const TrainConfig& config) {
  config.validate();
  if (train.empty()) throw DataError("empty training set");
  TrainResult result;
  nn::ParamStore& store = model.params();
  nn::AdamOptions adam;
  adam.lr = config.lr;

  auto train_bac = [&]() {
    return config.track_train_bac ? bac_or_neg_loss(predict(model, train), train.labels()) : -1.0;
  };

  EpochLog first;
  first.epoch = 0;
  first.loss = mean_bce(predict(model, train), train.labels());
  first.val_score = validation_score(model, val);
  first.train_bac = train_bac();
  result.log.push_back(first);
  result.best_epoch = 0;
  result.best_val_score = first.val_score;
  auto best = store.snapshot();
  if (config.stop_at_train_bac && first.train_bac >= *config.stop_at_train_bac) return result;

  Rng shuffle_rng(derive_seed(config.seed, "shuffle"));
  Rng dropout_rng(derive_seed(config.seed, "dropout"));
  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  Model::Trace trace;
  int since_best = 0;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(config.batch_size)) {
      const size_t stop = std::min(order.size(), start + static_cast<size_t>(config.batch_size));
      const double inv = 1.0 / static_cast<double>(stop - start);
      store.zero_grad();
      for (size_t k = start; k < stop; ++k) {
        const size_t i = order[k];
        const double z = model.forward(train.sample(i), true, &dropout_rng, trace);
        const double y = train.label(i);
        const double l = nn::bce_with_logit(z, y);
        if (!std::isfinite(l)) {
          throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", student " +
                              train.key(i) + " (logit " + std::to_string(z) + ")");
        }
        loss_sum += l;
        model.backward(trace, (nn::sigmoid(z) - y) * inv);
      }
      nn::adam_step(store, adam);
    }
    EpochLog log;
    log.epoch = epoch;
    log.loss = loss_sum / static_cast<double>(order.size());
    log.val_score = validation_score(model, val);
    log.train_bac = train_bac();
    result.log.push_back(log);
    if (config.verbose) {
      std::fprintf(stderr, "epoch %d loss %.6f val %.4f\n", epoch, log.loss, log.val_score);
    }
    if (log.val_score > result.best_val_score) {
      result.best_val_score = log.val_score;
      result.best_epoch = epoch;
      best = store.snapshot();
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
    if (config.stop_at_train_bac && log.train_bac >= *config.stop_at_train_bac) {
      result.best_val_score = log.val_score;
      result.best_epoch = epoch;
      best = store.snapshot();
      break;
    }
  }
  store.restore(best);
  return result;
}

TrainResult fine_tune(Model& model, const Dataset& data, TrainConfig config) {
  if (data.empty()) throw DataError("empty fine-tuning set");
  const std::vector<double> fractions = {0.9, 0.1};
  const auto parts = split_by_course(data, fractions, derive_seed(config.seed, "fine-tune"));
  model.params().reset_optimizer();
  return train(model, data.subset(parts[0]), data.subset(parts[1]), config);
}

std::vector<ArchitectureSpec> Grid::expand(const ArchitectureSpec& base) const {
  std::vector<ArchitectureSpec> out;
  const bool bsm = base.kind == ArchKind::kBSM;
  const bool meta = base.kind != ArchKind::kBO;
  const std::vector<std::vector<int>> heads = bsm ? head_dense : std::vector<std::vector<int>>{base.head_dense};
  const std::vector<int> titles = meta ? title_dims : std::vector<int>{base.meta.title_dim};
  const auto subsets = meta ? meta_subsets
                            : std::vector<std::array<bool, meta::kSliceCount>>{base.meta.enabled};
  for (const auto& subset : subsets) {
    for (int title : titles) {
      for (int layers : bilstm_layers) {
        for (int units : bilstm_units) {
          for (const auto& head : heads) {
            ArchitectureSpec s = base;
            s.bilstm_layers = layers;
            s.bilstm_units = units;
            s.head_dense = head;
            s.meta.title_dim = title;
            s.meta.enabled = subset;
            out.push_back(s);
          }
        }
      }
    }
  }
  if (out.empty()) throw ConfigError("hyperparameter grid is empty");
  return out;
}

json grid_to_json(const Grid& g) {
  json subsets = json::array();
  for (const auto& s : g.meta_subsets) {
    json names = json::array();
    for (int i = 0; i < meta::kSliceCount; ++i) {
      if (s[i]) names.push_back(meta::slice_name(static_cast<meta::Slice>(i)));
    }
    subsets.push_back(names);
  }
  return json{{"bilstm_layers", g.bilstm_layers},
              {"bilstm_units", g.bilstm_units},
              {"head_dense", g.head_dense},
              {"title_dims", g.title_dims},
              {"meta_subsets", subsets}};
}

Grid grid_from_json(const json& j) {
  Grid g;
  if (!j.is_object()) throw ConfigError("grid must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "bilstm_layers") g.bilstm_layers = value.get<std::vector<int>>();
      else if (key == "bilstm_units") g.bilstm_units = value.get<std::vector<int>>();
      else if (key == "head_dense") g.head_dense = value.get<std::vector<std::vector<int>>>();
      else if (key == "title_dims") g.title_dims = value.get<std::vector<int>>();
      else if (key == "meta_subsets") {
        g.meta_subsets.clear();
        for (const auto& names : value) {
          std::array<bool, meta::kSliceCount> s{};
          for (const auto& n : names) {
            auto slice = meta::parse_slice(n.get<std::string>());
            if (!slice) throw ConfigError("unknown meta feature '" + n.get<std::string>() + "'");
            s[static_cast<size_t>(*slice)] = true;
          }
          g.meta_subsets.push_back(s);
        }
      } else {
        throw ConfigError("unknown grid key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
  if (g.bilstm_layers.empty() || g.bilstm_units.empty() || g.head_dense.empty() ||
      g.title_dims.empty() || g.meta_subsets.empty()) {
    throw ConfigError("grid lists must be non-empty");
  }
  return g;
}

GridResult grid_search(const ArchitectureSpec& base, const Grid& grid, const DataProvider& data,
                       const TrainConfig& config, int jobs) {
  const auto specs = grid.expand(base);
  // Materialise each distinct meta layout once, before any thread starts.
  auto meta_key = [](const meta::MetaConfig& m) {
    std::string k = std::to_string(m.title_dim) + "/" + std::to_string(m.short_dim) + "/" +
                    std::to_string(m.long_dim) + "/";
    for (bool e : m.enabled) k += e ? '1' : '0';
    return k;
  };
  std::map<std::string, SplitData> cache;
  for (const auto& s : specs) {
    const auto k = meta_key(s.meta);
    if (!cache.count(k)) cache.emplace(k, data(s.meta));
  }

  struct Slot {
    std::unique_ptr<Model> model;
    TrainResult result;
    std::exception_ptr error;
  };
  std::vector<Slot> slots(specs.size());
  auto run = [&](size_t i) {
    try {
      const SplitData& d = cache.at(meta_key(specs[i].meta));
      slots[i].model = std::make_unique<Model>(specs[i]);
      slots[i].result = train(*slots[i].model, d.train, d.val, config);
    } catch (...) {
      slots[i].error = std::current_exception();
    }
  };
  const size_t workers = std::clamp<size_t>(static_cast<size_t>(std::max(jobs, 1)), 1, specs.size());
  if (workers == 1) {
    for (size_t i = 0; i < specs.size(); ++i) run(i);
  } else {
    std::mutex mu;
    size_t next = 0;
    std::vector<std::thread> pool;
    for (size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (;;) {
          size_t i;
          {
            std::lock_guard<std::mutex> lock(mu);
            if (next >= specs.size()) return;
            i = next++;
          }
          run(i);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  GridResult out;
  size_t best = 0;
  for (size_t i = 0; i < specs.size(); ++i) {
    if (slots[i].error) std::rethrow_exception(slots[i].error);
    out.candidates.push_back({specs[i], slots[i].result.best_val_score, slots[i].result.best_epoch});
    if (slots[i].result.best_val_score > slots[best].result.best_val_score) best = i;
  }
  out.spec = specs[best];
  out.model = std::move(slots[best].model);
  out.train = slots[best].result;
  return out;
}

}  // namespace moocxfer::model
