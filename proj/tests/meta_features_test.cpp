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

#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "json.hpp"
#include "moocxfer/meta_features.hpp"
#include "test_util.hpp"

namespace moocxfer::meta {
namespace {

CourseMetaRaw sample_meta(int weeks = 10) {
  CourseMetaRaw m;
  m.duration_weeks = weeks;
  m.level = Level::kMaster;
  m.language = Language::kEnglish;
  m.title = "Linear algebra";
  m.short_description = "Vectors, matrices and linear maps.";
  m.long_description = "An introduction to vector spaces, eigenvalues and least squares.";
  return m;
}

TEST(CategoricalTest, OneHotOrder) {
  auto m = sample_meta();
  auto c = encode_categorical(m);
  EXPECT_EQ(c.level, (std::array<double, 3>{0, 1, 0}));
  EXPECT_EQ(c.language, (std::array<double, 2>{0, 1}));
  EXPECT_EQ(c.duration, 10.0);
  m.level = Level::kPropedeutic;
  m.language = Language::kFrench;
  c = encode_categorical(m);
  EXPECT_EQ(c.level, (std::array<double, 3>{0, 0, 1}));
  EXPECT_EQ(c.language, (std::array<double, 2>{1, 0}));
}

TEST(EmbedderTest, DeterministicPerSeed) {
  const TextEmbedder e(30, 7);
  EXPECT_EQ(e.embed("Signals and systems"), e.embed("Signals and systems"));
  EXPECT_EQ(e.embed("SIGNALS, and systems!"), e.embed("signals and systems"));
  EXPECT_EQ(e.embed(""), std::vector<double>(30, 0.0));
}

TEST(EmbedderTest, SeedsGiveDifferentVectors) {
  const TextEmbedder a(30, 1), b(30, 2);
  Rng rng(3);
  int differ = 0;
  for (int i = 0; i < 100; ++i) {
    std::string text;
    const int len = 3 + static_cast<int>(rng() % 20);
    for (int k = 0; k < len; ++k) text += static_cast<char>('a' + rng() % 26);
    differ += a.embed(text) != b.embed(text);
  }
  EXPECT_EQ(differ, 100);
}

TEST(EmbedderTest, ShortTokensHashWhole) {
  const auto b = TextEmbedder::token_buckets("ab");
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b[0], fnv1a64("ab") % TextEmbedder::kBuckets);
  // "abcde": 3 trigrams, 2 four-grams, 1 five-gram.
  const auto g = TextEmbedder::token_buckets("abcde");
  ASSERT_EQ(g.size(), 6u);
  EXPECT_EQ(g[0], fnv1a64("abc") % TextEmbedder::kBuckets);
  EXPECT_EQ(g[5], fnv1a64("abcde") % TextEmbedder::kBuckets);
  // Multi-byte code points count once.
  EXPECT_EQ(TextEmbedder::token_buckets("\xC3\xA9t").size(), 1u);
}

TEST(EmbedderTest, TokenVectorIsMeanOfUnitBuckets) {
  const TextEmbedder e(16, 5);
  const auto v = e.embed("ab");
  double sq = 0;
  for (double x : v) sq += x * x;
  EXPECT_NEAR(std::sqrt(sq), 1.0, 1e-12);  // a single whole-token bucket
}

TEST(LayoutTest, DefaultTotalAndSlices) {
  const MetaConfig cfg;
  EXPECT_EQ(cfg.total_dim(), 1 + 3 + 2 + 30 + 30 + 58);
  EXPECT_EQ(cfg.total_dim(), kDefaultMetaDim);
  const auto l = layout(cfg);
  ASSERT_EQ(l.size(), 6u);
  EXPECT_EQ(l[3].offset, 6);
  EXPECT_EQ(l[5].offset, 66);
  EXPECT_EQ(raw_meta(sample_meta(), "c-1", cfg).size(), 124u);
}

TEST(LayoutTest, DisabledSlicesAndValidation) {
  MetaConfig cfg;
  cfg.enabled = {false, true, false, false, false, false};
  EXPECT_EQ(cfg.total_dim(), 3);
  EXPECT_EQ(raw_meta(sample_meta(), "c-1", cfg), (std::vector<double>{0, 1, 0}));
  cfg.enabled = {false, false, false, false, false, false};
  EXPECT_THROW(cfg.validate(), ConfigError);
  MetaConfig wide;
  wide.long_dim = 61;
  EXPECT_THROW(wide.validate(), ConfigError);
  for (int i = 0; i < kSliceCount; ++i) {
    EXPECT_EQ(parse_slice(slice_name(static_cast<Slice>(i))), static_cast<Slice>(i));
  }
}

TEST(MetaStatsTest, DurationExtremesAndClamp) {
  const MetaConfig cfg;
  std::vector<std::vector<double>> train;
  for (int w = 5; w <= 12; ++w) train.push_back(raw_meta(sample_meta(w), "c", cfg));
  const auto st = fit_meta_stats(train, cfg);
  EXPECT_DOUBLE_EQ(assemble_meta(sample_meta(12), "c", cfg, st).values[0], 1.0);
  EXPECT_DOUBLE_EQ(assemble_meta(sample_meta(5), "c", cfg, st).values[0], 0.0);
  EXPECT_DOUBLE_EQ(assemble_meta(sample_meta(15), "c", cfg, st).values[0], 1.0);
  // One-hot dims pass through unscaled.
  const auto v = assemble_meta(sample_meta(8), "c", cfg, st).values;
  EXPECT_EQ(v[2], 1.0);
  EXPECT_EQ(v[5], 1.0);
}

TEST(ExternalEmbeddingsTest, OverrideOnlyTouchesTextSlices) {
  const MetaConfig cfg;
  testing::TempDir dir;
  nlohmann::json j;
  j["c-1"] = {{"title", std::vector<double>(30, 0.25)},
              {"short", std::vector<double>(30, -0.5)},
              {"long", std::vector<double>(58, 1.0)}};
  write_file(dir.file("emb.json"), j.dump());
  const auto ext = load_external_embeddings(dir.file("emb.json"), cfg);
  const auto plain = raw_meta(sample_meta(), "c-1", cfg);
  const auto over = raw_meta(sample_meta(), "c-1", cfg, &ext);
  for (int i = 0; i < 6; ++i) EXPECT_EQ(plain[i], over[i]);
  EXPECT_EQ(over[6], 0.25);
  EXPECT_EQ(over[36], -0.5);
  EXPECT_EQ(over[123], 1.0);
  EXPECT_THROW(raw_meta(sample_meta(), "c-2", cfg, &ext), DataError);
  EXPECT_THROW(require_embeddings(ext, {"c-1", "c-2"}), DataError);
}

TEST(ExternalEmbeddingsTest, WrongLengthNamesTheCourse) {
  testing::TempDir dir;
  nlohmann::json j;
  j["algebra-2"] = {{"title", std::vector<double>(29, 0.0)},
                    {"short", std::vector<double>(30, 0.0)},
                    {"long", std::vector<double>(58, 0.0)}};
  write_file(dir.file("emb.json"), j.dump());
  try {
    load_external_embeddings(dir.file("emb.json"), MetaConfig{});
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("algebra-2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_external_embeddings(dir.file("missing.json"), MetaConfig{}), IoError);
}

}  // namespace
}  // namespace moocxfer::meta
