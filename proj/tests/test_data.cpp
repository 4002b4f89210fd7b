// SPDX-FileCopyrightText: Copyright (c) 2026 The sddi authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "sddi/dataset.hpp"
#include "sddi/errors.hpp"
#include "sddi/image.hpp"
#include "sddi/image_store.hpp"
#include "sddi/pubchem.hpp"
#include "test_support.hpp"

namespace sddi {
namespace {

using testing::FakeClock;
using testing::MockTransport;
using testing::TempDir;

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::vector<DrugRecord> manifest_of(std::initializer_list<std::string> ids) {
  std::vector<DrugRecord> out;
  for (const auto& id : ids) out.push_back({id, id, id + ".png"});
  return out;
}

TEST(Csv, QuotedFieldsAndLineEndings) {
  const auto rows = parse_csv("a,b,c\r\n\"x, y\",\"say \"\"hi\"\"\",z\n1,,3");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1], (std::vector<std::string>{"x, y", "say \"hi\"", "z"}));
  EXPECT_EQ(rows[2], (std::vector<std::string>{"1", "", "3"}));
  EXPECT_THROW(parse_csv("a,\"open\n"), IngestionError);
}

TEST(Manifest, RoundTripAndValidation) {
  TempDir dir("manifest");
  const std::vector<DrugRecord> records = {{"DB1", "Aspirin, plain", "img/1.png"}, {"DB2", "B \"x\"", "2.png"}};
  write_manifest(records, dir / "m.csv");
  EXPECT_EQ(read_manifest(dir / "m.csv"), records);

  write_text(dir / "bad_header.csv", "id,name,path\nDB1,a,b\n");
  EXPECT_THROW(read_manifest(dir / "bad_header.csv"), IngestionError);
  write_text(dir / "dup.csv", "drug_id,name,image_path\nDB1,a,b\nDB1,c,d\n");
  EXPECT_THROW(read_manifest(dir / "dup.csv"), IngestionError);
  write_text(dir / "short.csv", "drug_id,name,image_path\nDB1,a\n");
  EXPECT_THROW(read_manifest(dir / "short.csv"), IngestionError);
  EXPECT_THROW(read_manifest(dir / "missing.csv"), IngestionError);
}

TEST(Interactions, RoundTripAndLabels) {
  TempDir dir("inter");
  const std::vector<PairExample> pairs = {{"A", "B", 1}, {"A", "C", 0}};
  write_interactions(pairs, dir / "i.csv");
  EXPECT_EQ(read_interactions(dir / "i.csv"), pairs);
  write_text(dir / "bad.csv", "drug_id_a,drug_id_b,label\nA,B,2\n");
  EXPECT_THROW(read_interactions(dir / "bad.csv"), IngestionError);
}

TEST(BuildPairs, ReciprocalDuplicatesCollapse) {
  const auto out = build_pairs(manifest_of({"A", "B"}), {{"A", "B", 1}, {"B", "A", 1}});
  EXPECT_EQ(out, (std::vector<PairExample>{{"A", "B", 1}}));
}

TEST(BuildPairs, FullyLabeledFourDrugs) {
  const auto m = manifest_of({"A", "B", "C", "D"});
  std::vector<PairExample> in;
  for (const auto& x : m) {
    for (const auto& y : m) {
      if (x.drug_id != y.drug_id) in.push_back({x.drug_id, y.drug_id, (x.drug_id == "A") || (y.drug_id == "A")});
    }
  }
  EXPECT_EQ(build_pairs(m, in).size(), 6u);
}

TEST(BuildPairs, Errors) {
  const auto m = manifest_of({"A", "B"});
  EXPECT_THROW(build_pairs(m, {{"A", "Z", 1}}), IngestionError);
  EXPECT_THROW(build_pairs(m, {{"A", "B", 1}, {"B", "A", 0}}), IngestionError);
  EXPECT_TRUE(build_pairs(m, {{"A", "A", 1}}).empty());
}

TEST(BuildPairs, MatchesBruteForceOnSmallManifests) {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(7);
    std::vector<DrugRecord> m;
    for (std::size_t i = 0; i < n; ++i) m.push_back({"D" + std::to_string(i), "", ""});
    // Fixed ground-truth label per unordered pair; listed in random order,
    // orientation and multiplicity.
    std::map<std::pair<std::string, std::string>, int> truth;
    std::vector<PairExample> in;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (rng.below(4) == 0) continue;
        const int label = static_cast<int>(rng.below(2));
        const auto &a = m[i].drug_id, &b = m[j].drug_id;
        truth[{std::min(a, b), std::max(a, b)}] = label;
        const std::size_t copies = 1 + rng.below(3);
        for (std::size_t c = 0; c < copies; ++c) {
          in.push_back(rng.below(2) ? PairExample{a, b, label} : PairExample{b, a, label});
        }
      }
    }
    rng.shuffle(in);
    const auto out = build_pairs(m, in);
    ASSERT_EQ(out.size(), truth.size());
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& p : out) {
      EXPECT_LT(p.a, p.b);
      EXPECT_TRUE(seen.insert({p.a, p.b}).second);
      EXPECT_EQ(truth.at({p.a, p.b}), p.label);
    }
    EXPECT_EQ(build_pairs(m, out), out);
  }
}

TEST(BuildPairs, PublishedTotals) {
  EXPECT_EQ(kPublishedInteractingPairs + kPublishedNonInteractingPairs, 67360u);
  EXPECT_EQ(kPublishedDrugCount * (kPublishedDrugCount - 1) / 2, 69378u);
}

std::vector<PairExample> numbered_pairs(std::size_t n) {
  std::vector<PairExample> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({"a" + std::to_string(i), "b" + std::to_string(i), int(i % 2)});
  return out;
}

TEST(Split, FloorArithmetic) {
  const auto s = split(numbered_pairs(100), 0.66, 7);
  EXPECT_EQ(s.train.size(), 66u);
  EXPECT_EQ(s.test.size(), 34u);
  EXPECT_EQ(s.seed, 7u);
  std::set<std::string> all;
  for (const auto& p : s.train) all.insert(p.a);
  for (const auto& p : s.test) all.insert(p.a);
  EXPECT_EQ(all.size(), 100u);
}

TEST(Split, Deterministic) {
  const auto pairs = numbered_pairs(50);
  const auto a = split(pairs, 0.66, 3), b = split(pairs, 0.66, 3), c = split(pairs, 0.66, 4);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_NE(a.train, c.train);
}

TEST(Split, PublishedCounts) {
  const auto s = split(numbered_pairs(kPublishedInteractingPairs + kPublishedNonInteractingPairs),
                       kDefaultTrainFraction, 42);
  EXPECT_EQ(s.train.size(), kPublishedTrainPairs);
  EXPECT_EQ(s.test.size(), kPublishedTestPairs);
}

TEST(Split, Errors) {
  EXPECT_THROW(split({}, 0.66, 1), std::invalid_argument);
  EXPECT_THROW(split(numbered_pairs(3), 1.0, 1), std::invalid_argument);
  EXPECT_THROW(split(numbered_pairs(3), 0.0, 1), std::invalid_argument);
}

GrayImage decode_rgb(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const std::vector<std::uint8_t> rgb = {r, g, b};
  return decode_png(encode_rgb_png(1, 1, rgb));
}

TEST(Image, LuminosityGrayscale) {
  EXPECT_FLOAT_EQ(decode_rgb(255, 255, 255).at(0, 0), 1.0f);
  EXPECT_FLOAT_EQ(decode_rgb(0, 0, 0).at(0, 0), 0.0f);
  EXPECT_NEAR(decode_rgb(255, 0, 0).at(0, 0), 0.299f, 1e-6);
}

TEST(Image, Rotate90) {
  GrayImage g(2, 2);
  g.pixels = {1, 2, 3, 4};
  EXPECT_EQ(rotate90(g, 0), g);
  EXPECT_EQ(rotate90(g, 4), g);
  EXPECT_EQ(rotate90(g, 1).pixels, (std::vector<float>{2, 4, 1, 3}));
  Rng rng(22);
  GrayImage r(3, 5);
  for (auto& v : r.pixels) v = static_cast<float>(rng.uniform());
  EXPECT_EQ(rotate90(rotate90(rotate90(rotate90(r, 1), 1), 1), 1), r);
  EXPECT_EQ(rotate90(r, 1).height, 5u);
}

TEST(Image, PngRoundTripIsLossless) {
  TempDir dir("png");
  Rng rng(23);
  GrayImage g(7, 9);
  for (auto& v : g.pixels) v = static_cast<float>(rng.below(256)) / 255.0f;
  save_png(g, dir / "g.png");
  EXPECT_EQ(load_image(dir / "g.png"), g);
}

TEST(Image, CorruptFileNamesPath) {
  TempDir dir("corrupt");
  write_text(dir / "x.png", "not an image");
  try {
    load_image(dir / "x.png");
    FAIL() << "expected IngestionError";
  } catch (const IngestionError& e) {
    EXPECT_NE(std::string(e.what()).find("x.png"), std::string::npos);
  }
  EXPECT_THROW(load_image(dir / "absent.png"), IngestionError);
}

TEST(ImageStore, ResolvesResamplesAndStacks) {
  TempDir dir("store");
  const auto manifest = testing::write_images(dir.path(), {{"A", GrayImage(8, 8, 64.0f / 255.0f)}, {"B", GrayImage(6, 6, 1.0f)}});
  ImageStore store(manifest, dir.path(), 8);
  EXPECT_EQ(store.get("A").height, 8u);
  EXPECT_EQ(store.get("B").height, 8u);
  EXPECT_EQ(store.size_mismatches(), 1u);
  EXPECT_EQ(store.path_of("A"), dir / "A.png");
  EXPECT_THROW(store.get("C"), IngestionError);
  const GrayImage* batch[] = {&store.get("A"), &store.get("B")};
  const auto t = stack_images(batch);
  EXPECT_EQ(t.shape(), Shape({2, 1, 8, 8}));
  EXPECT_FLOAT_EQ(t.data()[0], 64.0f / 255.0f);
  EXPECT_FLOAT_EQ(t.data()[64], 1.0f);
}

TEST(ImageStore, ResizeBilinearAlignCorners) {
  GrayImage g(2, 2);
  g.pixels = {0.0f, 0.2f, 0.4f, 0.6f};
  const auto r = resize_bilinear(g, 3, 3);
  EXPECT_FLOAT_EQ(r.at(1, 1), 0.3f);
  EXPECT_FLOAT_EQ(r.at(0, 2), 0.2f);
  EXPECT_FLOAT_EQ(r.at(2, 0), 0.4f);
  EXPECT_FLOAT_EQ(r.at(0, 1), 0.1f);
  EXPECT_EQ(resize_bilinear(g, 2, 2), g);
}

FetchOptions fast_options() {
  FetchOptions o;
  o.image_size = "32x32";
  return o;
}

TEST(Pubchem, UrlAndCidValidation) {
  EXPECT_EQ(pubchem_png_url("2244", "500x500"),
            "https://pubchem.ncbi.nlm.nih.gov/rest/pug/compound/cid/2244/PNG?image_size=500x500");
  EXPECT_TRUE(is_valid_cid("2244"));
  EXPECT_FALSE(is_valid_cid("abc"));
  EXPECT_FALSE(is_valid_cid(""));
  EXPECT_FALSE(is_valid_cid("12a"));
}

TEST(Pubchem, InvalidCidRejectedBeforeAnyRequest) {
  TempDir dir("cid");
  FakeClock clock;
  MockTransport transport(&clock);
  PubchemFetcher fetcher(transport, clock, fast_options());
  EXPECT_THROW(fetcher.fetch("abc", dir.path()), std::invalid_argument);
  EXPECT_TRUE(transport.urls.empty());
}

TEST(Pubchem, ExistingFileSkipped) {
  TempDir dir("skip");
  FakeClock clock;
  MockTransport transport(&clock);
  PubchemFetcher fetcher(transport, clock, fast_options());
  const auto first = fetcher.fetch("2244", dir.path());
  EXPECT_EQ(first, dir / "2244.png");
  EXPECT_EQ(load_image(first).height, 32u);
  EXPECT_EQ(fetcher.fetch("2244", dir.path()), first);
  EXPECT_EQ(transport.urls.size(), 1u);

  PubchemFetcher again(transport, clock, fast_options());
  again.fetch("2244", dir.path());
  EXPECT_EQ(again.requests_made(), 0u);
}

TEST(Pubchem, ThrottleSpacing) {
  TempDir dir("throttle");
  FakeClock clock;
  MockTransport transport(&clock);
  PubchemFetcher fetcher(transport, clock, fast_options());
  const std::size_t k = 8;
  for (std::size_t i = 0; i < k; ++i) fetcher.fetch(std::to_string(100 + i), dir.path());
  ASSERT_EQ(transport.urls.size(), k);
  EXPECT_EQ(fetcher.requests_made(), k);
  EXPECT_GE(transport.times.back() - transport.times.front(), std::chrono::milliseconds(200) * (k - 1));
  for (std::size_t i = 1; i < k; ++i) EXPECT_GE(transport.times[i] - transport.times[i - 1], std::chrono::milliseconds(200));
}

TEST(Pubchem, UnknownCid) {
  TempDir dir("404");
  FakeClock clock;
  MockTransport transport(&clock);
  transport.unknown.insert("999");
  PubchemFetcher fetcher(transport, clock, fast_options());
  try {
    fetcher.fetch("999", dir.path());
    FAIL() << "expected FetchError";
  } catch (const FetchError& e) {
    EXPECT_NE(std::string(e.what()).find("unknown CID"), std::string::npos);
  }
  EXPECT_EQ(transport.urls.size(), 1u);
  EXPECT_FALSE(std::filesystem::exists(dir / "999.png"));
}

TEST(Pubchem, TransientFailuresRetriedWithBackoff) {
  TempDir dir("retry");
  FakeClock clock;
  MockTransport transport(&clock);
  transport.fail_next = 1;
  transport.scripted.push_back({503, {}});
  PubchemFetcher fetcher(transport, clock, fast_options());
  fetcher.fetch("7", dir.path());
  EXPECT_EQ(transport.urls.size(), 3u);
  EXPECT_GE(transport.times[1] - transport.times[0], std::chrono::milliseconds(500));
  EXPECT_GE(transport.times[2] - transport.times[1], std::chrono::milliseconds(1000));
  EXPECT_TRUE(std::filesystem::exists(dir / "7.png"));
}

TEST(Pubchem, RetriesExhausted) {
  TempDir dir("exhaust");
  FakeClock clock;
  MockTransport transport(&clock);
  transport.fail_next = 10;
  PubchemFetcher fetcher(transport, clock, fast_options());
  EXPECT_THROW(fetcher.fetch("7", dir.path()), FetchError);
  EXPECT_EQ(transport.urls.size(), 4u);
  EXPECT_GE(clock.slept(), std::chrono::milliseconds(500 + 1000 + 2000));
}

TEST(Pubchem, ClientErrorNotRetried) {
  TempDir dir("400");
  FakeClock clock;
  MockTransport transport(&clock);
  transport.scripted.push_back({400, {}});
  PubchemFetcher fetcher(transport, clock, fast_options());
  EXPECT_THROW(fetcher.fetch("7", dir.path()), FetchError);
  EXPECT_EQ(transport.urls.size(), 1u);
}

TEST(Pubchem, NonPngBodyRejected) {
  TempDir dir("nonpng");
  FakeClock clock;
  MockTransport transport(&clock);
  transport.scripted.push_back({200, {'<', 'h', 't', 'm', 'l', '>'}});
  PubchemFetcher fetcher(transport, clock, fast_options());
  EXPECT_THROW(fetcher.fetch("7", dir.path()), IngestionError);
  EXPECT_FALSE(std::filesystem::exists(dir / "7.png"));
  EXPECT_FALSE(std::filesystem::exists(dir / "7.png.part"));
}

}  // namespace
}  // namespace sddi
