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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace sddi {

struct DrugRecord {
  std::string drug_id;
  std::string name;
  std::filesystem::path image_path;

  bool operator==(const DrugRecord&) const = default;
};

//! Unordered labeled drug pair; canonical form has a < b.
struct PairExample {
  std::string a;
  std::string b;
  int label = 0;  // 1 = interact

  bool operator==(const PairExample&) const = default;
};

struct SplitDataset {
  std::vector<PairExample> train;
  std::vector<PairExample> test;
  std::uint64_t seed = 0;
};

// Published dataset composition.
inline constexpr std::size_t kPublishedDrugCount = 373;
inline constexpr std::size_t kPublishedInteractingPairs = 19936;
inline constexpr std::size_t kPublishedNonInteractingPairs = 47424;
inline constexpr std::size_t kPublishedTrainPairs = 44457;
inline constexpr std::size_t kPublishedTestPairs = 22903;
inline constexpr double kDefaultTrainFraction = 0.66;

//! Minimal RFC 4180 reader: quoted fields, doubled quotes, CRLF tolerated.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

//! `drug_id,name,image_path`. Relative image paths are kept as written.
//! Throws IngestionError on a bad header, wrong field count or duplicate id.
std::vector<DrugRecord> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::vector<DrugRecord>& records, const std::filesystem::path& path);

//! `drug_id_a,drug_id_b,label` with label in {0,1}. Order is kept; no
//! canonicalization happens here.
std::vector<PairExample> read_interactions(const std::filesystem::path& path);
void write_interactions(const std::vector<PairExample>& pairs, const std::filesystem::path& path);

//! Canonicalizes (a < b), drops self pairs, collapses reciprocal and repeated
//! entries, and sorts by (a, b). Throws IngestionError on an unknown id or on
//! two different labels for one unordered pair.
std::vector<PairExample> build_pairs(const std::vector<DrugRecord>& manifest,
                                     const std::vector<PairExample>& interactions);

//! Seeded Fisher-Yates shuffle, then the first floor(fraction * n) pairs
//! become the training set.
SplitDataset split(const std::vector<PairExample>& pairs, double fraction, std::uint64_t seed);

}  // namespace sddi
