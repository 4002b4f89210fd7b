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

#include "sddi/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "sddi/errors.hpp"
#include "sddi/rng.hpp"

namespace sddi {

namespace {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string quote_if_needed(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void expect_header(const std::vector<std::vector<std::string>>& rows, const std::vector<std::string>& header,
                   const std::filesystem::path& path) {
  if (rows.empty() || rows.front() != header) {
    std::string expected;
    for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
    throw IngestionError(path.string() + ": expected header '" + expected + "'");
  }
}

void write_atomically(const std::filesystem::path& path, const std::string& text) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IngestionError("cannot write " + path.string());
    out << text;
    if (!out) throw IngestionError("cannot write " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool row_has_content = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        row_has_content = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        row_has_content = true;
        break;
      case '\r':
        break;
      case '\n':
        if (row_has_content || !field.empty()) {
          row.push_back(std::move(field));
          rows.push_back(std::move(row));
        }
        row.clear();
        field.clear();
        row_has_content = false;
        break;
      default:
        field += c;
        row_has_content = true;
    }
  }
  if (quoted) throw IngestionError("csv: unterminated quoted field");
  if (row_has_content || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<DrugRecord> read_manifest(const std::filesystem::path& path) {
  const auto rows = parse_csv(read_text(path));
  expect_header(rows, {"drug_id", "name", "image_path"}, path);
  std::vector<DrugRecord> records;
  std::set<std::string> seen;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != 3) {
      throw IngestionError(path.string() + ": line " + std::to_string(i + 1) + " has " +
                           std::to_string(rows[i].size()) + " fields, expected 3");
    }
    if (rows[i][0].empty()) throw IngestionError(path.string() + ": empty drug_id on line " + std::to_string(i + 1));
    if (!seen.insert(rows[i][0]).second) {
      throw IngestionError(path.string() + ": duplicate drug_id '" + rows[i][0] + "'");
    }
    records.push_back({rows[i][0], rows[i][1], rows[i][2]});
  }
  return records;
}

void write_manifest(const std::vector<DrugRecord>& records, const std::filesystem::path& path) {
  std::string text = "drug_id,name,image_path\n";
  for (const auto& r : records) {
    text += quote_if_needed(r.drug_id) + "," + quote_if_needed(r.name) + "," +
            quote_if_needed(r.image_path.string()) + "\n";
  }
  write_atomically(path, text);
}

std::vector<PairExample> read_interactions(const std::filesystem::path& path) {
  const auto rows = parse_csv(read_text(path));
  expect_header(rows, {"drug_id_a", "drug_id_b", "label"}, path);
  std::vector<PairExample> pairs;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != 3) {
      throw IngestionError(path.string() + ": line " + std::to_string(i + 1) + " has " +
                           std::to_string(r.size()) + " fields, expected 3");
    }
    if (r[2] != "0" && r[2] != "1") {
      throw IngestionError(path.string() + ": line " + std::to_string(i + 1) + " label must be 0 or 1, got '" +
                           r[2] + "'");
    }
    pairs.push_back({r[0], r[1], r[2] == "1" ? 1 : 0});
  }
  return pairs;
}

void write_interactions(const std::vector<PairExample>& pairs, const std::filesystem::path& path) {
  std::string text = "drug_id_a,drug_id_b,label\n";
  for (const auto& p : pairs) {
    text += quote_if_needed(p.a) + "," + quote_if_needed(p.b) + "," + std::to_string(p.label) + "\n";
  }
  write_atomically(path, text);
}

std::vector<PairExample> build_pairs(const std::vector<DrugRecord>& manifest,
                                     const std::vector<PairExample>& interactions) {
  std::set<std::string> known;
  for (const auto& r : manifest) known.insert(r.drug_id);
  std::map<std::pair<std::string, std::string>, int> labels;
  for (const auto& p : interactions) {
    for (const auto* id : {&p.a, &p.b}) {
      if (!known.count(*id)) throw IngestionError("interaction references unknown drug_id '" + *id + "'");
    }
    if (p.label != 0 && p.label != 1) throw IngestionError("interaction label must be 0 or 1");
    if (p.a == p.b) continue;
    auto key = p.a < p.b ? std::make_pair(p.a, p.b) : std::make_pair(p.b, p.a);
    auto [it, inserted] = labels.emplace(key, p.label);
    if (!inserted && it->second != p.label) {
      throw IngestionError("conflicting labels for pair (" + key.first + ", " + key.second + ")");
    }
  }
  std::vector<PairExample> out;
  out.reserve(labels.size());
  for (const auto& [key, label] : labels) out.push_back({key.first, key.second, label});
  return out;
}

SplitDataset split(const std::vector<PairExample>& pairs, double fraction, std::uint64_t seed) {
  if (pairs.empty()) throw std::invalid_argument("split: empty pair list");
  if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("split: fraction must be in (0, 1)");
  std::vector<PairExample> shuffled = pairs;
  Rng rng(seed);
  rng.shuffle(shuffled);
  const auto n_train = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(pairs.size())));
  SplitDataset out;
  out.seed = seed;
  out.train.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(n_train), shuffled.end());
  return out;
}

}  // namespace sddi
