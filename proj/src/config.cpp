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

#include "sddi/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "sddi/errors.hpp"

namespace sddi {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  throw ConfigError("invalid value '" + std::string(value) + "' for " + std::string(key) + ": expected " +
                    std::string(expected));
}

std::uint64_t parse_uint(std::string_view key, std::string_view value) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) {
    bad_value(key, value, "a non-negative integer");
  }
  return out;
}

double parse_double(std::string_view key, std::string_view value) {
  const std::string s(value);
  char* end = nullptr;
  const double out = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(out)) bad_value(key, value, "a finite number");
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  bad_value(key, value, "true or false");
}

std::vector<std::size_t> parse_list(std::string_view key, std::string_view value) {
  std::vector<std::size_t> out;
  std::string item;
  std::istringstream in{std::string(value)};
  while (std::getline(in, item, ',')) out.push_back(parse_uint(key, trim(item)));
  if (out.empty()) bad_value(key, value, "a comma-separated list of integers");
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_list(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

struct Field {
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename M>
Field size_field(M member) {
  return {[member](RunConfig& c, std::string_view v) { c.*member = parse_uint("", v); },
          [member](const RunConfig& c) { return std::to_string(c.*member); }};
}

// Field table in output order.
const std::vector<std::pair<std::string, Field>>& fields() {
  using C = RunConfig;
  static const std::vector<std::pair<std::string, Field>> table = {
      {"image_size", size_field(&C::image_size)},
      {"conv_filters", {[](C& c, std::string_view v) { c.conv_filters = parse_list("conv_filters", v); },
                        [](const C& c) { return format_list(c.conv_filters); }}},
      {"kernel", size_field(&C::kernel)},
      {"pool", size_field(&C::pool)},
      {"fc_sizes", {[](C& c, std::string_view v) { c.fc_sizes = parse_list("fc_sizes", v); },
                    [](const C& c) { return format_list(c.fc_sizes); }}},
      {"use_stn", {[](C& c, std::string_view v) { c.use_stn = parse_bool("use_stn", v); },
                   [](const C& c) { return std::string(c.use_stn ? "true" : "false"); }}},
      {"epochs", size_field(&C::epochs)},
      {"batch_size", size_field(&C::batch_size)},
      {"optimizer", {[](C& c, std::string_view v) { c.optimizer = parse_optimizer_kind(v); },
                     [](const C& c) { return std::string(to_string(c.optimizer)); }}},
      {"lr", {[](C& c, std::string_view v) { c.lr = parse_double("lr", v); },
              [](const C& c) { return format_double(c.lr); }}},
      {"line_search", {[](C& c, std::string_view v) { c.line_search = parse_bool("line_search", v); },
                       [](const C& c) { return std::string(c.line_search ? "true" : "false"); }}},
      {"metric", {[](C& c, std::string_view v) { c.metric = parse_distance_kind(v); },
                  [](const C& c) { return std::string(to_string(c.metric)); }}},
      {"margin", {[](C& c, std::string_view v) { c.margin = parse_double("margin", v); },
                  [](const C& c) { return format_double(c.margin); }}},
      {"split", {[](C& c, std::string_view v) { c.split = parse_double("split", v); },
                 [](const C& c) { return format_double(c.split); }}},
      {"val_fraction", {[](C& c, std::string_view v) { c.val_fraction = parse_double("val_fraction", v); },
                        [](const C& c) { return format_double(c.val_fraction); }}},
      {"seed", {[](C& c, std::string_view v) { c.seed = parse_uint("seed", v); },
                [](const C& c) { return std::to_string(c.seed); }}},
      {"checkpoint_every", size_field(&C::checkpoint_every)},
      {"rotate_eval", {[](C& c, std::string_view v) { c.rotate_eval = parse_bool("rotate_eval", v); },
                       [](const C& c) { return std::string(c.rotate_eval ? "true" : "false"); }}},
      {"threshold", {[](C& c, std::string_view v) {
                       if (v.empty()) c.threshold.reset();
                       else c.threshold = parse_double("threshold", v);
                     },
                     [](const C& c) { return c.threshold ? format_double(*c.threshold) : std::string(); }}},
      {"selected_threshold",
       {[](C& c, std::string_view v) {
          if (v.empty()) c.selected_threshold.reset();
          else c.selected_threshold = parse_double("selected_threshold", v);
        },
        [](const C& c) { return c.selected_threshold ? format_double(*c.selected_threshold) : std::string(); }}},
      {"baseline", {[](C& c, std::string_view v) { c.baseline = std::string(v); },
                    [](const C& c) { return c.baseline; }}},
      {"ae_criterion", {[](C& c, std::string_view v) { c.ae_criterion = std::string(v); },
                        [](const C& c) { return c.ae_criterion; }}},
      {"ae_lr", {[](C& c, std::string_view v) { c.ae_lr = parse_double("ae_lr", v); },
                 [](const C& c) { return format_double(c.ae_lr); }}},
      {"manifest", {[](C& c, std::string_view v) { c.manifest = std::string(v); },
                    [](const C& c) { return c.manifest.string(); }}},
      {"interactions", {[](C& c, std::string_view v) { c.interactions = std::string(v); },
                        [](const C& c) { return c.interactions.string(); }}},
      {"images", {[](C& c, std::string_view v) { c.images = std::string(v); },
                  [](const C& c) { return c.images.string(); }}},
      {"checkpoint", {[](C& c, std::string_view v) { c.checkpoint = std::string(v); },
                      [](const C& c) { return c.checkpoint.string(); }}},
      {"report", {[](C& c, std::string_view v) { c.report = std::string(v); },
                  [](const C& c) { return c.report.string(); }}},
      {"out", {[](C& c, std::string_view v) { c.out = std::string(v); },
               [](const C& c) { return c.out.string(); }}},
      {"cids", {[](C& c, std::string_view v) { c.cids = std::string(v); }, [](const C& c) { return c.cids; }}},
      {"cid_file", {[](C& c, std::string_view v) { c.cid_file = std::string(v); },
                    [](const C& c) { return c.cid_file.string(); }}},
  };
  return table;
}

const Field& field(std::string_view key) {
  for (const auto& [name, f] : fields()) {
    if (name == key) return f;
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view value) {
  const Field& f = field(key);
  try {
    f.set(*this, value);
  } catch (const ConfigError& e) {
    // size_field reports an empty key name; restore it here.
    std::string message = e.what();
    const std::string blank = " for : ";
    if (auto pos = message.find(blank); pos != std::string::npos) {
      message.replace(pos, blank.size(), " for " + std::string(key) + ": ");
    }
    throw ConfigError(message);
  }
}

std::string RunConfig::get(std::string_view key) const { return field(key).get(*this); }

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> out = [] {
    std::vector<std::string> k;
    for (const auto& [name, f] : fields()) k.push_back(name);
    return k;
  }();
  return out;
}

const std::vector<std::string>& RunConfig::model_keys() {
  static const std::vector<std::string> out = {"image_size", "conv_filters", "kernel", "pool", "fc_sizes", "use_stn"};
  return out;
}

void RunConfig::validate(bool check_model) const {
  if (image_size == 0) throw ConfigError("image_size must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(ae_lr > 0.0)) throw ConfigError("ae_lr must be positive");
  if (margin < 0.0) throw ConfigError("margin must be non-negative");
  if (!(split > 0.0 && split < 1.0)) throw ConfigError("split must be in (0, 1)");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) throw ConfigError("val_fraction must be in [0, 1)");
  if (checkpoint_every == 0) throw ConfigError("checkpoint_every must be positive");
  if (baseline != "ssim" && baseline != "autoencoder") {
    throw ConfigError("baseline must be ssim or autoencoder, got '" + baseline + "'");
  }
  if (ae_criterion != "bce" && ae_criterion != "cosine") {
    throw ConfigError("ae_criterion must be bce or cosine, got '" + ae_criterion + "'");
  }
  if (!check_model) return;
  const ModelSpec spec = model_spec();
  spec.tower.validate();
  if (spec.stn) spec.stn->validate(image_size);
}

TowerSpec RunConfig::tower_spec() const {
  TowerSpec spec;
  spec.input_size = image_size;
  spec.conv_filters = conv_filters;
  spec.kernel = kernel;
  spec.pool = pool;
  spec.fc_sizes = fc_sizes;
  return spec;
}

ModelSpec RunConfig::model_spec() const {
  ModelSpec spec;
  spec.tower = tower_spec();
  if (use_stn) spec.stn = StnSpec{};
  return spec;
}

OptimizerConfig RunConfig::optimizer_config() const { return OptimizerConfig::defaults(optimizer, lr); }

ContrastiveConfig RunConfig::contrastive() const { return {margin, metric}; }

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& [name, f] : fields()) out += name + " = " + f.get(*this) + "\n";
  return out;
}

RunConfig RunConfig::from_text(std::string_view text, RunConfig base) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(number) + ": expected 'key = value'");
    }
    base.set(trim(content.substr(0, eq)), trim(content.substr(eq + 1)));
  }
  return base;
}

RunConfig RunConfig::from_text(std::string_view text) { return from_text(text, RunConfig{}); }

RunConfig RunConfig::from_file(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return from_text(text.str(), std::move(base));
}

}  // namespace sddi
