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

#include "sddi/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "sddi/checkpoint.hpp"
#include "sddi/dataset.hpp"
#include "sddi/errors.hpp"
#include "sddi/image.hpp"
#include "sddi/image_store.hpp"
#include "sddi/trainer.hpp"

namespace sddi {

namespace {

struct Dataset {
  std::vector<DrugRecord> manifest;
  std::vector<PairExample> pairs;
  SplitDataset split;
  std::vector<PairExample> validation;  // carved from split.train
};

void require_path(const std::filesystem::path& path, const char* key) {
  if (path.empty()) throw ConfigError(std::string("missing required setting '") + key + "'");
}

std::filesystem::path image_base(const RunConfig& config) {
  if (!config.images.empty()) return config.images;
  return config.manifest.parent_path();
}

Dataset load_dataset(const RunConfig& config) {
  require_path(config.manifest, "manifest");
  require_path(config.interactions, "interactions");
  Dataset d;
  d.manifest = read_manifest(config.manifest);
  d.pairs = build_pairs(d.manifest, read_interactions(config.interactions));
  d.split = split(d.pairs, config.split, config.seed);
  split_validation(d.split.train, d.validation, config.val_fraction);
  if (d.split.train.empty()) throw ConfigError("training split is empty");
  return d;
}

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void emit_report(const EvalReport& report, const RunConfig& config, CliEnv& env) {
  *env.out << report.to_text() << "json=" << report.to_json() << "\n";
  if (!config.report.empty()) {
    const auto tmp = std::filesystem::path(config.report.string() + ".tmp");
    {
      std::ofstream out(tmp, std::ios::trunc);
      if (!out) throw IngestionError("cannot write report " + config.report.string());
      out << report.to_text();
    }
    std::filesystem::rename(tmp, config.report);
  }
}

std::vector<std::pair<std::string, std::string>> read_cids(const RunConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  if (!config.cids.empty()) {
    std::istringstream in(config.cids);
    std::string cid;
    while (std::getline(in, cid, ',')) {
      if (!cid.empty()) out.emplace_back(cid, cid);
    }
  }
  if (!config.cid_file.empty()) {
    std::ifstream in(config.cid_file);
    if (!in) throw IngestionError("cannot open " + config.cid_file.string());
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#' || line.rfind("drug_id", 0) == 0) continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos) {
        out.emplace_back(line, line);
      } else {
        out.emplace_back(line.substr(0, comma), line.substr(comma + 1));
      }
    }
  }
  if (out.empty()) throw ConfigError("fetch: no CIDs given (use --cids or --cid-file)");
  return out;
}

// Config as stored inside a checkpoint: output locations are dropped so that
// identical runs produce identical files.
RunConfig stored_config(RunConfig config) {
  config.checkpoint.clear();
  config.report.clear();
  config.out.clear();
  return config;
}

ModelState load_model(const Checkpoint& checkpoint, const RunConfig& config) {
  Rng rng(config.seed);
  ModelState model(config.model_spec(), rng);
  restore_checkpoint(checkpoint, model, nullptr);
  model.set_training(false);
  return model;
}

std::string method_name(const RunConfig& config) {
  return "siamese-" + std::string(to_string(config.metric)) + (config.use_stn ? "-stn" : "");
}

}  // namespace

int exit_code_for(const std::exception& error) {
  if (dynamic_cast<const IngestionError*>(&error) || dynamic_cast<const FetchError*>(&error) ||
      dynamic_cast<const std::filesystem::filesystem_error*>(&error)) {
    return kExitIo;
  }
  if (dynamic_cast<const ConfigError*>(&error) || dynamic_cast<const std::invalid_argument*>(&error)) {
    return kExitConfig;
  }
  if (dynamic_cast<const FormatError*>(&error)) return kExitFormat;
  if (dynamic_cast<const NumericError*>(&error)) return kExitNumeric;
  return kExitFailure;
}

void cmd_fetch(const RunConfig& config, CliEnv& env) {
  require_path(config.images, "images");
  const auto cids = read_cids(config);
  for (const auto& [cid, name] : cids) {
    if (!is_valid_cid(cid)) throw std::invalid_argument("invalid CID '" + cid + "': must be numeric");
  }
  std::unique_ptr<HttpTransport> transport = env.make_transport ? env.make_transport() : std::make_unique<CurlTransport>();
  SteadyClock steady;
  Clock& clock = env.clock != nullptr ? *env.clock : steady;
  FetchOptions options = env.fetch_options;
  options.image_size = std::to_string(config.image_size) + "x" + std::to_string(config.image_size);
  PubchemFetcher fetcher(*transport, clock, options);
  std::vector<DrugRecord> records;
  for (const auto& [cid, name] : cids) {
    const auto path = fetcher.fetch(cid, config.images);
    *env.out << "fetched cid=" << cid << " path=" << path.string() << "\n";
    records.push_back({cid, name, path.filename()});
  }
  if (!config.manifest.empty()) write_manifest(records, config.manifest);
  *env.out << "images=" << records.size() << " requests=" << fetcher.requests_made() << "\n";
}

void cmd_build_pairs(const RunConfig& config, CliEnv& env) {
  require_path(config.manifest, "manifest");
  require_path(config.interactions, "interactions");
  require_path(config.out, "out");
  const auto pairs = build_pairs(read_manifest(config.manifest), read_interactions(config.interactions));
  write_interactions(pairs, config.out);
  const auto positives = static_cast<std::size_t>(
      std::count_if(pairs.begin(), pairs.end(), [](const PairExample& p) { return p.label == 1; }));
  *env.out << "pairs=" << pairs.size() << " interacting=" << positives
           << " non_interacting=" << pairs.size() - positives << "\n";
}

void cmd_train(const RunConfig& input, CliEnv& env) {
  RunConfig config = input;
  config.validate();
  require_path(config.checkpoint, "checkpoint");
  Dataset data = load_dataset(config);
  ImageStore images(data.manifest, image_base(config), config.image_size);
  images.preload();

  TrainOptions options;
  options.objective = config.contrastive();
  options.batch_size = config.batch_size;
  options.checkpoint_every = config.checkpoint_every;
  options.seed = config.seed;

  if (config.line_search) {
    double best_lr = 0.0;
    best_lr = line_search_lr(
        [&](double lr) {
          Rng rng(config.seed);
          ModelState probe(config.model_spec(), rng);
          Optimizer optimizer(OptimizerConfig::defaults(config.optimizer, lr));
          TrainOptions probe_options = options;
          probe_options.epochs = 2;
          std::ostringstream sink;
          const auto result = train_model(probe, optimizer, data.split.train, data.validation, images, probe_options, sink);
          *env.out << "line_search lr=" << format_value(lr) << " val_f1=" << format_value(result.threshold.report.f1)
                   << "\n";
          return result.threshold.report.f1;
        },
        kLineSearchGrid);
    config.lr = best_lr;
    *env.out << "line_search selected lr=" << format_value(best_lr) << "\n";
  }

  Rng rng(config.seed);
  ModelState model(config.model_spec(), rng);
  Optimizer optimizer(config.optimizer_config());
  options.epochs = config.epochs;
  const auto save = [&](const RunConfig& c) {
    save_checkpoint(make_checkpoint(stored_config(c), model, &optimizer), config.checkpoint);
  };
  const TrainResult result = train_model(model, optimizer, data.split.train, data.validation, images, options,
                                         *env.out, [&](std::size_t) { save(config); });
  config.selected_threshold = result.threshold.threshold;
  save(config);
  *env.out << "threshold=" << format_value(result.threshold.threshold) << " source=" << result.threshold.source
           << "\n";
  if (images.size_mismatches() > 0) {
    *env.out << "resampled_images=" << images.size_mismatches() << "\n";
  }
  *env.out << "checkpoint=" << config.checkpoint.string() << "\n";
}

EvalReport cmd_eval(const std::filesystem::path& checkpoint_path, const Overrides& overrides, CliEnv& env) {
  const Checkpoint checkpoint = load_checkpoint(checkpoint_path);
  RunConfig config = checkpoint_config(checkpoint, overrides);
  config.validate();
  ModelState model = load_model(checkpoint, config);
  Dataset data = load_dataset(config);
  if (data.split.test.empty()) throw ConfigError("test split is empty");
  ImageStore images(data.manifest, image_base(config), config.image_size);

  double tau;
  if (config.threshold) {
    tau = *config.threshold;
  } else if (config.selected_threshold) {
    tau = *config.selected_threshold;
  } else {
    tau = select_threshold(model, data.validation, data.split.train, images, config.metric, config.batch_size)
              .threshold;
  }
  const auto distances =
      compute_distances(model, data.split.test, images, config.metric, config.batch_size, config.rotate_eval);
  EvalReport report = classify_and_report(distances, labels_of(data.split.test), tau);
  report.method = method_name(config) + (config.rotate_eval ? "-rot90" : "");
  report.seed = config.seed;
  report.epochs = config.epochs;
  emit_report(report, config, env);
  return report;
}

void cmd_predict(const std::filesystem::path& checkpoint_path, const std::filesystem::path& image_a,
                 const std::filesystem::path& image_b, const Overrides& overrides, CliEnv& env) {
  GrayImage a = load_image(image_a);
  GrayImage b = load_image(image_b);
  const Checkpoint checkpoint = load_checkpoint(checkpoint_path);
  const RunConfig config = checkpoint_config(checkpoint, overrides);
  ModelState model = load_model(checkpoint, config);
  const std::size_t s = config.image_size;
  a = resize_bilinear(a, s, s);
  b = resize_bilinear(b, s, s);
  double tau = kPublishedThreshold;
  if (config.threshold) {
    tau = *config.threshold;
  } else if (config.selected_threshold) {
    tau = *config.selected_threshold;
  }
  NoGradGuard no_grad;
  const GrayImage* pa = &a;
  const GrayImage* pb = &b;
  // Each image runs alone so that identical inputs give identical embeddings.
  const Tensor ea = model.embed(stack_images(std::span<const GrayImage* const>(&pa, 1)));
  const Tensor eb = model.embed(stack_images(std::span<const GrayImage* const>(&pb, 1)));
  const double d = distance(config.metric, ea, eb).item();
  *env.out << "distance=" << format_value(d) << " threshold=" << format_value(tau)
           << " interact=" << (d >= tau ? "true" : "false") << "\n";
}

EvalReport cmd_baseline(const RunConfig& input, CliEnv& env) {
  RunConfig config = input;
  config.validate(false);
  Dataset data = load_dataset(config);
  if (data.split.test.empty()) throw ConfigError("test split is empty");
  ImageStore images(data.manifest, image_base(config), config.image_size);
  EvalReport report;
  if (config.baseline == "ssim") {
    report = ssim_classify(data.split.test, images);
  } else {
    const AeCriterion criterion = parse_ae_criterion(config.ae_criterion);
    std::set<std::string> ids;
    for (const auto* list : {&data.split.train, &data.validation}) {
      for (const auto& p : *list) {
        ids.insert(p.a);
        ids.insert(p.b);
      }
    }
    std::vector<const GrayImage*> training_images;
    for (const auto& id : ids) training_images.push_back(&images.get(id));
    Rng rng(config.seed);
    Autoencoder<float> ae(AutoencoderSpec::standard(), rng);
    ae.spec().output_shape(config.image_size, config.image_size);
    const double loss =
        train_autoencoder(ae, training_images, kAutoencoderEpochs, config.ae_lr, config.batch_size, config.seed);
    *env.out << "autoencoder epochs=" << ae.epochs_trained() << " loss=" << format_value(loss) << "\n";
    report = ae_similarity(ae, data.split.test, images, criterion);
  }
  report.seed = config.seed;
  emit_report(report, config, env);
  return report;
}

namespace {

// Flag name -> config key. Value flags take an argument; switch flags set
// the key to "true".
struct FlagSpec {
  const char* flag;
  const char* key;
  const char* help;
};

constexpr FlagSpec kValueFlags[] = {
    {"--seed", "seed", "random seed"},
    {"--images", "images", "image directory"},
    {"--manifest", "manifest", "manifest CSV (drug_id,name,image_path)"},
    {"--interactions", "interactions", "interactions CSV (drug_id_a,drug_id_b,label)"},
    {"--checkpoint", "checkpoint", "checkpoint file"},
    {"--report", "report", "report output file"},
    {"--epochs", "epochs", "training epochs"},
    {"--metric", "metric", "euclidean | manhattan | hellinger | jaccard"},
    {"--optimizer", "optimizer", "adam | rmsprop | adadelta | nadam"},
    {"--lr", "lr", "learning rate"},
    {"--margin", "margin", "contrastive margin"},
    {"--threshold", "threshold", "decision threshold override"},
    {"--image-size", "image_size", "input side length"},
    {"--batch-size", "batch_size", "mini-batch size"},
    {"--split", "split", "training fraction"},
    {"--val-fraction", "val_fraction", "validation fraction of the training split"},
    {"--conv-filters", "conv_filters", "tower conv filters, comma separated"},
    {"--kernel", "kernel", "tower conv kernel"},
    {"--pool", "pool", "tower pool size"},
    {"--fc-sizes", "fc_sizes", "tower dense sizes, comma separated"},
    {"--checkpoint-every", "checkpoint_every", "periodic checkpoint interval in epochs"},
    {"--out", "out", "output file"},
    {"--cids", "cids", "comma-separated PubChem CIDs"},
    {"--cid-file", "cid_file", "file with one CID (optionally ',name') per line"},
    {"--kind", "baseline", "baseline: ssim | autoencoder"},
    {"--criterion", "ae_criterion", "autoencoder criterion: bce | cosine"},
    {"--ae-lr", "ae_lr", "autoencoder learning rate"},
};

constexpr FlagSpec kSwitchFlags[] = {
    {"--stn", "use_stn", "prepend a spatial transformer"},
    {"--rotate-eval", "rotate_eval", "rotate test images by 90 degrees before evaluation"},
    {"--line-search", "line_search", "pick the learning rate with short probe runs"},
};

struct ParsedFlags {
  std::string config_file;
  std::map<std::string, std::string> values;  // key -> value
  std::map<std::string, bool> switches;       // key -> set
  std::vector<std::string> sets;              // raw key=value
};

void add_shared(CLI::App* cmd, ParsedFlags& flags) {
  cmd->add_option("--config", flags.config_file, "key = value config file");
  for (const auto& f : kValueFlags) cmd->add_option(f.flag, flags.values[f.key], f.help);
  for (const auto& f : kSwitchFlags) cmd->add_flag(f.flag, flags.switches[f.key], f.help);
  cmd->add_option("--set", flags.sets, "extra key=value settings");
}

// Config file entries first, then flags in table order, then --set.
Overrides collect_overrides(CLI::App* cmd, const ParsedFlags& flags) {
  Overrides out;
  if (!flags.config_file.empty()) {
    std::ifstream in(flags.config_file);
    if (!in) throw IngestionError("cannot open config " + flags.config_file);
    std::ostringstream text;
    text << in.rdbuf();
    // Validates keys and values; the pairs are then replayed in order.
    const RunConfig parsed = RunConfig::from_text(text.str());
    std::istringstream lines(text.str());
    std::string line;
    std::set<std::string> seen;
    while (std::getline(lines, line)) {
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(0, eq);
      key.erase(0, key.find_first_not_of(" \t"));
      key.erase(key.find_last_not_of(" \t\r") + 1);
      if (seen.insert(key).second) out.emplace_back(key, parsed.get(key));
    }
  }
  for (const auto& f : kValueFlags) {
    if (cmd->count(f.flag) > 0) out.emplace_back(f.key, flags.values.at(f.key));
  }
  for (const auto& f : kSwitchFlags) {
    if (cmd->count(f.flag) > 0) out.emplace_back(f.key, "true");
  }
  for (const auto& s : flags.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    out.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  return out;
}

RunConfig apply(const Overrides& overrides) {
  RunConfig config;
  for (const auto& [key, value] : overrides) config.set(key, value);
  return config;
}

std::string one_line(std::string message) {
  std::replace(message.begin(), message.end(), '\n', ' ');
  return message;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, CliEnv& env) {
  CLI::App app{"Siamese drug-pair interaction model: data preparation, training and evaluation", "sddi"};
  app.require_subcommand(1);
  ParsedFlags flags;
  std::string image_a, image_b;

  CLI::App* fetch = app.add_subcommand("fetch", "download structure images from PubChem");
  CLI::App* build = app.add_subcommand("build-pairs", "deduplicate labeled pairs into a canonical list");
  CLI::App* train = app.add_subcommand("train", "train the Siamese network");
  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
  CLI::App* predict = app.add_subcommand("predict", "score one image pair");
  CLI::App* baseline = app.add_subcommand("baseline", "run the SSIM or autoencoder baseline");
  for (CLI::App* cmd : {fetch, build, train, eval, predict, baseline}) add_shared(cmd, flags);
  predict->add_option("image_a", image_a, "first image")->required();
  predict->add_option("image_b", image_b, "second image")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    *env.out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    *env.out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    *env.err << "error: " << one_line(e.what()) << "\n";
    return kExitConfig;
  }

  try {
    CLI::App* cmd = app.get_subcommands().front();
    const Overrides overrides = collect_overrides(cmd, flags);
    if (cmd == fetch) {
      cmd_fetch(apply(overrides), env);
    } else if (cmd == build) {
      cmd_build_pairs(apply(overrides), env);
    } else if (cmd == train) {
      cmd_train(apply(overrides), env);
    } else if (cmd == eval || cmd == predict) {
      const RunConfig paths = apply(overrides);
      require_path(paths.checkpoint, "checkpoint");
      if (cmd == eval) {
        cmd_eval(paths.checkpoint, overrides, env);
      } else {
        cmd_predict(paths.checkpoint, image_a, image_b, overrides, env);
      }
    } else {
      cmd_baseline(apply(overrides), env);
    }
  } catch (const std::exception& e) {
    *env.err << "error: " << one_line(e.what()) << "\n";
    return exit_code_for(e);
  }
  return kExitOk;
}

}  // namespace sddi
