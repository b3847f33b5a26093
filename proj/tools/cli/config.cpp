// SPDX-License-Identifier: Apache-2.0
#include "cli/config.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"
#include "smsl/error.hpp"
#include "smsl/io.hpp"

namespace smsl::cli {

using nlohmann::json;
using nlohmann::ordered_json;

std::vector<CompareRun> default_compare_runs() {
  return {
      {"MI-MM", LossKind::MiMm, 0.2, std::nullopt, std::nullopt},
      {"Adaptive MI-MM", LossKind::AdaptiveMiMm, 0.4, std::nullopt, std::nullopt},
      {"SMS w/o tau", LossKind::Sms, 0.6, 0.0, std::nullopt},
      {"SMS", LossKind::Sms, 0.6, 0.1, std::nullopt},
  };
}

namespace {

std::size_t line_of_offset(const std::string &text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(
                 std::count(text.begin(), text.begin() + offset, '\n'));
}

std::size_t line_of_key(const std::string &text, const std::string &key) {
  const auto pos = text.find("\"" + key + "\"");
  return pos == std::string::npos ? 0 : line_of_offset(text, pos);
}

[[noreturn]] void fail_at(const std::string &text, const std::string &key,
                          const std::string &what) {
  const std::size_t line = line_of_key(text, key);
  throw Error(ErrorCode::InvalidConfig,
              (line > 0 ? "line " + std::to_string(line) + ": " : "") + what);
}

const std::set<std::string> &known_keys() {
  static const std::set<std::string> keys = {
      "data_seed",      "n_items",         "n_verb_classes",
      "n_noun_classes", "raw_dim",         "video_frames",
      "video_channels", "video_height",    "video_width",
      "noise_sigma",    "loss",            "margin",
      "tau",            "alpha",           "beta",
      "mining_threshold", "mining",        "triplet_strategy",
      "seed",           "embed_dim",       "lr",
      "lr_end",         "warmup_epochs",   "total_epochs",
      "batch_size",     "optimizer",       "adam_beta1",
      "adam_beta2",     "adam_epsilon",    "weight_decay",
      "evaluate_each_epoch", "init_checkpoint", "relevance_threshold",
      "dataset_dir",    "out",             "compare"};
  return keys;
}

template <class T>
void read(const json &j, const std::string &text, const char *key, T &dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception &) {
    fail_at(text, key, std::string("key '") + key + "' has the wrong type");
  }
}

template <class Parse>
void read_enum(const json &j, const std::string &text, const char *key,
               Parse parse) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_string()) {
    fail_at(text, key, std::string("key '") + key + "' must be a string");
  }
  try {
    parse(j.at(key).get<std::string>());
  } catch (const Error &e) {
    fail_at(text, key, e.detail());
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string &text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error &e) {
    throw Error(ErrorCode::ParseError,
                "line " + std::to_string(line_of_offset(text, e.byte)) + ": " +
                    e.what());
  }
  if (!j.is_object()) {
    throw Error(ErrorCode::InvalidConfig, "line 1: config must be a JSON object");
  }
  for (const auto &[key, value] : j.items()) {
    if (!known_keys().contains(key)) {
      fail_at(text, key, "unknown key '" + key + "'");
    }
  }

  ExperimentConfig cfg;
  SyntheticSpec &d = cfg.data;
  read(j, text, "data_seed", d.seed);
  read(j, text, "n_items", d.n_items);
  read(j, text, "n_verb_classes", d.n_verb_classes);
  read(j, text, "n_noun_classes", d.n_noun_classes);
  read(j, text, "raw_dim", d.raw_dim);
  read(j, text, "video_frames", d.video_frames);
  read(j, text, "video_channels", d.video_channels);
  read(j, text, "video_height", d.video_height);
  read(j, text, "video_width", d.video_width);
  read(j, text, "noise_sigma", d.noise_sigma);

  TrainConfig &t = cfg.train;
  read_enum(j, text, "loss",
            [&](const std::string &s) { t.loss = loss_kind_from_string(s); });
  read(j, text, "margin", t.loss_cfg.margin);
  read(j, text, "tau", t.loss_cfg.tau);
  read(j, text, "alpha", t.loss_cfg.alpha);
  read(j, text, "beta", t.loss_cfg.beta);
  read(j, text, "mining_threshold", t.loss_cfg.mining_threshold);
  read_enum(j, text, "mining",
            [&](const std::string &s) { t.mining = mining_from_string(s); });
  read_enum(j, text, "triplet_strategy", [&](const std::string &s) {
    if (s == "all_pairs") {
      t.strategy = TripletStrategy::AllPairs;
    } else if (s == "hardest_negative") {
      t.strategy = TripletStrategy::HardestNegative;
    } else {
      throw Error(ErrorCode::InvalidConfig, "unknown triplet_strategy '" + s + "'");
    }
  });
  read(j, text, "seed", t.seed);
  read(j, text, "embed_dim", t.embed_dim);
  read(j, text, "lr", t.lr);
  read(j, text, "lr_end", t.lr_end);
  read(j, text, "warmup_epochs", t.warmup_epochs);
  read(j, text, "total_epochs", t.total_epochs);
  read(j, text, "batch_size", t.batch_size);
  read_enum(j, text, "optimizer", [&](const std::string &s) {
    t.optimizer.kind = optimizer_from_string(s);
  });
  read(j, text, "adam_beta1", t.optimizer.beta1);
  read(j, text, "adam_beta2", t.optimizer.beta2);
  read(j, text, "adam_epsilon", t.optimizer.epsilon);
  read(j, text, "weight_decay", t.optimizer.weight_decay);
  read(j, text, "evaluate_each_epoch", t.evaluate_each_epoch);
  read(j, text, "relevance_threshold", t.relevance_threshold);

  read(j, text, "dataset_dir", cfg.dataset_dir);
  read(j, text, "out", cfg.out);
  if (j.contains("init_checkpoint")) {
    std::string p;
    read(j, text, "init_checkpoint", p);
    cfg.init_checkpoint = p;
  }

  if (j.contains("compare")) {
    const json &runs = j.at("compare");
    if (!runs.is_array()) fail_at(text, "compare", "'compare' must be an array");
    for (const json &r : runs) {
      if (!r.is_object() || !r.contains("name") || !r.contains("loss")) {
        fail_at(text, "compare",
                "each compare entry needs at least 'name' and 'loss'");
      }
      CompareRun run;
      try {
        run.name = r.at("name").get<std::string>();
        run.loss = loss_kind_from_string(r.at("loss").get<std::string>());
        if (r.contains("margin")) run.margin = r.at("margin").get<double>();
        if (r.contains("tau")) run.tau = r.at("tau").get<double>();
        if (r.contains("dataset_dir")) {
          run.dataset_dir = r.at("dataset_dir").get<std::string>();
        }
        for (const auto &[key, value] : r.items()) {
          if (key != "name" && key != "loss" && key != "margin" &&
              key != "tau" && key != "dataset_dir") {
            fail_at(text, key, "unknown compare key '" + key + "'");
          }
        }
      } catch (const json::exception &e) {
        fail_at(text, "compare", std::string("bad compare entry: ") + e.what());
      } catch (const Error &e) {
        if (e.code() == ErrorCode::InvalidConfig &&
            e.detail().rfind("line ", 0) == 0) {
          throw;
        }
        fail_at(text, "compare", e.detail());
      }
      cfg.compare.push_back(std::move(run));
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path &path) {
  return parse_config(read_text_file(path));
}

std::string print_config(const ExperimentConfig &cfg) {
  ordered_json j;
  const SyntheticSpec &d = cfg.data;
  j["data_seed"] = d.seed;
  j["n_items"] = d.n_items;
  j["n_verb_classes"] = d.n_verb_classes;
  j["n_noun_classes"] = d.n_noun_classes;
  j["raw_dim"] = d.raw_dim;
  j["video_frames"] = d.video_frames;
  j["video_channels"] = d.video_channels;
  j["video_height"] = d.video_height;
  j["video_width"] = d.video_width;
  j["noise_sigma"] = d.noise_sigma;

  const TrainConfig &t = cfg.train;
  j["loss"] = std::string(to_string(t.loss));
  j["margin"] = t.loss_cfg.margin;
  j["tau"] = t.loss_cfg.tau;
  j["alpha"] = t.loss_cfg.alpha;
  j["beta"] = t.loss_cfg.beta;
  j["mining_threshold"] = t.loss_cfg.mining_threshold;
  j["mining"] = std::string(to_string(t.mining));
  j["triplet_strategy"] = t.strategy == TripletStrategy::AllPairs
                              ? "all_pairs"
                              : "hardest_negative";
  j["seed"] = t.seed;
  j["embed_dim"] = t.embed_dim;
  j["lr"] = t.lr;
  j["lr_end"] = t.lr_end;
  j["warmup_epochs"] = t.warmup_epochs;
  j["total_epochs"] = t.total_epochs;
  j["batch_size"] = t.batch_size;
  j["optimizer"] = std::string(to_string(t.optimizer.kind));
  j["adam_beta1"] = t.optimizer.beta1;
  j["adam_beta2"] = t.optimizer.beta2;
  j["adam_epsilon"] = t.optimizer.epsilon;
  j["weight_decay"] = t.optimizer.weight_decay;
  j["evaluate_each_epoch"] = t.evaluate_each_epoch;
  j["relevance_threshold"] = t.relevance_threshold;
  j["dataset_dir"] = cfg.dataset_dir;
  j["out"] = cfg.out;
  if (cfg.init_checkpoint) j["init_checkpoint"] = *cfg.init_checkpoint;
  if (!cfg.compare.empty()) {
    ordered_json runs = ordered_json::array();
    for (const auto &r : cfg.compare) {
      ordered_json e;
      e["name"] = r.name;
      e["loss"] = std::string(to_string(r.loss));
      if (r.margin) e["margin"] = *r.margin;
      if (r.tau) e["tau"] = *r.tau;
      if (r.dataset_dir) e["dataset_dir"] = *r.dataset_dir;
      runs.push_back(std::move(e));
    }
    j["compare"] = std::move(runs);
  }
  return j.dump(2) + "\n";
}

void validate(const ExperimentConfig &cfg) {
  validate(cfg.data);
  validate(cfg.train);
}

TrainConfig train_config_for(const ExperimentConfig &cfg, const CompareRun &run) {
  TrainConfig t = cfg.train;
  t.loss = run.loss;
  if (run.margin) t.loss_cfg.margin = *run.margin;
  if (run.tau) t.loss_cfg.tau = *run.tau;
  return t;
}

}  // namespace smsl::cli
