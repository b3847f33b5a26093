// SPDX-License-Identifier: Apache-2.0
#include "smsl/checkpoint.hpp"

#include "json.hpp"
#include "smsl/error.hpp"
#include "smsl/io.hpp"

namespace smsl {

using nlohmann::ordered_json;

namespace {

ordered_json config_object(const TrainConfig &cfg) {
  ordered_json j;
  j["loss"] = std::string(to_string(cfg.loss));
  j["margin"] = cfg.loss_cfg.margin;
  j["tau"] = cfg.loss_cfg.tau;
  j["alpha"] = cfg.loss_cfg.alpha;
  j["beta"] = cfg.loss_cfg.beta;
  j["mining_threshold"] = cfg.loss_cfg.mining_threshold;
  j["mining"] = std::string(to_string(cfg.mining));
  j["triplet_strategy"] = cfg.strategy == TripletStrategy::AllPairs
                              ? "all_pairs"
                              : "hardest_negative";
  j["embed_dim"] = cfg.embed_dim;
  j["lr"] = cfg.lr;
  j["lr_end"] = cfg.lr_end;
  j["warmup_epochs"] = cfg.warmup_epochs;
  j["total_epochs"] = cfg.total_epochs;
  j["batch_size"] = cfg.batch_size;
  j["optimizer"] = std::string(to_string(cfg.optimizer.kind));
  j["adam_beta1"] = cfg.optimizer.beta1;
  j["adam_beta2"] = cfg.optimizer.beta2;
  j["adam_epsilon"] = cfg.optimizer.epsilon;
  j["weight_decay"] = cfg.optimizer.weight_decay;
  j["seed"] = cfg.seed;
  j["relevance_threshold"] = cfg.relevance_threshold;
  j["evaluate_each_epoch"] = cfg.evaluate_each_epoch;
  return j;
}

TrainConfig config_from_object(const nlohmann::json &j) {
  TrainConfig cfg;
  cfg.loss = loss_kind_from_string(j.at("loss").get<std::string>());
  cfg.loss_cfg.margin = j.at("margin").get<double>();
  cfg.loss_cfg.tau = j.at("tau").get<double>();
  cfg.loss_cfg.alpha = j.at("alpha").get<double>();
  cfg.loss_cfg.beta = j.at("beta").get<double>();
  cfg.loss_cfg.mining_threshold = j.at("mining_threshold").get<double>();
  cfg.mining = mining_from_string(j.at("mining").get<std::string>());
  const auto strategy = j.at("triplet_strategy").get<std::string>();
  if (strategy == "all_pairs") {
    cfg.strategy = TripletStrategy::AllPairs;
  } else if (strategy == "hardest_negative") {
    cfg.strategy = TripletStrategy::HardestNegative;
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown triplet_strategy " + strategy);
  }
  cfg.embed_dim = j.at("embed_dim").get<std::size_t>();
  cfg.lr = j.at("lr").get<double>();
  cfg.lr_end = j.at("lr_end").get<double>();
  cfg.warmup_epochs = j.at("warmup_epochs").get<std::size_t>();
  cfg.total_epochs = j.at("total_epochs").get<std::size_t>();
  cfg.batch_size = j.at("batch_size").get<std::size_t>();
  cfg.optimizer.kind = optimizer_from_string(j.at("optimizer").get<std::string>());
  cfg.optimizer.beta1 = j.at("adam_beta1").get<double>();
  cfg.optimizer.beta2 = j.at("adam_beta2").get<double>();
  cfg.optimizer.epsilon = j.at("adam_epsilon").get<double>();
  cfg.optimizer.weight_decay = j.at("weight_decay").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.relevance_threshold = j.at("relevance_threshold").get<double>();
  cfg.evaluate_each_epoch = j.at("evaluate_each_epoch").get<bool>();
  return cfg;
}

ordered_json report_object(const RetrievalReport &r) {
  return ordered_json::parse(to_json(r));
}

ordered_json history_array(const std::vector<EpochRecord> &history) {
  ordered_json arr = ordered_json::array();
  for (const auto &rec : history) {
    ordered_json e;
    e["epoch"] = rec.epoch;
    e["train_loss"] = rec.train_loss;
    e["mean_triple_loss"] = rec.mean_triple_loss;
    e["lr"] = rec.lr;
    if (rec.report) e["report"] = report_object(*rec.report);
    arr.push_back(std::move(e));
  }
  return arr;
}

}  // namespace

std::string to_json(const TrainConfig &cfg) { return config_object(cfg).dump(2); }

TrainConfig train_config_from_json(const std::string &json) {
  try {
    return config_from_object(nlohmann::json::parse(json));
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

std::string history_to_json(const std::vector<EpochRecord> &history) {
  return history_array(history).dump(2);
}

std::filesystem::path sidecar_path(const std::filesystem::path &checkpoint) {
  std::filesystem::path p = checkpoint;
  p.replace_extension(".json");
  return p;
}

void save_checkpoint(const std::filesystem::path &path,
                     const EncoderParams &params, const TrainConfig &cfg,
                     const std::vector<EpochRecord> &history) {
  save_ssl1_frames(path, {params.video_weight, params.video_bias,
                          params.text_weight, params.text_bias});
  ordered_json side;
  side["format"] = "smsl-checkpoint-1";
  side["embed_dim"] = params.embed_dim();
  side["video_dim"] = params.video_weight.rows();
  side["text_dim"] = params.text_weight.rows();
  side["config"] = config_object(cfg);
  side["history"] = history_array(history);
  write_text_file(sidecar_path(path), side.dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path &path) {
  const auto frames = load_ssl1_frames(path);
  if (frames.size() != 4) {
    throw Error(ErrorCode::ParseError,
                path.string() + ": expected 4 SSL1 frames, found " +
                    std::to_string(frames.size()));
  }
  Checkpoint ck;
  ck.params = {frames[0], frames[1], frames[2], frames[3]};
  const EncoderParams &p = ck.params;
  const std::size_t d = p.video_weight.cols();
  if (p.video_bias.rows() != 1 || p.video_bias.cols() != d ||
      p.text_weight.cols() != d || p.text_bias.rows() != 1 ||
      p.text_bias.cols() != d) {
    throw Error(ErrorCode::DimensionMismatch,
                path.string() + ": inconsistent encoder shapes");
  }
  const auto side = sidecar_path(path);
  if (std::filesystem::exists(side)) {
    try {
      const auto j = nlohmann::json::parse(read_text_file(side));
      ck.config = config_from_object(j.at("config"));
    } catch (const nlohmann::json::exception &e) {
      throw Error(ErrorCode::ParseError, side.string() + ": " + e.what());
    }
  }
  return ck;
}

}  // namespace smsl
