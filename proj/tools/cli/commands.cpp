// SPDX-License-Identifier: Apache-2.0
#include "cli/commands.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "json.hpp"
#include "smsl/checkpoint.hpp"
#include "smsl/infer.hpp"
#include "smsl/io.hpp"
#include "smsl/train.hpp"

namespace smsl::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

ExitCode exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::DivergenceDetected:
      return kDivergence;
    case ErrorCode::ShapeMismatch:
    case ErrorCode::DimensionMismatch:
      return kDataMismatch;
    default:
      return kUsage;
  }
}

void save_dataset(const fs::path &dir, const SyntheticDataset &data,
                  const SyntheticSpec &spec) {
  fs::create_directories(dir);
  save_relevancy(dir / "relevancy.csv", data.relevancy, MatrixFormat::Csv);
  save_relevancy(dir / "relevancy.bin", data.relevancy, MatrixFormat::Binary);
  save_matrix(dir / "video_raw.bin", data.video.as_matrix(), MatrixFormat::Binary);
  save_matrix(dir / "text_raw.bin", data.text, MatrixFormat::Binary);

  std::ostringstream labels;
  labels << "id,verb,noun\n";
  for (std::size_t n = 0; n < data.size(); ++n) {
    labels << data.ids[n] << ',' << data.verbs[n] << ',' << data.nouns[n] << '\n';
  }
  write_text_file(dir / "labels.csv", labels.str());

  ordered_json m;
  m["format"] = "smsl-dataset-1";
  m["n_items"] = data.size();
  const auto &shape = data.video.shape();
  m["video_shape"] = {shape[0], shape[1], shape[2], shape[3], shape[4]};
  m["text_dim"] = data.text.cols();
  m["spec"] = {{"data_seed", spec.seed},
               {"n_verb_classes", spec.n_verb_classes},
               {"n_noun_classes", spec.n_noun_classes},
               {"noise_sigma", spec.noise_sigma}};
  m["files"] = {"relevancy.csv", "relevancy.bin", "video_raw.bin",
                "text_raw.bin", "labels.csv"};
  write_text_file(dir / "manifest.json", m.dump(2) + "\n");
}

SyntheticDataset load_dataset(const fs::path &dir) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::IoError, "dataset directory " + dir.string() +
                                        " does not exist (run gen-data first)");
  }
  SyntheticDataset data;
  RawVideoBatch::Shape shape{};
  try {
    const auto m = nlohmann::json::parse(read_text_file(dir / "manifest.json"));
    const auto s = m.at("video_shape").get<std::vector<std::size_t>>();
    if (s.size() != 5) throw Error(ErrorCode::ParseError, "video_shape needs 5 dims");
    std::copy(s.begin(), s.end(), shape.begin());
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::ParseError, (dir / "manifest.json").string() + ": " + e.what());
  }
  const Matrix video = load_matrix(dir / "video_raw.bin", MatrixFormat::Binary);
  data.video = RawVideoBatch(shape, video.values());
  data.text = load_matrix(dir / "text_raw.bin", MatrixFormat::Binary);
  data.relevancy = load_relevancy(dir / "relevancy.bin", MatrixFormat::Binary);

  std::istringstream labels(read_text_file(dir / "labels.csv"));
  std::string line;
  std::getline(labels, line);
  while (std::getline(labels, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string id, verb, noun;
    std::getline(fields, id, ',');
    std::getline(fields, verb, ',');
    std::getline(fields, noun, ',');
    try {
      data.ids.push_back(id);
      data.verbs.push_back(std::stoi(verb));
      data.nouns.push_back(std::stoi(noun));
    } catch (const std::exception &) {
      throw Error(ErrorCode::ParseError, "labels.csv: bad line '" + line + "'");
    }
  }
  const std::size_t n = data.size();
  if (data.video.items() != n || data.text.rows() != n ||
      data.relevancy.rows() != n || data.relevancy.cols() != n) {
    throw Error(ErrorCode::ShapeMismatch,
                "dataset files in " + dir.string() + " disagree on item count");
  }
  return data;
}

void cmd_gen_data(const ExperimentConfig &cfg, std::ostream &out) {
  validate(cfg.data);
  const SyntheticDataset data = generate_synthetic(cfg.data);
  save_dataset(cfg.dataset_dir, data, cfg.data);
  spdlog::info("wrote {} items to {}", data.size(), cfg.dataset_dir);
  out << "dataset=" << cfg.dataset_dir << "\nitems=" << data.size() << '\n';
}

namespace {

void write_run_outputs(const fs::path &dir, const EncoderParams &params,
                       const TrainConfig &tcfg, const TrainResult &result,
                       const SyntheticDataset &data) {
  fs::create_directories(dir);
  save_checkpoint(dir / "checkpoint.bin", params, tcfg, result.history);
  write_text_file(dir / "history.json", history_to_json(result.history) + "\n");
  write_text_file(dir / "report.json", to_json(result.final_report) + "\n");
  save_matrix(dir / "similarity.bin", dataset_similarity(params, data).matrix(),
              MatrixFormat::Binary);
}

TrainResult run_training(const SyntheticDataset &data, const TrainConfig &tcfg,
                         const std::optional<EncoderParams> &init) {
  if (const auto warning = tau_warning(tcfg.loss_cfg, data.relevancy)) {
    spdlog::warn("{}", *warning);
  }
  return train(data, tcfg, init, [](const EpochRecord &rec) {
    if (rec.report) {
      spdlog::debug("epoch {} loss {:.6g} lr {:.3g} ndcg_avg {:.4f} map_avg {:.4f}",
                    rec.epoch, rec.train_loss, rec.lr, rec.report->ndcg_avg,
                    rec.report->map_avg);
    } else {
      spdlog::debug("epoch {} loss {:.6g} lr {:.3g}", rec.epoch, rec.train_loss,
                    rec.lr);
    }
  });
}

}  // namespace

void cmd_train(const ExperimentConfig &cfg, std::ostream &out) {
  validate(cfg);
  const SyntheticDataset data = load_dataset(cfg.dataset_dir);
  std::optional<EncoderParams> init;
  if (cfg.init_checkpoint) {
    init = load_checkpoint(*cfg.init_checkpoint).params;
    spdlog::info("warm start from {}", *cfg.init_checkpoint);
  }
  spdlog::info("training {} for {} epochs", to_string(cfg.train.loss),
               cfg.train.total_epochs);
  const TrainResult result = run_training(data, cfg.train, init);
  write_run_outputs(cfg.out, result.params, cfg.train, result, data);
  out << to_display_text(result.final_report);
}

RetrievalReport cmd_eval(const EvalOptions &opts, std::ostream &out) {
  const Checkpoint ck = load_checkpoint(opts.checkpoint);
  const SyntheticDataset data = load_dataset(opts.dataset_dir);
  if (ck.params.video_weight.rows() != data.video.item_size() ||
      ck.params.text_weight.rows() != data.text.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "checkpoint expects inputs of " +
                    std::to_string(ck.params.video_weight.rows()) + "/" +
                    std::to_string(ck.params.text_weight.rows()) +
                    " dims, dataset has " + std::to_string(data.video.item_size()) +
                    "/" + std::to_string(data.text.cols()));
  }
  const SimilarityMatrix s = dataset_similarity(ck.params, data, opts.flip);
  const RetrievalReport report =
      evaluate(s, data.relevancy, opts.relevance_threshold);
  if (!opts.out_dir.empty()) {
    fs::create_directories(opts.out_dir);
    write_text_file(opts.out_dir / "report.json", to_json(report) + "\n");
    save_matrix(opts.out_dir / "similarity.bin", s.matrix(), MatrixFormat::Binary);
  }
  out << to_display_text(report);
  return report;
}

namespace {

std::string slug(const std::string &name) {
  std::string s;
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!s.empty() && s.back() != '_') {
      s += '_';
    }
  }
  while (!s.empty() && s.back() == '_') s.pop_back();
  return s.empty() ? "run" : s;
}

}  // namespace

std::vector<CompareRow> cmd_compare(const ExperimentConfig &cfg, std::ostream &out) {
  validate(cfg);
  const std::vector<CompareRun> runs =
      cfg.compare.empty() ? default_compare_runs() : cfg.compare;
  for (const auto &run : runs) {
    if (run.dataset_dir && fs::path(*run.dataset_dir).lexically_normal() !=
                               fs::path(cfg.dataset_dir).lexically_normal()) {
      throw Error(ErrorCode::ShapeMismatch,
                  "compare run '" + run.name + "' uses dataset " +
                      *run.dataset_dir + " but the experiment uses " +
                      cfg.dataset_dir);
    }
    validate(train_config_for(cfg, run));
  }
  const SyntheticDataset data = load_dataset(cfg.dataset_dir);

  std::vector<CompareRow> rows;
  for (const auto &run : runs) {
    const TrainConfig tcfg = train_config_for(cfg, run);
    spdlog::info("compare: training '{}' ({}, margin {}, tau {})", run.name,
                 to_string(tcfg.loss), tcfg.loss_cfg.margin, tcfg.loss_cfg.tau);
    const TrainResult result = run_training(data, tcfg, std::nullopt);
    write_run_outputs(fs::path(cfg.out) / "runs" / slug(run.name), result.params,
                      tcfg, result, data);
    rows.push_back({run.name, result.final_report});
  }
  fs::create_directories(cfg.out);
  write_text_file(fs::path(cfg.out) / "compare.csv", format_compare_csv(rows));
  write_text_file(fs::path(cfg.out) / "compare.txt", format_compare_table(rows));
  out << format_compare_table(rows);
  return rows;
}

std::string format_compare_table(const std::vector<CompareRow> &rows) {
  std::size_t width = 7;
  for (const auto &r : rows) width = std::max(width, r.name.size());
  auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(s.size(), w), ' ');
    return s;
  };
  std::ostringstream t;
  t << pad("Methods", width) << " | " << pad("mAP (%)", 20) << " | nDCG (%)\n";
  t << pad("", width) << " | " << pad("V->T", 6) << ' ' << pad("T->V", 6) << ' '
    << pad("Avg.", 6) << " | " << pad("V->T", 6) << ' ' << pad("T->V", 6) << ' '
    << "Avg.\n";
  for (const auto &r : rows) {
    const auto &p = r.report;
    t << pad(r.name, width) << " | " << pad(truncate_significant(p.map_v2t), 6)
      << ' ' << pad(truncate_significant(p.map_t2v), 6) << ' '
      << pad(truncate_significant(p.map_avg), 6) << " | "
      << pad(truncate_significant(p.ndcg_v2t), 6) << ' '
      << pad(truncate_significant(p.ndcg_t2v), 6) << ' '
      << truncate_significant(p.ndcg_avg) << '\n';
  }
  return t.str();
}

std::string format_compare_csv(const std::vector<CompareRow> &rows) {
  std::ostringstream c;
  c << "method,map_v2t,map_t2v,map_avg,ndcg_v2t,ndcg_t2v,ndcg_avg\n";
  for (const auto &r : rows) {
    const auto &p = r.report;
    c << '"' << r.name << '"' << ',' << truncate_significant(p.map_v2t) << ','
      << truncate_significant(p.map_t2v) << ',' << truncate_significant(p.map_avg)
      << ',' << truncate_significant(p.ndcg_v2t) << ','
      << truncate_significant(p.ndcg_t2v) << ','
      << truncate_significant(p.ndcg_avg) << '\n';
  }
  return c.str();
}

EnsembleOutcome cmd_ensemble(const EnsembleOptions &opts, std::ostream &out) {
  if (opts.similarity_paths.empty()) {
    throw Error(ErrorCode::EmptyEnsemble, "no similarity matrices given");
  }
  const RelevancyMatrix relevancy =
      load_relevancy(opts.relevancy_path, format_for_path(opts.relevancy_path));
  std::vector<SimilarityMatrix> members;
  for (const auto &p : opts.similarity_paths) {
    members.emplace_back(load_matrix(p, format_for_path(p)));
  }
  const SimilarityMatrix summed = ensemble_similarity(members);

  EnsembleOutcome outcome;
  for (const auto &m : members) {
    outcome.individual.push_back(evaluate(m, relevancy, opts.relevance_threshold));
  }
  outcome.ensemble = evaluate(summed, relevancy, opts.relevance_threshold);

  auto best = [&](double RetrievalReport::*field) {
    double b = outcome.individual.front().*field;
    for (const auto &r : outcome.individual) b = std::max(b, r.*field);
    return outcome.ensemble.*field - b;
  };
  outcome.delta.map_v2t = best(&RetrievalReport::map_v2t);
  outcome.delta.map_t2v = best(&RetrievalReport::map_t2v);
  outcome.delta.map_avg = best(&RetrievalReport::map_avg);
  outcome.delta.ndcg_v2t = best(&RetrievalReport::ndcg_v2t);
  outcome.delta.ndcg_t2v = best(&RetrievalReport::ndcg_t2v);
  outcome.delta.ndcg_avg = best(&RetrievalReport::ndcg_avg);

  std::vector<CompareRow> rows;
  for (std::size_t i = 0; i < members.size(); ++i) {
    rows.push_back({opts.similarity_paths[i].filename().string(),
                    outcome.individual[i]});
  }
  rows.push_back({"Ensemble", outcome.ensemble});
  out << format_compare_table(rows);
  auto signed_text = [](double x) {
    return (x >= 0.0 ? "+" : "-") + truncate_significant(std::abs(x));
  };
  const auto &d = outcome.delta;
  out << "Delta: map_avg=" << signed_text(d.map_avg)
      << " ndcg_avg=" << signed_text(d.ndcg_avg) << '\n';

  if (!opts.out_dir.empty()) {
    fs::create_directories(opts.out_dir);
    ordered_json j;
    j["inputs"] = ordered_json::array();
    for (std::size_t i = 0; i < members.size(); ++i) {
      j["inputs"].push_back(
          {{"path", opts.similarity_paths[i].string()},
           {"report", ordered_json::parse(to_json(outcome.individual[i]))}});
    }
    j["ensemble"] = ordered_json::parse(to_json(outcome.ensemble));
    j["delta"] = ordered_json::parse(to_json(outcome.delta));
    write_text_file(opts.out_dir / "ensemble_report.json", j.dump(2) + "\n");
    save_matrix(opts.out_dir / "ensemble_similarity.bin", summed.matrix(),
                MatrixFormat::Binary);
  }
  return outcome;
}

}  // namespace smsl::cli
