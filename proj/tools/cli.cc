// Copyright 2026 The s2e-coref Authors.
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

#include "cli.h"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>
#include <sstream>

#include "coref/conll_io.h"
#include "coref/embedding_io.h"
#include "coref/errors.h"
#include "coref/inference.h"
#include "coref/log.h"
#include "coref/memory_bench.h"
#include "coref/metrics.h"
#include "coref/s2e_head.h"
#include "coref/synthetic.h"
#include "coref/training.h"

namespace coref::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Values that every subcommand accepts. Flags given on the command line win
// over the config file, which wins over built-in defaults.
struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda;
  std::optional<int> max_span_length;
  std::optional<bool> insert_speakers;

  TrainConfig Resolve() const {
    TrainConfig config;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) {
        throw FormatError(FormatError::Kind::kIo,
                          "cannot open config file " + config_path);
      }
      std::stringstream text;
      text << in.rdbuf();
      config = ParseTrainConfig(text.str());
    }
    if (seed) config.seed = *seed;
    if (lambda) {
      if (!(*lambda > 0.0 && *lambda <= 1.0)) {
        throw DomainError("lambda must lie in (0, 1]");
      }
      config.lambda = *lambda;
    }
    if (max_span_length) {
      ApplyConfigValue(config, "max_span_length",
                       std::to_string(*max_span_length));
    }
    if (insert_speakers) config.insert_speakers = *insert_speakers;
    return config;
  }
};

void AddCommon(CLI::App *app, CommonFlags &flags, bool pruning) {
  app->add_option("--config", flags.config_path, "key = value config file");
  app->add_option("--seed", flags.seed, "random seed");
  if (pruning) {
    app->add_option("--lambda", flags.lambda, "fraction of tokens kept as mentions");
    app->add_option("--max-span-length", flags.max_span_length,
                    "longest candidate span");
  }
}

void AddSpeakerFlag(CLI::App *app, CommonFlags &flags, bool default_on = true) {
  app->add_option("--insert-speakers", flags.insert_speakers,
                  std::string("prefix speaker turns with name tokens (default ") +
                      (default_on ? "true)" : "false)"));
}

std::vector<Document> Prepare(std::vector<Document> docs, bool insert_speakers) {
  if (insert_speakers) {
    for (Document &doc : docs) doc = InsertSpeakers(doc);
  }
  return docs;
}

Matrix LoadEmbeddings(const Document &doc, const std::string &dir, int dim,
                      std::uint64_t seed) {
  if (dir.empty()) return SyntheticEmbed(doc, dim, seed).values;
  const std::string path = (fs::path(dir) / DocembFileName(doc.doc_key)).string();
  EmbeddingMatrix m = ReadDocembFile(path);
  if (m.n() != doc.size()) {
    throw FormatError(FormatError::Kind::kInvalid,
                      path + ": " + std::to_string(m.n()) + " rows but " +
                          doc.doc_key + " has " + std::to_string(doc.size()) +
                          " tokens");
  }
  if (m.doc_key != doc.doc_key) {
    Warn(path + ": stored key '" + m.doc_key + "' differs from '" +
         doc.doc_key + "'");
  }
  return std::move(m.values);
}

std::vector<TrainingExample> LoadExamples(const std::string &path,
                                          const TrainConfig &config) {
  std::vector<TrainingExample> out;
  for (Document &doc : Prepare(ReadDocuments(path), config.insert_speakers)) {
    Matrix x = LoadEmbeddings(doc, config.embeddings_dir, config.embedding_dim,
                              config.seed);
    out.push_back({std::move(doc), std::move(x)});
  }
  return out;
}

std::vector<int> ParseIntList(const std::string &text) {
  std::vector<int> values;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (used != item.size() || item.empty() || v < 1) {
      throw DomainError("expected a comma-separated list of positive integers, got '" +
                        text + "'");
    }
    values.push_back(v);
  }
  return values;
}

void WriteOutput(const std::string &path, const std::string &text,
                 std::ostream &out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file || !(file << text)) {
    throw FormatError(FormatError::Kind::kIo, "cannot write " + path);
  }
}

// --- train ---------------------------------------------------------------

struct TrainFlags {
  CommonFlags common;
  std::string train_path, dev_path, embeddings_dir, output_path, log_path,
      init_path;
  std::optional<int> epochs, max_steps, head_dim, embedding_dim, token_budget;
  std::optional<double> learning_rate;
};

int RunTrain(const TrainFlags &flags, std::ostream &out) {
  TrainConfig config = flags.common.Resolve();
  if (!flags.train_path.empty()) config.train_path = flags.train_path;
  if (!flags.dev_path.empty()) config.dev_path = flags.dev_path;
  if (!flags.embeddings_dir.empty()) config.embeddings_dir = flags.embeddings_dir;
  if (!flags.output_path.empty()) config.output_path = flags.output_path;
  if (!flags.log_path.empty()) config.log_path = flags.log_path;
  auto apply = [&config](const char *key, const auto &value) {
    if (value) ApplyConfigValue(config, key, std::to_string(*value));
  };
  apply("epochs", flags.epochs);
  apply("max_steps", flags.max_steps);
  apply("head_dim", flags.head_dim);
  apply("embedding_dim", flags.embedding_dim);
  apply("token_budget", flags.token_budget);
  if (flags.learning_rate) config.adam.learning_rate = *flags.learning_rate;
  if (config.train_path.empty()) {
    throw DomainError("train: no training data (--train or train_path)");
  }

  const auto corpus = LoadExamples(config.train_path, config);
  std::vector<TrainingExample> dev;
  if (!config.dev_path.empty()) dev = LoadExamples(config.dev_path, config);

  std::ofstream log_file;
  if (!config.log_path.empty()) {
    log_file.open(config.log_path);
    if (!log_file) {
      throw FormatError(FormatError::Kind::kIo, "cannot write " + config.log_path);
    }
  }
  auto on_epoch = [&](const EpochLog &log) {
    const std::string line = ToJsonLine(log);
    out << line << "\n";
    if (log_file.is_open()) log_file << line << "\n" << std::flush;
  };
  TrainResult result;
  if (!flags.init_path.empty()) {
    result = Train(corpus, config, LoadS2eParams(flags.init_path), dev, on_epoch);
  } else {
    result = Train(corpus, config, dev, on_epoch);
  }
  if (!config.output_path.empty()) SaveS2eParams(config.output_path, result.params);
  return kOk;
}

// --- predict -------------------------------------------------------------

struct PredictFlags {
  CommonFlags common;
  std::string input_path, checkpoint_path, embeddings_dir, output_path, format;
};

int RunPredict(const PredictFlags &flags, std::ostream &out) {
  const TrainConfig config = flags.common.Resolve();
  const S2eParams params = LoadS2eParams(flags.checkpoint_path);
  const std::string dir =
      flags.embeddings_dir.empty() ? config.embeddings_dir : flags.embeddings_dir;
  const TextFormat format =
      !flags.format.empty()
          ? ParseTextFormat(flags.format)
          : (flags.output_path.empty() ? FormatFromPath(flags.input_path)
                                       : FormatFromPath(flags.output_path));
  std::string text;
  for (const Document &doc :
       Prepare(ReadDocuments(flags.input_path), config.insert_speakers)) {
    const Matrix x = LoadEmbeddings(doc, dir, params.input_dim, config.seed);
    if (x.cols() != params.input_dim) {
      throw FormatError(FormatError::Kind::kInvalid,
                        doc.doc_key + ": embeddings have width " +
                            std::to_string(x.cols()) + ", checkpoint expects " +
                            std::to_string(params.input_dim));
    }
    text += WritePredictions(doc, Predict(doc, x, params, config.inference()),
                             format);
  }
  WriteOutput(flags.output_path, text, out);
  return kOk;
}

// --- evaluate ------------------------------------------------------------

struct EvaluateFlags {
  CommonFlags common;
  std::string gold_path, pred_path;
};

int RunEvaluate(const EvaluateFlags &flags, std::ostream &out) {
  flags.common.Resolve();
  const auto gold = ReadDocuments(flags.gold_path);
  std::map<std::pair<std::string, int>, const Document *> by_key;
  const auto pred = ReadDocuments(flags.pred_path);
  for (const Document &doc : pred) by_key[{doc.doc_key, doc.part}] = &doc;
  CorefEvaluator evaluator;
  for (const Document &doc : gold) {
    auto it = by_key.find({doc.doc_key, doc.part});
    if (it == by_key.end()) {
      throw DataError("no prediction for document '" + doc.doc_key + "' part " +
                      std::to_string(doc.part));
    }
    evaluator.Add(doc.gold_clusters, it->second->gold_clusters);
  }
  out << evaluator.Report().dump() << "\n";
  return kOk;
}

// --- gradcheck -----------------------------------------------------------

struct GradCheckFlags {
  CommonFlags common;
  int num_tokens = 12, input_dim = 8, head_dim = 6;
  double step = 1e-5, tolerance = 1e-6;
};

int RunGradCheck(const GradCheckFlags &flags, std::ostream &out) {
  TrainConfig config = flags.common.Resolve();
  if (!flags.common.lambda) config.lambda = 0.5;
  if (!flags.common.max_span_length) config.max_span_length = 4;
  if (flags.num_tokens < 4) throw DomainError("gradcheck needs --n >= 4");
  Rng rng(config.seed);
  SyntheticDocOptions options;
  options.min_tokens = options.max_tokens = flags.num_tokens;
  options.min_clusters = 1;
  options.max_clusters = flags.num_tokens >= 8 ? 2 : 1;
  options.max_mentions = 2;
  options.max_mention_length = std::min(2, config.max_span_length);
  const Document doc = RandomDocument(rng, options, "nw/gradcheck");
  const Matrix x = SyntheticEmbed(doc, flags.input_dim, config.seed).values;
  const S2eParams params = InitS2eParams(flags.input_dim, flags.head_dim, config.seed);
  GradCheckOptions check;
  check.step = flags.step;
  const GradCheckReport report =
      GradCheck(doc, x, params, config.inference(), check);

  json tensors = json::object();
  for (int t = 0; t < S2eParams::kNumTensors; ++t) {
    tensors[S2eParams::TensorNames()[t]] = report.max_relative_error[t];
  }
  const auto failures = report.Failures(flags.tolerance);
  out << json{{"seed", config.seed},
              {"step", flags.step},
              {"tolerance", flags.tolerance},
              {"max_relative_error", tensors},
              {"worst", report.worst()},
              {"failed", failures}}
             .dump()
      << "\n";
  return failures.empty() ? kOk : kNumericFailure;
}

// --- bench ---------------------------------------------------------------

struct BenchFlags {
  CommonFlags common;
  std::string head = "both";
  std::string sizes = "256,512,1024";
  BenchSettings settings;
};

int RunBench(const BenchFlags &flags, std::ostream &out) {
  const TrainConfig config = flags.common.Resolve();
  BenchSettings settings = flags.settings;
  settings.seed = config.seed;
  settings.lambda = config.lambda;
  settings.max_span_length = config.max_span_length;
  std::vector<Head> heads;
  if (flags.head == "both") {
    heads = {Head::kS2e, Head::kC2f};
  } else {
    heads = {ParseHead(flags.head)};
  }
  const std::vector<int> sizes = ParseIntList(flags.sizes);
  std::map<int, std::map<Head, std::int64_t>> peaks;
  for (Head head : heads) {
    std::vector<double> xs, ys;
    for (int n : sizes) {
      settings.num_tokens = n;
      const AllocationReport report = MeasureHead(head, settings);
      json line = ToJson(report);
      line["head"] = HeadName(head);
      out << line.dump() << "\n";
      peaks[n][head] = report.peak_live_floats;
      xs.push_back(n);
      ys.push_back(static_cast<double>(std::max<std::int64_t>(1, report.peak_live_floats)));
    }
    if (std::set<double>(xs.begin(), xs.end()).size() >= 2) {
      out << json{{"head", HeadName(head)}, {"exponent", LogLogSlope(xs, ys)}}.dump()
          << "\n";
    }
  }
  if (heads.size() == 2) {
    for (const auto &[n, by_head] : peaks) {
      out << json{{"n", n},
                  {"c2f_over_s2e_peak",
                   static_cast<double>(by_head.at(Head::kC2f)) /
                       static_cast<double>(std::max<std::int64_t>(
                           1, by_head.at(Head::kS2e)))}}
                 .dump()
          << "\n";
    }
  }
  return kOk;
}

// --- convert -------------------------------------------------------------

struct ConvertFlags {
  CommonFlags common;
  std::string input_path, output_path, format;
};

int RunConvert(const ConvertFlags &flags, std::ostream &out) {
  flags.common.Resolve();  // validates --config
  // Conversion keeps the text as is unless insertion is asked for.
  const bool insert = flags.common.insert_speakers.value_or(false);
  const TextFormat format =
      !flags.format.empty() ? ParseTextFormat(flags.format)
                            : FormatFromPath(flags.output_path);
  std::string text;
  for (const Document &doc : Prepare(ReadDocuments(flags.input_path), insert)) {
    text += WriteDocument(doc, format);
  }
  WriteOutput(flags.output_path, text, out);
  return kOk;
}

// --- synth-embed ---------------------------------------------------------

struct SynthEmbedFlags {
  CommonFlags common;
  std::string input_path, output_dir;
  std::optional<int> dim;
};

int RunSynthEmbed(const SynthEmbedFlags &flags, std::ostream &out) {
  TrainConfig config = flags.common.Resolve();
  if (flags.dim) ApplyConfigValue(config, "embedding_dim", std::to_string(*flags.dim));
  fs::create_directories(flags.output_dir);
  int written = 0;
  for (const Document &doc :
       Prepare(ReadDocuments(flags.input_path), config.insert_speakers)) {
    const std::string path =
        (fs::path(flags.output_dir) / DocembFileName(doc.doc_key)).string();
    WriteDocembFile(path, SyntheticEmbed(doc, config.embedding_dim, config.seed));
    out << json{{"doc_key", doc.doc_key}, {"n", doc.size()}, {"path", path}}.dump()
        << "\n";
    ++written;
  }
  if (written == 0) Warn("synth-embed: no documents in " + flags.input_path);
  return kOk;
}

}  // namespace

int RunCli(const std::vector<std::string> &args, std::ostream &out,
           std::ostream &err) {
  CLI::App app{"Start-to-end coreference: training, inference, evaluation "
               "and memory benchmarks",
               "coref"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "coref 0.1.0");

  TrainFlags train;
  CLI::App *train_cmd = app.add_subcommand("train", "train the s2e head");
  AddCommon(train_cmd, train.common, true);
  AddSpeakerFlag(train_cmd, train.common);
  train_cmd->add_option("--train", train.train_path, "training documents");
  train_cmd->add_option("--dev", train.dev_path, "dev documents for per-epoch F1");
  train_cmd->add_option("--embeddings", train.embeddings_dir,
                        "docemb directory (synthetic embeddings when absent)");
  train_cmd->add_option("--output", train.output_path, "checkpoint to write");
  train_cmd->add_option("--log", train.log_path, "per-epoch JSON log file");
  train_cmd->add_option("--init", train.init_path, "checkpoint to continue from");
  train_cmd->add_option("--epochs", train.epochs);
  train_cmd->add_option("--max-steps", train.max_steps);
  train_cmd->add_option("--head-dim", train.head_dim);
  train_cmd->add_option("--embedding-dim", train.embedding_dim);
  train_cmd->add_option("--token-budget", train.token_budget);
  train_cmd->add_option("--lr", train.learning_rate);

  PredictFlags predict;
  CLI::App *predict_cmd = app.add_subcommand("predict", "cluster documents");
  AddCommon(predict_cmd, predict.common, true);
  AddSpeakerFlag(predict_cmd, predict.common);
  predict_cmd->add_option("--input", predict.input_path)->required();
  predict_cmd->add_option("--checkpoint", predict.checkpoint_path)->required();
  predict_cmd->add_option("--embeddings", predict.embeddings_dir);
  predict_cmd->add_option("--output", predict.output_path, "default: stdout");
  predict_cmd->add_option("--format", predict.format, "conll or jsonlines");

  EvaluateFlags evaluate;
  CLI::App *evaluate_cmd =
      app.add_subcommand("evaluate", "score predictions against gold");
  AddCommon(evaluate_cmd, evaluate.common, false);
  evaluate_cmd->add_option("--gold", evaluate.gold_path)->required();
  evaluate_cmd->add_option("--pred", evaluate.pred_path)->required();

  GradCheckFlags gradcheck;
  CLI::App *gradcheck_cmd = app.add_subcommand(
      "gradcheck", "compare analytic gradients with central differences");
  AddCommon(gradcheck_cmd, gradcheck.common, true);
  gradcheck_cmd->add_option("--n", gradcheck.num_tokens, "document length");
  gradcheck_cmd->add_option("--d", gradcheck.input_dim, "embedding width");
  gradcheck_cmd->add_option("--head-dim", gradcheck.head_dim);
  gradcheck_cmd->add_option("--step", gradcheck.step)
      ->check(CLI::PositiveNumber);
  gradcheck_cmd->add_option("--tolerance", gradcheck.tolerance);

  BenchFlags bench;
  CLI::App *bench_cmd =
      app.add_subcommand("bench", "allocation benchmark of the two heads");
  AddCommon(bench_cmd, bench.common, true);
  bench_cmd->add_option("--head", bench.head)
      ->check(CLI::IsMember({"s2e", "c2f", "both"}));
  bench_cmd->add_option("--n", bench.sizes, "comma-separated document lengths");
  bench_cmd->add_option("--d", bench.settings.input_dim);
  bench_cmd->add_option("--head-dim", bench.settings.head_dim);
  bench_cmd->add_option("--max-antecedents", bench.settings.max_antecedents,
                        "c2f K; 0 means k - 1");
  bench_cmd->add_option("--feature-dim", bench.settings.feature_dim);

  ConvertFlags convert;
  CLI::App *convert_cmd =
      app.add_subcommand("convert", "convert between CoNLL and jsonlines");
  AddCommon(convert_cmd, convert.common, false);
  AddSpeakerFlag(convert_cmd, convert.common, false);
  convert_cmd->add_option("--input", convert.input_path)->required();
  convert_cmd->add_option("--output", convert.output_path, "default: stdout");
  convert_cmd->add_option("--to", convert.format, "conll or jsonlines");

  SynthEmbedFlags synth;
  CLI::App *synth_cmd = app.add_subcommand(
      "synth-embed", "write deterministic synthetic docemb files");
  AddCommon(synth_cmd, synth.common, false);
  AddSpeakerFlag(synth_cmd, synth.common);
  synth_cmd->add_option("--input", synth.input_path)->required();
  synth_cmd->add_option("--output-dir", synth.output_dir)->required();
  synth_cmd->add_option("--dim", synth.dim);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion &) {
    out << app.version() << "\n";
    return kOk;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kUsage;
  }

  try {
    if (*train_cmd) return RunTrain(train, out);
    if (*predict_cmd) return RunPredict(predict, out);
    if (*evaluate_cmd) return RunEvaluate(evaluate, out);
    if (*gradcheck_cmd) return RunGradCheck(gradcheck, out);
    if (*bench_cmd) return RunBench(bench, out);
    if (*convert_cmd) return RunConvert(convert, out);
    if (*synth_cmd) return RunSynthEmbed(synth, out);
  } catch (const DataError &e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const NumericError &e) {
    err << "numeric failure: " << e.what() << "\n";
    return kNumericFailure;
  } catch (const DomainError &e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DimensionError &e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const fs::filesystem_error &e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace coref::cli
