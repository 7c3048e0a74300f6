// eertag command line: sample | preprocess | train | decode | eval |
// significance | bench, wired through the C API. Every run writes a
// manifest.json with the resolved configuration beside its outputs.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "eertag/eertag.h"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct RuntimeError {
  int code;
  std::string message;
};

[[noreturn]] void bail(int code, const std::string& stage) {
  throw RuntimeError{code, stage + ": " + eertag_last_error()};
}

// RAII for C API handles and strings.
struct DatasetHandle {
  eertag_dataset* ptr = nullptr;
  DatasetHandle() = default;
  DatasetHandle(const DatasetHandle&) = delete;
  DatasetHandle& operator=(const DatasetHandle&) = delete;
  DatasetHandle(DatasetHandle&& other) noexcept : ptr(other.ptr) {
    other.ptr = nullptr;
  }
  DatasetHandle& operator=(DatasetHandle&& other) noexcept {
    if (this != &other) {
      eertag_dataset_free(ptr);
      ptr = other.ptr;
      other.ptr = nullptr;
    }
    return *this;
  }
  ~DatasetHandle() { eertag_dataset_free(ptr); }
  eertag_dataset* get() const { return ptr; }
};

struct ModelHandle {
  eertag_model* ptr = nullptr;
  ModelHandle() = default;
  ModelHandle(const ModelHandle&) = delete;
  ModelHandle& operator=(const ModelHandle&) = delete;
  ModelHandle(ModelHandle&& other) noexcept : ptr(other.ptr) { other.ptr = nullptr; }
  ModelHandle& operator=(ModelHandle&& other) noexcept {
    if (this != &other) {
      eertag_model_free(ptr);
      ptr = other.ptr;
      other.ptr = nullptr;
    }
    return *this;
  }
  ~ModelHandle() { eertag_model_free(ptr); }
  eertag_model* get() const { return ptr; }
};

std::string take_string(char* text) {
  std::string out = text ? text : "";
  eertag_string_free(text);
  return out;
}

struct ReadFlags {
  std::string path;
  std::string mode = "gold";
  std::string scheme = "bio";
  std::vector<std::string> classes;
  int token_column = 0;
  int tag_column = -1;
  int observed_column = -1;
  bool tab_separated = false;
  bool doc_per_block = false;
};

void add_read_flags(CLI::App* cmd, ReadFlags& flags, const std::string& prefix,
                    const std::string& what, bool required = true) {
  auto* opt = cmd->add_option("--" + prefix, flags.path, what + " corpus file");
  if (required) opt->required();
  cmd->add_option("--" + prefix + "-mode", flags.mode,
                  "column meaning: gold|raw|partial|both")
      ->check(CLI::IsMember({"gold", "raw", "partial", "both"}));
  cmd->add_option("--" + prefix + "-scheme", flags.scheme,
                  "gold tag scheme: bio|biluo")
      ->check(CLI::IsMember({"bio", "biluo"}));
  cmd->add_option("--" + prefix + "-classes", flags.classes,
                  "entity classes (default: scanned from the file)")
      ->delimiter(',');
}

json read_options(const ReadFlags& flags) {
  json opts = {{"mode", flags.mode},
               {"scheme", flags.scheme},
               {"token_column", flags.token_column},
               {"tag_column", flags.tag_column},
               {"observed_column", flags.observed_column},
               {"tab_separated", flags.tab_separated},
               {"doc_per_block", flags.doc_per_block}};
  if (!flags.classes.empty()) opts["classes"] = flags.classes;
  return opts;
}

DatasetHandle read_dataset(const ReadFlags& flags) {
  DatasetHandle handle;
  std::string opts = read_options(flags).dump();
  if (eertag_dataset_read(flags.path.c_str(), opts.c_str(), &handle.ptr) != 0)
    bail(kExitRuntime, "reading " + flags.path);
  return handle;
}

std::vector<std::string> dataset_classes(const DatasetHandle& dataset) {
  char* info_text = nullptr;
  if (eertag_dataset_info(dataset.get(), &info_text) != 0)
    bail(kExitRuntime, "dataset info");
  json info = json::parse(take_string(info_text));
  return info.at("classes").get<std::vector<std::string>>();
}

void write_dataset(const DatasetHandle& dataset, const std::string& path,
                   const std::string& mode) {
  json opts = {{"mode", mode}, {"observed_column", mode == "both" ? 2 : -1}};
  std::string text = opts.dump();
  if (eertag_dataset_write(dataset.get(), path.c_str(), text.c_str()) != 0)
    bail(kExitRuntime, "writing " + path);
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) throw RuntimeError{kExitRuntime, "cannot write " + path};
}

void write_manifest(const std::string& out_dir, const std::string& subcommand,
                    const json& resolved) {
  json manifest = {{"tool", "eertag"},
                   {"version", eertag_version()},
                   {"subcommand", subcommand},
                   {"config", resolved}};
  write_file(out_dir + "/manifest.json", manifest.dump(2) + "\n");
}

std::string ensure_output_dir(const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec)
    throw RuntimeError{kExitRuntime, "cannot create " + out_dir + ": " + ec.message()};
  return out_dir;
}

// ---- subcommand configs ----

struct SampleArgs {
  ReadFlags input;
  std::string output;
  std::string scheme;
  std::uint64_t seed = 0;
  double target_recall = 0.5;
  double target_precision = 0.9;
  int fp_span_max_len = 2;
  long total_budget = 1000;
  long per_doc_cap = 10;
  double keep_prob = 0.8;
};

struct PreprocessArgs {
  ReadFlags input;
  std::string output;
  std::string variant;
};

struct TrainArgs {
  ReadFlags train;
  ReadFlags dev;
  std::string output;
  json config = json::object();
  bool resume = false;
};

struct DecodeArgs {
  ReadFlags input;
  std::string model;
  std::string output;
  double o_bias = 0.0;
  bool tune = false;
  ReadFlags dev;
};

struct EvalArgs {
  ReadFlags pred;
  ReadFlags gold;
  std::string output;
};

struct SignificanceArgs {
  ReadFlags pred_a;
  ReadFlags pred_b;
  ReadFlags gold;
  std::string output;
  long iterations = 10000;
  double confidence = 0.99;
  std::uint64_t seed = 0;
};

struct BenchArgs {
  std::string experiment;
  std::string output;
  json config = json::object();
};

int run_sample(const SampleArgs& args) {
  ensure_output_dir(args.output);
  DatasetHandle gold = read_dataset(args.input);
  json config = {{"scheme", args.scheme},
                 {"seed", args.seed},
                 {"target_recall", args.target_recall},
                 {"target_precision", args.target_precision},
                 {"fp_span_max_len", args.fp_span_max_len},
                 {"total_budget", args.total_budget},
                 {"per_doc_cap", args.per_doc_cap},
                 {"keep_prob", args.keep_prob}};
  DatasetHandle sampled;
  char* stats_text = nullptr;
  std::string config_text = config.dump();
  if (eertag_sample(gold.get(), config_text.c_str(), &sampled.ptr, &stats_text) != 0)
    bail(kExitRuntime, "sampling");
  write_dataset(sampled, args.output + "/corpus.conll", "both");
  write_file(args.output + "/stats.json", take_string(stats_text) + "\n");
  write_manifest(args.output, "sample",
                 {{"input", read_options(args.input)},
                  {"input_path", args.input.path},
                  {"sampler", config}});
  return 0;
}

int run_preprocess(const PreprocessArgs& args) {
  ensure_output_dir(args.output);
  DatasetHandle input = read_dataset(args.input);
  DatasetHandle reduced;
  if (eertag_preprocess(input.get(), args.variant.c_str(), &reduced.ptr) != 0)
    bail(kExitRuntime, "preprocess");
  write_dataset(reduced, args.output + "/corpus.conll",
                args.input.mode == "partial" ? "partial" : "both");
  write_manifest(args.output, "preprocess",
                 {{"input", read_options(args.input)},
                  {"input_path", args.input.path},
                  {"variant", args.variant}});
  return 0;
}

int run_train(const TrainArgs& args) {
  ensure_output_dir(args.output);
  DatasetHandle train_set = read_dataset(args.train);
  DatasetHandle dev_set;
  if (!args.dev.path.empty()) dev_set = read_dataset(args.dev);

  json config = args.config;
  config["checkpoint_dir"] = args.output + "/checkpoint";
  if (args.resume) config["resume"] = true;

  ModelHandle model;
  char* report_text = nullptr;
  std::string config_text = config.dump();
  if (eertag_train(train_set.get(), dev_set.get(), config_text.c_str(),
                   &model.ptr, &report_text) != 0)
    bail(kExitRuntime, "training");
  if (eertag_model_save(model.get(), (args.output + "/model.eertag").c_str()) != 0)
    bail(kExitRuntime, "saving model");

  std::string report = take_string(report_text);
  write_file(args.output + "/train_report.json", report + "\n");
  // One JSON object per epoch, convenient to tail.
  json parsed = json::parse(report);
  std::string lines;
  for (const auto& epoch : parsed.at("epochs")) lines += epoch.dump() + "\n";
  write_file(args.output + "/train_log.jsonl", lines);
  write_manifest(args.output, "train",
                 {{"train", read_options(args.train)},
                  {"train_path", args.train.path},
                  {"dev_path", args.dev.path},
                  {"trainer", config}});
  return 0;
}

int run_decode(const DecodeArgs& args) {
  ensure_output_dir(args.output);
  ModelHandle model;
  if (eertag_model_load(args.model.c_str(), &model.ptr) != 0)
    bail(kExitRuntime, "loading model " + args.model);
  DatasetHandle input = read_dataset(args.input);

  double bias = args.o_bias;
  json tuning = nullptr;
  if (args.tune) {
    DatasetHandle dev = read_dataset(args.dev);
    char* curve_text = nullptr;
    if (eertag_tune_o_bias(model.get(), dev.get(), nullptr, 0, &bias,
                           &curve_text) != 0)
      bail(kExitRuntime, "tuning o-bias");
    tuning = {{"best_o_bias", bias}, {"curve", json::parse(take_string(curve_text))}};
    write_file(args.output + "/tuning.json", tuning.dump(2) + "\n");
  }

  DatasetHandle predictions;
  if (eertag_decode(model.get(), input.get(), bias, &predictions.ptr) != 0)
    bail(kExitRuntime, "decoding");
  write_dataset(predictions, args.output + "/predictions.conll", "gold");
  write_manifest(args.output, "decode",
                 {{"input", read_options(args.input)},
                  {"input_path", args.input.path},
                  {"model", args.model},
                  {"o_bias", bias},
                  {"tuned", args.tune}});
  return 0;
}

int run_eval(const EvalArgs& args) {
  ensure_output_dir(args.output);
  DatasetHandle gold = read_dataset(args.gold);
  ReadFlags pred_flags = args.pred;
  if (pred_flags.classes.empty()) pred_flags.classes = dataset_classes(gold);
  DatasetHandle pred = read_dataset(pred_flags);

  char* prf_text = nullptr;
  if (eertag_evaluate(pred.get(), gold.get(), &prf_text) != 0)
    bail(kExitRuntime, "evaluating");
  std::string metrics = take_string(prf_text);
  std::cout << metrics << "\n";
  write_file(args.output + "/metrics.json", metrics + "\n");
  write_manifest(args.output, "eval",
                 {{"pred_path", args.pred.path}, {"gold_path", args.gold.path}});
  return 0;
}

int run_significance(const SignificanceArgs& args) {
  ensure_output_dir(args.output);
  DatasetHandle gold = read_dataset(args.gold);
  std::vector<std::string> classes = dataset_classes(gold);
  ReadFlags a_flags = args.pred_a;
  ReadFlags b_flags = args.pred_b;
  if (a_flags.classes.empty()) a_flags.classes = classes;
  if (b_flags.classes.empty()) b_flags.classes = classes;
  DatasetHandle a = read_dataset(a_flags);
  DatasetHandle b = read_dataset(b_flags);

  json config = {{"iterations", args.iterations},
                 {"confidence", args.confidence},
                 {"seed", args.seed}};
  char* result_text = nullptr;
  std::string config_text = config.dump();
  if (eertag_significance(a.get(), b.get(), gold.get(), config_text.c_str(),
                          &result_text) != 0)
    bail(kExitRuntime, "significance test");
  std::string result = take_string(result_text);
  std::cout << result << "\n";
  write_file(args.output + "/significance.json", result + "\n");
  write_manifest(args.output, "significance",
                 {{"pred_a", args.pred_a.path},
                  {"pred_b", args.pred_b.path},
                  {"gold", args.gold.path},
                  {"bootstrap", config}});
  return 0;
}

int run_bench(const BenchArgs& args) {
  ensure_output_dir(args.output);
  char* report_text = nullptr;
  std::string config_text = args.config.dump();
  int rc;
  if (args.experiment == "consistency") {
    rc = eertag_bench_consistency(config_text.c_str(), args.output.c_str(),
                                  &report_text);
  } else {
    rc = eertag_bench_sweep(config_text.c_str(), args.output.c_str(), &report_text);
  }
  if (rc != 0) bail(kExitRuntime, "bench " + args.experiment);
  std::cout << take_string(report_text) << "\n";
  write_manifest(args.output, "bench",
                 {{"experiment", args.experiment}, {"bench", args.config}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eertag: NER tagging from partial annotations"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from an INI file");
  app.set_version_flag("--version", eertag_version());

  SampleArgs sample;
  auto* sample_cmd = app.add_subcommand("sample", "simulate partial annotation");
  add_read_flags(sample_cmd, sample.input, "input", "gold");
  sample_cmd->add_option("--output", sample.output, "output directory")->required();
  sample_cmd->add_option("--scheme", sample.scheme, "nns|ee")
      ->required()
      ->check(CLI::IsMember({"nns", "ee"}));
  sample_cmd->add_option("--seed", sample.seed, "rng seed");
  sample_cmd->add_option("--target-recall", sample.target_recall, "nns recall target");
  sample_cmd->add_option("--target-precision", sample.target_precision,
                         "nns precision target");
  sample_cmd->add_option("--fp-span-max-len", sample.fp_span_max_len,
                         "nns false-positive span length cap");
  sample_cmd->add_option("--total-budget", sample.total_budget, "ee span budget M");
  sample_cmd->add_option("--per-doc-cap", sample.per_doc_cap, "ee per-document cap");
  sample_cmd->add_option("--keep-prob", sample.keep_prob, "ee keep probability");

  PreprocessArgs preprocess;
  auto* preprocess_cmd = app.add_subcommand("preprocess", "dataset reductions");
  add_read_flags(preprocess_cmd, preprocess.input, "input", "partial");
  preprocess.input.mode = "both";
  preprocess_cmd->add_option("--output", preprocess.output, "output directory")
      ->required();
  preprocess_cmd->add_option("--variant", preprocess.variant, "all|short|shortest")
      ->required()
      ->check(CLI::IsMember({"all", "short", "shortest"}));

  TrainArgs train;
  double train_rho = 0.15, train_gamma = 0.05, train_lambda = 10.0;
  double train_lr = 1e-2, train_peak = 0.1;
  int train_epochs = 20, train_stop = 0, train_cap = 2000, train_ckpt_every = 0;
  int embed_dim = 32, window = 1, hidden_dim = 64, min_count = 1;
  std::uint64_t train_seed = 0, scorer_seed = 0;
  std::string schedule = "slanted", optimizer = "adam";
  auto* train_cmd = app.add_subcommand("train", "train a tagger");
  add_read_flags(train_cmd, train.train, "train", "training");
  train.train.mode = "both";
  add_read_flags(train_cmd, train.dev, "dev", "development", false);
  train.dev.mode = "both";
  train_cmd->add_option("--output", train.output, "output directory")->required();
  train_cmd->add_option("--epochs", train_epochs, "training epochs");
  train_cmd->add_option("--stop-after-epoch", train_stop,
                        "pause the schedule after this epoch");
  train_cmd->add_flag("--resume", train.resume, "continue from the checkpoint");
  train_cmd->add_option("--batch-token-cap", train_cap, "tokens per batch");
  train_cmd->add_option("--learning-rate", train_lr, "peak learning rate");
  train_cmd->add_option("--schedule", schedule, "constant|slanted")
      ->check(CLI::IsMember({"constant", "slanted"}));
  train_cmd->add_option("--peak-fraction", train_peak, "warmup fraction");
  train_cmd->add_option("--optimizer", optimizer, "sgd|adam")
      ->check(CLI::IsMember({"sgd", "adam"}));
  train_cmd->add_option("--rho", train_rho, "target entity ratio");
  train_cmd->add_option("--gamma", train_gamma, "entity ratio margin");
  train_cmd->add_option("--lambda-u", train_lambda, "entity ratio loss weight");
  train_cmd->add_option("--seed", train_seed, "training rng seed");
  train_cmd->add_option("--scorer-seed", scorer_seed, "initialization seed");
  train_cmd->add_option("--embed-dim", embed_dim, "embedding size");
  train_cmd->add_option("--window", window, "context window");
  train_cmd->add_option("--hidden-dim", hidden_dim, "hidden layer size");
  train_cmd->add_option("--min-count", min_count, "vocabulary count threshold");
  train_cmd->add_option("--checkpoint-every", train_ckpt_every,
                        "checkpoint interval in epochs");

  DecodeArgs decode;
  auto* decode_cmd = app.add_subcommand("decode", "tag a corpus");
  add_read_flags(decode_cmd, decode.input, "input", "input");
  decode.input.mode = "both";
  decode_cmd->add_option("--model", decode.model, "model file")->required();
  decode_cmd->add_option("--output", decode.output, "output directory")->required();
  decode_cmd->add_option("--o-bias", decode.o_bias, "cost-aware decoding bias");
  decode_cmd->add_flag("--tune-o-bias", decode.tune,
                       "grid-search the bias on --dev before decoding");
  add_read_flags(decode_cmd, decode.dev, "dev", "development", false);
  decode.dev.mode = "both";

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "span F1 of predictions");
  add_read_flags(eval_cmd, eval.pred, "pred", "predictions");
  eval.pred.mode = "gold";
  eval.pred.scheme = "biluo";
  add_read_flags(eval_cmd, eval.gold, "gold", "gold");
  eval.gold.mode = "both";
  eval_cmd->add_option("--output", eval.output, "output directory")->required();

  SignificanceArgs significance;
  auto* sig_cmd = app.add_subcommand("significance",
                                     "bootstrap F1 comparison of two systems");
  add_read_flags(sig_cmd, significance.pred_a, "pred-a", "system A predictions");
  significance.pred_a.mode = "gold";
  significance.pred_a.scheme = "biluo";
  add_read_flags(sig_cmd, significance.pred_b, "pred-b", "system B predictions");
  significance.pred_b.mode = "gold";
  significance.pred_b.scheme = "biluo";
  add_read_flags(sig_cmd, significance.gold, "gold", "gold");
  significance.gold.mode = "both";
  sig_cmd->add_option("--output", significance.output, "output directory")
      ->required();
  sig_cmd->add_option("--iterations", significance.iterations, "bootstrap resamples");
  sig_cmd->add_option("--confidence", significance.confidence, "interval confidence");
  sig_cmd->add_option("--seed", significance.seed, "rng seed");

  BenchArgs bench;
  int bench_train_sentences = 2000, bench_test_sentences = 500, bench_epochs = 30;
  std::uint64_t bench_seed = 0;
  double bench_reveal = 0.3, bench_rho_target = 0.2;
  bool bench_no_baselines = false;
  auto* bench_cmd = app.add_subcommand("bench", "synthetic experiments");
  bench_cmd->add_option("experiment", bench.experiment, "consistency|sweep")
      ->required()
      ->check(CLI::IsMember({"consistency", "sweep"}));
  bench_cmd->add_option("--output", bench.output, "output directory")->required();
  bench_cmd->add_option("--train-sentences", bench_train_sentences, "training size");
  bench_cmd->add_option("--test-sentences", bench_test_sentences, "held-out size");
  bench_cmd->add_option("--epochs", bench_epochs, "training epochs");
  bench_cmd->add_option("--seed", bench_seed, "rng seed");
  bench_cmd->add_option("--reveal-prob", bench_reveal, "observation probability");
  bench_cmd->add_option("--entity-ratio-target", bench_rho_target,
                        "generator entity ratio");
  bench_cmd->add_flag("--no-baselines", bench_no_baselines,
                      "skip the raw and lambda_u=0 runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*sample_cmd) return run_sample(sample);
    if (*preprocess_cmd) return run_preprocess(preprocess);
    if (*train_cmd) {
      train.config = {{"epochs", train_epochs},
                      {"stop_after_epoch", train_stop},
                      {"batch_token_cap", train_cap},
                      {"learning_rate", train_lr},
                      {"schedule", schedule},
                      {"peak_fraction", train_peak},
                      {"optimizer", optimizer},
                      {"rho", train_rho},
                      {"gamma", train_gamma},
                      {"lambda_u", train_lambda},
                      {"seed", train_seed},
                      {"scorer_seed", scorer_seed},
                      {"embed_dim", embed_dim},
                      {"window", window},
                      {"hidden_dim", hidden_dim},
                      {"min_count", min_count},
                      {"checkpoint_every", train_ckpt_every}};
      return run_train(train);
    }
    if (*decode_cmd) {
      if (decode.tune && decode.dev.path.empty())
        throw RuntimeError{kExitUsage, "--tune-o-bias requires --dev"};
      return run_decode(decode);
    }
    if (*eval_cmd) return run_eval(eval);
    if (*sig_cmd) return run_significance(significance);
    if (*bench_cmd) {
      bench.config = {{"train_sentences", bench_train_sentences},
                      {"test_sentences", bench_test_sentences},
                      {"epochs", bench_epochs},
                      {"seed", bench_seed},
                      {"reveal_prob", bench_reveal},
                      {"entity_ratio_target", bench_rho_target},
                      {"baselines", !bench_no_baselines}};
      return run_bench(bench);
    }
  } catch (const RuntimeError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
