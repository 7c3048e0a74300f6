#include "eertag/eertag.h"

#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "eertag/conll.hpp"
#include "eertag/corpus.hpp"
#include "eertag/error.hpp"
#include "eertag/eval.hpp"
#include "eertag/preprocess.hpp"
#include "eertag/samplers.hpp"
#include "eertag/serialize.hpp"
#include "eertag/synthetic.hpp"
#include "eertag/trainer.hpp"

using nlohmann::json;

struct eertag_dataset {
  eertag::Dataset impl;
};

struct eertag_model {
  eertag::ScorerParams impl;
};

namespace {

thread_local std::string g_last_error;

int code_of(const eertag::Error& e) {
  switch (e.code()) {
    case eertag::ErrorCode::invalid_argument: return EERTAG_ERR_INVALID_ARGUMENT;
    case eertag::ErrorCode::io_failure: return EERTAG_ERR_IO;
    case eertag::ErrorCode::parse_error: return EERTAG_ERR_PARSE;
    case eertag::ErrorCode::ungrammatical: return EERTAG_ERR_UNGRAMMATICAL;
    case eertag::ErrorCode::no_valid_path: return EERTAG_ERR_NO_VALID_PATH;
    case eertag::ErrorCode::unsatisfiable: return EERTAG_ERR_UNSATISFIABLE;
    case eertag::ErrorCode::missing_gold: return EERTAG_ERR_MISSING_GOLD;
    case eertag::ErrorCode::target_unreachable: return EERTAG_ERR_TARGET_UNREACHABLE;
    case eertag::ErrorCode::non_finite: return EERTAG_ERR_NON_FINITE;
    case eertag::ErrorCode::shape_mismatch: return EERTAG_ERR_SHAPE_MISMATCH;
  }
  return EERTAG_ERR_INTERNAL;
}

template <typename F>
int guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return EERTAG_OK;
  } catch (const eertag::Error& e) {
    g_last_error = e.what();
    return code_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return EERTAG_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& text) {
  char* out = new char[text.size() + 1];
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

json parse_options(const char* options_json) {
  if (options_json == nullptr || *options_json == '\0') return json::object();
  return json::parse(options_json);
}

eertag::ColumnFormatConfig column_config(const json& opts) {
  eertag::ColumnFormatConfig config;
  config.token_column = opts.value("token_column", config.token_column);
  config.tag_column = opts.value("tag_column", config.tag_column);
  config.observed_column = opts.value("observed_column", config.observed_column);
  config.tab_separated = opts.value("tab_separated", config.tab_separated);
  config.docstart_marker = opts.value("docstart_marker", config.docstart_marker);
  config.doc_per_block = opts.value("doc_per_block", config.doc_per_block);
  std::string scheme = opts.value("scheme", std::string("bio"));
  if (scheme == "bio") {
    config.scheme = eertag::TagScheme::bio;
  } else if (scheme == "biluo") {
    config.scheme = eertag::TagScheme::biluo;
  } else {
    eertag::fail(eertag::ErrorCode::invalid_argument,
                 "unknown scheme '" + scheme + "'");
  }
  std::string mode = opts.value("mode", std::string("gold"));
  if (mode == "gold") {
    config.mode = eertag::CorpusMode::gold;
  } else if (mode == "raw") {
    config.mode = eertag::CorpusMode::raw;
  } else if (mode == "partial") {
    config.mode = eertag::CorpusMode::partial;
  } else if (mode == "both") {
    // The pipeline's own two-column format: token, BILUO gold, observation.
    config.mode = eertag::CorpusMode::both;
    config.scheme = eertag::TagScheme::biluo;
    if (config.tag_column < 0) config.tag_column = 1;
    if (config.observed_column < 0) config.observed_column = 2;
  } else {
    eertag::fail(eertag::ErrorCode::invalid_argument, "unknown mode '" + mode + "'");
  }
  return config;
}

json stats_json(const eertag::SamplerStats& stats) {
  return {{"recall", stats.recall},
          {"precision", stats.precision},
          {"position_bias", stats.position_bias},
          {"gold_position_bias", stats.gold_position_bias},
          {"gold_spans", stats.gold_spans},
          {"kept_spans", stats.kept_spans},
          {"false_positive_spans", stats.false_positive_spans},
          {"per_doc_counts", stats.per_doc_counts},
          {"largest_group_fraction", stats.largest_group_fraction},
          {"shortfall", stats.shortfall}};
}

json prf_json(const eertag::PRF& prf) {
  return {{"precision", prf.precision}, {"recall", prf.recall}, {"f1", prf.f1},
          {"tp", prf.tp},               {"fp", prf.fp},         {"fn", prf.fn}};
}

json metrics_json(const eertag::RunMetrics& m) {
  return {{"token_accuracy", m.token_accuracy},
          {"sequence_accuracy", m.sequence_accuracy},
          {"rho_hat", m.rho_hat},
          {"entity", prf_json(m.entity)}};
}

eertag::TrainConfig train_config_of(const json& opts) {
  eertag::TrainConfig config;
  config = eertag::train_config_from_json(opts.dump());
  config.rng_seed = opts.value("seed", config.rng_seed);
  return config;
}

eertag::ScorerConfig scorer_config_of(const json& opts) {
  eertag::ScorerConfig config;
  config.embed_dim = opts.value("embed_dim", config.embed_dim);
  config.window = opts.value("window", config.window);
  config.hidden_dim = opts.value("hidden_dim", config.hidden_dim);
  config.init_scale = opts.value("init_scale", config.init_scale);
  config.min_count = opts.value("min_count", config.min_count);
  config.rng_seed = opts.value("scorer_seed", config.rng_seed);
  return config;
}

json train_report_json(const eertag::TrainReport& report) {
  json epochs = json::array();
  for (const auto& e : report.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"loss_p", e.loss_p},
                      {"loss_u", e.loss_u},
                      {"loss", e.loss},
                      {"corpus_rho_hat", e.corpus_rho_hat},
                      {"dev_f1", e.dev_f1},
                      {"seconds", e.seconds}});
  }
  return {{"epochs", epochs},
          {"final_rho_hat", report.final_rho_hat},
          {"total_steps", report.total_steps}};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) eertag::fail(eertag::ErrorCode::io_failure, "cannot write " + path);
  out << text;
}

}  // namespace

extern "C" {

const char* eertag_version(void) { return "0.1.0"; }

const char* eertag_last_error(void) { return g_last_error.c_str(); }

void eertag_string_free(char* text) { delete[] text; }

int eertag_dataset_read(const char* path, const char* options_json,
                        eertag_dataset** out) {
  return guarded([&] {
    json opts = parse_options(options_json);
    eertag::ColumnFormatConfig config = column_config(opts);
    std::vector<std::string> classes;
    if (opts.contains("classes")) {
      classes = opts.at("classes").get<std::vector<std::string>>();
    } else {
      classes = eertag::scan_classes(path, config);
    }
    eertag::TagSet tagset(classes);
    *out = new eertag_dataset{eertag::read_corpus(path, config, tagset)};
  });
}

int eertag_dataset_write(const eertag_dataset* dataset, const char* path,
                         const char* options_json) {
  return guarded([&] {
    json opts = parse_options(options_json);
    eertag::write_corpus(dataset->impl, path, column_config(opts));
  });
}

void eertag_dataset_free(eertag_dataset* dataset) { delete dataset; }

int eertag_dataset_info(const eertag_dataset* dataset, char** json_out) {
  return guarded([&] {
    const eertag::Dataset& d = dataset->impl;
    long observations = 0;
    bool all_gold = true;
    for (const auto& doc : d.documents) {
      for (const auto& s : doc.sentences) {
        observations += static_cast<long>(s.observed.size());
        if (!s.gold_tags) all_gold = false;
      }
    }
    json info = {{"documents", d.documents.size()},
                 {"sentences", d.sentence_count()},
                 {"tokens", d.token_count()},
                 {"observations", observations},
                 {"classes", d.tagset.classes()}};
    if (all_gold && !d.documents.empty()) {
      info["gold_spans"] = eertag::count_gold_spans(d);
      info["entity_token_ratio"] = eertag::entity_token_ratio(d);
    }
    *json_out = dup_string(info.dump(2));
  });
}

int eertag_sample(const eertag_dataset* gold, const char* config_json,
                  eertag_dataset** out, char** stats_json_out) {
  return guarded([&] {
    json opts = parse_options(config_json);
    std::string scheme = opts.value("scheme", std::string());
    eertag::SampleResult result;
    if (scheme == "nns") {
      eertag::NnsConfig config;
      config.target_recall = opts.value("target_recall", config.target_recall);
      config.target_precision =
          opts.value("target_precision", config.target_precision);
      config.fp_span_max_len = opts.value("fp_span_max_len", config.fp_span_max_len);
      config.rng_seed = opts.value("seed", config.rng_seed);
      result = eertag::sample_nns(gold->impl, config);
    } else if (scheme == "ee") {
      eertag::EeConfig config;
      config.total_budget = opts.value("total_budget", config.total_budget);
      config.per_doc_cap = opts.value("per_doc_cap", config.per_doc_cap);
      config.keep_prob = opts.value("keep_prob", config.keep_prob);
      config.rng_seed = opts.value("seed", config.rng_seed);
      result = eertag::sample_ee(gold->impl, config);
    } else {
      eertag::fail(eertag::ErrorCode::invalid_argument,
                   "sample scheme must be 'nns' or 'ee'");
    }
    *out = new eertag_dataset{std::move(result.dataset)};
    if (stats_json_out) *stats_json_out = dup_string(stats_json(result.stats).dump(2));
  });
}

int eertag_preprocess(const eertag_dataset* dataset, const char* variant,
                      eertag_dataset** out) {
  return guarded([&] {
    eertag::PreprocessVariant v = eertag::parse_variant(variant ? variant : "");
    *out = new eertag_dataset{eertag::apply_variant(dataset->impl, v)};
  });
}

int eertag_train(const eertag_dataset* train_set,
                 const eertag_dataset* dev_set_or_null, const char* config_json,
                 eertag_model** out, char** report_json_out) {
  return guarded([&] {
    json opts = parse_options(config_json);
    eertag::TrainConfig config = train_config_of(opts);
    eertag::TrainReport report;
    const eertag::Dataset* dev =
        dev_set_or_null ? &dev_set_or_null->impl : nullptr;
    eertag::ScorerParams params =
        opts.value("resume", false)
            ? eertag::resume_training(config.checkpoint_dir, train_set->impl, dev,
                                      config.stop_after_epoch, &report)
            : eertag::train(train_set->impl, scorer_config_of(opts), config, dev,
                            &report);
    *out = new eertag_model{std::move(params)};
    if (report_json_out)
      *report_json_out = dup_string(train_report_json(report).dump(2));
  });
}

int eertag_model_save(const eertag_model* model, const char* path) {
  return guarded([&] { eertag::save_model(model->impl, path); });
}

int eertag_model_load(const char* path, eertag_model** out) {
  return guarded([&] { *out = new eertag_model{eertag::load_model(path)}; });
}

void eertag_model_free(eertag_model* model) { delete model; }

int eertag_decode(const eertag_model* model, const eertag_dataset* dataset,
                  double o_bias, eertag_dataset** predictions_out) {
  return guarded([&] {
    *predictions_out = new eertag_dataset{
        eertag::decode_dataset(model->impl, dataset->impl, o_bias)};
  });
}

int eertag_evaluate(const eertag_dataset* predictions, const eertag_dataset* gold,
                    char** prf_json_out) {
  return guarded([&] {
    eertag::PRF prf = eertag::span_prf(predictions->impl, gold->impl);
    *prf_json_out = dup_string(prf_json(prf).dump(2));
  });
}

int eertag_tune_o_bias(const eertag_model* model, const eertag_dataset* dev,
                       const double* grid, size_t grid_len, double* best_bias_out,
                       char** curve_json_out) {
  return guarded([&] {
    std::vector<double> grid_values;
    if (grid != nullptr && grid_len > 0) {
      grid_values.assign(grid, grid + grid_len);
    } else {
      grid_values = eertag::default_o_bias_grid();
    }
    std::vector<std::pair<double, double>> curve;
    *best_bias_out =
        eertag::tune_o_bias(model->impl, dev->impl, grid_values, &curve);
    if (curve_json_out) {
      json points = json::array();
      for (const auto& [bias, f1] : curve)
        points.push_back({{"o_bias", bias}, {"f1", f1}});
      *curve_json_out = dup_string(points.dump(2));
    }
  });
}

int eertag_significance(const eertag_dataset* predictions_a,
                        const eertag_dataset* predictions_b,
                        const eertag_dataset* gold, const char* config_json,
                        char** result_json_out) {
  return guarded([&] {
    json opts = parse_options(config_json);
    eertag::BootstrapConfig config;
    config.iterations = opts.value("iterations", config.iterations);
    config.confidence = opts.value("confidence", config.confidence);
    config.rng_seed = opts.value("seed", config.rng_seed);
    eertag::BootstrapResult result = eertag::bootstrap_f1_diff(
        predictions_a->impl, predictions_b->impl, gold->impl, config);
    json out = {{"ci_low", result.ci_low},   {"ci_high", result.ci_high},
                {"significant", result.significant},
                {"f1_a", result.f1_a},       {"f1_b", result.f1_b},
                {"iterations", config.iterations},
                {"confidence", config.confidence}};
    *result_json_out = dup_string(out.dump(2));
  });
}

int eertag_entity_ratio(const eertag_model* model, const eertag_dataset* dataset,
                        double* ratio_out) {
  return guarded([&] {
    *ratio_out = eertag::predicted_entity_ratio(model->impl, dataset->impl);
  });
}

int eertag_bench_consistency(const char* config_json, const char* out_dir,
                             char** report_json_out) {
  return guarded([&] {
    json opts = parse_options(config_json);
    eertag::ConsistencySpec spec = eertag::ConsistencySpec::defaults();
    spec.train_sentences = opts.value("train_sentences", spec.train_sentences);
    spec.test_sentences = opts.value("test_sentences", spec.test_sentences);
    spec.task.rng_seed = opts.value("seed", spec.task.rng_seed);
    spec.task.reveal_prob = opts.value("reveal_prob", spec.task.reveal_prob);
    spec.task.entity_ratio_target =
        opts.value("entity_ratio_target", spec.task.entity_ratio_target);
    spec.train.epochs = opts.value("epochs", spec.train.epochs);
    spec.run_baselines = opts.value("baselines", spec.run_baselines);
    eertag::ConsistencyReport report = eertag::run_consistency_experiment(spec);
    json out = {{"rho_star", report.rho_star}, {"eer", metrics_json(report.eer)}};
    if (spec.run_baselines) {
      out["lambda_zero"] = metrics_json(report.lambda_zero);
      out["raw"] = metrics_json(report.raw);
    }
    std::string text = out.dump(2);
    if (out_dir != nullptr && *out_dir != '\0') {
      std::filesystem::create_directories(out_dir);
      write_text(std::string(out_dir) + "/consistency.json", text + "\n");
    }
    if (report_json_out) *report_json_out = dup_string(text);
  });
}

int eertag_bench_sweep(const char* config_json, const char* out_dir,
                       char** report_json_out) {
  return guarded([&] {
    json opts = parse_options(config_json);
    eertag::SweepSpec spec = eertag::SweepSpec::defaults();
    spec.train_sentences = opts.value("train_sentences", spec.train_sentences);
    spec.test_sentences = opts.value("test_sentences", spec.test_sentences);
    spec.task.rng_seed = opts.value("seed", spec.task.rng_seed);
    spec.task.reveal_prob = opts.value("reveal_prob", spec.task.reveal_prob);
    spec.train.epochs = opts.value("epochs", spec.train.epochs);
    if (opts.contains("seeds"))
      spec.seeds = opts.at("seeds").get<std::vector<std::uint64_t>>();
    if (opts.contains("settings")) {
      spec.settings.clear();
      for (const auto& pair : opts.at("settings"))
        spec.settings.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
    }
    std::vector<eertag::SweepCell> cells = eertag::run_rho_gamma_sweep(spec);
    json rows = json::array();
    std::string csv = "rho,gamma,seed,rho_star,f1,rho_hat,upper_edge_exceeds_rho_star\n";
    for (const auto& c : cells) {
      rows.push_back({{"rho", c.rho},
                      {"gamma", c.gamma},
                      {"seed", c.seed},
                      {"rho_star", c.rho_star},
                      {"f1", c.f1},
                      {"rho_hat", c.rho_hat},
                      {"upper_edge_exceeds_rho_star", c.upper_edge_exceeds_rho_star}});
      csv += std::to_string(c.rho) + "," + std::to_string(c.gamma) + "," +
             std::to_string(c.seed) + "," + std::to_string(c.rho_star) + "," +
             std::to_string(c.f1) + "," + std::to_string(c.rho_hat) + "," +
             (c.upper_edge_exceeds_rho_star ? "1" : "0") + "\n";
    }
    std::string text = json{{"cells", rows}}.dump(2);
    if (out_dir != nullptr && *out_dir != '\0') {
      std::filesystem::create_directories(out_dir);
      write_text(std::string(out_dir) + "/sweep.json", text + "\n");
      write_text(std::string(out_dir) + "/sweep.csv", csv);
    }
    if (report_json_out) *report_json_out = dup_string(text);
  });
}

}  // extern "C"
