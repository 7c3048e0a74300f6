#include "eertag/serialize.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "eertag/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "model files are little-endian");

namespace eertag {

namespace {

using nlohmann::json;

constexpr char kModelMagic[9] = "EERTMODL";
constexpr char kOptimMagic[9] = "EERTOPTM";
constexpr std::uint32_t kFormatVersion = 1;

struct TensorRef {
  std::string name;
  std::vector<double>* data;
  int rows;
  int cols;
};

std::vector<TensorRef> model_tensors(ScorerParams& p) {
  const int in = (2 * p.config.window + 1) * p.config.embed_dim;
  return {
      {"embeddings", &p.embeddings.data, p.vocab.size(), p.config.embed_dim},
      {"hidden_w", &p.hidden_w.data, p.config.hidden_dim, in},
      {"hidden_b", &p.hidden_b, 1, p.config.hidden_dim},
      {"out_w", &p.out_w.data, p.tagset.size(), p.config.hidden_dim},
      {"out_b", &p.out_b, 1, p.tagset.size()},
      {"transition", &p.transition.data, p.tagset.size(), p.tagset.size()},
  };
}

std::vector<TensorRef> gradient_tensors(ParamGradients& g, const std::string& prefix) {
  return {
      {prefix + "embeddings", &g.embeddings.data, g.embeddings.rows, g.embeddings.cols},
      {prefix + "hidden_w", &g.hidden_w.data, g.hidden_w.rows, g.hidden_w.cols},
      {prefix + "hidden_b", &g.hidden_b, 1, static_cast<int>(g.hidden_b.size())},
      {prefix + "out_w", &g.out_w.data, g.out_w.rows, g.out_w.cols},
      {prefix + "out_b", &g.out_b, 1, static_cast<int>(g.out_b.size())},
      {prefix + "transition", &g.transition.data, g.transition.rows, g.transition.cols},
  };
}

void write_container(const std::string& path, const char* magic,
                     const json& header, const std::vector<TensorRef>& tensors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io_failure, "cannot open " + path + " for writing");
  out.write(magic, 8);
  std::uint32_t version = kFormatVersion;
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  std::string header_text = header.dump();
  std::uint32_t header_len = static_cast<std::uint32_t>(header_text.size());
  out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
  out.write(header_text.data(), header_text.size());
  for (const TensorRef& t : tensors) {
    out.write(reinterpret_cast<const char*>(t.data->data()),
              static_cast<std::streamsize>(t.data->size() * sizeof(double)));
  }
  if (!out) fail(ErrorCode::io_failure, "write failed for " + path);
}

json read_container(const std::string& path, const char* magic, std::ifstream& in) {
  in.open(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_failure, "cannot open " + path);
  char found[8];
  std::uint32_t version = 0, header_len = 0;
  in.read(found, 8);
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
  if (!in || std::string(found, 8) != std::string(magic, 8)) {
    fail(ErrorCode::parse_error, path + " is not a valid container");
  }
  if (version != kFormatVersion) {
    fail(ErrorCode::parse_error,
         path + ": unsupported format version " + std::to_string(version));
  }
  std::string header_text(header_len, '\0');
  in.read(header_text.data(), header_len);
  if (!in) fail(ErrorCode::parse_error, path + ": truncated header");
  return json::parse(header_text);
}

void read_tensors(std::ifstream& in, const std::string& path, const json& manifest,
                  const std::vector<TensorRef>& tensors) {
  if (manifest.size() != tensors.size())
    fail(ErrorCode::parse_error, path + ": tensor manifest mismatch");
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const json& m = manifest[i];
    if (m.at("name") != tensors[i].name ||
        m.at("rows").get<int>() != tensors[i].rows ||
        m.at("cols").get<int>() != tensors[i].cols) {
      fail(ErrorCode::parse_error,
           path + ": tensor '" + tensors[i].name + "' has unexpected shape");
    }
    in.read(reinterpret_cast<char*>(tensors[i].data->data()),
            static_cast<std::streamsize>(tensors[i].data->size() * sizeof(double)));
  }
  if (!in) fail(ErrorCode::parse_error, path + ": truncated tensor data");
}

json tensor_manifest(const std::vector<TensorRef>& tensors) {
  json manifest = json::array();
  for (const TensorRef& t : tensors) {
    manifest.push_back({{"name", t.name}, {"rows", t.rows}, {"cols", t.cols}});
  }
  return manifest;
}

json scorer_config_json(const ScorerConfig& c) {
  return {{"embed_dim", c.embed_dim},   {"window", c.window},
          {"hidden_dim", c.hidden_dim}, {"init_scale", c.init_scale},
          {"min_count", c.min_count},   {"rng_seed", c.rng_seed}};
}

ScorerConfig scorer_config_from(const json& j) {
  ScorerConfig c;
  c.embed_dim = j.value("embed_dim", c.embed_dim);
  c.window = j.value("window", c.window);
  c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
  c.init_scale = j.value("init_scale", c.init_scale);
  c.min_count = j.value("min_count", c.min_count);
  c.rng_seed = j.value("rng_seed", c.rng_seed);
  return c;
}

}  // namespace

void save_model(const ScorerParams& params, const std::string& path) {
  ScorerParams p = params;
  std::vector<TensorRef> tensors = model_tensors(p);
  json header = {{"config", scorer_config_json(params.config)},
                 {"classes", params.tagset.classes()},
                 {"vocab", params.vocab.words()},
                 {"tensors", tensor_manifest(tensors)}};
  write_container(path, kModelMagic, header, tensors);
}

ScorerParams load_model(const std::string& path) {
  std::ifstream in;
  json header = read_container(path, kModelMagic, in);
  ScorerConfig config = scorer_config_from(header.at("config"));
  TagSet tagset(header.at("classes").get<std::vector<std::string>>());
  Vocab vocab = Vocab::from_words(header.at("vocab").get<std::vector<std::string>>());
  ScorerParams params = init_scorer(tagset, vocab, config);
  std::vector<TensorRef> tensors = model_tensors(params);
  read_tensors(in, path, header.at("tensors"), tensors);
  return params;
}

void save_optimizer(const OptimizerState& state, const std::string& path) {
  OptimizerState s;
  s.m1 = state.m1;
  s.m2 = state.m2;
  std::vector<TensorRef> tensors = gradient_tensors(s.m1, "m1.");
  std::vector<TensorRef> m2 = gradient_tensors(s.m2, "m2.");
  tensors.insert(tensors.end(), m2.begin(), m2.end());
  json header = {{"step", state.step}, {"tensors", tensor_manifest(tensors)}};
  write_container(path, kOptimMagic, header, tensors);
}

OptimizerState load_optimizer(const std::string& path, const ScorerParams& shape) {
  std::ifstream in;
  json header = read_container(path, kOptimMagic, in);
  OptimizerState state;
  state.step = header.at("step").get<long>();
  state.m1 = ParamGradients::zeros_like(shape);
  state.m2 = ParamGradients::zeros_like(shape);
  std::vector<TensorRef> tensors = gradient_tensors(state.m1, "m1.");
  std::vector<TensorRef> m2 = gradient_tensors(state.m2, "m2.");
  tensors.insert(tensors.end(), m2.begin(), m2.end());
  read_tensors(in, path, header.at("tensors"), tensors);
  return state;
}

namespace {

json train_config_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"stop_after_epoch", c.stop_after_epoch},
          {"batch_token_cap", c.batch_token_cap},
          {"learning_rate", c.learning_rate},
          {"schedule", c.schedule == LrSchedule::constant ? "constant" : "slanted"},
          {"peak_fraction", c.peak_fraction},
          {"optimizer", c.optimizer == OptimizerKind::sgd ? "sgd" : "adam"},
          {"adam_beta1", c.adam_beta1},
          {"adam_beta2", c.adam_beta2},
          {"adam_eps", c.adam_eps},
          {"rng_seed", c.rng_seed},
          {"rho", c.eer.rho},
          {"gamma", c.eer.gamma},
          {"lambda_u", c.eer.lambda_u},
          {"checkpoint_every", c.checkpoint_every},
          {"checkpoint_dir", c.checkpoint_dir}};
}

TrainConfig train_config_from(const json& j) {
  TrainConfig c;
  c.epochs = j.value("epochs", c.epochs);
  c.stop_after_epoch = j.value("stop_after_epoch", c.stop_after_epoch);
  c.batch_token_cap = j.value("batch_token_cap", c.batch_token_cap);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  std::string schedule = j.value("schedule", std::string("slanted"));
  if (schedule == "constant") {
    c.schedule = LrSchedule::constant;
  } else if (schedule == "slanted") {
    c.schedule = LrSchedule::slanted_triangular;
  } else {
    fail(ErrorCode::invalid_argument, "unknown schedule '" + schedule + "'");
  }
  c.peak_fraction = j.value("peak_fraction", c.peak_fraction);
  std::string optimizer = j.value("optimizer", std::string("adam"));
  if (optimizer == "sgd") {
    c.optimizer = OptimizerKind::sgd;
  } else if (optimizer == "adam") {
    c.optimizer = OptimizerKind::adam;
  } else {
    fail(ErrorCode::invalid_argument, "unknown optimizer '" + optimizer + "'");
  }
  c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
  c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
  c.adam_eps = j.value("adam_eps", c.adam_eps);
  c.rng_seed = j.value("rng_seed", c.rng_seed);
  c.eer.rho = j.value("rho", c.eer.rho);
  c.eer.gamma = j.value("gamma", c.eer.gamma);
  c.eer.lambda_u = j.value("lambda_u", c.eer.lambda_u);
  c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
  c.checkpoint_dir = j.value("checkpoint_dir", c.checkpoint_dir);
  return c;
}

}  // namespace

std::string train_config_to_json(const TrainConfig& config) {
  return train_config_json(config).dump(2);
}

TrainConfig train_config_from_json(const std::string& text) {
  return train_config_from(json::parse(text));
}

}  // namespace eertag
