#include "eertag/trainer.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "eertag/error.hpp"
#include "eertag/eval.hpp"
#include "eertag/rng.hpp"
#include "eertag/serialize.hpp"

namespace eertag {

void TrainConfig::validate() const {
  if (epochs < 0) fail(ErrorCode::invalid_argument, "epochs must be >= 0");
  if (stop_after_epoch < 0 || (stop_after_epoch > 0 && stop_after_epoch > epochs))
    fail(ErrorCode::invalid_argument, "stop_after_epoch must be in [0, epochs]");
  if (batch_token_cap < 1) fail(ErrorCode::invalid_argument, "batch_token_cap must be >= 1");
  if (learning_rate <= 0.0) fail(ErrorCode::invalid_argument, "learning_rate must be > 0");
  if (peak_fraction <= 0.0 || peak_fraction >= 1.0)
    fail(ErrorCode::invalid_argument, "peak_fraction must be in (0,1)");
  if (checkpoint_every < 0) fail(ErrorCode::invalid_argument, "checkpoint_every must be >= 0");
  eer.validate();
}

double lr_at(long step, long total_steps, const TrainConfig& config) {
  if (step < 0 || step >= total_steps)
    fail(ErrorCode::invalid_argument, "step outside [0, total_steps)");
  if (config.schedule == LrSchedule::constant) return config.learning_rate;
  const double peak = config.peak_fraction * static_cast<double>(total_steps);
  const double s = static_cast<double>(step);
  if (s <= peak) return config.learning_rate * s / peak;
  return config.learning_rate * (static_cast<double>(total_steps) - s) /
         (static_cast<double>(total_steps) - peak);
}

namespace {

struct SentenceRef {
  int doc = 0;
  int sent = 0;
  long tokens = 0;
};

std::vector<SentenceRef> flatten(const Dataset& data) {
  std::vector<SentenceRef> refs;
  for (int d = 0; d < static_cast<int>(data.documents.size()); ++d) {
    const Document& doc = data.documents[d];
    for (int s = 0; s < static_cast<int>(doc.sentences.size()); ++s)
      refs.push_back({d, s, doc.sentences[s].length()});
  }
  return refs;
}

// Epoch order: Fisher-Yates with a per-epoch derived seed, then greedy
// batches up to the token cap (every batch holds at least one sentence).
std::vector<std::vector<int>> epoch_batches(const std::vector<SentenceRef>& refs,
                                            const TrainConfig& config, int epoch) {
  std::vector<int> order(refs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  Rng rng(mix_seed(config.rng_seed, static_cast<std::uint64_t>(epoch)));
  rng.shuffle(order);

  std::vector<std::vector<int>> batches;
  std::vector<int> batch;
  long tokens = 0;
  for (int idx : order) {
    if (!batch.empty() && tokens + refs[idx].tokens > config.batch_token_cap) {
      batches.push_back(std::move(batch));
      batch.clear();
      tokens = 0;
    }
    batch.push_back(idx);
    tokens += refs[idx].tokens;
  }
  if (!batch.empty()) batches.push_back(std::move(batch));
  return batches;
}

double param_norm(const ScorerParams& params) {
  double sq = 0.0;
  for_each_tensor(params, [&](const std::vector<double>& v) {
    for (double x : v) sq += x * x;
  });
  return std::sqrt(sq);
}

std::vector<std::vector<double>*> tensor_list(ScorerParams& p) {
  std::vector<std::vector<double>*> out;
  for_each_tensor(p, [&](std::vector<double>& t) { out.push_back(&t); });
  return out;
}

std::vector<std::vector<double>*> tensor_list(ParamGradients& g) {
  std::vector<std::vector<double>*> out;
  for_each_tensor(g, [&](std::vector<double>& t) { out.push_back(&t); });
  return out;
}

void apply_update(ScorerParams& params, ParamGradients& grads,
                  OptimizerState& opt, const TrainConfig& config, double lr) {
  ++opt.step;
  auto ps = tensor_list(params);
  auto gs = tensor_list(grads);
  if (config.optimizer == OptimizerKind::sgd) {
    for (std::size_t t = 0; t < ps.size(); ++t) {
      std::vector<double>& p = *ps[t];
      const std::vector<double>& g = *gs[t];
      for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * g[i];
    }
    return;
  }
  const double b1 = config.adam_beta1;
  const double b2 = config.adam_beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(opt.step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(opt.step));
  auto m1 = tensor_list(opt.m1);
  auto m2 = tensor_list(opt.m2);
  for (std::size_t t = 0; t < ps.size(); ++t) {
    std::vector<double>& p = *ps[t];
    const std::vector<double>& g = *gs[t];
    std::vector<double>& m = *m1[t];
    std::vector<double>& v = *m2[t];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      p[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + config.adam_eps);
    }
  }
}

void write_checkpoint(const std::string& dir, const ScorerParams& params,
                      const OptimizerState& opt, const TrainConfig& config,
                      int next_epoch, long total_steps) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::io_failure, "cannot create " + dir + ": " + ec.message());
  save_model(params, dir + "/model.eertag");
  save_optimizer(opt, dir + "/optimizer.eertag");
  nlohmann::json state = {{"next_epoch", next_epoch},
                          {"total_steps", total_steps},
                          {"config", nlohmann::json::parse(train_config_to_json(config))}};
  std::ofstream out(dir + "/state.json");
  out << state.dump(2) << "\n";
  if (!out) fail(ErrorCode::io_failure, "cannot write " + dir + "/state.json");
}

ScorerParams run_training(ScorerParams params, OptimizerState opt,
                          const Dataset& train_data, const TrainConfig& config,
                          const Dataset* dev_data, int start_epoch,
                          TrainReport* report) {
  config.validate();
  const std::vector<SentenceRef> refs = flatten(train_data);
  if (refs.empty()) fail(ErrorCode::invalid_argument, "training set is empty");
  const int o_index = params.tagset.o_index();

  long total_steps = 0;
  for (int e = 0; e < config.epochs; ++e)
    total_steps += static_cast<long>(epoch_batches(refs, config, e).size());

  TrainReport local_report;
  TrainReport* rep = report ? report : &local_report;
  rep->total_steps = total_steps;

  long global_step = 0;
  for (int e = 0; e < start_epoch; ++e)
    global_step += static_cast<long>(epoch_batches(refs, config, e).size());

  const int last_epoch =
      config.stop_after_epoch > 0 ? config.stop_after_epoch : config.epochs;

  for (int epoch = start_epoch; epoch < last_epoch; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    double sum_p = 0.0, sum_u = 0.0, sum_l = 0.0;
    long batches_done = 0;

    for (const std::vector<int>& batch : epoch_batches(refs, config, epoch)) {
      std::vector<PotentialLattice> lattices;
      std::vector<ObservedTags> observations;
      lattices.reserve(batch.size());
      observations.reserve(batch.size());
      CombinedLossResult result;
      try {
        for (int idx : batch) {
          const AnnotatedSentence& s =
              train_data.documents[refs[idx].doc].sentences[refs[idx].sent];
          lattices.push_back(score_sentence(params, s.sentence));
          observations.push_back(s.observed);
        }
        result = combined_loss(lattices, observations, config.eer, o_index);
        if (!std::isfinite(result.report.loss)) {
          fail(ErrorCode::non_finite, "non-finite loss");
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::non_finite) throw;
        fail(ErrorCode::non_finite,
             std::string(e.what()) + " at epoch " + std::to_string(epoch) +
                 " batch " + std::to_string(batches_done) + " (parameter norm " +
                 std::to_string(param_norm(params)) + ")");
      }
      ParamGradients grads = ParamGradients::zeros_like(params);
      for (std::size_t k = 0; k < batch.size(); ++k) {
        const AnnotatedSentence& s =
            train_data.documents[refs[batch[k]].doc].sentences[refs[batch[k]].sent];
        score_gradients(params, s.sentence, result.adjoints[k], grads);
      }
      double lr = lr_at(global_step, total_steps, config);
      apply_update(params, grads, opt, config, lr);
      ++global_step;
      ++batches_done;
      sum_p += result.report.loss_p;
      sum_u += result.report.loss_u;
      sum_l += result.report.loss;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.loss_p = sum_p / static_cast<double>(batches_done);
    stats.loss_u = sum_u / static_cast<double>(batches_done);
    stats.loss = sum_l / static_cast<double>(batches_done);
    try {
      stats.corpus_rho_hat = predicted_entity_ratio(params, train_data);
      if (dev_data) {
        Dataset decoded = decode_dataset(params, *dev_data, 0.0);
        stats.dev_f1 = span_prf(decoded, *dev_data).f1;
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::non_finite) throw;
      fail(ErrorCode::non_finite,
           std::string(e.what()) + " after epoch " + std::to_string(epoch) +
               " batch " + std::to_string(batches_done) + " (parameter norm " +
               std::to_string(param_norm(params)) + ")");
    }
    stats.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep->epochs.push_back(stats);

    const bool final_epoch = epoch + 1 == last_epoch;
    if (!config.checkpoint_dir.empty() &&
        (final_epoch || (config.checkpoint_every > 0 &&
                         (epoch + 1) % config.checkpoint_every == 0))) {
      write_checkpoint(config.checkpoint_dir, params, opt, config, epoch + 1,
                       total_steps);
    }
  }

  rep->final_rho_hat = refs.empty() ? 0.0 : predicted_entity_ratio(params, train_data);
  return params;
}

}  // namespace

ScorerParams train(const Dataset& train_data, const ScorerConfig& scorer_config,
                   const TrainConfig& config, const Dataset* dev_data,
                   TrainReport* report) {
  config.validate();
  Vocab vocab = Vocab::build(train_data, scorer_config.min_count);
  ScorerParams params = init_scorer(train_data.tagset, vocab, scorer_config);
  OptimizerState opt;
  opt.m1 = ParamGradients::zeros_like(params);
  opt.m2 = ParamGradients::zeros_like(params);
  if (config.epochs == 0) {
    if (report) *report = TrainReport{};
    if (!config.checkpoint_dir.empty())
      write_checkpoint(config.checkpoint_dir, params, opt, config, 0, 0);
    return params;
  }
  return run_training(std::move(params), std::move(opt), train_data, config,
                      dev_data, 0, report);
}

ScorerParams resume_training(const std::string& checkpoint_dir,
                             const Dataset& train_data, const Dataset* dev_data,
                             int stop_after_epoch, TrainReport* report) {
  std::ifstream state_file(checkpoint_dir + "/state.json");
  if (!state_file)
    fail(ErrorCode::io_failure, "no checkpoint state in " + checkpoint_dir);
  nlohmann::json state = nlohmann::json::parse(state_file);

  TrainConfig config = train_config_from_json(state.at("config").dump());
  config.stop_after_epoch = stop_after_epoch;
  config.validate();
  int start_epoch = state.at("next_epoch").get<int>();

  ScorerParams params = load_model(checkpoint_dir + "/model.eertag");
  OptimizerState opt =
      load_optimizer(checkpoint_dir + "/optimizer.eertag", params);
  return run_training(std::move(params), std::move(opt), train_data, config,
                      dev_data, start_epoch, report);
}

}  // namespace eertag
