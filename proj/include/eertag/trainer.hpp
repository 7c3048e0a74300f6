#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eertag/corpus.hpp"
#include "eertag/objectives.hpp"
#include "eertag/scorer.hpp"

namespace eertag {

enum class OptimizerKind { sgd, adam };
enum class LrSchedule { constant, slanted_triangular };

struct TrainConfig {
  int epochs = 20;
  // Stop after this many epochs while keeping the full-epochs learning-rate
  // plan; 0 runs everything. Lets a checkpointed run resume into the same
  // schedule.
  int stop_after_epoch = 0;
  int batch_token_cap = 2000;
  double learning_rate = 1e-2;
  LrSchedule schedule = LrSchedule::slanted_triangular;
  double peak_fraction = 0.1;
  OptimizerKind optimizer = OptimizerKind::adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t rng_seed = 0;
  EerLossConfig eer;
  int checkpoint_every = 0;         // epochs between checkpoints; 0 = final only
  std::string checkpoint_dir;      // empty: no checkpoints written

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct EpochStats {
  int epoch = 0;
  double loss_p = 0.0;   // batch means
  double loss_u = 0.0;
  double loss = 0.0;
  double corpus_rho_hat = 0.0;
  double dev_f1 = -1.0;  // -1 when no dev set was given
  double seconds = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  double final_rho_hat = 0.0;
  long total_steps = 0;
};

// Slanted triangular learning rate: linear 0 -> learning_rate over the first
// peak_fraction of steps, then linear decay to 0 at total_steps.
double lr_at(long step, long total_steps, const TrainConfig& config);

// Minibatch training of the combined loss. Batch order per epoch comes from
// a Fisher-Yates shuffle seeded with mix_seed(rng_seed, epoch); batches are
// filled greedily up to batch_token_cap tokens. Single-threaded and
// bit-reproducible given the config.
ScorerParams train(const Dataset& train_data, const ScorerConfig& scorer_config,
                   const TrainConfig& config, const Dataset* dev_data,
                   TrainReport* report);

// Continues a checkpointed run; the stored plan (config, epoch, optimizer
// moments) governs, with stop_after_epoch overriding when positive.
ScorerParams resume_training(const std::string& checkpoint_dir,
                             const Dataset& train_data, const Dataset* dev_data,
                             int stop_after_epoch, TrainReport* report);

}  // namespace eertag
