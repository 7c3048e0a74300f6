#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "eertag/corpus.hpp"
#include "eertag/eval.hpp"
#include "eertag/scorer.hpp"
#include "eertag/trainer.hpp"

namespace eertag {

// Synthetic tagging task with a deterministic window rule. The vocabulary
// is split into roles that fix each token's tag:
//   f<k>        filler, always O
//   u<c>_<k>    always U-<class c>
//   pb<c>_<k>   always B-<class c>, generated with its matching pl partner
//   pl<c>_<k>   always L-<class c>
//   t<j>        trigger, always O, generated only directly before a<j>
//   a<j>        U-<class j mod C> right after its trigger t<j>, else O
// The tag of any position is a function of tokens [i-1, i], so a window-1
// scorer realizes the rule. Word draws inside a role are Zipf-weighted
// (weight 1/(k+1)) so small samples undertrain the tail.
struct SyntheticTaskConfig {
  int num_classes = 2;
  int filler_words = 150;
  int unit_words_per_class = 12;
  int pair_words_per_class = 5;
  int ambiguous_words = 4;
  int min_len = 8;
  int max_len = 16;
  int sentences_per_doc = 10;
  double entity_ratio_target = 0.2;
  double ambiguous_filler_frac = 0.08;  // filler events emitting a lone a<j>
  // Probability that an entity token's true tag is revealed; never reveals O.
  double reveal_prob = 0.3;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct SyntheticCorpus {
  Dataset gold;
  Dataset partial;  // same tokens and gold, observations from the reveal rule
  double empirical_rho = 0.0;
};

// The deterministic tag rule p(y_i | window). Generated gold always
// satisfies it.
int synthetic_rule_tag(const std::vector<std::string>& tokens, int i,
                       const TagSet& tagset);

SyntheticCorpus generate_synthetic(const SyntheticTaskConfig& config,
                                   int num_sentences);

struct RunMetrics {
  double token_accuracy = 0.0;
  double sequence_accuracy = 0.0;
  double rho_hat = 0.0;  // on the training corpus
  PRF entity;            // span scores on held-out data
};

struct ConsistencySpec {
  SyntheticTaskConfig task;
  ScorerConfig scorer;
  TrainConfig train;
  int train_sentences = 2000;
  int test_sentences = 500;
  bool run_baselines = true;

  // Desk-scale defaults tuned for the distribution-recovery experiment.
  static ConsistencySpec defaults();
};

struct ConsistencyReport {
  double rho_star = 0.0;  // empirical gold ratio of the training sample
  RunMetrics eer;          // rho = rho_star, gamma = 0, lambda_u > 0
  RunMetrics lambda_zero;  // marginal tag loss only
  RunMetrics raw;          // unobserved positions treated as O
};

// Trains on partial data with rho pinned to the training sample's gold
// ratio and reports held-out recovery quality, plus the two failure-mode
// baselines when run_baselines is set.
ConsistencyReport run_consistency_experiment(const ConsistencySpec& spec);

struct SweepSpec {
  SyntheticTaskConfig task;
  ScorerConfig scorer;
  TrainConfig train;
  int train_sentences = 2000;
  int test_sentences = 500;
  // (rho, gamma) pairs; empty uses default_sweep_settings(rho_star).
  std::vector<std::pair<double, double>> settings;
  std::vector<std::uint64_t> seeds = {1, 2, 3};

  static SweepSpec defaults();
};

struct SweepCell {
  double rho = 0.0;
  double gamma = 0.0;
  std::uint64_t seed = 0;
  double rho_star = 0.0;
  double f1 = 0.0;
  double rho_hat = 0.0;
  bool upper_edge_exceeds_rho_star = false;
};

// The robustness grid around the true ratio: [r,r], [r-.08, r-.08],
// [r-.10, r], [r, r+.10], [0, r], [0, r+.10] expressed as (rho, gamma).
std::vector<std::pair<double, double>> default_sweep_settings(double rho_star);

// One trained model per (setting, seed); datasets are regenerated per seed
// and shared across settings.
std::vector<SweepCell> run_rho_gamma_sweep(const SweepSpec& spec);

// Token/sequence accuracy of Viterbi decoding against gold.
RunMetrics evaluate_model(const ScorerParams& params, const Dataset& test,
                          const Dataset& train);

// The raw-supervision view of a partial dataset: unobserved positions become
// O, fragments are repaired to valid spans, and every position is observed.
Dataset raw_view(const Dataset& partial);

}  // namespace eertag
