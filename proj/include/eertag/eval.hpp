#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "eertag/corpus.hpp"
#include "eertag/scorer.hpp"

namespace eertag {

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long tp = 0;
  long fp = 0;
  long fn = 0;
};

struct BootstrapConfig {
  long iterations = 10000;
  double confidence = 0.99;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct BootstrapResult {
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool significant = false;
  double f1_a = 0.0;
  double f1_b = 0.0;
};

// Micro-averaged exact-span match: a predicted span counts iff (start, end,
// class) all equal a gold span. Both corpora must align sentence by
// sentence; predictions live in gold_tags of the prediction corpus.
PRF span_prf(const Dataset& predictions, const Dataset& gold);

// Viterbi decode of every sentence; the output carries predictions as
// gold_tags and keeps the input observations.
Dataset decode_dataset(const ScorerParams& params, const Dataset& dataset,
                       double o_bias);

// Dev-set grid search for the O-tag decoding bias. Returns the grid value
// maximizing dev F1, ties to the smaller bias. The grid must contain 0.
double tune_o_bias(const ScorerParams& params, const Dataset& dev,
                   const std::vector<double>& grid,
                   std::vector<std::pair<double, double>>* curve = nullptr);

std::vector<double> default_o_bias_grid();

// Percentile bootstrap of F1(A) - F1(B) over documents resampled with
// replacement. Resample i draws its indices from Rng(mix_seed(seed, i)), one
// next_below(num_docs) per slot; the confidence interval takes
// linear-interpolation quantiles at (1 +- confidence) / 2 of the sorted
// differences; significant iff the closed interval excludes 0.
BootstrapResult bootstrap_f1_diff(const Dataset& predictions_a,
                                  const Dataset& predictions_b,
                                  const Dataset& gold,
                                  const BootstrapConfig& config);

// Corpus-level expected entity ratio of the model on a dataset.
double predicted_entity_ratio(const ScorerParams& params, const Dataset& dataset);

}  // namespace eertag
