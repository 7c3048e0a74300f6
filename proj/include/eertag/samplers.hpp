#pragma once

#include <cstdint>
#include <vector>

#include "eertag/corpus.hpp"

namespace eertag {

// Non-native-speaker scenario: drop gold spans grouped by surface mention
// until entity recall first reaches target_recall, then add short random
// false-positive spans until precision first reaches target_precision.
struct NnsConfig {
  double target_recall = 0.5;
  double target_precision = 0.9;
  int fp_span_max_len = 2;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

// Exploratory-expert scenario: visit documents in seeded random order,
// scan each left to right keeping spans with probability keep_prob, at most
// per_doc_cap keeps per document, halting exactly at total_budget keeps.
struct EeConfig {
  long total_budget = 1000;
  long per_doc_cap = 10;
  double keep_prob = 0.8;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct SamplerStats {
  double recall = 0.0;
  double precision = 0.0;
  // Mean over kept spans of (first token offset in document) / (document
  // token count); same statistic over all gold spans for comparison.
  double position_bias = 0.0;
  double gold_position_bias = 0.0;
  long gold_spans = 0;
  long kept_spans = 0;
  long false_positive_spans = 0;
  std::vector<long> per_doc_counts;
  // NNS: size of the largest removed mention group over total gold spans
  // (the granularity g of the recall band).
  double largest_group_fraction = 0.0;
  bool shortfall = false;  // EE: fewer gold spans than the budget
};

struct SampleResult {
  Dataset dataset;
  SamplerStats stats;
};

SampleResult sample_nns(const Dataset& gold, const NnsConfig& config);
SampleResult sample_ee(const Dataset& gold, const EeConfig& config);

// Entity-level agreement between a partial dataset and its gold source.
SamplerStats sampler_stats(const Dataset& gold, const Dataset& partial);

}  // namespace eertag
