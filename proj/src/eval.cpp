#include "eertag/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "eertag/error.hpp"
#include "eertag/lattice.hpp"
#include "eertag/rng.hpp"

namespace eertag {

void BootstrapConfig::validate() const {
  if (iterations < 1) fail(ErrorCode::invalid_argument, "iterations must be >= 1");
  if (confidence <= 0.0 || confidence >= 1.0)
    fail(ErrorCode::invalid_argument, "confidence must be in (0,1)");
}

namespace {

void check_aligned(const Dataset& a, const Dataset& b, const char* what) {
  if (a.documents.size() != b.documents.size())
    fail(ErrorCode::shape_mismatch, std::string(what) + ": document counts differ");
  for (std::size_t d = 0; d < a.documents.size(); ++d) {
    const auto& da = a.documents[d].sentences;
    const auto& db = b.documents[d].sentences;
    if (da.size() != db.size())
      fail(ErrorCode::shape_mismatch, std::string(what) + ": sentence counts differ");
    for (std::size_t s = 0; s < da.size(); ++s) {
      if (da[s].length() != db[s].length())
        fail(ErrorCode::shape_mismatch, std::string(what) + ": sentence lengths differ");
    }
  }
}

struct MatchCounts {
  long tp = 0;
  long fp = 0;
  long fn = 0;
};

MatchCounts match_sentence(const AnnotatedSentence& pred,
                           const AnnotatedSentence& gold, const TagSet& tagset) {
  std::vector<Span> pred_spans = gold_spans(pred, tagset);
  std::vector<Span> gold_set = gold_spans(gold, tagset);
  std::set<Span> gold_lookup(gold_set.begin(), gold_set.end());
  MatchCounts counts;
  for (const Span& s : pred_spans) {
    if (gold_lookup.count(s)) {
      ++counts.tp;
    } else {
      ++counts.fp;
    }
  }
  counts.fn = static_cast<long>(gold_set.size()) - counts.tp;
  return counts;
}

PRF prf_from_counts(long tp, long fp, long fn) {
  PRF out;
  out.tp = tp;
  out.fp = fp;
  out.fn = fn;
  out.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp);
  out.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn);
  out.f1 = out.precision + out.recall == 0.0
               ? 0.0
               : 2.0 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

double f1_of(long tp, long fp, long fn) { return prf_from_counts(tp, fp, fn).f1; }

// Linear-interpolation quantile of a sorted sample (h = p * (n - 1)).
double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double h = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = static_cast<std::size_t>(std::ceil(h));
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

PRF span_prf(const Dataset& predictions, const Dataset& gold) {
  check_aligned(predictions, gold, "span_prf");
  long tp = 0, fp = 0, fn = 0;
  for (std::size_t d = 0; d < gold.documents.size(); ++d) {
    for (std::size_t s = 0; s < gold.documents[d].sentences.size(); ++s) {
      MatchCounts counts = match_sentence(predictions.documents[d].sentences[s],
                                          gold.documents[d].sentences[s],
                                          gold.tagset);
      tp += counts.tp;
      fp += counts.fp;
      fn += counts.fn;
    }
  }
  return prf_from_counts(tp, fp, fn);
}

Dataset decode_dataset(const ScorerParams& params, const Dataset& dataset,
                       double o_bias) {
  Dataset out = dataset;
  for (auto& doc : out.documents) {
    for (auto& s : doc.sentences) {
      ViterbiResult v = viterbi(score_sentence(params, s.sentence), o_bias,
                                params.tagset.o_index());
      s.gold_tags = std::move(v.tags);
    }
  }
  return out;
}

double tune_o_bias(const ScorerParams& params, const Dataset& dev,
                   const std::vector<double>& grid,
                   std::vector<std::pair<double, double>>* curve) {
  if (grid.empty()) fail(ErrorCode::invalid_argument, "empty o_bias grid");
  if (std::find(grid.begin(), grid.end(), 0.0) == grid.end())
    fail(ErrorCode::invalid_argument, "o_bias grid must contain 0");
  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end());

  double best_bias = sorted.front();
  double best_f1 = -1.0;
  for (double bias : sorted) {
    double f1 = span_prf(decode_dataset(params, dev, bias), dev).f1;
    if (curve) curve->push_back({bias, f1});
    if (f1 > best_f1) {  // strict: ties keep the smaller bias
      best_f1 = f1;
      best_bias = bias;
    }
  }
  return best_bias;
}

std::vector<double> default_o_bias_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(0.25 * i);
  return grid;
}

BootstrapResult bootstrap_f1_diff(const Dataset& predictions_a,
                                  const Dataset& predictions_b,
                                  const Dataset& gold,
                                  const BootstrapConfig& config) {
  config.validate();
  check_aligned(predictions_a, gold, "bootstrap A/gold");
  check_aligned(predictions_b, gold, "bootstrap B/gold");
  const std::size_t num_docs = gold.documents.size();
  if (num_docs == 0) fail(ErrorCode::invalid_argument, "empty corpus");

  std::vector<MatchCounts> counts_a(num_docs), counts_b(num_docs);
  for (std::size_t d = 0; d < num_docs; ++d) {
    for (std::size_t s = 0; s < gold.documents[d].sentences.size(); ++s) {
      const auto& gs = gold.documents[d].sentences[s];
      MatchCounts ma =
          match_sentence(predictions_a.documents[d].sentences[s], gs, gold.tagset);
      MatchCounts mb =
          match_sentence(predictions_b.documents[d].sentences[s], gs, gold.tagset);
      counts_a[d].tp += ma.tp;
      counts_a[d].fp += ma.fp;
      counts_a[d].fn += ma.fn;
      counts_b[d].tp += mb.tp;
      counts_b[d].fp += mb.fp;
      counts_b[d].fn += mb.fn;
    }
  }

  std::vector<double> diffs;
  diffs.reserve(static_cast<std::size_t>(config.iterations));
  for (long it = 0; it < config.iterations; ++it) {
    Rng rng(mix_seed(config.rng_seed, static_cast<std::uint64_t>(it)));
    long tp_a = 0, fp_a = 0, fn_a = 0, tp_b = 0, fp_b = 0, fn_b = 0;
    for (std::size_t k = 0; k < num_docs; ++k) {
      std::size_t d = static_cast<std::size_t>(rng.next_below(num_docs));
      tp_a += counts_a[d].tp;
      fp_a += counts_a[d].fp;
      fn_a += counts_a[d].fn;
      tp_b += counts_b[d].tp;
      fp_b += counts_b[d].fp;
      fn_b += counts_b[d].fn;
    }
    diffs.push_back(f1_of(tp_a, fp_a, fn_a) - f1_of(tp_b, fp_b, fn_b));
  }
  std::sort(diffs.begin(), diffs.end());

  BootstrapResult result;
  const double alpha = 1.0 - config.confidence;
  result.ci_low = quantile_sorted(diffs, alpha / 2.0);
  result.ci_high = quantile_sorted(diffs, 1.0 - alpha / 2.0);
  result.significant = result.ci_low > 0.0 || result.ci_high < 0.0;

  long tp = 0, fp = 0, fn = 0;
  for (const auto& c : counts_a) { tp += c.tp; fp += c.fp; fn += c.fn; }
  result.f1_a = f1_of(tp, fp, fn);
  tp = fp = fn = 0;
  for (const auto& c : counts_b) { tp += c.tp; fp += c.fp; fn += c.fn; }
  result.f1_b = f1_of(tp, fp, fn);
  return result;
}

double predicted_entity_ratio(const ScorerParams& params, const Dataset& dataset) {
  double expected = 0.0;
  long tokens = 0;
  for (const auto& doc : dataset.documents) {
    for (const auto& s : doc.sentences) {
      PotentialLattice lat = score_sentence(params, s.sentence);
      expected += expected_entity_count(lat, params.tagset.o_index());
      tokens += s.length();
    }
  }
  if (tokens == 0) fail(ErrorCode::invalid_argument, "empty dataset");
  return expected / static_cast<double>(tokens);
}

}  // namespace eertag
