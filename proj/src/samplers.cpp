#include "eertag/samplers.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>

#include "eertag/error.hpp"
#include "eertag/rng.hpp"

namespace eertag {

void NnsConfig::validate() const {
  if (target_recall <= 0.0 || target_recall > 1.0)
    fail(ErrorCode::invalid_argument, "target_recall must be in (0,1]");
  if (target_precision <= 0.0 || target_precision > 1.0)
    fail(ErrorCode::invalid_argument, "target_precision must be in (0,1]");
  if (fp_span_max_len < 1)
    fail(ErrorCode::invalid_argument, "fp_span_max_len must be >= 1");
}

void EeConfig::validate() const {
  if (total_budget < 1) fail(ErrorCode::invalid_argument, "total_budget must be >= 1");
  if (per_doc_cap < 1) fail(ErrorCode::invalid_argument, "per_doc_cap must be >= 1");
  if (keep_prob <= 0.0 || keep_prob > 1.0)
    fail(ErrorCode::invalid_argument, "keep_prob must be in (0,1]");
}

namespace {

struct LocatedSpan {
  int doc = 0;
  int sent = 0;
  Span span;

  friend auto operator<=>(const LocatedSpan&, const LocatedSpan&) = default;
};

// Gold spans in corpus order. Requires gold tags everywhere.
std::vector<LocatedSpan> collect_gold_spans(const Dataset& gold) {
  std::vector<LocatedSpan> all;
  for (int d = 0; d < static_cast<int>(gold.documents.size()); ++d) {
    const Document& doc = gold.documents[d];
    for (int s = 0; s < static_cast<int>(doc.sentences.size()); ++s) {
      for (const Span& span : gold_spans(doc.sentences[s], gold.tagset))
        all.push_back({d, s, span});
    }
  }
  return all;
}

std::string mention_text(const Dataset& dataset, const LocatedSpan& ls) {
  const auto& tokens =
      dataset.documents[ls.doc].sentences[ls.sent].sentence.tokens;
  std::string text;
  for (int p = ls.span.start; p <= ls.span.end; ++p) {
    if (!text.empty()) text += ' ';
    text += tokens[p - 1];
  }
  return text;
}

// Rebuild every sentence's ObservedTags from the given spans (grouped per
// sentence), keeping tokens and gold intact.
Dataset with_observations(const Dataset& gold,
                          const std::vector<LocatedSpan>& spans) {
  Dataset out = gold;
  std::map<std::pair<int, int>, std::vector<Span>> per_sentence;
  for (const auto& ls : spans) per_sentence[{ls.doc, ls.sent}].push_back(ls.span);
  for (int d = 0; d < static_cast<int>(out.documents.size()); ++d) {
    for (int s = 0; s < static_cast<int>(out.documents[d].sentences.size()); ++s) {
      AnnotatedSentence& sent = out.documents[d].sentences[s];
      sent.observed = ObservedTags{};
      auto it = per_sentence.find({d, s});
      if (it == per_sentence.end()) continue;
      std::vector<int> tags =
          spans_to_tags(it->second, sent.length(), out.tagset);
      for (int i = 0; i < sent.length(); ++i) {
        if (tags[i] != out.tagset.o_index()) sent.observed.observe(i + 1, tags[i]);
      }
    }
  }
  return out;
}

// Spans encoded by a sentence's observations, tolerating fragments.
std::vector<Span> observed_spans(const AnnotatedSentence& sent,
                                 const TagSet& tagset) {
  std::vector<int> tags(sent.length(), tagset.o_index());
  for (const auto& [pos, tag] : sent.observed.observations) tags[pos - 1] = tag;
  return lenient_tags_to_spans(tags, tagset);
}

// (first token offset in document) / (document token count), both 0-based.
double normalized_position(const Document& doc, int sent_index, int span_start) {
  long offset = 0;
  for (int s = 0; s < sent_index; ++s) offset += doc.sentences[s].length();
  offset += span_start - 1;
  long total = 0;
  for (const auto& s : doc.sentences) total += s.length();
  return total == 0 ? 0.0 : static_cast<double>(offset) / static_cast<double>(total);
}

}  // namespace

SamplerStats sampler_stats(const Dataset& gold, const Dataset& partial) {
  if (gold.documents.size() != partial.documents.size())
    fail(ErrorCode::shape_mismatch, "gold and partial corpora differ in documents");

  std::set<LocatedSpan> gold_set;
  for (const auto& ls : collect_gold_spans(gold)) gold_set.insert(ls);

  SamplerStats stats;
  stats.gold_spans = static_cast<long>(gold_set.size());
  stats.per_doc_counts.assign(partial.documents.size(), 0);

  long kept_matching = 0;
  double position_sum = 0.0;
  for (int d = 0; d < static_cast<int>(partial.documents.size()); ++d) {
    const Document& doc = partial.documents[d];
    if (doc.sentences.size() != gold.documents[d].sentences.size())
      fail(ErrorCode::shape_mismatch, "document " + doc.id + " differs in sentences");
    for (int s = 0; s < static_cast<int>(doc.sentences.size()); ++s) {
      for (const Span& span : observed_spans(doc.sentences[s], partial.tagset)) {
        ++stats.kept_spans;
        ++stats.per_doc_counts[d];
        position_sum += normalized_position(doc, s, span.start);
        if (gold_set.count({d, s, span})) ++kept_matching;
      }
    }
  }
  double gold_position_sum = 0.0;
  for (const auto& ls : gold_set)
    gold_position_sum += normalized_position(gold.documents[ls.doc], ls.sent,
                                             ls.span.start);

  stats.false_positive_spans = stats.kept_spans - kept_matching;
  stats.recall = stats.gold_spans == 0
                     ? 0.0
                     : static_cast<double>(kept_matching) / stats.gold_spans;
  stats.precision = stats.kept_spans == 0
                        ? 0.0
                        : static_cast<double>(kept_matching) / stats.kept_spans;
  stats.position_bias =
      stats.kept_spans == 0 ? 0.0 : position_sum / stats.kept_spans;
  stats.gold_position_bias =
      stats.gold_spans == 0 ? 0.0 : gold_position_sum / stats.gold_spans;
  return stats;
}

// RNG consumption order: one Fisher-Yates shuffle of the mention groups
// (first-occurrence order), then per placed false positive one window draw
// followed by one class draw, repeated when the pair lands exactly on a
// gold span (which would be a true positive, not a false one).
SampleResult sample_nns(const Dataset& gold, const NnsConfig& config) {
  config.validate();
  std::vector<LocatedSpan> all = collect_gold_spans(gold);
  const long total = static_cast<long>(all.size());
  if (total == 0)
    fail(ErrorCode::target_unreachable, "gold corpus has no entity spans");

  // Group spans by exact mention string, first-occurrence order.
  std::vector<std::string> group_order;
  std::map<std::string, std::vector<LocatedSpan>> groups;
  for (const auto& ls : all) {
    std::string mention = mention_text(gold, ls);
    auto [it, inserted] = groups.emplace(mention, std::vector<LocatedSpan>{});
    if (inserted) group_order.push_back(mention);
    it->second.push_back(ls);
  }

  Rng rng(config.rng_seed);
  rng.shuffle(group_order);

  SamplerStats stats;
  long kept = total;
  long largest_removed = 0;
  std::set<std::string> removed;
  for (const auto& mention : group_order) {
    double recall = static_cast<double>(kept) / total;
    if (recall <= config.target_recall) break;
    const long size = static_cast<long>(groups[mention].size());
    removed.insert(mention);
    kept -= size;
    largest_removed = std::max(largest_removed, size);
  }
  stats.largest_group_fraction =
      static_cast<double>(largest_removed) / static_cast<double>(total);

  std::vector<LocatedSpan> kept_spans;
  for (const auto& ls : all) {
    if (!removed.count(mention_text(gold, ls))) kept_spans.push_back(ls);
  }

  std::set<LocatedSpan> gold_exact(all.begin(), all.end());

  // Occupancy per sentence so false positives never overlap anything placed.
  std::map<std::pair<int, int>, std::vector<bool>> occupied;
  for (int d = 0; d < static_cast<int>(gold.documents.size()); ++d)
    for (int s = 0; s < static_cast<int>(gold.documents[d].sentences.size()); ++s)
      occupied[{d, s}].assign(gold.documents[d].sentences[s].length(), false);
  for (const auto& ls : kept_spans)
    for (int p = ls.span.start; p <= ls.span.end; ++p)
      occupied[{ls.doc, ls.sent}][p - 1] = true;

  std::vector<LocatedSpan> placed;
  const long k = static_cast<long>(kept_spans.size());
  while (k > 0 &&
         static_cast<double>(k) / static_cast<double>(k + placed.size()) >
             config.target_precision) {
    // All currently valid windows, corpus order, lengths 1..max inner.
    std::vector<LocatedSpan> windows;
    for (int d = 0; d < static_cast<int>(gold.documents.size()); ++d) {
      for (int s = 0; s < static_cast<int>(gold.documents[d].sentences.size()); ++s) {
        const auto& occ = occupied[{d, s}];
        const int n = static_cast<int>(occ.size());
        for (int start = 1; start <= n; ++start) {
          for (int len = 1; len <= config.fp_span_max_len; ++len) {
            int end = start + len - 1;
            if (end > n) break;
            bool free = true;
            for (int p = start; p <= end && free; ++p) free = !occ[p - 1];
            if (free) windows.push_back({d, s, {start, end, 0}});
          }
        }
      }
    }
    if (windows.empty()) {
      double achievable =
          static_cast<double>(k) / static_cast<double>(k + placed.size());
      fail(ErrorCode::target_unreachable,
           "no room for more false positives; achievable precision is " +
               std::to_string(achievable));
    }
    LocatedSpan fp;
    std::size_t attempts = 0;
    do {
      if (++attempts > 10 * windows.size() + 100) {
        fail(ErrorCode::target_unreachable,
             "every remaining window reproduces a gold span");
      }
      fp = windows[rng.next_below(windows.size())];
      fp.span.entity_class =
          static_cast<int>(rng.next_below(gold.tagset.num_classes()));
    } while (gold_exact.count(fp));
    for (int p = fp.span.start; p <= fp.span.end; ++p)
      occupied[{fp.doc, fp.sent}][p - 1] = true;
    placed.push_back(fp);
  }

  std::vector<LocatedSpan> observed = kept_spans;
  observed.insert(observed.end(), placed.begin(), placed.end());
  SampleResult result{with_observations(gold, observed), {}};
  result.stats = sampler_stats(gold, result.dataset);
  result.stats.largest_group_fraction = stats.largest_group_fraction;
  return result;
}

// RNG consumption order: one Fisher-Yates shuffle of document indices, then
// one Bernoulli draw per scanned span (document visitation stops at the cap,
// the whole scan stops exactly at the budget).
SampleResult sample_ee(const Dataset& gold, const EeConfig& config) {
  config.validate();
  Rng rng(config.rng_seed);

  std::vector<int> doc_order(gold.documents.size());
  for (std::size_t i = 0; i < doc_order.size(); ++i)
    doc_order[i] = static_cast<int>(i);
  rng.shuffle(doc_order);

  std::vector<LocatedSpan> kept;
  long total_kept = 0;
  for (int d : doc_order) {
    if (total_kept >= config.total_budget) break;
    long doc_kept = 0;
    const Document& doc = gold.documents[d];
    for (int s = 0; s < static_cast<int>(doc.sentences.size()) &&
                    doc_kept < config.per_doc_cap &&
                    total_kept < config.total_budget;
         ++s) {
      for (const Span& span : gold_spans(doc.sentences[s], gold.tagset)) {
        if (doc_kept >= config.per_doc_cap || total_kept >= config.total_budget)
          break;
        if (rng.bernoulli(config.keep_prob)) {
          kept.push_back({d, s, span});
          ++doc_kept;
          ++total_kept;
        }
      }
    }
  }

  SampleResult result{with_observations(gold, kept), {}};
  result.stats = sampler_stats(gold, result.dataset);
  result.stats.shortfall = total_kept < config.total_budget;
  return result;
}

}  // namespace eertag
