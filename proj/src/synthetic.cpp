#include "eertag/synthetic.hpp"

#include <cmath>
#include <string>

#include "eertag/error.hpp"
#include "eertag/rng.hpp"

namespace eertag {

void SyntheticTaskConfig::validate() const {
  if (num_classes < 1) fail(ErrorCode::invalid_argument, "need at least one class");
  if (filler_words < 1 || unit_words_per_class < 1 || pair_words_per_class < 0 ||
      ambiguous_words < 0)
    fail(ErrorCode::invalid_argument, "bad synthetic vocabulary sizes");
  if (min_len < 1 || max_len < min_len)
    fail(ErrorCode::invalid_argument, "bad sentence length range");
  if (sentences_per_doc < 1)
    fail(ErrorCode::invalid_argument, "sentences_per_doc must be >= 1");
  if (entity_ratio_target <= 0.0 || entity_ratio_target >= 1.0)
    fail(ErrorCode::invalid_argument, "entity_ratio_target must be in (0,1)");
  if (reveal_prob <= 0.0 || reveal_prob > 1.0)
    fail(ErrorCode::invalid_argument,
         "reveal_prob must be in (0,1]: revealed entity support must be positive");
}

namespace {

std::vector<std::string> default_classes(int num_classes) {
  static const char* kNames[] = {"PER", "ORG", "LOC", "MISC"};
  std::vector<std::string> classes;
  for (int c = 0; c < num_classes; ++c) {
    if (c < 4) {
      classes.push_back(kNames[c]);
    } else {
      classes.push_back("C" + std::to_string(c));
    }
  }
  return classes;
}

// Zipf-weighted pick over 0..count-1 (weight 1/(k+1)), one double draw.
int zipf_pick(Rng& rng, int count) {
  double total = 0.0;
  for (int k = 0; k < count; ++k) total += 1.0 / (k + 1);
  double r = rng.next_double() * total;
  double acc = 0.0;
  for (int k = 0; k < count; ++k) {
    acc += 1.0 / (k + 1);
    if (r < acc) return k;
  }
  return count - 1;
}

struct WordNames {
  static std::string filler(int k) { return "f" + std::to_string(k); }
  static std::string unit(int cls, int k) {
    return "u" + std::to_string(cls) + "_" + std::to_string(k);
  }
  static std::string pair_b(int cls, int k) {
    return "pb" + std::to_string(cls) + "_" + std::to_string(k);
  }
  static std::string pair_l(int cls, int k) {
    return "pl" + std::to_string(cls) + "_" + std::to_string(k);
  }
  static std::string trigger(int j) { return "t" + std::to_string(j); }
  static std::string ambiguous(int j) { return "a" + std::to_string(j); }
};

// Entity event mix: unit / pair / trigger+ambiguous.
constexpr double kUnitWeight = 0.5;
constexpr double kPairWeight = 0.3;
constexpr double kAmbWeight = 0.2;

// Expected tokens and entity tokens per entity event under the mix above.
constexpr double kTokensPerEntityEvent = kUnitWeight * 1 + kPairWeight * 2 + kAmbWeight * 2;
constexpr double kEntityTokensPerEvent = kUnitWeight * 1 + kPairWeight * 2 + kAmbWeight * 1;

double entity_event_prob(double rho) {
  // rho = ent*q / (tok*q + (1-q)) solved for the event probability q.
  return rho / (kEntityTokensPerEvent - (kTokensPerEntityEvent - 1.0) * rho);
}

bool parse_int_after(const std::string& word, std::size_t pos, int* out) {
  if (pos >= word.size()) return false;
  int value = 0;
  for (std::size_t i = pos; i < word.size(); ++i) {
    if (word[i] < '0' || word[i] > '9') return false;
    value = value * 10 + (word[i] - '0');
  }
  *out = value;
  return true;
}

}  // namespace

int synthetic_rule_tag(const std::vector<std::string>& tokens, int i,
                       const TagSet& tagset) {
  const std::string& w = tokens[i];
  int num;
  if (w.size() >= 2 && w[0] == 'u' && w.find('_') != std::string::npos) {
    int cls = w[1] - '0';
    return tagset.tag_index(TagRole::unit, cls);
  }
  if (w.size() >= 3 && w[0] == 'p' && (w[1] == 'b' || w[1] == 'l')) {
    int cls = w[2] - '0';
    return tagset.tag_index(w[1] == 'b' ? TagRole::begin : TagRole::last, cls);
  }
  if (w[0] == 'a' && parse_int_after(w, 1, &num)) {
    if (i > 0 && tokens[i - 1] == WordNames::trigger(num)) {
      return tagset.tag_index(TagRole::unit, num % tagset.num_classes());
    }
    return tagset.o_index();
  }
  return tagset.o_index();  // fillers and triggers
}

// Draw order per sentence: length, then per event one type draw plus the
// word draws it needs; after the tokens are fixed, one reveal draw per
// entity position. A single stream drives the whole corpus.
SyntheticCorpus generate_synthetic(const SyntheticTaskConfig& config,
                                   int num_sentences) {
  config.validate();
  TagSet tagset(default_classes(config.num_classes));
  Rng rng(config.rng_seed);
  const double q = entity_event_prob(config.entity_ratio_target);

  Dataset gold{tagset, {}};
  Document doc;
  long entity_tokens = 0;
  long total_tokens = 0;

  for (int sent_index = 0; sent_index < num_sentences; ++sent_index) {
    const int target_len =
        config.min_len +
        static_cast<int>(rng.next_below(config.max_len - config.min_len + 1));
    std::vector<std::string> tokens;
    auto emit_filler = [&]() {
      // Lone ambiguous words appear as O fillers, never after their trigger.
      if (config.ambiguous_words > 0 && rng.next_double() < config.ambiguous_filler_frac) {
        int j = static_cast<int>(rng.next_below(config.ambiguous_words));
        if (tokens.empty() || tokens.back() != WordNames::trigger(j)) {
          tokens.push_back(WordNames::ambiguous(j));
          return;
        }
      }
      tokens.push_back(WordNames::filler(zipf_pick(rng, config.filler_words)));
    };
    while (static_cast<int>(tokens.size()) < target_len) {
      const int room = target_len - static_cast<int>(tokens.size());
      if (rng.next_double() < q) {
        double kind = rng.next_double();
        if (kind < kUnitWeight) {
          int cls = static_cast<int>(rng.next_below(config.num_classes));
          tokens.push_back(
              WordNames::unit(cls, zipf_pick(rng, config.unit_words_per_class)));
          continue;
        }
        if (room < 2) {  // two-token events do not fit; keep the length exact
          emit_filler();
          continue;
        }
        if (kind < kUnitWeight + kPairWeight) {
          int cls = static_cast<int>(rng.next_below(config.num_classes));
          int k = zipf_pick(rng, config.pair_words_per_class);
          tokens.push_back(WordNames::pair_b(cls, k));
          tokens.push_back(WordNames::pair_l(cls, k));
        } else if (config.ambiguous_words > 0) {
          int j = static_cast<int>(rng.next_below(config.ambiguous_words));
          tokens.push_back(WordNames::trigger(j));
          tokens.push_back(WordNames::ambiguous(j));
        } else {
          emit_filler();
        }
      } else {
        emit_filler();
      }
    }

    AnnotatedSentence s;
    s.sentence.tokens = tokens;
    std::vector<int> tags(tokens.size());
    for (int i = 0; i < static_cast<int>(tokens.size()); ++i) {
      tags[i] = synthetic_rule_tag(tokens, i, tagset);
      ++total_tokens;
      if (tags[i] != tagset.o_index()) ++entity_tokens;
    }
    s.gold_tags = std::move(tags);
    doc.sentences.push_back(std::move(s));
    if (static_cast<int>(doc.sentences.size()) == config.sentences_per_doc ||
        sent_index + 1 == num_sentences) {
      doc.id = "syn-" + std::to_string(gold.documents.size());
      gold.documents.push_back(std::move(doc));
      doc = Document{};
    }
  }

  SyntheticCorpus corpus;
  corpus.partial = gold;
  for (auto& d : corpus.partial.documents) {
    for (auto& s : d.sentences) {
      for (int i = 0; i < s.length(); ++i) {
        int tag = (*s.gold_tags)[i];
        if (tag == tagset.o_index()) continue;
        if (rng.bernoulli(config.reveal_prob)) s.observed.observe(i + 1, tag);
      }
    }
  }
  // Gold datasets carry full observation of entity tags.
  for (auto& d : gold.documents) {
    for (auto& s : d.sentences) {
      for (int i = 0; i < s.length(); ++i) {
        int tag = (*s.gold_tags)[i];
        if (tag != tagset.o_index()) s.observed.observe(i + 1, tag);
      }
    }
  }
  corpus.gold = std::move(gold);
  corpus.empirical_rho =
      static_cast<double>(entity_tokens) / static_cast<double>(total_tokens);
  return corpus;
}

Dataset raw_view(const Dataset& partial) {
  Dataset raw = partial;
  for (auto& doc : raw.documents) {
    for (auto& s : doc.sentences) {
      std::vector<int> tags(s.length(), raw.tagset.o_index());
      for (const auto& [pos, tag] : s.observed.observations) tags[pos - 1] = tag;
      std::vector<Span> spans = lenient_tags_to_spans(tags, raw.tagset);
      std::vector<int> repaired = spans_to_tags(spans, s.length(), raw.tagset);
      s.observed = ObservedTags{};
      for (int i = 0; i < s.length(); ++i) s.observed.observe(i + 1, repaired[i]);
      s.gold_tags = std::move(repaired);
    }
  }
  return raw;
}

RunMetrics evaluate_model(const ScorerParams& params, const Dataset& test,
                          const Dataset& train) {
  RunMetrics metrics;
  Dataset decoded = decode_dataset(params, test, 0.0);
  long correct = 0, total = 0, sequences = 0, exact = 0;
  for (std::size_t d = 0; d < test.documents.size(); ++d) {
    for (std::size_t s = 0; s < test.documents[d].sentences.size(); ++s) {
      const auto& pred = *decoded.documents[d].sentences[s].gold_tags;
      const auto& gold = *test.documents[d].sentences[s].gold_tags;
      bool all = true;
      for (std::size_t i = 0; i < gold.size(); ++i) {
        ++total;
        if (pred[i] == gold[i]) {
          ++correct;
        } else {
          all = false;
        }
      }
      ++sequences;
      if (all) ++exact;
    }
  }
  metrics.token_accuracy = static_cast<double>(correct) / static_cast<double>(total);
  metrics.sequence_accuracy =
      static_cast<double>(exact) / static_cast<double>(sequences);
  metrics.entity = span_prf(decoded, test);
  metrics.rho_hat = predicted_entity_ratio(params, train);
  return metrics;
}

ConsistencySpec ConsistencySpec::defaults() {
  ConsistencySpec spec;
  // Zipf-tailed vocabulary large enough that small samples undertrain the
  // tail; batches big enough that the batch entity ratio is a low-noise
  // estimate of the corpus ratio.
  spec.task.filler_words = 400;
  spec.task.unit_words_per_class = 30;
  spec.task.pair_words_per_class = 12;
  spec.task.ambiguous_words = 6;
  spec.test_sentences = 800;
  spec.scorer.embed_dim = 24;
  spec.scorer.hidden_dim = 48;
  spec.scorer.window = 1;
  spec.scorer.min_count = 2;
  spec.scorer.rng_seed = 7;
  spec.train.epochs = 30;
  spec.train.batch_token_cap = 1500;
  spec.train.learning_rate = 1e-2;
  spec.train.rng_seed = 11;
  spec.train.eer.lambda_u = 10.0;
  return spec;
}

ConsistencyReport run_consistency_experiment(const ConsistencySpec& spec) {
  SyntheticTaskConfig task = spec.task;
  SyntheticCorpus train_corpus = generate_synthetic(task, spec.train_sentences);
  task.rng_seed = mix_seed(task.rng_seed, 0x7e57);
  SyntheticCorpus test_corpus = generate_synthetic(task, spec.test_sentences);

  ConsistencyReport report;
  report.rho_star = entity_token_ratio(train_corpus.gold);

  TrainConfig eer_config = spec.train;
  eer_config.eer.rho = report.rho_star;
  eer_config.eer.gamma = 0.0;
  ScorerParams eer_model =
      train(train_corpus.partial, spec.scorer, eer_config, nullptr, nullptr);
  report.eer = evaluate_model(eer_model, test_corpus.gold, train_corpus.partial);

  if (!spec.run_baselines) return report;

  TrainConfig lambda0 = eer_config;
  lambda0.eer.lambda_u = 0.0;
  ScorerParams lambda0_model =
      train(train_corpus.partial, spec.scorer, lambda0, nullptr, nullptr);
  report.lambda_zero =
      evaluate_model(lambda0_model, test_corpus.gold, train_corpus.partial);

  Dataset raw = raw_view(train_corpus.partial);
  ScorerParams raw_model = train(raw, spec.scorer, lambda0, nullptr, nullptr);
  report.raw = evaluate_model(raw_model, test_corpus.gold, train_corpus.partial);
  return report;
}

std::vector<std::pair<double, double>> default_sweep_settings(double rho_star) {
  return {
      {rho_star, 0.0},
      {rho_star - 0.08, 0.0},
      {rho_star - 0.05, 0.05},
      {rho_star + 0.05, 0.05},
      {rho_star / 2.0, rho_star / 2.0},
      {(rho_star + 0.1) / 2.0, (rho_star + 0.1) / 2.0},
  };
}

SweepSpec SweepSpec::defaults() {
  SweepSpec spec;
  ConsistencySpec base = ConsistencySpec::defaults();
  spec.task = base.task;
  // Denser observations than the recovery experiment: the robustness sweep
  // probes the band placement at an operating point where the supervised
  // loss genuinely competes with the ratio hinge, as in benchmark corpora
  // with ~50% mention recall.
  spec.task.reveal_prob = 0.6;
  spec.scorer = base.scorer;
  spec.train = base.train;
  spec.train_sentences = base.train_sentences;
  spec.test_sentences = base.test_sentences;
  return spec;
}

std::vector<SweepCell> run_rho_gamma_sweep(const SweepSpec& spec) {
  std::vector<SweepCell> cells;
  for (std::uint64_t seed : spec.seeds) {
    SyntheticTaskConfig task = spec.task;
    task.rng_seed = mix_seed(task.rng_seed, seed);
    SyntheticCorpus train_corpus = generate_synthetic(task, spec.train_sentences);
    SyntheticTaskConfig test_task = task;
    test_task.rng_seed = mix_seed(task.rng_seed, 0x7e57);
    SyntheticCorpus test_corpus = generate_synthetic(test_task, spec.test_sentences);
    const double rho_star = entity_token_ratio(train_corpus.gold);

    std::vector<std::pair<double, double>> settings =
        spec.settings.empty() ? default_sweep_settings(rho_star) : spec.settings;
    for (const auto& [rho, gamma] : settings) {
      TrainConfig config = spec.train;
      config.rng_seed = mix_seed(spec.train.rng_seed, seed);
      config.eer.rho = rho;
      config.eer.gamma = gamma;
      ScorerParams model =
          train(train_corpus.partial, spec.scorer, config, nullptr, nullptr);
      SweepCell cell;
      cell.rho = rho;
      cell.gamma = gamma;
      cell.seed = seed;
      cell.rho_star = rho_star;
      cell.f1 = span_prf(decode_dataset(model, test_corpus.gold, 0.0),
                         test_corpus.gold)
                    .f1;
      cell.rho_hat = predicted_entity_ratio(model, train_corpus.partial);
      cell.upper_edge_exceeds_rho_star = rho + gamma > rho_star;
      cells.push_back(cell);
    }
  }
  return cells;
}

}  // namespace eertag
