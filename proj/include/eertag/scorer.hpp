#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "eertag/corpus.hpp"
#include "eertag/lattice.hpp"
#include "eertag/matrix.hpp"

namespace eertag {

struct ScorerConfig {
  int embed_dim = 32;
  int window = 1;  // context tokens on each side
  int hidden_dim = 64;
  double init_scale = 1.0;
  int min_count = 1;
  std::uint64_t rng_seed = 0;

  friend bool operator==(const ScorerConfig&, const ScorerConfig&) = default;
};

// Word index built from training tokens only. Index 0 is the out-of-sentence
// pad, index 1 the unknown word; everything else keeps first-occurrence
// order so vocabularies are reproducible.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  Vocab() = default;
  static Vocab build(const Dataset& dataset, int min_count);
  static Vocab from_words(std::vector<std::string> words);

  int size() const { return static_cast<int>(words_.size()); }
  int lookup(const std::string& token) const;
  const std::vector<std::string>& words() const { return words_; }

  friend bool operator==(const Vocab& a, const Vocab& b) {
    return a.words_ == b.words_;
  }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
};

// Window MLP emission model plus the CRF transition matrix. For position i
// the embeddings of tokens [i-w, i+w] (pad outside the sentence) are
// concatenated, squashed through one tanh layer, and scored per tag:
//   unary(i, y) = out_b[y] + out_w[y] . tanh(hidden_b + hidden_w . x_i)
struct ScorerParams {
  ScorerConfig config;
  TagSet tagset{std::vector<std::string>{}};
  TransitionMask mask;
  Vocab vocab;

  Matrix embeddings;            // |V| x d
  Matrix hidden_w;              // h x (2w+1)d
  std::vector<double> hidden_b; // h
  Matrix out_w;                 // |Y| x h
  std::vector<double> out_b;    // |Y|
  Matrix transition;            // |Y| x |Y|, free values at allowed entries

  int num_tags() const { return tagset.size(); }
};

// Gradient (or optimizer-moment) buffers shaped like ScorerParams.
struct ParamGradients {
  Matrix embeddings;
  Matrix hidden_w;
  std::vector<double> hidden_b;
  Matrix out_w;
  std::vector<double> out_b;
  Matrix transition;

  static ParamGradients zeros_like(const ScorerParams& params);
};

// Visits every tensor in a fixed order (embeddings, hidden_w, hidden_b,
// out_w, out_b, transition); the optimizer and checkpoint writer rely on the
// order being identical for both structures.
template <typename F>
void for_each_tensor(ScorerParams& p, F&& f) {
  f(p.embeddings.data);
  f(p.hidden_w.data);
  f(p.hidden_b);
  f(p.out_w.data);
  f(p.out_b);
  f(p.transition.data);
}

template <typename F>
void for_each_tensor(const ScorerParams& p, F&& f) {
  f(p.embeddings.data);
  f(p.hidden_w.data);
  f(p.hidden_b);
  f(p.out_w.data);
  f(p.out_b);
  f(p.transition.data);
}

template <typename F>
void for_each_tensor(ParamGradients& g, F&& f) {
  f(g.embeddings.data);
  f(g.hidden_w.data);
  f(g.hidden_b);
  f(g.out_w.data);
  f(g.out_b);
  f(g.transition.data);
}

// Seeded initialization: weights uniform in +-init_scale/sqrt(fan_in) drawn
// row-major (embeddings, hidden_w, out_w in that order), biases and
// transitions zero.
ScorerParams init_scorer(const TagSet& tagset, const Vocab& vocab,
                         const ScorerConfig& config);

PotentialLattice score_sentence(const ScorerParams& params,
                                const Sentence& sentence);

// Chain rule from lattice adjoints into parameter space, accumulated into
// `out`. Masked transition entries receive zero.
void score_gradients(const ScorerParams& params, const Sentence& sentence,
                     const LatticeGradients& lattice_adjoints,
                     ParamGradients& out);

}  // namespace eertag
