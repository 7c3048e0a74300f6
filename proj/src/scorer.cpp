#include "eertag/scorer.hpp"

#include <cmath>

#include "eertag/error.hpp"
#include "eertag/rng.hpp"

namespace eertag {

Vocab Vocab::build(const Dataset& dataset, int min_count) {
  std::unordered_map<std::string, long> counts;
  std::vector<std::string> order;
  for (const auto& doc : dataset.documents) {
    for (const auto& s : doc.sentences) {
      for (const auto& tok : s.sentence.tokens) {
        auto [it, inserted] = counts.emplace(tok, 0);
        if (inserted) order.push_back(tok);
        ++it->second;
      }
    }
  }
  std::vector<std::string> words = {"<pad>", "<unk>"};
  for (const auto& tok : order) {
    if (counts[tok] >= min_count) words.push_back(tok);
  }
  return from_words(std::move(words));
}

Vocab Vocab::from_words(std::vector<std::string> words) {
  Vocab v;
  v.words_ = std::move(words);
  for (int i = 0; i < static_cast<int>(v.words_.size()); ++i)
    v.index_.emplace(v.words_[i], i);
  return v;
}

int Vocab::lookup(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

ParamGradients ParamGradients::zeros_like(const ScorerParams& p) {
  ParamGradients g;
  g.embeddings = Matrix(p.embeddings.rows, p.embeddings.cols);
  g.hidden_w = Matrix(p.hidden_w.rows, p.hidden_w.cols);
  g.hidden_b.assign(p.hidden_b.size(), 0.0);
  g.out_w = Matrix(p.out_w.rows, p.out_w.cols);
  g.out_b.assign(p.out_b.size(), 0.0);
  g.transition = Matrix(p.transition.rows, p.transition.cols);
  return g;
}

ScorerParams init_scorer(const TagSet& tagset, const Vocab& vocab,
                         const ScorerConfig& config) {
  if (config.embed_dim < 1 || config.hidden_dim < 1 || config.window < 0)
    fail(ErrorCode::invalid_argument, "bad scorer dimensions");
  ScorerParams p;
  p.config = config;
  p.tagset = tagset;
  p.mask = TransitionMask::biluo(tagset);
  p.vocab = vocab;

  const int d = config.embed_dim;
  const int in = (2 * config.window + 1) * d;
  const int h = config.hidden_dim;
  const int y = tagset.size();

  Rng rng(config.rng_seed);
  auto fill_uniform = [&](Matrix& m, int fan_in) {
    double s = config.init_scale / std::sqrt(static_cast<double>(fan_in));
    for (double& v : m.data) v = rng.uniform(-s, s);
  };
  p.embeddings = Matrix(vocab.size(), d);
  fill_uniform(p.embeddings, d);
  p.hidden_w = Matrix(h, in);
  fill_uniform(p.hidden_w, in);
  p.hidden_b.assign(h, 0.0);
  p.out_w = Matrix(y, h);
  fill_uniform(p.out_w, h);
  p.out_b.assign(y, 0.0);
  p.transition = Matrix(y, y, 0.0);
  return p;
}

namespace {

// Window token indices for one position, pad outside the sentence.
void window_indices(const ScorerParams& p, const std::vector<int>& token_ids,
                    int i, std::vector<int>& out) {
  const int w = p.config.window;
  out.clear();
  for (int k = i - w; k <= i + w; ++k) {
    if (k < 0 || k >= static_cast<int>(token_ids.size()))
      out.push_back(Vocab::kPad);
    else
      out.push_back(token_ids[k]);
  }
}

struct ForwardCache {
  std::vector<int> token_ids;
  std::vector<std::vector<double>> inputs;   // per position, (2w+1)d
  std::vector<std::vector<double>> hiddens;  // per position, h (post-tanh)
};

ForwardCache forward_pass(const ScorerParams& p, const Sentence& sentence,
                          Matrix* unary_out) {
  const int n = sentence.length();
  const int d = p.config.embed_dim;
  const int in = (2 * p.config.window + 1) * d;
  const int h = p.config.hidden_dim;
  const int y = p.num_tags();

  ForwardCache cache;
  cache.token_ids.reserve(n);
  for (const auto& tok : sentence.tokens)
    cache.token_ids.push_back(p.vocab.lookup(tok));
  cache.inputs.assign(n, std::vector<double>(in));
  cache.hiddens.assign(n, std::vector<double>(h));
  if (unary_out) *unary_out = Matrix(n, y);

  std::vector<int> window;
  for (int i = 0; i < n; ++i) {
    window_indices(p, cache.token_ids, i, window);
    double* x = cache.inputs[i].data();
    for (std::size_t slot = 0; slot < window.size(); ++slot) {
      const double* e = p.embeddings.row(window[slot]);
      for (int k = 0; k < d; ++k) x[slot * d + k] = e[k];
    }
    double* hid = cache.hiddens[i].data();
    for (int j = 0; j < h; ++j) {
      double a = p.hidden_b[j];
      const double* wrow = p.hidden_w.row(j);
      for (int k = 0; k < in; ++k) a += wrow[k] * x[k];
      hid[j] = std::tanh(a);
    }
    if (unary_out) {
      for (int t = 0; t < y; ++t) {
        double s = p.out_b[t];
        const double* vrow = p.out_w.row(t);
        for (int j = 0; j < h; ++j) s += vrow[j] * hid[j];
        (*unary_out)(i, t) = s;
      }
    }
  }
  return cache;
}

}  // namespace

PotentialLattice score_sentence(const ScorerParams& p, const Sentence& sentence) {
  if (sentence.length() < 1)
    fail(ErrorCode::invalid_argument, "cannot score an empty sentence");
  Matrix unary;
  forward_pass(p, sentence, &unary);
  return PotentialLattice::make(std::move(unary), p.transition, p.mask);
}

void score_gradients(const ScorerParams& p, const Sentence& sentence,
                     const LatticeGradients& adj, ParamGradients& out) {
  const int n = sentence.length();
  const int d = p.config.embed_dim;
  const int in = (2 * p.config.window + 1) * d;
  const int h = p.config.hidden_dim;
  const int y = p.num_tags();
  if (adj.d_unary.rows != n || adj.d_unary.cols != y ||
      adj.d_transition.rows != y || adj.d_transition.cols != y) {
    fail(ErrorCode::shape_mismatch, "lattice adjoints do not match sentence/tagset");
  }

  ForwardCache cache = forward_pass(p, sentence, nullptr);

  std::vector<double> dh(h), dx(in);
  std::vector<int> window;
  for (int i = 0; i < n; ++i) {
    const double* hid = cache.hiddens[i].data();
    const double* x = cache.inputs[i].data();
    std::fill(dh.begin(), dh.end(), 0.0);
    for (int t = 0; t < y; ++t) {
      double du = adj.d_unary(i, t);
      if (du == 0.0) continue;
      out.out_b[t] += du;
      double* gv = out.out_w.row(t);
      const double* vrow = p.out_w.row(t);
      for (int j = 0; j < h; ++j) {
        gv[j] += du * hid[j];
        dh[j] += du * vrow[j];
      }
    }
    std::fill(dx.begin(), dx.end(), 0.0);
    for (int j = 0; j < h; ++j) {
      double g = dh[j] * (1.0 - hid[j] * hid[j]);
      if (g == 0.0) continue;
      out.hidden_b[j] += g;
      double* gw = out.hidden_w.row(j);
      const double* wrow = p.hidden_w.row(j);
      for (int k = 0; k < in; ++k) {
        gw[k] += g * x[k];
        dx[k] += g * wrow[k];
      }
    }
    window_indices(p, cache.token_ids, i, window);
    for (std::size_t slot = 0; slot < window.size(); ++slot) {
      double* ge = out.embeddings.row(window[slot]);
      for (int k = 0; k < d; ++k) ge[k] += dx[slot * d + k];
    }
  }

  for (int a = 0; a < y; ++a) {
    for (int b = 0; b < y; ++b) {
      if (p.mask.transition(a, b)) out.transition(a, b) += adj.d_transition(a, b);
    }
  }
}

}  // namespace eertag
