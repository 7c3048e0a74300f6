#include <cmath>

#include <doctest.h>

#include "eertag/error.hpp"
#include "eertag/rng.hpp"
#include "eertag/scorer.hpp"

using namespace eertag;

namespace {

TagSet two_classes() { return TagSet({"PER", "ORG"}); }

Dataset tiny_corpus(const TagSet& ts) {
  Dataset d{ts, {}};
  Document doc{"d0", {}};
  for (const char* text : {"alpha beta gamma", "beta beta delta"}) {
    AnnotatedSentence s;
    std::string token;
    for (const char* c = text;; ++c) {
      if (*c == ' ' || *c == '\0') {
        s.sentence.tokens.push_back(token);
        token.clear();
        if (*c == '\0') break;
      } else {
        token += *c;
      }
    }
    s.gold_tags = std::vector<int>(s.length(), 0);
    doc.sentences.push_back(s);
  }
  d.documents.push_back(doc);
  return d;
}

ScorerConfig tiny_config() {
  ScorerConfig config;
  config.embed_dim = 3;
  config.hidden_dim = 4;
  config.window = 1;
  config.rng_seed = 5;
  return config;
}

}  // namespace

TEST_CASE("vocab keeps first-occurrence order with pad and unk first") {
  TagSet ts = two_classes();
  Vocab v = Vocab::build(tiny_corpus(ts), 1);
  CHECK(v.words()[Vocab::kPad] == "<pad>");
  CHECK(v.words()[Vocab::kUnk] == "<unk>");
  CHECK(v.words()[2] == "alpha");
  CHECK(v.words()[3] == "beta");
  CHECK(v.lookup("beta") == 3);
  CHECK(v.lookup("never-seen") == Vocab::kUnk);

  // min_count filters singletons.
  Vocab filtered = Vocab::build(tiny_corpus(ts), 2);
  CHECK(filtered.lookup("beta") != Vocab::kUnk);
  CHECK(filtered.lookup("alpha") == Vocab::kUnk);
}

TEST_CASE("initialization is seeded and deterministic") {
  TagSet ts = two_classes();
  Vocab v = Vocab::build(tiny_corpus(ts), 1);
  ScorerParams a = init_scorer(ts, v, tiny_config());
  ScorerParams b = init_scorer(ts, v, tiny_config());
  CHECK(a.embeddings == b.embeddings);
  CHECK(a.hidden_w == b.hidden_w);
  CHECK(a.out_w == b.out_w);
  ScorerConfig other = tiny_config();
  other.rng_seed = 6;
  ScorerParams c = init_scorer(ts, v, other);
  CHECK(a.embeddings.data != c.embeddings.data);
  // Biases and transitions start at zero.
  for (double x : a.out_b) CHECK(x == 0.0);
  for (double x : a.transition.data) CHECK(x == 0.0);
}

TEST_CASE("zeroed output layer gives constant unary rows") {
  TagSet ts = two_classes();
  Vocab v = Vocab::build(tiny_corpus(ts), 1);
  ScorerParams p = init_scorer(ts, v, tiny_config());
  p.out_w.fill(0.0);
  p.out_b.assign(p.out_b.size(), 0.0);
  p.out_b[2] = 1.5;
  Sentence s{{"alpha", "beta"}};
  PotentialLattice lat = score_sentence(p, s);
  for (int i = 0; i < 2; ++i) {
    CHECK(lat.unary(i, 2) == doctest::Approx(1.5));
    CHECK(lat.unary(i, 0) == doctest::Approx(0.0));
  }
}

TEST_CASE("scoring is per-sentence pure") {
  TagSet ts = two_classes();
  Vocab v = Vocab::build(tiny_corpus(ts), 1);
  ScorerParams p = init_scorer(ts, v, tiny_config());
  Sentence s1{{"alpha", "beta", "gamma"}};
  Sentence s2{{"delta", "beta"}};
  Matrix first = score_sentence(p, s1).unary;
  score_sentence(p, s2);
  Matrix again = score_sentence(p, s1).unary;
  CHECK(first == again);
}

TEST_CASE("masked transitions are pinned in the lattice") {
  TagSet ts = two_classes();
  Vocab v = Vocab::build(tiny_corpus(ts), 1);
  ScorerParams p = init_scorer(ts, v, tiny_config());
  p.transition.fill(0.7);  // raw values everywhere, mask decides
  PotentialLattice lat = score_sentence(p, Sentence{{"alpha"}});
  CHECK(lat.transition(ts.index_of("O"), ts.index_of("B-PER")) == 0.7);
  CHECK(is_impossible(lat.transition(ts.index_of("O"), ts.index_of("I-PER"))));
}

TEST_CASE("score_gradients matches finite differences for a linear functional") {
  TagSet ts = two_classes();
  Vocab v = Vocab::build(tiny_corpus(ts), 1);
  ScorerParams params = init_scorer(ts, v, tiny_config());
  Sentence sentence{{"alpha", "beta", "never-seen"}};

  // Fixed random adjoints make loss(params) = sum(adj .* unary(params)) +
  // sum(adj_T .* T), a smooth scalar with exactly known lattice gradients.
  Rng rng(17);
  LatticeGradients adj;
  adj.d_unary = Matrix(3, ts.size());
  adj.d_transition = Matrix(ts.size(), ts.size());
  for (double& x : adj.d_unary.data) x = rng.uniform(-1.0, 1.0);
  for (int a = 0; a < ts.size(); ++a)
    for (int b = 0; b < ts.size(); ++b)
      adj.d_transition(a, b) =
          params.mask.transition(a, b) ? rng.uniform(-1.0, 1.0) : 0.0;

  auto loss = [&](const ScorerParams& p) {
    PotentialLattice lat = score_sentence(p, sentence);
    double total = 0.0;
    for (std::size_t i = 0; i < lat.unary.data.size(); ++i)
      total += adj.d_unary.data[i] * lat.unary.data[i];
    for (int a = 0; a < ts.size(); ++a)
      for (int b = 0; b < ts.size(); ++b)
        if (p.mask.transition(a, b)) total += adj.d_transition(a, b) * lat.transition(a, b);
    return total;
  };

  ParamGradients grads = ParamGradients::zeros_like(params);
  score_gradients(params, sentence, adj, grads);

  const double h = 1e-5;
  auto check_tensor = [&](std::vector<double>& values, std::vector<double>& analytic) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      double saved = values[i];
      values[i] = saved + h;
      double up = loss(params);
      values[i] = saved - h;
      double down = loss(params);
      values[i] = saved;
      double numeric = (up - down) / (2.0 * h);
      CHECK(std::abs(numeric - analytic[i]) <=
            1e-4 * std::max({std::abs(numeric), std::abs(analytic[i]), 0.01}));
    }
  };
  check_tensor(params.embeddings.data, grads.embeddings.data);
  check_tensor(params.hidden_w.data, grads.hidden_w.data);
  check_tensor(params.hidden_b, grads.hidden_b);
  check_tensor(params.out_w.data, grads.out_w.data);
  check_tensor(params.out_b, grads.out_b);
  check_tensor(params.transition.data, grads.transition.data);
}

TEST_CASE("zero adjoints give zero parameter gradients") {
  TagSet ts = two_classes();
  Vocab v = Vocab::build(tiny_corpus(ts), 1);
  ScorerParams p = init_scorer(ts, v, tiny_config());
  LatticeGradients adj;
  adj.d_unary = Matrix(2, ts.size(), 0.0);
  adj.d_transition = Matrix(ts.size(), ts.size(), 0.0);
  ParamGradients grads = ParamGradients::zeros_like(p);
  score_gradients(p, Sentence{{"alpha", "beta"}}, adj, grads);
  for_each_tensor(grads, [](const std::vector<double>& t) {
    for (double x : t) CHECK(x == 0.0);
  });
}

TEST_CASE("masked transition entries never receive gradient") {
  TagSet ts = two_classes();
  Vocab v = Vocab::build(tiny_corpus(ts), 1);
  ScorerParams p = init_scorer(ts, v, tiny_config());
  LatticeGradients adj;
  adj.d_unary = Matrix(1, ts.size(), 0.0);
  adj.d_transition = Matrix(ts.size(), ts.size(), 1.0);  // dense upstream
  ParamGradients grads = ParamGradients::zeros_like(p);
  score_gradients(p, Sentence{{"alpha"}}, adj, grads);
  for (int a = 0; a < ts.size(); ++a)
    for (int b = 0; b < ts.size(); ++b)
      if (!p.mask.transition(a, b)) CHECK(grads.transition(a, b) == 0.0);
}

TEST_CASE("shape mismatches are rejected") {
  TagSet ts = two_classes();
  Vocab v = Vocab::build(tiny_corpus(ts), 1);
  ScorerParams p = init_scorer(ts, v, tiny_config());
  LatticeGradients adj;
  adj.d_unary = Matrix(5, ts.size(), 0.0);  // wrong length
  adj.d_transition = Matrix(ts.size(), ts.size(), 0.0);
  ParamGradients grads = ParamGradients::zeros_like(p);
  CHECK_THROWS_AS(score_gradients(p, Sentence{{"alpha"}}, adj, grads), Error);
}
