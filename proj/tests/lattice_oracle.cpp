#include "lattice_oracle.hpp"

#include <algorithm>
#include <cmath>

#include "eertag/error.hpp"
#include "eertag/rng.hpp"

namespace eertag::oracle {

namespace {

// Reverse-lexicographic comparison: the DP tie rule picks the lowest tag
// index starting from the last position.
bool reverse_lex_less(const std::vector<int>& a, const std::vector<int>& b) {
  for (std::size_t i = a.size(); i-- > 0;) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

}  // namespace

EnumResult enumerate_lattice(const PotentialLattice& lat,
                             const ObservedTags* observed, int o_index,
                             double o_bias) {
  const int n = lat.length;
  const int y = lat.num_tags;

  auto unary = [&](int i, int t) {
    return t == o_index ? lat.unary(i, t) - o_bias : lat.unary(i, t);
  };
  auto satisfies = [&](const std::vector<int>& tags) {
    if (observed == nullptr) return true;
    for (const auto& [pos, tag] : observed->observations) {
      if (tags[pos - 1] != tag) return false;
    }
    return true;
  };
  auto valid = [&](const std::vector<int>& tags) {
    if (!lat.mask.start_allowed[tags.front()]) return false;
    if (!lat.mask.end_allowed[tags.back()]) return false;
    for (int i = 0; i + 1 < n; ++i) {
      if (!lat.mask.transition(tags[i], tags[i + 1])) return false;
    }
    return true;
  };
  // Identical accumulation order to the DP: unary, then alternating
  // transition and unary left to right.
  auto score_of = [&](const std::vector<int>& tags) {
    double s = unary(0, tags[0]);
    for (int i = 1; i < n; ++i) {
      s = s + lat.transition(tags[i - 1], tags[i]);
      s = s + unary(i, tags[i]);
    }
    return s;
  };
  auto for_each_valid = [&](auto&& fn) {
    std::vector<int> tags(n, 0);
    for (;;) {
      if (valid(tags) && satisfies(tags)) fn(tags, score_of(tags));
      int i = n - 1;
      while (i >= 0 && tags[i] == y - 1) tags[i--] = 0;
      if (i < 0) break;
      ++tags[i];
    }
  };

  EnumResult result;
  result.marginals = Matrix(n, y, 0.0);
  result.pairwise_sums = Matrix(y, y, 0.0);

  // First pass: path count, max score, Viterbi winner under the tie rule.
  double max_score = 0.0;
  for_each_valid([&](const std::vector<int>& tags, double score) {
    if (result.valid_paths == 0 || score > result.viterbi_score ||
        (score == result.viterbi_score &&
         reverse_lex_less(tags, result.viterbi_tags))) {
      result.viterbi_tags = tags;
      result.viterbi_score = score;
    }
    if (result.valid_paths == 0 || score > max_score) max_score = score;
    ++result.valid_paths;
  });
  if (result.valid_paths == 0) return result;

  // Second pass: accumulate unnormalized masses relative to the max.
  double mass = 0.0;
  double entity_mass = 0.0;
  for_each_valid([&](const std::vector<int>& tags, double score) {
    const double w = std::exp(score - max_score);
    mass += w;
    int entities = 0;
    for (int i = 0; i < n; ++i) {
      result.marginals(i, tags[i]) += w;
      if (tags[i] != o_index) ++entities;
      if (i + 1 < n) result.pairwise_sums(tags[i], tags[i + 1]) += w;
    }
    entity_mass += w * entities;
  });

  result.log_z = max_score + std::log(mass);
  for (double& v : result.marginals.data) v /= mass;
  for (double& v : result.pairwise_sums.data) v /= mass;
  result.expected_entities = entity_mass / mass;
  return result;
}

PotentialLattice random_lattice(int length, const TagSet& tagset, bool masked,
                                std::uint64_t seed, bool quantized) {
  Rng rng(seed);
  const int y = tagset.size();
  Matrix unary(length, y);
  Matrix transition(y, y);
  auto draw = [&]() {
    if (quantized) return static_cast<double>(rng.next_below(5)) - 2.0;
    return rng.uniform(-2.0, 2.0);
  };
  for (double& v : unary.data) v = draw();
  for (double& v : transition.data) v = draw();
  TransitionMask mask =
      masked ? TransitionMask::biluo(tagset) : TransitionMask::open(y);
  return PotentialLattice::make(std::move(unary), transition, std::move(mask));
}

ObservedTags random_observations(const PotentialLattice& lat, std::uint64_t seed,
                                 int max_observed) {
  Rng rng(seed);
  const int n = lat.length;
  const int y = lat.num_tags;

  // feasible(i, t): tag t at position i can still reach an allowed end.
  std::vector<std::vector<bool>> feasible(n, std::vector<bool>(y, false));
  for (int t = 0; t < y; ++t) feasible[n - 1][t] = lat.mask.end_allowed[t] != 0;
  for (int i = n - 2; i >= 0; --i) {
    for (int t = 0; t < y; ++t) {
      for (int q = 0; q < y && !feasible[i][t]; ++q) {
        if (lat.mask.transition(t, q) && feasible[i + 1][q]) feasible[i][t] = true;
      }
    }
  }

  std::vector<int> path;
  std::vector<int> options;
  for (int t = 0; t < y; ++t) {
    if (lat.mask.start_allowed[t] && feasible[0][t]) options.push_back(t);
  }
  path.push_back(options[rng.next_below(options.size())]);
  for (int i = 1; i < n; ++i) {
    options.clear();
    for (int t = 0; t < y; ++t) {
      if (lat.mask.transition(path.back(), t) && feasible[i][t]) options.push_back(t);
    }
    path.push_back(options[rng.next_below(options.size())]);
  }

  ObservedTags observed;
  int how_many = static_cast<int>(rng.next_below(max_observed + 1));
  for (int k = 0; k < how_many; ++k) {
    int pos = 1 + static_cast<int>(rng.next_below(n));
    observed.observations[pos] = path[pos - 1];
  }
  return observed;
}

}  // namespace eertag::oracle
