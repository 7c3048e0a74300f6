#include <cmath>

#include <doctest.h>

#include "eertag/error.hpp"
#include "eertag/lattice.hpp"
#include "eertag/rng.hpp"
#include "lattice_oracle.hpp"

using namespace eertag;

namespace {

TagSet one_class() { return TagSet({"PER"}); }
TagSet two_classes() { return TagSet({"PER", "ORG"}); }

PotentialLattice uniform_lattice(int n, int num_tags) {
  return PotentialLattice::make(Matrix(n, num_tags, 0.0),
                                Matrix(num_tags, num_tags, 0.0),
                                TransitionMask::open(num_tags));
}

}  // namespace

TEST_CASE("biluo mask structure") {
  TagSet ts = two_classes();
  TransitionMask mask = TransitionMask::biluo(ts);
  auto idx = [&](const char* name) { return ts.index_of(name); };
  CHECK(mask.transition(idx("O"), idx("B-PER")));
  CHECK(mask.transition(idx("O"), idx("U-ORG")));
  CHECK(!mask.transition(idx("O"), idx("I-PER")));
  CHECK(!mask.transition(idx("O"), idx("L-PER")));
  CHECK(mask.transition(idx("B-PER"), idx("I-PER")));
  CHECK(mask.transition(idx("B-PER"), idx("L-PER")));
  CHECK(!mask.transition(idx("B-PER"), idx("I-ORG")));
  CHECK(!mask.transition(idx("B-PER"), idx("O")));
  CHECK(mask.transition(idx("L-PER"), idx("O")));
  CHECK(mask.transition(idx("U-PER"), idx("B-ORG")));
  CHECK(mask.start_allowed[idx("O")]);
  CHECK(mask.start_allowed[idx("B-PER")]);
  CHECK(!mask.start_allowed[idx("I-PER")]);
  CHECK(mask.end_allowed[idx("L-ORG")]);
  CHECK(!mask.end_allowed[idx("B-ORG")]);
}

TEST_CASE("mask agrees with the grammar in tags_to_spans") {
  // Two independent encodings of BILUO validity must accept the same
  // sequences.
  TagSet ts = two_classes();
  TransitionMask mask = TransitionMask::biluo(ts);
  Rng rng(13);
  for (int trial = 0; trial < 500; ++trial) {
    int n = 1 + static_cast<int>(rng.next_below(5));
    std::vector<int> tags(n);
    for (int& t : tags) t = static_cast<int>(rng.next_below(ts.size()));
    bool mask_valid = mask.start_allowed[tags.front()] != 0 &&
                      mask.end_allowed[tags.back()] != 0;
    for (int i = 0; i + 1 < n && mask_valid; ++i)
      mask_valid = mask.transition(tags[i], tags[i + 1]);
    bool grammar_valid = true;
    try {
      tags_to_spans(tags, ts);
    } catch (const Error&) {
      grammar_valid = false;
    }
    CHECK(mask_valid == grammar_valid);
  }
}

TEST_CASE("log partition of uniform lattices") {
  // all-zero potentials, no mask: log Z = n log Y.
  PotentialLattice lat = uniform_lattice(3, 5);
  CHECK(log_partition(lat) == doctest::Approx(3.0 * std::log(5.0)).epsilon(1e-12));

  PotentialLattice single = uniform_lattice(1, 5);
  CHECK(log_partition(single) == doctest::Approx(std::log(5.0)).epsilon(1e-12));
}

TEST_CASE("uniform marginals and expected entity count") {
  PotentialLattice lat = uniform_lattice(4, 5);
  Matrix m = tag_marginals(lat);
  for (int i = 0; i < 4; ++i)
    for (int t = 0; t < 5; ++t) CHECK(m(i, t) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(expected_entity_count(lat, 0) == doctest::Approx(3.2).epsilon(1e-12));
}

TEST_CASE("pinned unary row forces an indicator marginal") {
  PotentialLattice lat = uniform_lattice(3, 4);
  for (int t = 0; t < 4; ++t)
    if (t != 2) lat.unary(1, t) = kLogZero;
  Matrix m = tag_marginals(lat);
  CHECK(m(1, 2) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m(1, 0) == 0.0);
  CHECK(m(1, 3) == 0.0);
}

TEST_CASE("constrained partition special cases") {
  TagSet ts = one_class();
  PotentialLattice lat = oracle::random_lattice(4, ts, true, 99);
  ObservedTags none;
  CHECK(constrained_log_partition(lat, none) ==
        doctest::Approx(log_partition(lat)).epsilon(1e-12));

  // Fully observed: equals the single path score.
  std::vector<int> path = {ts.index_of("B-PER"), ts.index_of("L-PER"), 0,
                           ts.index_of("U-PER")};
  ObservedTags full;
  for (int i = 0; i < 4; ++i) full.observe(i + 1, path[i]);
  double score = lat.unary(0, path[0]);
  for (int i = 1; i < 4; ++i)
    score += lat.transition(path[i - 1], path[i]) + lat.unary(i, path[i]);
  CHECK(constrained_log_partition(lat, full) ==
        doctest::Approx(score).epsilon(1e-10));
}

TEST_CASE("unsatisfiable observations name a position") {
  TagSet ts = one_class();
  PotentialLattice lat = oracle::random_lattice(3, ts, true, 5);
  ObservedTags bad;
  bad.observe(1, ts.index_of("O"));
  bad.observe(2, ts.index_of("L-PER"));  // L after O is invalid
  try {
    constrained_log_partition(lat, bad);
    FAIL("expected unsatisfiable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unsatisfiable);
    CHECK(std::string(e.what()).find("position 2") != std::string::npos);
  }
}

TEST_CASE("no valid path errors") {
  TagSet ts = one_class();
  TransitionMask mask = TransitionMask::biluo(ts);
  // Kill every start-allowed tag at position 0.
  Matrix unary(2, ts.size(), 0.0);
  for (int t = 0; t < ts.size(); ++t)
    if (mask.start_allowed[t]) unary(0, t) = kLogZero;
  PotentialLattice lat =
      PotentialLattice::make(std::move(unary), Matrix(ts.size(), ts.size(), 0.0), mask);
  CHECK_THROWS_AS(log_partition(lat), Error);
}

TEST_CASE("dp quantities match enumeration on random lattices") {
  int checked_constrained = 0;
  for (int trial = 0; trial < 60; ++trial) {
    TagSet ts = (trial % 2 == 0) ? one_class() : two_classes();
    int n = 1 + trial % 5;
    bool masked = trial % 3 != 0;
    PotentialLattice lat = oracle::random_lattice(n, ts, masked, 1000 + trial);
    oracle::EnumResult brute = oracle::enumerate_lattice(lat, nullptr, 0);

    CHECK(std::abs(log_partition(lat) - brute.log_z) < 1e-10);

    FbTables fb = forward_backward(lat);
    Matrix m = tag_marginals(lat, fb);
    for (int i = 0; i < n; ++i) {
      double row = 0.0;
      for (int t = 0; t < ts.size(); ++t) {
        CHECK(std::abs(m(i, t) - brute.marginals(i, t)) < 1e-9);
        row += m(i, t);
      }
      CHECK(std::abs(row - 1.0) < 1e-9);
    }
    CHECK(std::abs(expected_entity_count(lat, 0) - brute.expected_entities) < 1e-9);

    // Pairwise marginals are consistent with unary marginals.
    for (int i = 0; i + 1 < n; ++i) {
      Matrix pw = pairwise_marginals_at(lat, fb, i);
      for (int a = 0; a < ts.size(); ++a) {
        double sum = 0.0;
        for (int b = 0; b < ts.size(); ++b) sum += pw(a, b);
        CHECK(std::abs(sum - m(i, a)) < 1e-9);
      }
    }

    ViterbiResult vit = viterbi(lat, 0.0, 0);
    CHECK(vit.tags == brute.viterbi_tags);
    CHECK(std::abs(vit.score - brute.viterbi_score) < 1e-10);
    if (masked) CHECK_NOTHROW(tags_to_spans(vit.tags, ts));

    ObservedTags obs = oracle::random_observations(lat, 2000 + trial, n);
    oracle::EnumResult cbrute = oracle::enumerate_lattice(lat, &obs, 0);
    if (cbrute.valid_paths > 0) {
      double clz = constrained_log_partition(lat, obs);
      CHECK(std::abs(clz - cbrute.log_z) < 1e-10);
      CHECK(clz <= log_partition(lat) + 1e-12);
      ++checked_constrained;
    }
  }
  CHECK(checked_constrained > 30);
}

TEST_CASE("viterbi ties resolve to the reverse-lexicographic smallest path") {
  // Integer potentials force exact ties; the uniform lattice's winner must
  // be all-O (tag 0 everywhere).
  PotentialLattice lat = uniform_lattice(3, 4);
  CHECK(viterbi(lat, 0.0, 0).tags == std::vector<int>{0, 0, 0});

  for (int trial = 0; trial < 40; ++trial) {
    TagSet ts = one_class();
    PotentialLattice random =
        oracle::random_lattice(4, ts, trial % 2 == 0, 3000 + trial, true);
    oracle::EnumResult brute = oracle::enumerate_lattice(random, nullptr, 0);
    ViterbiResult vit = viterbi(random, 0.0, 0);
    CHECK(vit.tags == brute.viterbi_tags);
    CHECK(vit.score == brute.viterbi_score);
  }
}

TEST_CASE("o_bias decoding matches enumeration and is monotone") {
  TagSet ts = two_classes();
  for (int trial = 0; trial < 20; ++trial) {
    PotentialLattice lat = oracle::random_lattice(5, ts, true, 4000 + trial);
    long previous_o_count = 6;
    for (double bias : {0.0, 0.5, 1.0, 2.0, 4.0}) {
      ViterbiResult vit = viterbi(lat, bias, ts.o_index());
      oracle::EnumResult brute =
          oracle::enumerate_lattice(lat, nullptr, ts.o_index(), bias);
      CHECK(vit.tags == brute.viterbi_tags);
      long o_count = 0;
      for (int t : vit.tags)
        if (t == ts.o_index()) ++o_count;
      CHECK(o_count <= previous_o_count);
      previous_o_count = o_count;
    }
  }
}

TEST_CASE("shift invariance of normalized quantities") {
  TagSet ts = two_classes();
  PotentialLattice lat = oracle::random_lattice(4, ts, true, 77);
  Matrix m0 = tag_marginals(lat);
  double e0 = expected_entity_count(lat, 0);
  double lz0 = log_partition(lat);

  PotentialLattice shifted = lat;
  for (int t = 0; t < ts.size(); ++t) shifted.unary(2, t) += 3.7;
  Matrix m1 = tag_marginals(shifted);
  CHECK(log_partition(shifted) == doctest::Approx(lz0 + 3.7).epsilon(1e-9));
  for (std::size_t i = 0; i < m0.data.size(); ++i)
    CHECK(m1.data[i] == doctest::Approx(m0.data[i]).epsilon(1e-9));
  CHECK(expected_entity_count(shifted, 0) == doctest::Approx(e0).epsilon(1e-9));
}

TEST_CASE("log partition gradients are the marginals, exactly") {
  TagSet ts = two_classes();
  PotentialLattice lat = oracle::random_lattice(5, ts, true, 123);
  FbTables fb = forward_backward(lat);
  LatticeGradients grads = backward_adjoints(lat, LatticeScalar::log_partition, 1.0);
  CHECK(grads.d_unary == tag_marginals(lat, fb));
  CHECK(grads.d_transition == pairwise_marginal_sums(lat, fb));
}

TEST_CASE("dp gradients match central finite differences") {
  auto check_gradients = [](const PotentialLattice& lat, LatticeScalar scalar,
                            const ObservedTags* obs) {
    auto value = [&](const PotentialLattice& l) {
      switch (scalar) {
        case LatticeScalar::log_partition: return log_partition(l);
        case LatticeScalar::constrained_log_partition:
          return constrained_log_partition(l, *obs);
        case LatticeScalar::expected_entity_count:
          return expected_entity_count(l, 0);
      }
      return 0.0;
    };
    LatticeGradients grads = backward_adjoints(lat, scalar, 1.0, obs, 0);
    const double h = 1e-5;
    auto check_entry = [&](double analytic, double* slot) {
      double saved = *slot;
      *slot = saved + h;
      double up = value(lat);
      *slot = saved - h;
      double down = value(lat);
      *slot = saved;
      double numeric = (up - down) / (2.0 * h);
      CHECK(std::abs(analytic - numeric) <=
            1e-4 * std::max({std::abs(analytic), std::abs(numeric), 0.01}));
    };
    PotentialLattice& mutable_lat = const_cast<PotentialLattice&>(lat);
    for (int i = 0; i < lat.length; ++i)
      for (int t = 0; t < lat.num_tags; ++t)
        check_entry(grads.d_unary(i, t), &mutable_lat.unary(i, t));
    for (int a = 0; a < lat.num_tags; ++a)
      for (int b = 0; b < lat.num_tags; ++b) {
        if (!lat.mask.transition(a, b)) {
          CHECK(grads.d_transition(a, b) == 0.0);
          continue;
        }
        check_entry(grads.d_transition(a, b), &mutable_lat.transition(a, b));
      }
  };

  TagSet ts = one_class();
  for (int trial = 0; trial < 6; ++trial) {
    PotentialLattice lat = oracle::random_lattice(4, ts, trial % 2 == 0, 500 + trial);
    check_gradients(lat, LatticeScalar::log_partition, nullptr);
    check_gradients(lat, LatticeScalar::expected_entity_count, nullptr);
    ObservedTags obs = oracle::random_observations(lat, 600 + trial, 2);
    check_gradients(lat, LatticeScalar::constrained_log_partition, &obs);
  }
}

TEST_CASE("masked entries receive zero gradient") {
  TagSet ts = two_classes();
  PotentialLattice lat = oracle::random_lattice(4, ts, true, 321);
  for (LatticeScalar scalar :
       {LatticeScalar::log_partition, LatticeScalar::expected_entity_count}) {
    LatticeGradients grads = backward_adjoints(lat, scalar, 1.0, nullptr, 0);
    for (int a = 0; a < ts.size(); ++a)
      for (int b = 0; b < ts.size(); ++b)
        if (!lat.mask.transition(a, b)) CHECK(grads.d_transition(a, b) == 0.0);
  }
}
