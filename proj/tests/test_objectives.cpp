#include <cmath>

#include <doctest.h>

#include "eertag/error.hpp"
#include "eertag/objectives.hpp"
#include "eertag/rng.hpp"
#include "lattice_oracle.hpp"

using namespace eertag;

namespace {

TagSet one_class() { return TagSet({"PER"}); }

PotentialLattice uniform_lattice(int n, int num_tags) {
  return PotentialLattice::make(Matrix(n, num_tags, 0.0),
                                Matrix(num_tags, num_tags, 0.0),
                                TransitionMask::open(num_tags));
}

}  // namespace

TEST_CASE("marginal tag loss is zero with no observations") {
  std::vector<PotentialLattice> lattices;
  lattices.push_back(oracle::random_lattice(4, one_class(), true, 1));
  lattices.push_back(oracle::random_lattice(3, one_class(), true, 2));
  std::vector<ObservedTags> observations(2);
  LossResult result = marginal_tag_loss(lattices, observations);
  CHECK(result.value == 0.0);
  for (const auto& adj : result.adjoints)
    for (double x : adj.d_unary.data) CHECK(x == 0.0);
}

TEST_CASE("fully observed sentence gives the standard NLL") {
  TagSet ts = one_class();
  PotentialLattice lat = oracle::random_lattice(4, ts, true, 3);
  std::vector<int> path = {ts.index_of("B-PER"), ts.index_of("I-PER"),
                           ts.index_of("L-PER"), ts.index_of("O")};
  ObservedTags full;
  for (int i = 0; i < 4; ++i) full.observe(i + 1, path[i]);

  double score = lat.unary(0, path[0]);
  for (int i = 1; i < 4; ++i)
    score += lat.transition(path[i - 1], path[i]) + lat.unary(i, path[i]);
  double nll = log_partition(lat) - score;

  LossResult result = marginal_tag_loss({lat}, {full});
  CHECK(result.value == doctest::Approx(nll).epsilon(1e-10));
}

TEST_CASE("marginal tag loss equals the enumerated constraint probability") {
  TagSet ts = one_class();
  for (int trial = 0; trial < 20; ++trial) {
    PotentialLattice lat = oracle::random_lattice(4, ts, true, 100 + trial);
    ObservedTags obs = oracle::random_observations(lat, 200 + trial, 2);
    oracle::EnumResult all = oracle::enumerate_lattice(lat, nullptr, 0);
    oracle::EnumResult satisfying = oracle::enumerate_lattice(lat, &obs, 0);
    if (satisfying.valid_paths == 0) continue;
    double probability = std::exp(satisfying.log_z - all.log_z);
    LossResult result = marginal_tag_loss({lat}, {obs});
    CHECK(std::abs(result.value - (-std::log(probability))) < 1e-10);
    CHECK(result.value >= -1e-12);  // constrained mass <= total mass
  }
}

TEST_CASE("unsatisfiable observation names the sentence") {
  TagSet ts = one_class();
  PotentialLattice lat = oracle::random_lattice(3, ts, true, 9);
  ObservedTags bad;
  bad.observe(1, ts.index_of("O"));
  bad.observe(2, ts.index_of("L-PER"));
  std::vector<PotentialLattice> lattices = {lat, lat};
  std::vector<ObservedTags> observations = {ObservedTags{}, bad};
  try {
    marginal_tag_loss(lattices, observations);
    FAIL("expected unsatisfiable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unsatisfiable);
    CHECK(std::string(e.what()).find("sentence 1") != std::string::npos);
  }
}

TEST_CASE("batch entity ratio on uniform and forced lattices") {
  // Uniform 5-tag lattices: p(O) = 1/5 at every position.
  std::vector<PotentialLattice> lattices;
  lattices.push_back(uniform_lattice(4, 5));
  lattices.push_back(uniform_lattice(2, 5));
  CHECK(batch_entity_ratio(lattices, 0) == doctest::Approx(0.8).epsilon(1e-12));

  // Pin every position to O.
  PotentialLattice forced = uniform_lattice(3, 5);
  for (int i = 0; i < 3; ++i)
    for (int t = 1; t < 5; ++t) forced.unary(i, t) = kLogZero;
  CHECK(batch_entity_ratio({forced}, 0) == doctest::Approx(0.0));

  // Enumeration oracle on a random batch.
  TagSet ts = one_class();
  std::vector<PotentialLattice> batch;
  double expected = 0.0;
  long tokens = 0;
  for (int k = 0; k < 3; ++k) {
    batch.push_back(oracle::random_lattice(3 + k, ts, true, 50 + k));
    oracle::EnumResult brute = oracle::enumerate_lattice(batch.back(), nullptr, 0);
    expected += brute.expected_entities;
    tokens += 3 + k;
  }
  CHECK(batch_entity_ratio(batch, 0) ==
        doctest::Approx(expected / tokens).epsilon(1e-9));
}

TEST_CASE("eer loss hinge values") {
  std::vector<PotentialLattice> lattices = {uniform_lattice(4, 5)};
  // rho_hat = 0.8 for the uniform 5-tag lattice.
  EerLossConfig config;
  config.rho = 0.15;
  config.gamma = 0.05;
  LossResult active = eer_loss(lattices, config, 0);
  CHECK(active.value == doctest::Approx(0.8 - 0.15 - 0.05).epsilon(1e-12));

  config.rho = 0.78;
  config.gamma = 0.05;  // 0.8 inside [0.73, 0.83]
  LossResult inside = eer_loss(lattices, config, 0);
  CHECK(inside.value == 0.0);
  for (double x : inside.adjoints[0].d_unary.data) CHECK(x == 0.0);

  config.rho = 0.8;
  config.gamma = 0.0;  // exactly at the target
  LossResult at_target = eer_loss(lattices, config, 0);
  CHECK(at_target.value == 0.0);
  for (double x : at_target.adjoints[0].d_unary.data) CHECK(x == 0.0);
}

TEST_CASE("hinge cases from the loss definition") {
  // rho=0.15, gamma=0.05: rho_hat 0.18 is inside, 0.30 costs 0.10.
  EerLossConfig config;
  CHECK(std::max(0.0, std::abs(0.15 - 0.18) - 0.05) == 0.0);
  CHECK(std::max(0.0, std::abs(0.15 - 0.30) - 0.05) == doctest::Approx(0.10));
}

TEST_CASE("combined loss composes and reports") {
  TagSet ts = one_class();
  std::vector<PotentialLattice> lattices;
  std::vector<ObservedTags> observations;
  for (int k = 0; k < 3; ++k) {
    lattices.push_back(oracle::random_lattice(4, ts, true, 300 + k));
    observations.push_back(oracle::random_observations(lattices.back(), 400 + k, 2));
  }
  EerLossConfig config;
  config.rho = 0.1;
  config.gamma = 0.02;
  config.lambda_u = 10.0;

  CombinedLossResult combined = combined_loss(lattices, observations, config, 0);
  LossResult lp = marginal_tag_loss(lattices, observations);
  LossResult lu = eer_loss(lattices, config, 0);
  CHECK(combined.report.loss_p == doctest::Approx(lp.value).epsilon(1e-12));
  CHECK(combined.report.loss_u == doctest::Approx(lu.value).epsilon(1e-12));
  CHECK(std::abs(combined.report.loss -
                 (combined.report.loss_p + config.lambda_u * combined.report.loss_u)) <
        1e-12);
  CHECK(combined.report.token_count == 12);
  CHECK(combined.report.rho_hat ==
        doctest::Approx(batch_entity_ratio(lattices, 0)).epsilon(1e-12));

  // Adjoints are the lambda-weighted sum of the parts.
  for (std::size_t k = 0; k < lattices.size(); ++k) {
    for (std::size_t i = 0; i < combined.adjoints[k].d_unary.data.size(); ++i) {
      double expected = lp.adjoints[k].d_unary.data[i] +
                        config.lambda_u * lu.adjoints[k].d_unary.data[i];
      CHECK(combined.adjoints[k].d_unary.data[i] ==
            doctest::Approx(expected).epsilon(1e-9));
    }
  }

  // lambda_u = 0 reduces to the marginal tag loss.
  config.lambda_u = 0.0;
  CombinedLossResult plain = combined_loss(lattices, observations, config, 0);
  CHECK(plain.report.loss == doctest::Approx(lp.value).epsilon(1e-12));
  for (std::size_t k = 0; k < lattices.size(); ++k)
    CHECK(plain.adjoints[k].d_unary == lp.adjoints[k].d_unary);

  // Empty observations: L = lambda_u * L_u exactly.
  config.lambda_u = 10.0;
  std::vector<ObservedTags> empty(lattices.size());
  CombinedLossResult unsupervised = combined_loss(lattices, empty, config, 0);
  CHECK(unsupervised.report.loss_p == 0.0);
  CHECK(unsupervised.report.loss ==
        doctest::Approx(config.lambda_u * unsupervised.report.loss_u).epsilon(1e-12));
}

TEST_CASE("token-weighted batch rho_hat recomposes the corpus ratio") {
  TagSet ts = one_class();
  std::vector<PotentialLattice> all;
  for (int k = 0; k < 6; ++k)
    all.push_back(oracle::random_lattice(2 + k % 4, ts, true, 700 + k));

  double corpus = batch_entity_ratio(all, 0);
  // Split into two batches and recombine weighted by token count.
  std::vector<PotentialLattice> batch1(all.begin(), all.begin() + 2);
  std::vector<PotentialLattice> batch2(all.begin() + 2, all.end());
  auto tokens = [](const std::vector<PotentialLattice>& v) {
    long n = 0;
    for (const auto& lat : v) n += lat.length;
    return static_cast<double>(n);
  };
  double recombined = (batch_entity_ratio(batch1, 0) * tokens(batch1) +
                       batch_entity_ratio(batch2, 0) * tokens(batch2)) /
                      (tokens(batch1) + tokens(batch2));
  CHECK(std::abs(recombined - corpus) < 1e-12);
}
