#include "eertag/objectives.hpp"

#include <cmath>
#include <string>

#include "eertag/error.hpp"

namespace eertag {

void EerLossConfig::validate() const {
  if (rho < 0.0 || rho > 1.0) fail(ErrorCode::invalid_argument, "rho must be in [0,1]");
  if (gamma < 0.0) fail(ErrorCode::invalid_argument, "gamma must be >= 0");
  if (lambda_u < 0.0) fail(ErrorCode::invalid_argument, "lambda_u must be >= 0");
}

namespace {

void check_batch(const std::vector<PotentialLattice>& lattices) {
  if (lattices.empty()) fail(ErrorCode::invalid_argument, "empty batch");
}

}  // namespace

LossResult marginal_tag_loss(const std::vector<PotentialLattice>& lattices,
                             const std::vector<ObservedTags>& observations) {
  check_batch(lattices);
  if (lattices.size() != observations.size())
    fail(ErrorCode::shape_mismatch, "one observation set per lattice required");

  const double inv_m = 1.0 / static_cast<double>(lattices.size());
  LossResult result;
  result.adjoints.reserve(lattices.size());
  double total = 0.0;
  for (std::size_t k = 0; k < lattices.size(); ++k) {
    const PotentialLattice& lat = lattices[k];
    LatticeGradients adj;
    adj.d_unary = Matrix(lat.length, lat.num_tags, 0.0);
    adj.d_transition = Matrix(lat.num_tags, lat.num_tags, 0.0);
    if (observations[k].empty()) {
      // Every tagging satisfies an empty observation set: loss term is 0.
      result.adjoints.push_back(std::move(adj));
      continue;
    }
    FbTables fb = forward_backward(lat);
    PotentialLattice restricted = apply_observations(lat, observations[k]);
    FbTables fbc;
    try {
      fbc = forward_backward(restricted);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::no_valid_path) throw;
      try {
        constrained_log_partition(lat, observations[k]);
      } catch (const Error& named) {
        fail(ErrorCode::unsatisfiable,
             "sentence " + std::to_string(k) + ": " + named.what());
      }
      throw;
    }
    total += fb.log_z - fbc.log_z;
    Matrix m = tag_marginals(lat, fb);
    Matrix mc = tag_marginals(restricted, fbc);
    Matrix pw = pairwise_marginal_sums(lat, fb);
    Matrix pwc = pairwise_marginal_sums(restricted, fbc);
    for (std::size_t i = 0; i < m.data.size(); ++i)
      adj.d_unary.data[i] = inv_m * (m.data[i] - mc.data[i]);
    for (std::size_t i = 0; i < pw.data.size(); ++i)
      adj.d_transition.data[i] = inv_m * (pw.data[i] - pwc.data[i]);
    result.adjoints.push_back(std::move(adj));
  }
  result.value = total * inv_m;
  return result;
}

double batch_entity_ratio(const std::vector<PotentialLattice>& lattices,
                          int o_index) {
  check_batch(lattices);
  double expected = 0.0;
  long tokens = 0;
  for (const auto& lat : lattices) {
    expected += expected_entity_count(lat, o_index);
    tokens += lat.length;
  }
  return expected / static_cast<double>(tokens);
}

LossResult eer_loss(const std::vector<PotentialLattice>& lattices,
                    const EerLossConfig& config, int o_index) {
  check_batch(lattices);
  config.validate();

  long tokens = 0;
  for (const auto& lat : lattices) tokens += lat.length;
  double rho_hat = batch_entity_ratio(lattices, o_index);

  LossResult result;
  double diff = rho_hat - config.rho;
  bool active = std::abs(diff) > config.gamma;
  result.value = active ? std::abs(diff) - config.gamma : 0.0;

  result.adjoints.reserve(lattices.size());
  for (const auto& lat : lattices) {
    if (!active) {
      LatticeGradients adj;
      adj.d_unary = Matrix(lat.length, lat.num_tags, 0.0);
      adj.d_transition = Matrix(lat.num_tags, lat.num_tags, 0.0);
      result.adjoints.push_back(std::move(adj));
      continue;
    }
    double scale = (diff > 0 ? 1.0 : -1.0) / static_cast<double>(tokens);
    LatticeGradients adj = backward_adjoints(
        lat, LatticeScalar::expected_entity_count, scale, nullptr, o_index);
    result.adjoints.push_back(std::move(adj));
  }
  return result;
}

CombinedLossResult combined_loss(const std::vector<PotentialLattice>& lattices,
                                 const std::vector<ObservedTags>& observations,
                                 const EerLossConfig& config, int o_index) {
  check_batch(lattices);
  config.validate();

  LossResult lp = marginal_tag_loss(lattices, observations);

  long tokens = 0;
  double expected = 0.0;
  for (const auto& lat : lattices) {
    tokens += lat.length;
    expected += expected_entity_count(lat, o_index);
  }
  double rho_hat = expected / static_cast<double>(tokens);

  CombinedLossResult result;
  result.adjoints = std::move(lp.adjoints);
  double lu = 0.0;
  double diff = rho_hat - config.rho;
  bool active = std::abs(diff) > config.gamma;
  if (active) {
    lu = std::abs(diff) - config.gamma;
    if (config.lambda_u > 0.0) {
      double scale =
          config.lambda_u * (diff > 0 ? 1.0 : -1.0) / static_cast<double>(tokens);
      for (std::size_t k = 0; k < lattices.size(); ++k) {
        LatticeGradients eer_adj =
            backward_adjoints(lattices[k], LatticeScalar::expected_entity_count,
                              scale, nullptr, o_index);
        result.adjoints[k].add_scaled(eer_adj, 1.0);
      }
    }
  }

  result.report.loss_p = lp.value;
  result.report.loss_u = lu;
  result.report.loss = lp.value + config.lambda_u * lu;
  result.report.rho_hat = rho_hat;
  result.report.token_count = tokens;
  result.report.expected_entities = expected;
  return result;
}

}  // namespace eertag
