#pragma once

#include <vector>

#include "eertag/corpus.hpp"
#include "eertag/lattice.hpp"

namespace eertag {

// Expected-entity-ratio loss settings: target ratio rho, margin gamma and
// the weight lambda_u balancing it against the marginal tag loss.
struct EerLossConfig {
  double rho = 0.15;
  double gamma = 0.05;
  double lambda_u = 10.0;

  void validate() const;
  friend bool operator==(const EerLossConfig&, const EerLossConfig&) = default;
};

struct BatchLossReport {
  double loss_p = 0.0;
  double loss_u = 0.0;
  double loss = 0.0;
  double rho_hat = 0.0;
  long token_count = 0;
  double expected_entities = 0.0;  // numerator of rho_hat
};

struct LossResult {
  double value = 0.0;
  std::vector<LatticeGradients> adjoints;  // one per sentence
};

struct CombinedLossResult {
  BatchLossReport report;
  std::vector<LatticeGradients> adjoints;
};

// Mean over sentences of -(log Z_constrained - log Z): the negative marginal
// log-likelihood of the observed tags. Adjoints are (unconstrained -
// constrained) marginals scaled by 1/m. Sentences with no observations
// contribute exactly zero.
LossResult marginal_tag_loss(const std::vector<PotentialLattice>& lattices,
                             const std::vector<ObservedTags>& observations);

// Batch expected entity ratio: sum of expected entity counts over the sum of
// sentence lengths.
double batch_entity_ratio(const std::vector<PotentialLattice>& lattices,
                          int o_index);

// Hinge max{0, |rho - rho_hat| - gamma}. On the closed margin interval the
// loss is flat and the subgradient is zero, including at the boundary.
LossResult eer_loss(const std::vector<PotentialLattice>& lattices,
                    const EerLossConfig& config, int o_index);

// L = L_p + lambda_u * L_u with summed adjoints.
CombinedLossResult combined_loss(const std::vector<PotentialLattice>& lattices,
                                 const std::vector<ObservedTags>& observations,
                                 const EerLossConfig& config, int o_index);

}  // namespace eertag
