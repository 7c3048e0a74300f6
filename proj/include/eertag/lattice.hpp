#pragma once

#include <cstdint>
#include <vector>

#include "eertag/corpus.hpp"
#include "eertag/matrix.hpp"

namespace eertag {

// Sentinel for impossible configurations. All dynamic programs run in log
// space; entries at or below kLogZeroGuard are treated as "no mass". The
// sentinel is finite so sums of a few such terms stay representable, and
// every accumulation step collapses results below the guard back to
// kLogZero.
constexpr double kLogZero = -1.0e30;
constexpr double kLogZeroGuard = -1.0e29;

inline bool is_impossible(double log_value) { return log_value <= kLogZeroGuard; }

// BILUO transition grammar over a TagSet, plus the start/end constraints
// that stand in for the always-O sentence book-ends: a sentence may start
// with whatever O may transition into, and end with whatever may transition
// into O.
struct TransitionMask {
  int num_tags = 0;
  std::vector<std::uint8_t> allowed;        // num_tags * num_tags, row = from
  std::vector<std::uint8_t> start_allowed;  // num_tags
  std::vector<std::uint8_t> end_allowed;    // num_tags

  bool transition(int from, int to) const {
    return allowed[static_cast<std::size_t>(from) * num_tags + to] != 0;
  }

  static TransitionMask biluo(const TagSet& tagset);
  // Everything permitted; used by tests on unconstrained lattices.
  static TransitionMask open(int num_tags);
};

// Per-sentence potentials: unary scores phi(i, y) and shared transition
// scores T, with masked transition entries pinned to kLogZero.
struct PotentialLattice {
  int length = 0;
  int num_tags = 0;
  Matrix unary;       // length x num_tags
  Matrix transition;  // num_tags x num_tags, kLogZero where masked
  TransitionMask mask;

  static PotentialLattice make(Matrix unary, const Matrix& transition,
                               TransitionMask mask);
};

struct LatticeGradients {
  Matrix d_unary;
  Matrix d_transition;

  void add_scaled(const LatticeGradients& other, double scale);
};

enum class LatticeScalar {
  log_partition,
  constrained_log_partition,
  expected_entity_count,
};

struct ViterbiResult {
  std::vector<int> tags;
  double score = 0.0;
};

// Forward/backward tables in log space, shared by the marginal and gradient
// routines.
struct FbTables {
  Matrix alpha;  // length x num_tags
  Matrix beta;   // length x num_tags
  double log_z = 0.0;
};

FbTables forward_backward(const PotentialLattice& lattice);

double log_partition(const PotentialLattice& lattice);

// p(y_i = y | x); rows sum to 1, zero at unreachable tags.
Matrix tag_marginals(const PotentialLattice& lattice);
Matrix tag_marginals(const PotentialLattice& lattice, const FbTables& fb);

// Sum over positions of the pairwise marginals p(y_i = y, y_{i+1} = y').
Matrix pairwise_marginal_sums(const PotentialLattice& lattice,
                              const FbTables& fb);
// Pairwise marginals at one position i (between i and i+1).
Matrix pairwise_marginals_at(const PotentialLattice& lattice,
                             const FbTables& fb, int position);

// Lattice with unary rows at observed positions restricted to the observed
// tag. Throws ErrorCode::invalid_argument for out-of-range observations.
PotentialLattice apply_observations(const PotentialLattice& lattice,
                                    const ObservedTags& observed);

// log sum over taggings satisfying the observations. Throws
// ErrorCode::unsatisfiable naming the earliest dead position when the
// observations admit no valid path.
double constrained_log_partition(const PotentialLattice& lattice,
                                 const ObservedTags& observed);

// E[ #positions with tag != O ] = sum_i (1 - p(y_i = O | x)).
double expected_entity_count(const PotentialLattice& lattice, int o_index);
double expected_entity_count(const Matrix& marginals, int o_index);

// Max-scoring valid sequence after subtracting o_bias from the O unary
// scores. Ties resolve to the lowest tag index, applied from the last
// position backwards. Output is always grammatical under the mask.
ViterbiResult viterbi(const PotentialLattice& lattice, double o_bias,
                      int o_index);

// Gradients of one DP scalar with respect to the potentials, scaled by
// `upstream`. For the two partition functions this is the closed form
// (tag marginals / summed pairwise marginals); for the expected entity
// count it is reverse-mode accumulation through forward-backward. Masked
// entries always receive zero.
LatticeGradients backward_adjoints(const PotentialLattice& lattice,
                                   LatticeScalar scalar, double upstream,
                                   const ObservedTags* observed = nullptr,
                                   int o_index = -1);

// Reverse-mode through forward-backward for any scalar with the given
// adjoints on the tag marginals and on log Z.
LatticeGradients backprop_forward_backward(const PotentialLattice& lattice,
                                           const FbTables& fb,
                                           const Matrix& marginal_adjoint,
                                           double log_z_adjoint);

}  // namespace eertag
