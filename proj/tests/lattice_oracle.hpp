#pragma once

// Exhaustive-enumeration oracle for lattice quantities. Written against the
// raw definitions (sum/max over all valid taggings), independent of the
// dynamic programs it checks. Test-only: cost is O(|Y|^n).

#include <vector>

#include "eertag/corpus.hpp"
#include "eertag/lattice.hpp"
#include "eertag/matrix.hpp"

namespace eertag::oracle {

struct EnumResult {
  double log_z = 0.0;
  Matrix marginals;              // n x Y
  Matrix pairwise_sums;          // Y x Y, summed over positions
  double expected_entities = 0.0;
  std::vector<int> viterbi_tags;
  double viterbi_score = 0.0;
  long valid_paths = 0;
};

// Enumerates every mask-valid tagging (optionally restricted to those
// satisfying `observed`), applying the o_bias subtraction to O unaries.
// valid_paths == 0 signals an empty path set instead of throwing.
EnumResult enumerate_lattice(const PotentialLattice& lattice,
                             const ObservedTags* observed, int o_index,
                             double o_bias = 0.0);

// Random lattice helpers shared by tests and the acceptance suite. Values
// are drawn uniform in [-2, 2] (or small integers when quantized, to force
// exact score ties).
PotentialLattice random_lattice(int length, const TagSet& tagset, bool masked,
                                std::uint64_t seed, bool quantized = false);

// A random observation set drawn from a random valid path, so constrained
// quantities stay satisfiable.
ObservedTags random_observations(const PotentialLattice& lattice,
                                 std::uint64_t seed, int max_observed);

}  // namespace eertag::oracle
