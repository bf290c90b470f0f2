#pragma once

#include <vector>

#include "bisimdist/automaton.hpp"

namespace bisimdist {

struct Partition {
  std::vector<int> block;                 // block id per state
  std::vector<std::vector<int>> members;  // states per block, ascending

  int count() const { return static_cast<int>(members.size()); }
  bool same(int s, int t) const { return block[s] == block[t]; }
  /// The equivalence relation of the partition.
  Relation relation() const;
};

/// Whether some coupling of mu and nu has support inside R.
bool lift_check(const Dist& mu, const Dist& nu, const Relation& r);

/// Probabilistic bisimilarity by iterated refinement of the label partition.
/// `block_counts`, when given, receives the block count after every sweep.
Partition bisimilarity(const Automaton& a, std::vector<int>* block_counts = nullptr);

/// Both transfer clauses plus label agreement, for every related pair.
bool is_bisimulation(const Relation& r, const Automaton& a);

}  // namespace bisimdist
