#pragma once

#include <string>
#include <vector>

#include "bisimdist/automaton.hpp"

namespace bisimdist {

enum class ReachMode { Max, Min };

/// "Eventually a state whose label is in target", optimised over schedulers.
struct ReachQuery {
  std::vector<int> target;  // label ids
  ReachMode mode = ReachMode::Max;
};

/// Resolves comma-separated label names; throws InputError("unknown label ...").
std::vector<int> parse_target(const Automaton& a, const std::string& labels);

/// Optimal reachability probability per state; target states get exactly 1.
std::vector<double> reach_prob(const Automaton& a, const ReachQuery& q);

struct BoundPair {
  int s = -1;
  int t = -1;
  double gap = 0.0;    // |P_s - P_t|
  double bound = 0.0;  // d1(s, t)
};

struct BoundReport {
  std::vector<BoundPair> violations;  // gap > bound + eps
  BoundPair tightest;                 // same-label pair with gap > eps and least slack; s = -1 if none
};

/// Checks |P_s - P_t| <= d1(s,t) + eps over all pairs.
BoundReport check_bound(const Automaton& a, const DistMatrix& d1, const ReachQuery& q, double eps);

}  // namespace bisimdist
