#pragma once

// Sparse MDP reachability shared by the discrepancy computation and the
// model checker. Internal to the library.

#include <utility>
#include <vector>

namespace bisimdist::detail {

/// CSR layout: state s owns actions [action_begin[s], action_begin[s+1]);
/// action a owns successor entries [entry_begin[a], entry_begin[a+1]).
struct SparseMdp {
  int num_states = 0;
  std::vector<int> action_begin{0};
  std::vector<int> entry_begin{0};
  std::vector<int> succ;
  std::vector<double> prob;
  std::vector<char> target;  // value fixed to 1

  int actions_of(int s) const { return action_begin[s + 1] - action_begin[s]; }

  // Builder: add_state once per state in index order, each followed by its actions.
  void add_state(bool is_target);
  void add_action(const std::vector<std::pair<int, double>>& dist);
};

enum class Objective { Max, Min };
enum class ReachMethod { PolicyIteration, ValueIteration };

struct ReachOptions {
  Objective objective = Objective::Max;
  double discount = 1.0;  // each step is scaled by this factor
  ReachMethod method = ReachMethod::PolicyIteration;
  double tolerance = 1e-12;  // VI stopping threshold on the sweep change
  long max_sweeps = 1000000;
};

struct ReachResult {
  std::vector<double> value;
  std::vector<int> policy;  // chosen action offset per state, -1 where undefined
  long iterations = 0;
};

/// States from which no target is reachable under any (Max) or some (Min) choice.
std::vector<char> prob0_states(const SparseMdp& mdp, Objective objective);

/// Optimal discounted probability of reaching a target state.
/// States with no actions that are not targets are 0-sinks.
ReachResult solve_reachability(const SparseMdp& mdp, const ReachOptions& opts);

}  // namespace bisimdist::detail
