#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "bisimdist/automaton.hpp"
#include "bisimdist/lifting.hpp"

namespace bisimdist {

enum class VertexKind { Zero, One, Max, Min, Random };

/// Explicit simple stochastic game. For random vertices prob[v] is aligned with succ[v].
struct Game {
  std::vector<VertexKind> kind;
  std::vector<std::string> name;
  std::vector<std::vector<int>> succ;
  std::vector<std::vector<double>> prob;
  std::map<std::pair<int, int>, int> pair_vertex;  // state pair -> vertex
  int bottom = -1;

  int size() const { return static_cast<int>(kind.size()); }
  int vertex(int s, int t) const { return pair_vertex.at({s, t}); }
};

/// Structural checks: sink outdegree, edge/P agreement, P rows summing to 1.
std::vector<std::string> check_game(const Game& g);

/// The probabilistic bisimilarity game. Guarded to |S| <= 5, |delta(s)| <= 3, supports <= 3.
Game build_game(const Automaton& a, double lambda);

/// One application of Phi.
std::vector<double> phi_apply(const Game& g, const std::vector<double>& f);

/// Least fixed point of Phi, iterating from zero until the step change is at most eps.
std::vector<double> ssg_value(const Game& g, double eps);

/// All relations in A x B with full projections (|A|, |B| <= 3).
std::vector<SetCoupling> enumerate_setcouplings(int size_a, int size_b);

/// Chosen successor per min/max vertex (-1 elsewhere).
struct Strategy {
  std::vector<int> choice;
};

/// Probability of reaching any sink from each vertex in the chain fixed by the strategies.
std::vector<double> sink_reach_probability(const Game& g, const Strategy& smin, const Strategy& smax);

/// Structured-text dump: vertex list, edges and P rows.
std::string serialize_game(const Game& g);

}  // namespace bisimdist
