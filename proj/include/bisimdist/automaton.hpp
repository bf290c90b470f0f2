#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace bisimdist {

/// Dense pairwise function S x S -> [0,1].
template <typename Scalar>
using DistMatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using DistMatrix = DistMatrixT<double>;

/// Relation on S x S as a boolean mask.
using Relation = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Finitely supported distribution over state indices, sorted by state.
struct Dist {
  std::vector<std::pair<int, double>> entries;

  static Dist dirac(int state) { return Dist{{{state, 1.0}}}; }

  std::size_t support_size() const { return entries.size(); }
  double mass() const;
  /// Probability of `state`, zero off the support.
  double operator()(int state) const;

  friend bool operator==(const Dist&, const Dist&) = default;
};

/// Labelled probabilistic automaton (S, L, ->, l) with dense state indices.
struct Automaton {
  std::vector<std::string> state_names;
  std::vector<std::string> label_names;
  std::vector<int> labels;                     // label id per state
  std::vector<std::vector<Dist>> transitions;  // delta(s), in file order

  int size() const { return static_cast<int>(state_names.size()); }
  const std::vector<Dist>& delta(int s) const { return transitions[s]; }
  bool same_label(int s, int t) const { return labels[s] == labels[t]; }
  int find_state(std::string_view name) const;  // -1 if absent
  int find_label(std::string_view name) const;  // -1 if absent
  /// 1 where labels differ, 0 elsewhere.
  DistMatrix label_mismatch() const;
};

struct GenParams {
  int n = 10;
  std::pair<int, int> nd_degree{1, 3};
  std::pair<int, int> prob_degree{2, 3};
  int label_count = 2;
  std::uint64_t seed = 0;
};

/// Parses the JSON automaton format; throws InputError on any defect.
Automaton parse_automaton(std::string_view text);
Automaton load_automaton(const std::string& path);

/// Canonical JSON form; probabilities written as round-trip decimals.
std::string serialize_automaton(const Automaton& a);

/// Every invariant violation, empty when `a` is well formed.
std::vector<std::string> validate(const Automaton& a);

/// Pseudo-random automaton, a pure function of `p` (mt19937_64 stream).
Automaton generate(const GenParams& p);

/// Parses "a..b" or "a" into an inclusive range.
std::pair<int, int> parse_range(std::string_view text);

/// Parses a probability given as "p/q" or a decimal string.
double parse_probability(std::string_view text);

}  // namespace bisimdist
