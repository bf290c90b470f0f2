#pragma once

#include <span>
#include <utility>
#include <vector>

#include "bisimdist/automaton.hpp"
#include "bisimdist/transport.hpp"

namespace bisimdist {

/// Relation between two sets of distributions, as sorted (index in A, index in B) pairs.
using SetCoupling = std::vector<std::pair<int, int>>;

/// True when both projections of R cover all of A and B.
bool is_set_coupling(const SetCoupling& r, int size_a, int size_b);

/// K(d)(mu, nu) with a vertex optimal coupling.
template <typename Derived>
TransportResult kantorovich(const Eigen::MatrixBase<Derived>& d, const Dist& mu, const Dist& nu) {
  return min_cost_coupling(mu, nu, d);
}

/// Everything learnt while computing H(K(d))(A, B) through the phi/psi construction.
struct HausdorffEval {
  double value = 0.0;
  SetCoupling witness;               // h(d): phi pairs plus psi pairs
  Eigen::MatrixXd k;                 // K(d)(A[i], B[j])
  std::vector<Coupling> plans;       // row-major over (i, j)
  int tp_count = 0;

  const Coupling& plan(int i, int j) const { return plans[i * k.cols() + j]; }
};

/// H(K(d))(A, B); argmin ties go to the smallest index.
HausdorffEval hausdorff(const DistMatrix& d, std::span<const Dist> a, std::span<const Dist> b);

/// h(d)(s, t) for the automaton's transition sets.
SetCoupling build_h(const DistMatrix& d, const Automaton& a, int s, int t);

/// k(d)(mu, nu): the vertex optimal coupling chosen by the fixed pivot rule.
Coupling build_k(const DistMatrix& d, const Dist& mu, const Dist& nu);

/// Delta_lambda(d). Only s <= t is evaluated when d is symmetric.
DistMatrix delta_apply(double lambda, const DistMatrix& d, const Automaton& a,
                       long* tp_count = nullptr);

/// Delta_lambda(d)(s, t) for a single pair.
double delta_pair(double lambda, const DistMatrix& d, const Automaton& a, int s, int t,
                  long* tp_count = nullptr);

/// The diagonal coupling of mu with itself.
Coupling diagonal_coupling(const Dist& mu);

}  // namespace bisimdist
