#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "bisimdist/automaton.hpp"

namespace bisimdist {

struct CouplingEntry {
  int from;
  int to;
  double mass;
  friend bool operator==(const CouplingEntry&, const CouplingEntry&) = default;
};

/// Measure-coupling omega in Omega(left, right), stored sparse over its support.
struct Coupling {
  std::vector<CouplingEntry> entries;  // sorted by (from, to), masses > 0
  Dist left;
  Dist right;

  std::size_t support_size() const { return entries.size(); }
  Coupling transposed() const;
};

/// Optimal value and the vertex coupling that attains it.
struct TransportResult {
  double value = 0.0;
  Coupling plan;
};

namespace detail {

/// Transportation simplex on local indices. `cost` is supply.size() x demand.size().
/// Returns the optimal value and positive basic cells as (row, col, mass).
struct LocalPlan {
  double value = 0.0;
  std::vector<CouplingEntry> cells;
};
LocalPlan transportation_simplex(std::span<const double> supply, std::span<const double> demand,
                                 const Eigen::MatrixXd& cost);

struct LocalFlow {
  double flow = 0.0;
  double cost = 0.0;
};
/// Successive-shortest-path min-cost max-flow restricted to `allowed` cells.
LocalFlow restricted_flow(std::span<const double> supply, std::span<const double> demand,
                          const Eigen::MatrixXd& cost,
                          const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& allowed);

std::vector<double> weights(const Dist& d);

template <typename Derived>
Eigen::MatrixXd gather_cost(const Dist& mu, const Dist& nu, const Eigen::MatrixBase<Derived>& cost) {
  Eigen::MatrixXd local(mu.entries.size(), nu.entries.size());
  for (std::size_t i = 0; i < mu.entries.size(); ++i)
    for (std::size_t j = 0; j < nu.entries.size(); ++j)
      local(i, j) = cost(mu.entries[i].first, nu.entries[j].first);
  return local;
}

Coupling globalize(const Dist& mu, const Dist& nu, const std::vector<CouplingEntry>& cells);

}  // namespace detail

/// Exact Kantorovich-style minimum over Omega(mu, nu). The plan is a basic
/// feasible solution (support <= |supp mu| + |supp nu| - 1) and its cost,
/// summed in entry order, is exactly `value`.
template <typename Derived>
TransportResult min_cost_coupling(const Dist& mu, const Dist& nu,
                                  const Eigen::MatrixBase<Derived>& cost) {
  const auto a = detail::weights(mu);
  const auto b = detail::weights(nu);
  auto local = detail::transportation_simplex(a, b, detail::gather_cost(mu, nu, cost));
  return TransportResult{local.value, detail::globalize(mu, nu, local.cells)};
}

/// Minimum over couplings with support inside `allowed`; nullopt when no
/// such coupling exists (max flow below 1 - 1e-12).
template <typename Derived>
std::optional<double> restricted_min(const Dist& mu, const Dist& nu,
                                     const Eigen::MatrixBase<Derived>& cost,
                                     const Relation& allowed) {
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> mask(mu.entries.size(), nu.entries.size());
  for (std::size_t i = 0; i < mu.entries.size(); ++i)
    for (std::size_t j = 0; j < nu.entries.size(); ++j)
      mask(i, j) = allowed(mu.entries[i].first, nu.entries[j].first);
  const auto a = detail::weights(mu);
  const auto b = detail::weights(nu);
  auto res = detail::restricted_flow(a, b, detail::gather_cost(mu, nu, cost), mask);
  if (res.flow < 1.0 - 1e-12) return std::nullopt;
  return res.cost;
}

/// Largest mass transportable from mu to nu using only `allowed` pairs.
double max_flow(const Dist& mu, const Dist& nu, const Relation& allowed);

/// North-West-corner basic feasible solution.
Coupling north_west_corner(const Dist& mu, const Dist& nu);

/// Extreme points of Omega(mu, nu), from spanning trees of the support graph.
/// Throws InputError when |supp mu| * |supp nu| > 16.
std::vector<Coupling> enumerate_vertices(const Dist& mu, const Dist& nu);

/// Marginal, sign and total-mass check within `tol`.
bool is_coupling_of(const Coupling& omega, const Dist& mu, const Dist& nu, double tol = 1e-9);

template <typename Derived>
double coupling_cost(const Coupling& omega, const Eigen::MatrixBase<Derived>& cost) {
  double v = 0.0;
  for (const auto& e : omega.entries) v += cost(e.from, e.to) * e.mass;
  return v;
}

}  // namespace bisimdist
