#pragma once

// Fixtures, random generators and brute-force oracles shared by the tests.
// The oracles avoid the library's solvers on purpose.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "bisimdist/automaton.hpp"

namespace testing_support {

using bisimdist::Automaton;
using bisimdist::Dist;
using bisimdist::DistMatrix;

inline std::string fixture(const std::string& name) { return std::string(FIXTURE_DIR) + "/" + name; }
inline Automaton gamblers() { return bisimdist::load_automaton(fixture("gamblers.json")); }
inline Automaton coin() { return bisimdist::load_automaton(fixture("coin.json")); }

// Instance where the undiscounted inner loop stops at a non-least fixed point twice.
inline Automaton three_outer_loops() {
  bisimdist::GenParams p;
  p.n = 3;
  p.nd_degree = {1, 2};
  p.prob_degree = {1, 2};
  p.seed = 140;
  return bisimdist::generate(p);
}

inline Dist random_dist(std::mt19937_64& rng, int universe, int support) {
  std::vector<int> states(universe);
  for (int i = 0; i < universe; ++i) states[i] = i;
  std::shuffle(states.begin(), states.end(), rng);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Dist d;
  double total = 0;
  for (int i = 0; i < support; ++i) {
    double w = u(rng);
    d.entries.emplace_back(states[i], w);
    total += w;
  }
  for (auto& e : d.entries) e.second /= total;
  std::sort(d.entries.begin(), d.entries.end());
  return d;
}

// Symmetric, zero diagonal, entries in [0,1].
inline DistMatrix random_metric_like(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DistMatrix d = DistMatrix::Zero(n, n);
  for (int s = 0; s < n; ++s)
    for (int t = s + 1; t < n; ++t) d(s, t) = d(t, s) = u(rng);
  return d;
}

inline Automaton random_automaton(std::uint64_t seed, int n_lo, int n_hi, std::pair<int, int> k = {1, 3},
                                  std::pair<int, int> p = {1, 3}, int labels = 2) {
  std::mt19937_64 rng(seed * 7919 + 17);
  bisimdist::GenParams gp;
  gp.n = std::uniform_int_distribution<int>(n_lo, n_hi)(rng);
  gp.nd_degree = k;
  gp.prob_degree = {p.first, std::min(p.second, gp.n)};
  gp.prob_degree.first = std::min(gp.prob_degree.first, gp.prob_degree.second);
  gp.label_count = labels;
  gp.seed = seed;
  return bisimdist::generate(gp);
}

// ---------------------------------------------------------------------------
// Transportation polytope vertices by breadth-first search over feasible bases.
// Cells are row-major bits of a uint64 mask, so m * n <= 64.

struct PolytopeVertex {
  std::uint64_t support = 0;
  std::vector<double> x;  // dense m * n
};

namespace detail {

// A spanning tree on rows 0..m-1 and columns m..m+n-1, rooted at row 0.
struct BasisTree {
  int nodes = 0;
  std::vector<int> parent, depth, cell;  // cell: basis cell joining a node to its parent

  bool build(std::uint64_t basis, int m, int n) {
    nodes = m + n;
    parent.assign(nodes, -2);
    depth.assign(nodes, 0);
    cell.assign(nodes, -1);
    int stack[64], top = 0, seen = 1;
    stack[top++] = 0;
    parent[0] = -1;
    while (top) {
      const int u = stack[--top];
      for (int k = 0; k < (u < m ? n : m); ++k) {
        const int w = u < m ? m + k : k;
        const int c = u < m ? u * n + k : k * n + (u - m);
        if (!(basis >> c & 1) || parent[w] != -2) continue;
        parent[w] = u;
        depth[w] = depth[u] + 1;
        cell[w] = c;
        stack[top++] = w;
        ++seen;
      }
    }
    return seen == nodes;
  }
};

// Unique solution on a spanning-tree basis, by peeling leaves.
inline std::optional<std::vector<double>> tree_solution(std::uint64_t basis, const std::vector<double>& a,
                                                        const std::vector<double>& b) {
  const int m = static_cast<int>(a.size()), n = static_cast<int>(b.size());
  if (std::popcount(basis) != m + n - 1) return std::nullopt;
  std::vector<double> rest(a), x(m * n, 0.0);
  rest.insert(rest.end(), b.begin(), b.end());
  std::vector<int> degree(m + n, 0);
  for (int c = 0; c < m * n; ++c)
    if (basis >> c & 1) ++degree[c / n], ++degree[m + c % n];
  std::vector<int> leaves;
  for (int v = 0; v < m + n; ++v)
    if (degree[v] == 1) leaves.push_back(v);
  std::uint64_t left = basis;
  int done = 0;
  while (!leaves.empty()) {
    const int v = leaves.back();
    leaves.pop_back();
    if (degree[v] != 1) continue;
    int c = -1;
    for (int k = 0; k < (v < m ? n : m) && c < 0; ++k) {
      const int cc = v < m ? v * n + k : k * n + (v - m);
      if (left >> cc & 1) c = cc;
    }
    const int r = c / n, col = m + c % n, other = v == r ? col : r;
    x[c] = rest[v];
    rest[other] -= x[c];
    rest[v] = 0.0;
    left &= ~(std::uint64_t{1} << c);
    ++done;
    degree[v] = 0;
    if (--degree[other] == 1) leaves.push_back(other);
  }
  if (done != m + n - 1) return std::nullopt;
  return x;
}

}  // namespace detail

// Calls visit(basis, x) for every feasible basis reachable by pivots from the
// North-West corner basis; every vertex has at least one such basis.
template <typename Visit>
void for_each_feasible_basis(const std::vector<double>& a, const std::vector<double>& b, Visit&& visit) {
  const int m = static_cast<int>(a.size()), n = static_cast<int>(b.size());
  constexpr double tol = 1e-13;
  std::uint64_t start = 0;
  {
    std::vector<double> ra(a), rb(b);
    int i = 0, j = 0;
    while (true) {
      start |= std::uint64_t{1} << (i * n + j);
      double v = std::min(ra[i], rb[j]);
      ra[i] -= v;
      rb[j] -= v;
      if (i == m - 1 && j == n - 1) break;
      if (i == m - 1) ++j;
      else if (j == n - 1) ++i;
      else if (ra[i] <= rb[j]) ++i;
      else ++j;
    }
  }
  std::unordered_set<std::uint64_t> seen{start};
  std::deque<std::uint64_t> queue{start};
  detail::BasisTree tree;
  std::vector<int> path, from_col, from_row;
  while (!queue.empty()) {
    const std::uint64_t basis = queue.front();
    queue.pop_front();
    auto xs = detail::tree_solution(basis, a, b);
    if (!xs || !tree.build(basis, m, n)) continue;
    std::vector<double>& x = *xs;
    for (double& v : x)
      if (v < tol) v = 0.0;
    visit(basis, x);

    for (int e = 0; e < m * n; ++e) {
      if (basis >> e & 1) continue;
      // Tree path from row e/n to column e%n; cells alternate -, +, -, ... from the column end.
      int u = m + e % n, w = e / n;
      from_col.clear();
      from_row.clear();
      while (u != w) {
        if (tree.depth[u] >= tree.depth[w]) {
          from_col.push_back(tree.cell[u]);
          u = tree.parent[u];
        } else {
          from_row.push_back(tree.cell[w]);
          w = tree.parent[w];
        }
      }
      path.assign(from_col.begin(), from_col.end());
      path.insert(path.end(), from_row.rbegin(), from_row.rend());
      double theta = 2.0;
      for (std::size_t k = 0; k < path.size(); k += 2) theta = std::min(theta, x[path[k]]);
      for (std::size_t k = 0; k < path.size(); k += 2) {
        if (x[path[k]] > theta + tol) continue;
        const std::uint64_t next = (basis | (std::uint64_t{1} << e)) & ~(std::uint64_t{1} << path[k]);
        if (seen.insert(next).second) queue.push_back(next);
      }
    }
  }
}

inline std::vector<PolytopeVertex> polytope_vertices(const std::vector<double>& a, const std::vector<double>& b) {
  std::map<std::uint64_t, PolytopeVertex> vertices;
  for_each_feasible_basis(a, b, [&](std::uint64_t, const std::vector<double>& x) {
    std::uint64_t support = 0;
    for (std::size_t c = 0; c < x.size(); ++c)
      if (x[c] > 0.0) support |= std::uint64_t{1} << c;
    vertices.try_emplace(support, PolytopeVertex{support, x});
  });
  std::vector<PolytopeVertex> out;
  for (auto& [k, v] : vertices) out.push_back(std::move(v));
  return out;
}

inline std::vector<double> weights(const Dist& d) {
  std::vector<double> w;
  for (auto& e : d.entries) w.push_back(e.second);
  return w;
}

// min over polytope vertices with support inside `allowed` (all when null).
inline std::optional<double> brute_transport(const Dist& mu, const Dist& nu, const DistMatrix& cost,
                                             const bisimdist::Relation* allowed = nullptr) {
  const int n = static_cast<int>(nu.entries.size());
  std::optional<double> best;
  for_each_feasible_basis(weights(mu), weights(nu), [&](std::uint64_t, const std::vector<double>& x) {
    double c = 0.0;
    for (int k = 0; k < static_cast<int>(x.size()); ++k) {
      if (x[k] == 0.0) continue;
      const int u = mu.entries[k / n].first, w = nu.entries[k % n].first;
      if (allowed && !(*allowed)(u, w)) return;
      c += cost(u, w) * x[k];
    }
    if (!best || c < *best) best = c;
  });
  return best;
}

// H(K(d))(A,B) by enumerating every set-coupling.
inline double brute_hausdorff(const DistMatrix& d, const std::vector<Dist>& a, const std::vector<Dist>& b) {
  const int m = static_cast<int>(a.size()), n = static_cast<int>(b.size());
  std::vector<double> k(m * n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) k[i * n + j] = *brute_transport(a[i], b[j], d);
  double best = 2.0;
  for (std::uint32_t mask = 1; mask < (1u << (m * n)); ++mask) {
    std::vector<bool> rows(m, false), cols(n, false);
    double worst = 0.0;
    for (int c = 0; c < m * n; ++c)
      if (mask >> c & 1) {
        rows[c / n] = cols[c % n] = true;
        worst = std::max(worst, k[c]);
      }
    if (std::all_of(rows.begin(), rows.end(), [](bool x) { return x; }) &&
        std::all_of(cols.begin(), cols.end(), [](bool x) { return x; }))
      best = std::min(best, worst);
  }
  return best;
}

inline DistMatrix brute_delta(double lambda, const DistMatrix& d, const Automaton& a) {
  const int n = a.size();
  DistMatrix out(n, n);
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t)
      out(s, t) = a.same_label(s, t) ? lambda * brute_hausdorff(d, a.delta(s), a.delta(t)) : 1.0;
  return out;
}

// Self-closedness of m w.r.t. d, checked with the brute-force transport oracle.
inline bool brute_selfclosed(const bisimdist::Relation& m, const DistMatrix& d, const Automaton& a, double eps) {
  const int n = a.size();
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t) {
      if (!m(s, t)) continue;
      if (!a.same_label(s, t) || !(d(s, t) > eps)) return false;
      const auto& ds = a.delta(s);
      const auto& dt = a.delta(t);
      auto closes = [&](const Dist& mu, const Dist& nu) {
        auto r = brute_transport(mu, nu, d, &m);
        return r && std::abs(*r - d(s, t)) <= eps;
      };
      for (const auto& mu : ds) {
        double best = 2.0;
        for (const auto& nu : dt) best = std::min(best, *brute_transport(mu, nu, d));
        if (std::abs(best - d(s, t)) > eps) continue;
        if (std::none_of(dt.begin(), dt.end(), [&](const Dist& nu) { return closes(mu, nu); })) return false;
      }
      for (const auto& nu : dt) {
        double best = 2.0;
        for (const auto& mu : ds) best = std::min(best, *brute_transport(mu, nu, d));
        if (std::abs(best - d(s, t)) > eps) continue;
        if (std::none_of(ds.begin(), ds.end(), [&](const Dist& mu) { return closes(mu, nu); })) return false;
      }
    }
  return true;
}

inline double max_abs_diff(const DistMatrix& x, const DistMatrix& y) { return (x - y).cwiseAbs().maxCoeff(); }

// Zero diagonal, symmetry and the triangle inequality.
inline bool is_pseudometric(const DistMatrix& d, double sym_tol, double tri_tol) {
  const int n = static_cast<int>(d.rows());
  for (int s = 0; s < n; ++s) {
    if (d(s, s) != 0.0) return false;
    for (int t = 0; t < n; ++t) {
      if (std::abs(d(s, t) - d(t, s)) > sym_tol) return false;
      if (d(s, t) < -sym_tol || d(s, t) > 1.0 + sym_tol) return false;
      for (int u = 0; u < n; ++u)
        if (d(s, u) > d(s, t) + d(t, u) + tri_tol) return false;
    }
  }
  return true;
}

}  // namespace testing_support
