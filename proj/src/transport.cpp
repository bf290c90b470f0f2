#include "bisimdist/transport.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "bisimdist/error.hpp"

namespace bisimdist {

namespace {

constexpr double kReducedCostTol = 1e-12;
constexpr double kZeroMass = 1e-15;
constexpr int kPivotCap = 100000;

using BoolGrid = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

void check_marginals(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InputError("empty distribution in transportation problem");
  const double ma = std::accumulate(a.begin(), a.end(), 0.0);
  const double mb = std::accumulate(b.begin(), b.end(), 0.0);
  if (std::abs(ma - 1.0) > 1e-9 || std::abs(mb - 1.0) > 1e-9)
    throw InputError("marginal mismatch in transportation problem");
}

// North-West corner on local indices; marks exactly m+n-1 basic cells.
void nw_basis(std::span<const double> a, std::span<const double> b, Eigen::MatrixXd& x,
              BoolGrid& basic) {
  const int m = static_cast<int>(a.size());
  const int n = static_cast<int>(b.size());
  std::vector<double> ra(a.begin(), a.end()), rb(b.begin(), b.end());
  int i = 0, j = 0;
  while (true) {
    const double v = std::max(0.0, std::min(ra[i], rb[j]));
    basic(i, j) = true;
    x(i, j) = v;
    ra[i] -= v;
    rb[j] -= v;
    if (i == m - 1 && j == n - 1) break;
    if (i == m - 1)
      ++j;
    else if (j == n - 1)
      ++i;
    else if (ra[i] <= rb[j])
      ++i;
    else
      ++j;
  }
}

// Tree nodes: rows 0..m-1, columns m..m+n-1.
struct Tree {
  int m, n;
  std::vector<std::vector<int>> adj;

  Tree(const BoolGrid& basic) : m(basic.rows()), n(basic.cols()), adj(m + n) {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        if (basic(i, j)) {
          adj[i].push_back(m + j);
          adj[m + j].push_back(i);
        }
  }

  // Parent pointers of a BFS from `root`.
  std::vector<int> bfs(int root) const {
    std::vector<int> parent(m + n, -2);
    std::deque<int> q{root};
    parent[root] = -1;
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      for (int w : adj[u])
        if (parent[w] == -2) {
          parent[w] = u;
          q.push_back(w);
        }
    }
    return parent;
  }
};

}  // namespace

namespace detail {

std::vector<double> weights(const Dist& d) {
  std::vector<double> w;
  w.reserve(d.entries.size());
  for (const auto& e : d.entries) w.push_back(e.second);
  return w;
}

Coupling globalize(const Dist& mu, const Dist& nu, const std::vector<CouplingEntry>& cells) {
  Coupling c;
  c.left = mu;
  c.right = nu;
  c.entries.reserve(cells.size());
  for (const auto& e : cells)
    c.entries.push_back({mu.entries[e.from].first, nu.entries[e.to].first, e.mass});
  std::sort(c.entries.begin(), c.entries.end(), [](const auto& l, const auto& r) {
    return std::tie(l.from, l.to) < std::tie(r.from, r.to);
  });
  return c;
}

LocalPlan transportation_simplex(std::span<const double> a, std::span<const double> b,
                                 const Eigen::MatrixXd& cost) {
  check_marginals(a, b);
  const int m = static_cast<int>(a.size());
  const int n = static_cast<int>(b.size());
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(m, n);
  BoolGrid basic = BoolGrid::Constant(m, n, false);
  nw_basis(a, b, x, basic);

  std::vector<double> u(m), v(n);
  for (int iter = 0;; ++iter) {
    if (iter > kPivotCap) throw ConvergenceError("transportation simplex pivot cap exceeded", 0.0);
    Tree tree(basic);

    // Potentials u_i + v_j = c_ij on basic cells, u_0 = 0.
    auto parent = tree.bfs(0);
    std::vector<int> order;
    {
      std::deque<int> q{0};
      std::vector<bool> seen(m + n, false);
      seen[0] = true;
      while (!q.empty()) {
        int w = q.front();
        q.pop_front();
        order.push_back(w);
        for (int z : tree.adj[w])
          if (!seen[z]) {
            seen[z] = true;
            q.push_back(z);
          }
      }
    }
    if (static_cast<int>(order.size()) != m + n)
      throw InternalError("transportation basis is not a spanning tree");
    u[0] = 0.0;
    for (int w : order) {
      if (w == 0) continue;
      const int p = parent[w];
      if (w >= m)
        v[w - m] = cost(p, w - m) - u[p];
      else
        u[w] = cost(w, p - m) - v[p - m];
    }

    // Bland: smallest row-major index with negative reduced cost enters.
    int ei = -1, ej = -1;
    for (int i = 0; i < m && ei < 0; ++i)
      for (int j = 0; j < n; ++j)
        if (!basic(i, j) && cost(i, j) - u[i] - v[j] < -kReducedCostTol) {
          ei = i;
          ej = j;
          break;
        }
    if (ei < 0) break;

    // Cycle: entering cell, then the tree path from column ej back to row ei.
    auto from_row = tree.bfs(ei);
    std::vector<std::pair<int, int>> path;  // cells along the path, starting next to column ej
    for (int w = m + ej; from_row[w] != -1; w = from_row[w]) {
      const int p = from_row[w];
      path.push_back(w >= m ? std::pair{p, w - m} : std::pair{w, p - m});
    }
    // path[0] touches column ej: it loses mass; signs alternate from there.
    double theta = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < path.size(); k += 2)
      theta = std::min(theta, x(path[k].first, path[k].second));
    int leave = -1;
    for (std::size_t k = 0; k < path.size(); k += 2) {
      auto [i, j] = path[k];
      if (x(i, j) <= theta + kZeroMass) {
        const int idx = i * n + j;
        if (leave < 0 || idx < leave) leave = idx;
      }
    }
    x(ei, ej) = theta;
    basic(ei, ej) = true;
    for (std::size_t k = 0; k < path.size(); ++k) {
      auto [i, j] = path[k];
      x(i, j) += (k % 2 == 0) ? -theta : theta;
      if (std::abs(x(i, j)) < kZeroMass) x(i, j) = 0.0;
    }
    x(leave / n, leave % n) = 0.0;
    basic(leave / n, leave % n) = false;
  }

  LocalPlan plan;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      if (basic(i, j) && x(i, j) > 0.0) {
        plan.cells.push_back({i, j, x(i, j)});
        plan.value += cost(i, j) * x(i, j);
      }
  return plan;
}

LocalFlow restricted_flow(std::span<const double> a, std::span<const double> b,
                          const Eigen::MatrixXd& cost, const BoolGrid& allowed) {
  check_marginals(a, b);
  const int m = static_cast<int>(a.size());
  const int n = static_cast<int>(b.size());
  const int src = m + n, snk = m + n + 1, nodes = m + n + 2;

  struct Arc {
    int to;
    double cap;
    double cost;
    int rev;
  };
  std::vector<std::vector<Arc>> g(nodes);
  auto add = [&](int u, int w, double cap, double c) {
    g[u].push_back({w, cap, c, static_cast<int>(g[w].size())});
    g[w].push_back({u, 0.0, -c, static_cast<int>(g[u].size()) - 1});
  };
  for (int i = 0; i < m; ++i) add(src, i, a[i], 0.0);
  for (int j = 0; j < n; ++j) add(m + j, snk, b[j], 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      if (allowed(i, j)) add(i, m + j, std::min(a[i], b[j]), cost(i, j));

  LocalFlow out;
  // Successive shortest paths with Bellman-Ford; graphs here are tiny.
  for (int round = 0; round < 4 * nodes * nodes + 16; ++round) {
    std::vector<double> dist(nodes, std::numeric_limits<double>::infinity());
    std::vector<std::pair<int, int>> prev(nodes, {-1, -1});
    dist[src] = 0.0;
    for (int pass = 0; pass < nodes; ++pass) {
      bool changed = false;
      for (int u = 0; u < nodes; ++u) {
        if (!std::isfinite(dist[u])) continue;
        for (int k = 0; k < static_cast<int>(g[u].size()); ++k) {
          const Arc& e = g[u][k];
          if (e.cap > kZeroMass && dist[u] + e.cost < dist[e.to] - 1e-15) {
            dist[e.to] = dist[u] + e.cost;
            prev[e.to] = {u, k};
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    if (!std::isfinite(dist[snk])) break;
    double push = std::numeric_limits<double>::infinity();
    for (int w = snk; w != src; w = prev[w].first)
      push = std::min(push, g[prev[w].first][prev[w].second].cap);
    for (int w = snk; w != src; w = prev[w].first) {
      Arc& e = g[prev[w].first][prev[w].second];
      e.cap -= push;
      g[e.to][e.rev].cap += push;
    }
    out.flow += push;
  }
  for (int i = 0; i < m; ++i)
    for (const Arc& e : g[i])
      if (e.to >= m && e.to < m + n) {
        const double f = g[e.to][e.rev].cap;  // residual back-capacity = flow on arc
        if (f > 0.0) out.cost += e.cost * f;
      }
  return out;
}

}  // namespace detail

Coupling Coupling::transposed() const {
  Coupling t;
  t.left = right;
  t.right = left;
  for (const auto& e : entries) t.entries.push_back({e.to, e.from, e.mass});
  std::sort(t.entries.begin(), t.entries.end(), [](const auto& l, const auto& r) {
    return std::tie(l.from, l.to) < std::tie(r.from, r.to);
  });
  return t;
}

double max_flow(const Dist& mu, const Dist& nu, const Relation& allowed) {
  BoolGrid mask(mu.entries.size(), nu.entries.size());
  for (std::size_t i = 0; i < mu.entries.size(); ++i)
    for (std::size_t j = 0; j < nu.entries.size(); ++j)
      mask(i, j) = allowed(mu.entries[i].first, nu.entries[j].first);
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(mu.entries.size(), nu.entries.size());
  return detail::restricted_flow(detail::weights(mu), detail::weights(nu), zero, mask).flow;
}

Coupling north_west_corner(const Dist& mu, const Dist& nu) {
  const auto a = detail::weights(mu);
  const auto b = detail::weights(nu);
  check_marginals(a, b);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(a.size(), b.size());
  BoolGrid basic = BoolGrid::Constant(a.size(), b.size(), false);
  nw_basis(a, b, x, basic);
  std::vector<CouplingEntry> cells;
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < x.cols(); ++j)
      if (x(i, j) > 0.0) cells.push_back({i, j, x(i, j)});
  return detail::globalize(mu, nu, cells);
}

std::vector<Coupling> enumerate_vertices(const Dist& mu, const Dist& nu) {
  const int m = static_cast<int>(mu.entries.size());
  const int n = static_cast<int>(nu.entries.size());
  if (m * n > 16) throw InputError("vertex enumeration guard exceeded (support product > 16)");
  const auto a = detail::weights(mu);
  const auto b = detail::weights(nu);
  check_marginals(a, b);
  const int cells = m * n;
  const int need = m + n - 1;

  std::set<std::uint32_t> seen_support;
  std::vector<Coupling> out;
  std::vector<int> chosen;

  // Basic solution for a spanning tree, obtained by peeling leaf lines.
  auto solve_tree = [&](const std::vector<int>& tree) -> std::optional<std::vector<double>> {
    std::vector<double> ra(a), rb(b), x(tree.size(), 0.0);
    std::vector<bool> done(tree.size(), false);
    for (std::size_t step = 0; step < tree.size(); ++step) {
      std::vector<int> deg(m + n, 0);
      for (std::size_t k = 0; k < tree.size(); ++k)
        if (!done[k]) {
          ++deg[tree[k] / n];
          ++deg[m + tree[k] % n];
        }
      int pick = -1;
      for (std::size_t k = 0; k < tree.size() && pick < 0; ++k) {
        if (done[k]) continue;
        const int i = tree[k] / n, j = tree[k] % n;
        if (deg[i] == 1) {
          x[k] = ra[i];
        } else if (deg[m + j] == 1) {
          x[k] = rb[j];
        } else {
          continue;
        }
        pick = static_cast<int>(k);
        ra[i] -= x[k];
        rb[j] -= x[k];
      }
      if (pick < 0) return std::nullopt;
      done[pick] = true;
    }
    for (double& v : x) {
      if (v < -1e-12) return std::nullopt;
      if (v < 1e-12) v = 0.0;
    }
    return x;
  };

  std::vector<int> uf(m + n);
  auto find = [&](auto&& self, int v) -> int { return uf[v] == v ? v : uf[v] = self(self, uf[v]); };

  auto recurse = [&](auto&& self, int start) -> void {
    if (static_cast<int>(chosen.size()) == need) {
      std::iota(uf.begin(), uf.end(), 0);
      for (int c : chosen) {
        int r1 = find(find, c / n), r2 = find(find, m + c % n);
        if (r1 == r2) return;
        uf[r1] = r2;
      }
      auto x = solve_tree(chosen);
      if (!x) return;
      std::uint32_t mask = 0;
      std::vector<CouplingEntry> local;
      for (std::size_t k = 0; k < chosen.size(); ++k)
        if ((*x)[k] > 0.0) {
          mask |= 1u << chosen[k];
          local.push_back({chosen[k] / n, chosen[k] % n, (*x)[k]});
        }
      if (seen_support.insert(mask).second) out.push_back(detail::globalize(mu, nu, local));
      return;
    }
    for (int c = start; c <= cells - (need - static_cast<int>(chosen.size())); ++c) {
      chosen.push_back(c);
      self(self, c + 1);
      chosen.pop_back();
    }
  };
  recurse(recurse, 0);
  return out;
}

bool is_coupling_of(const Coupling& omega, const Dist& mu, const Dist& nu, double tol) {
  std::map<int, double> rows, cols;
  double total = 0.0;
  for (const auto& e : omega.entries) {
    if (e.mass < -tol) return false;
    rows[e.from] += e.mass;
    cols[e.to] += e.mass;
    total += e.mass;
  }
  if (std::abs(total - 1.0) > tol) return false;
  for (const auto& [s, w] : rows)
    if (std::abs(w - mu(s)) > tol) return false;
  for (const auto& [s, w] : cols)
    if (std::abs(w - nu(s)) > tol) return false;
  for (const auto& [s, w] : mu.entries)
    if (std::abs(rows[s] - w) > tol) return false;
  for (const auto& [s, w] : nu.entries)
    if (std::abs(cols[s] - w) > tol) return false;
  return true;
}

}  // namespace bisimdist
