#include "reachability.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "bisimdist/error.hpp"

namespace bisimdist::detail {

namespace {

constexpr double kImprove = 1e-12;

// Reverse adjacency: for each state, the states having an action entry into it.
std::vector<std::vector<int>> predecessors(const SparseMdp& mdp) {
  std::vector<std::vector<int>> pred(mdp.num_states);
  for (int s = 0; s < mdp.num_states; ++s)
    for (int a = mdp.action_begin[s]; a < mdp.action_begin[s + 1]; ++a)
      for (int e = mdp.entry_begin[a]; e < mdp.entry_begin[a + 1]; ++e) pred[mdp.succ[e]].push_back(s);
  for (auto& p : pred) {
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
  }
  return pred;
}

double q_value(const SparseMdp& mdp, int a, const std::vector<double>& v, double discount) {
  double q = 0.0;
  for (int e = mdp.entry_begin[a]; e < mdp.entry_begin[a + 1]; ++e) q += mdp.prob[e] * v[mdp.succ[e]];
  return discount * q;
}

// Value of a fixed policy on the `open` states; all other values are taken from `v`.
void evaluate(const SparseMdp& mdp, const std::vector<int>& policy, const std::vector<char>& open,
              double discount, std::vector<double>& v) {
  std::vector<int> index(mdp.num_states, -1);
  int k = 0;
  for (int s = 0; s < mdp.num_states; ++s)
    if (open[s]) index[s] = k++;
  if (k == 0) return;
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
  for (int s = 0; s < mdp.num_states; ++s) {
    if (!open[s]) continue;
    const int row = index[s];
    trip.emplace_back(row, row, 1.0);
    const int a = mdp.action_begin[s] + policy[s];
    for (int e = mdp.entry_begin[a]; e < mdp.entry_begin[a + 1]; ++e) {
      const int w = mdp.succ[e];
      const double p = discount * mdp.prob[e];
      if (open[w])
        trip.emplace_back(row, index[w], -p);
      else
        rhs[row] += p * v[w];
    }
  }
  Eigen::SparseMatrix<double> m(k, k);
  m.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(m);
  if (lu.info() != Eigen::Success) throw InternalError("singular policy evaluation system");
  Eigen::VectorXd x = lu.solve(rhs);
  for (int s = 0; s < mdp.num_states; ++s)
    if (open[s]) v[s] = std::clamp(x[index[s]], 0.0, 1.0);
}

// Under a fixed Max policy, states that cannot reach a target are dropped to 0.
std::vector<char> reaching_under(const SparseMdp& mdp, const std::vector<int>& policy,
                                 const std::vector<char>& open) {
  std::vector<std::vector<int>> pred(mdp.num_states);
  for (int s = 0; s < mdp.num_states; ++s) {
    if (!open[s]) continue;
    const int a = mdp.action_begin[s] + policy[s];
    for (int e = mdp.entry_begin[a]; e < mdp.entry_begin[a + 1]; ++e) pred[mdp.succ[e]].push_back(s);
  }
  std::vector<char> reach(mdp.num_states, 0);
  std::deque<int> q;
  for (int s = 0; s < mdp.num_states; ++s)
    if (mdp.target[s]) {
      reach[s] = 1;
      q.push_back(s);
    }
  while (!q.empty()) {
    int w = q.front();
    q.pop_front();
    for (int s : pred[w])
      if (!reach[s]) {
        reach[s] = 1;
        q.push_back(s);
      }
  }
  std::vector<char> out(mdp.num_states, 0);
  for (int s = 0; s < mdp.num_states; ++s) out[s] = open[s] && reach[s];
  return out;
}

ReachResult policy_iteration(const SparseMdp& mdp, const ReachOptions& opts,
                             const std::vector<char>& open, std::vector<double> v) {
  const bool maximize = opts.objective == Objective::Max;
  ReachResult r;
  r.policy.assign(mdp.num_states, -1);
  for (int s = 0; s < mdp.num_states; ++s)
    if (open[s]) r.policy[s] = 0;

  for (;;) {
    ++r.iterations;
    if (r.iterations > opts.max_sweeps)
      throw ConvergenceError("policy iteration cap exceeded", 0.0);
    std::vector<char> live = open;
    if (maximize && opts.discount >= 1.0) {
      live = reaching_under(mdp, r.policy, open);
      for (int s = 0; s < mdp.num_states; ++s)
        if (open[s] && !live[s]) v[s] = 0.0;
    }
    evaluate(mdp, r.policy, live, opts.discount, v);

    bool changed = false;
    for (int s = 0; s < mdp.num_states; ++s) {
      if (!open[s]) continue;
      const int base = mdp.action_begin[s];
      int best = r.policy[s];
      double best_q = q_value(mdp, base + best, v, opts.discount);
      for (int a = 0; a < mdp.actions_of(s); ++a) {
        const double q = q_value(mdp, base + a, v, opts.discount);
        if (maximize ? q > best_q + kImprove : q < best_q - kImprove) {
          best = a;
          best_q = q;
        }
      }
      if (best != r.policy[s]) {
        r.policy[s] = best;
        changed = true;
      }
    }
    if (!changed) break;
  }
  r.value = std::move(v);
  return r;
}

ReachResult value_iteration(const SparseMdp& mdp, const ReachOptions& opts,
                            const std::vector<char>& open, std::vector<double> v) {
  const bool maximize = opts.objective == Objective::Max;
  ReachResult r;
  double change = 0.0;
  for (;;) {
    if (r.iterations >= opts.max_sweeps)
      throw ConvergenceError("value iteration sweep cap exceeded", change);
    ++r.iterations;
    change = 0.0;
    // Gauss-Seidel in state index order.
    for (int s = 0; s < mdp.num_states; ++s) {
      if (!open[s]) continue;
      double best = maximize ? 0.0 : 1.0;
      for (int a = mdp.action_begin[s]; a < mdp.action_begin[s + 1]; ++a) {
        const double q = q_value(mdp, a, v, opts.discount);
        best = maximize ? std::max(best, q) : std::min(best, q);
      }
      change = std::max(change, std::abs(best - v[s]));
      v[s] = best;
    }
    if (change < opts.tolerance) break;
  }
  r.policy.assign(mdp.num_states, -1);
  for (int s = 0; s < mdp.num_states; ++s) {
    if (!open[s]) continue;
    int best = 0;
    double best_q = q_value(mdp, mdp.action_begin[s], v, opts.discount);
    for (int a = 1; a < mdp.actions_of(s); ++a) {
      const double q = q_value(mdp, mdp.action_begin[s] + a, v, opts.discount);
      if (maximize ? q > best_q : q < best_q) {
        best = a;
        best_q = q;
      }
    }
    r.policy[s] = best;
  }
  r.value = std::move(v);
  return r;
}

}  // namespace

void SparseMdp::add_state(bool is_target) {
  ++num_states;
  target.push_back(is_target ? 1 : 0);
  action_begin.push_back(action_begin.back());
}

void SparseMdp::add_action(const std::vector<std::pair<int, double>>& dist) {
  for (const auto& [w, p] : dist) {
    succ.push_back(w);
    prob.push_back(p);
  }
  entry_begin.push_back(static_cast<int>(succ.size()));
  ++action_begin.back();
}

std::vector<char> prob0_states(const SparseMdp& mdp, Objective objective) {
  const int n = mdp.num_states;
  if (objective == Objective::Max) {
    // Backward reachability from the targets through any action.
    auto pred = predecessors(mdp);
    std::vector<char> reach(n, 0);
    std::deque<int> q;
    for (int s = 0; s < n; ++s)
      if (mdp.target[s]) {
        reach[s] = 1;
        q.push_back(s);
      }
    while (!q.empty()) {
      int w = q.front();
      q.pop_front();
      for (int s : pred[w])
        if (!reach[s]) {
          reach[s] = 1;
          q.push_back(s);
        }
    }
    std::vector<char> zero(n);
    for (int s = 0; s < n; ++s) zero[s] = !reach[s];
    return zero;
  }
  // Greatest set of non-target states where some action stays inside the set.
  std::vector<char> avoid(n);
  for (int s = 0; s < n; ++s) avoid[s] = !mdp.target[s];
  for (bool changed = true; changed;) {
    changed = false;
    for (int s = 0; s < n; ++s) {
      if (!avoid[s] || mdp.actions_of(s) == 0) continue;
      bool stays = false;
      for (int a = mdp.action_begin[s]; a < mdp.action_begin[s + 1] && !stays; ++a) {
        bool inside = true;
        for (int e = mdp.entry_begin[a]; e < mdp.entry_begin[a + 1]; ++e)
          if (!avoid[mdp.succ[e]]) {
            inside = false;
            break;
          }
        stays = inside;
      }
      if (!stays) {
        avoid[s] = 0;
        changed = true;
      }
    }
  }
  return avoid;
}

ReachResult solve_reachability(const SparseMdp& mdp, const ReachOptions& opts) {
  if (!(opts.discount > 0.0 && opts.discount <= 1.0))
    throw InputError("discount must lie in (0,1]");
  const auto zero = prob0_states(mdp, opts.objective);
  std::vector<double> v(mdp.num_states, 0.0);
  std::vector<char> open(mdp.num_states, 0);
  for (int s = 0; s < mdp.num_states; ++s) {
    if (mdp.target[s])
      v[s] = 1.0;
    else if (!zero[s] && mdp.actions_of(s) > 0)
      open[s] = 1;
  }
  return opts.method == ReachMethod::PolicyIteration ? policy_iteration(mdp, opts, open, std::move(v))
                                                     : value_iteration(mdp, opts, open, std::move(v));
}

}  // namespace bisimdist::detail
