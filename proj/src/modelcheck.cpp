#include "bisimdist/modelcheck.hpp"

#include <cmath>
#include <sstream>

#include "bisimdist/error.hpp"
#include "reachability.hpp"

namespace bisimdist {

std::vector<int> parse_target(const Automaton& a, const std::string& labels) {
  std::vector<int> out;
  std::stringstream in(labels);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) continue;
    item = item.substr(b, e - b + 1);
    const int id = a.find_label(item);
    if (id < 0) throw InputError("unknown label \"" + item + "\"");
    out.push_back(id);
  }
  if (out.empty()) throw InputError("empty target label set");
  return out;
}

std::vector<double> reach_prob(const Automaton& a, const ReachQuery& q) {
  if (q.target.empty()) throw InputError("empty target label set");
  std::vector<char> is_target(a.label_names.size(), 0);
  for (int l : q.target) {
    if (l < 0 || l >= static_cast<int>(a.label_names.size())) throw InputError("unknown label id");
    is_target[l] = 1;
  }
  detail::SparseMdp mdp;
  for (int s = 0; s < a.size(); ++s) {
    mdp.add_state(is_target[a.labels[s]]);
    for (const auto& mu : a.delta(s)) mdp.add_action(mu.entries);
  }
  detail::ReachOptions opts;
  opts.objective = q.mode == ReachMode::Max ? detail::Objective::Max : detail::Objective::Min;
  return detail::solve_reachability(mdp, opts).value;
}

BoundReport check_bound(const Automaton& a, const DistMatrix& d1, const ReachQuery& q, double eps) {
  const int n = a.size();
  if (d1.rows() != n || d1.cols() != n) throw InputError("distance matrix size mismatch");
  const auto p = reach_prob(a, q);
  BoundReport r;
  double best_slack = 0.0;
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t) {
      const BoundPair bp{s, t, std::abs(p[s] - p[t]), d1(s, t)};
      if (bp.gap > bp.bound + eps) r.violations.push_back(bp);
      // Label-mismatched pairs have the trivial bound 1 and are not reported as tight.
      if (bp.gap > eps && a.same_label(s, t)) {
        const double slack = bp.bound - bp.gap;
        if (r.tightest.s < 0 || slack < best_slack - 1e-12) {
          r.tightest = bp;
          best_slack = slack;
        }
      }
    }
  return r;
}

}  // namespace bisimdist
