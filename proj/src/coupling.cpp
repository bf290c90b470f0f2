#include "bisimdist/coupling.hpp"

#include <deque>
#include <sstream>

#include "bisimdist/error.hpp"
#include "reachability.hpp"

namespace bisimdist {

const Coupling& CouplingStructure::coupling(int s, int i, int t, int j) const {
  auto it = f.find({s, i, t, j});
  if (it == f.end())
    throw InternalError("coupling structure has no measure-coupling for a demanded pair");
  return it->second;
}

std::string CouplingStructure::fingerprint() const {
  std::ostringstream out;
  for (int p = 0; p < n * n; ++p) {
    if (rho[p].empty()) continue;
    out << p << ':';
    for (auto [i, j] : rho[p]) {
      out << i << ',' << j << '[';
      for (const auto& e : f.at({p / n, i, p % n, j}).entries) out << e.from << '.' << e.to << ' ';
      out << ']';
    }
    out << ';';
  }
  return out.str();
}

std::vector<std::string> check_structure(const CouplingStructure& c, const Automaton& a) {
  std::vector<std::string> out;
  const int n = a.size();
  if (c.n != n) {
    out.push_back("coupling structure size differs from automaton");
    return out;
  }
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t) {
      const auto& r = c.at(s, t);
      const std::string where = "pair (" + a.state_names[s] + "," + a.state_names[t] + ")";
      if (!a.same_label(s, t) || c.clamped[s * n + t]) {
        if (!r.empty()) out.push_back(where + ": set-coupling on a pair that takes no moves");
        continue;
      }
      const int ms = static_cast<int>(a.delta(s).size());
      const int mt = static_cast<int>(a.delta(t).size());
      if (!is_set_coupling(r, ms, mt)) out.push_back(where + ": rho is not a set-coupling");
      for (auto [i, j] : r) {
        if (i < 0 || i >= ms || j < 0 || j >= mt) continue;
        auto it = c.f.find({s, i, t, j});
        if (it == c.f.end()) {
          out.push_back(where + ": missing measure-coupling");
          continue;
        }
        const Dist& mu = a.delta(s)[i];
        const Dist& nu = a.delta(t)[j];
        if (!is_coupling_of(it->second, mu, nu)) out.push_back(where + ": f is not a coupling");
        if (it->second.support_size() + 1 > mu.support_size() + nu.support_size())
          out.push_back(where + ": f is not a vertex coupling");
      }
    }
  return out;
}

InducedMdp induce(const CouplingStructure& c, const Automaton& a,
                  std::span<const std::pair<int, int>> sources) {
  const int n = a.size();
  if (c.n != n) throw InputError("coupling structure does not match the automaton");
  InducedMdp m;
  m.n = n;
  m.bad.assign(n * n, 0);
  m.reachable.assign(n * n, 0);
  m.actions.assign(n * n, {});
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t) m.bad[s * n + t] = !a.same_label(s, t);

  std::deque<int> queue;
  auto visit = [&](int p) {
    if (!m.reachable[p]) {
      m.reachable[p] = 1;
      queue.push_back(p);
    }
  };
  if (sources.empty()) {
    for (int p = 0; p < n * n; ++p) visit(p);
  } else {
    for (auto [s, t] : sources) visit(s * n + t);
  }
  while (!queue.empty()) {
    const int p = queue.front();
    queue.pop_front();
    if (m.bad[p] || c.clamped[p]) continue;
    const int s = p / n, t = p % n;
    const auto& r = c.at(s, t);
    if (r.empty()) throw InternalError("pair without a set-coupling in the induced automaton");
    for (auto [i, j] : r) {
      std::vector<std::pair<int, double>> dist;
      for (const auto& e : c.coupling(s, i, t, j).entries) {
        dist.emplace_back(e.from * n + e.to, e.mass);
        visit(e.from * n + e.to);
      }
      m.actions[p].push_back(std::move(dist));
    }
  }
  return m;
}

DistMatrix discrepancy(const CouplingStructure& c, const Automaton& a, double lambda,
                       const DiscrepancyOptions& opts) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw InputError("lambda must lie in (0,1]");
  const auto m = induce(c, a);
  const int n = a.size();
  detail::SparseMdp mdp;
  for (int p = 0; p < n * n; ++p) {
    mdp.add_state(m.bad[p]);
    for (const auto& act : m.actions[p]) mdp.add_action(act);
  }
  detail::ReachOptions ro;
  ro.objective = detail::Objective::Max;
  ro.discount = lambda;
  ro.method = opts.method == DiscrepancyMethod::PolicyIteration ? detail::ReachMethod::PolicyIteration
                                                                : detail::ReachMethod::ValueIteration;
  ro.tolerance = opts.tolerance;
  ro.max_sweeps = opts.max_sweeps;
  const auto res = detail::solve_reachability(mdp, ro);
  DistMatrix g(n, n);
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t) g(s, t) = res.value[s * n + t];
  return g;
}

DistMatrix gamma_apply(const CouplingStructure& c, const Automaton& a, double lambda,
                       const DistMatrix& d) {
  const int n = a.size();
  DistMatrix out = DistMatrix::Zero(n, n);
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t) {
      if (!a.same_label(s, t)) {
        out(s, t) = 1.0;
        continue;
      }
      if (c.clamped[s * n + t]) continue;
      double best = 0.0;
      for (auto [i, j] : c.at(s, t)) best = std::max(best, coupling_cost(c.coupling(s, i, t, j), d));
      out(s, t) = lambda * best;
    }
  return out;
}

}  // namespace bisimdist
