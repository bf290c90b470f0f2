#include "bisimdist/policy_iter.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <set>

#include "bisimdist/bisim.hpp"
#include "bisimdist/error.hpp"
#include "bisimdist/selfclosed.hpp"

namespace bisimdist {

namespace {

using Clock = std::chrono::steady_clock;

SetCoupling transpose(const SetCoupling& r) {
  SetCoupling out;
  out.reserve(r.size());
  for (auto [i, j] : r) out.emplace_back(j, i);
  std::sort(out.begin(), out.end());
  return out;
}

void erase_pair(CouplingStructure& c, int s, int t) {
  // Keys are ordered by (s, i, t, j), so the pair's keys are not contiguous.
  for (auto it = c.f.lower_bound({s, 0, 0, 0}); it != c.f.end() && it->first.s == s;)
    it = it->first.t == t ? c.f.erase(it) : std::next(it);
}

// Installs rho(s,t) = r with the given couplings and mirrors both onto (t,s).
void install(CouplingStructure& c, int s, int t, const SetCoupling& r,
             const std::function<Coupling(int, int)>& coupling_for) {
  erase_pair(c, s, t);
  erase_pair(c, t, s);
  c.at(s, t) = r;
  c.at(t, s) = transpose(r);
  for (auto [i, j] : r) {
    Coupling w = coupling_for(i, j);
    c.f[{t, j, s, i}] = w.transposed();
    c.f[{s, i, t, j}] = std::move(w);
  }
}

void install_diagonal(CouplingStructure& c, const Automaton& a, int s) {
  SetCoupling r;
  for (int i = 0; i < static_cast<int>(a.delta(s).size()); ++i) {
    r.emplace_back(i, i);
    c.f[{s, i, s, i}] = diagonal_coupling(a.delta(s)[i]);
  }
  c.at(s, s) = std::move(r);
}

bool moves(const Automaton& a, const std::vector<char>& clamped, int s, int t) {
  return a.same_label(s, t) && !clamped[s * a.size() + t];
}

// f = k(d) on every demanded off-diagonal pair.
void refresh_couplings(CouplingStructure& c, const Automaton& a, const DistMatrix& d,
                       long* tp_count) {
  const int n = a.size();
  for (int s = 0; s < n; ++s)
    for (int t = s + 1; t < n; ++t) {
      if (c.at(s, t).empty()) continue;
      for (auto [i, j] : c.at(s, t)) {
        Coupling w = min_cost_coupling(a.delta(s)[i], a.delta(t)[j], d).plan;
        c.f[{t, j, s, i}] = w.transposed();
        c.f[{s, i, t, j}] = std::move(w);
      }
      if (tp_count) *tp_count += static_cast<long>(c.at(s, t).size());
    }
}

std::pair<std::size_t, std::size_t> hash_pair(const std::string& text) {
  std::uint64_t fnv = 1469598103934665603ull;
  for (unsigned char ch : text) {
    fnv ^= ch;
    fnv *= 1099511628211ull;
  }
  return {std::hash<std::string>{}(text), static_cast<std::size_t>(fnv)};
}

// State shared by all inner loops of one run.
struct Run {
  const Automaton& a;
  double lambda;
  const SpiOptions& opts;
  SpiTrace& trace;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  long updates = 0;

  double slack() const {
    if (opts.discrepancy.method == DiscrepancyMethod::PolicyIteration) return 1e-9;
    return 1e-9 + 10.0 * opts.discrepancy.tolerance;
  }

  DistMatrix inner(CouplingStructure& c, const DistMatrix* ceiling) {
    std::optional<DistMatrix> prev;
    std::optional<Violator> last;
    for (;;) {
      if (!seen.insert(hash_pair(c.fingerprint())).second)
        throw InternalError("coupling structure repeated during policy iteration");
      DistMatrix gamma = discrepancy(c, a, lambda, opts.discrepancy);
      ++trace.iterations;
      if (prev) {
        const double rise = (gamma - *prev).maxCoeff();
        const double drop = (*prev)(last->s, last->t) - gamma(last->s, last->t);
        if (rise > slack() || drop < opts.eps - slack())
          throw InternalError("discrepancy failed to descend strictly after an update");
      } else if (ceiling && (gamma - *ceiling).maxCoeff() > slack()) {
        throw InternalError("discrepancy exceeds the decreased prefix point");
      }
      auto v = find_violator(gamma, a, lambda, opts.eps, &c.clamped, &trace.tp_count);
      if (!v) return gamma;
      if (++updates > opts.max_updates)
        throw ConvergenceError("policy iteration update cap exceeded", gamma(v->s, v->t) - v->delta);
      install(c, v->s, v->t, v->h.witness,
              [&](int i, int j) { return v->h.plan(i, j); });
      refresh_couplings(c, a, gamma, &trace.tp_count);
      prev = std::move(gamma);
      last = std::move(v);
    }
  }
};

}  // namespace

std::optional<Violator> find_violator(const DistMatrix& d, const Automaton& a, double lambda,
                                      double eps, const std::vector<char>* skip, long* tp_count) {
  const int n = a.size();
  const bool symmetric = (d.array() == d.transpose().array()).all();
  for (int s = 0; s < n; ++s)
    for (int t = symmetric ? s : 0; t < n; ++t) {
      if (!a.same_label(s, t)) continue;  // Delta is 1 there, never below d
      if (skip && (*skip)[s * n + t]) continue;
      if (d(s, t) <= eps) continue;  // Delta >= 0 cannot undercut it by more than eps
      Violator v;
      v.h = hausdorff(d, a.delta(s), a.delta(t));
      if (tp_count) *tp_count += v.h.tp_count;
      v.delta = lambda * v.h.value;
      if (v.delta < d(s, t) - eps) {
        v.s = s;
        v.t = t;
        return v;
      }
    }
  return std::nullopt;
}

std::vector<char> bisimilar_pairs(const Automaton& a) {
  const int n = a.size();
  const auto p = bisimilarity(a);
  std::vector<char> out(n * n, 0);
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t) out[s * n + t] = s != t && p.same(s, t);
  return out;
}

CouplingStructure initial_coupling_structure(const Automaton& a, const std::vector<char>& clamped,
                                             long* tp_count) {
  const int n = a.size();
  CouplingStructure c(n);
  c.clamped = clamped;
  const DistMatrix mismatch = a.label_mismatch();
  for (int s = 0; s < n; ++s) {
    install_diagonal(c, a, s);
    for (int t = s + 1; t < n; ++t) {
      if (!moves(a, clamped, s, t)) continue;
      auto h = hausdorff(mismatch, a.delta(s), a.delta(t));
      if (tp_count) *tp_count += h.tp_count;
      install(c, s, t, h.witness,
              [&](int i, int j) { return north_west_corner(a.delta(s)[i], a.delta(t)[j]); });
    }
  }
  return c;
}

CouplingStructure structure_from(const DistMatrix& d, const Automaton& a,
                                 const std::vector<char>& clamped, long* tp_count) {
  const int n = a.size();
  CouplingStructure c(n);
  c.clamped = clamped;
  for (int s = 0; s < n; ++s) {
    install_diagonal(c, a, s);
    for (int t = s + 1; t < n; ++t) {
      if (!moves(a, clamped, s, t)) continue;
      auto h = hausdorff(d, a.delta(s), a.delta(t));
      if (tp_count) *tp_count += h.tp_count;
      install(c, s, t, h.witness, [&](int i, int j) { return h.plan(i, j); });
    }
  }
  return c;
}

CouplingStructure random_coupling_structure(const Automaton& a, std::mt19937_64& rng) {
  const int n = a.size();
  CouplingStructure c(n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  for (int s = 0; s < n; ++s) {
    install_diagonal(c, a, s);
    for (int t = s + 1; t < n; ++t) {
      if (!a.same_label(s, t)) continue;
      const int ms = static_cast<int>(a.delta(s).size());
      const int mt = static_cast<int>(a.delta(t).size());
      std::set<std::pair<int, int>> r;
      for (int i = 0; i < ms; ++i)
        for (int j = 0; j < mt; ++j)
          if (coin(rng)) r.emplace(i, j);
      std::vector<bool> left(ms, false), right(mt, false);
      for (auto [i, j] : r) left[i] = right[j] = true;
      for (int i = 0; i < ms; ++i)
        if (!left[i]) r.emplace(i, std::uniform_int_distribution<int>(0, mt - 1)(rng));
      for (auto [i, j] : r) right[j] = true;
      for (int j = 0; j < mt; ++j)
        if (!right[j]) r.emplace(std::uniform_int_distribution<int>(0, ms - 1)(rng), j);
      // A random cost picks a random vertex of each transportation polytope.
      DistMatrix cost = DistMatrix::NullaryExpr(n, n, [&]() { return unit(rng); });
      install(c, s, t, SetCoupling(r.begin(), r.end()), [&](int i, int j) {
        return min_cost_coupling(a.delta(s)[i], a.delta(t)[j], cost).plan;
      });
    }
  }
  return c;
}

DistMatrix improve_to_fixpoint(const Automaton& a, CouplingStructure& c, double lambda,
                               const SpiOptions& opts, SpiTrace& trace) {
  Run run{a, lambda, opts, trace, {}, 0};
  return run.inner(c, nullptr);
}

SpiTrace spi_discounted(const Automaton& a, double lambda, const SpiOptions& opts) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw InputError("discounted iteration needs lambda in (0,1)");
  if (!(opts.eps > 0.0)) throw InputError("eps must be positive");
  const auto start = Clock::now();
  SpiTrace trace;
  const auto clamped =
      opts.precompute_bisim ? bisimilar_pairs(a) : std::vector<char>(a.size() * a.size(), 0);
  auto c = initial_coupling_structure(a, clamped, &trace.tp_count);
  Run run{a, lambda, opts, trace, {}, 0};
  trace.final = run.inner(c, nullptr);
  trace.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
  return trace;
}

SpiTrace spi_undiscounted(const Automaton& a, const SpiOptions& opts) {
  if (!(opts.eps > 0.0)) throw InputError("eps must be positive");
  const auto start = Clock::now();
  SpiTrace trace;
  const auto clamped =
      opts.precompute_bisim ? bisimilar_pairs(a) : std::vector<char>(a.size() * a.size(), 0);
  auto c = initial_coupling_structure(a, clamped, &trace.tp_count);
  Run run{a, 1.0, opts, trace, {}, 0};
  std::optional<DistMatrix> ceiling;
  for (;;) {
    if (trace.outer_loops >= opts.max_outer_loops)
      throw ConvergenceError("outer loop cap exceeded", 0.0);
    DistMatrix gamma = run.inner(c, ceiling ? &*ceiling : nullptr);
    ++trace.outer_loops;
    const Relation m = largest_selfclosed(gamma, a, opts.eps, &trace.tp_count);
    if (!m.any()) {
      trace.final = std::move(gamma);
      break;
    }
    auto cert = decrease(gamma, m, a, opts.eps, &trace.tp_count);
    c = structure_from(cert.new_d, a, clamped, &trace.tp_count);
    ceiling = std::move(cert.new_d);
  }
  trace.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
  return trace;
}

SpiTrace spi(const Automaton& a, double lambda, const SpiOptions& opts) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw InputError("lambda must lie in (0,1]");
  return lambda < 1.0 ? spi_discounted(a, lambda, opts) : spi_undiscounted(a, opts);
}

}  // namespace bisimdist
