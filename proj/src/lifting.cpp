#include "bisimdist/lifting.hpp"

#include <algorithm>
#include <cmath>

#include "bisimdist/error.hpp"

namespace bisimdist {

bool is_set_coupling(const SetCoupling& r, int size_a, int size_b) {
  std::vector<bool> left(size_a, false), right(size_b, false);
  for (auto [i, j] : r) {
    if (i < 0 || i >= size_a || j < 0 || j >= size_b) return false;
    left[i] = true;
    right[j] = true;
  }
  return std::all_of(left.begin(), left.end(), [](bool x) { return x; }) &&
         std::all_of(right.begin(), right.end(), [](bool x) { return x; });
}

HausdorffEval hausdorff(const DistMatrix& d, std::span<const Dist> a, std::span<const Dist> b) {
  if (a.empty() || b.empty()) throw InputError("Hausdorff lifting of an empty set");
  const int m = static_cast<int>(a.size());
  const int n = static_cast<int>(b.size());
  HausdorffEval out;
  out.k.resize(m, n);
  out.plans.reserve(m * n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      auto res = min_cost_coupling(a[i], b[j], d);
      out.k(i, j) = res.value;
      out.plans.push_back(std::move(res.plan));
      ++out.tp_count;
    }
  for (int i = 0; i < m; ++i) {
    int best = 0;
    for (int j = 1; j < n; ++j)
      if (out.k(i, j) < out.k(i, best)) best = j;
    out.witness.emplace_back(i, best);
    out.value = std::max(out.value, out.k(i, best));
  }
  for (int j = 0; j < n; ++j) {
    int best = 0;
    for (int i = 1; i < m; ++i)
      if (out.k(i, j) < out.k(best, j)) best = i;
    out.witness.emplace_back(best, j);
    out.value = std::max(out.value, out.k(best, j));
  }
  std::sort(out.witness.begin(), out.witness.end());
  out.witness.erase(std::unique(out.witness.begin(), out.witness.end()), out.witness.end());
  return out;
}

SetCoupling build_h(const DistMatrix& d, const Automaton& a, int s, int t) {
  return hausdorff(d, a.delta(s), a.delta(t)).witness;
}

Coupling build_k(const DistMatrix& d, const Dist& mu, const Dist& nu) {
  return min_cost_coupling(mu, nu, d).plan;
}

Coupling diagonal_coupling(const Dist& mu) {
  Coupling c;
  c.left = mu;
  c.right = mu;
  for (const auto& [u, w] : mu.entries) c.entries.push_back({u, u, w});
  return c;
}

double delta_pair(double lambda, const DistMatrix& d, const Automaton& a, int s, int t,
                  long* tp_count) {
  if (!a.same_label(s, t)) return 1.0;
  auto h = hausdorff(d, a.delta(s), a.delta(t));
  if (tp_count) *tp_count += h.tp_count;
  return lambda * h.value;
}

DistMatrix delta_apply(double lambda, const DistMatrix& d, const Automaton& a, long* tp_count) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw InputError("lambda must lie in (0,1]");
  const int n = a.size();
  if (d.rows() != n || d.cols() != n) throw InputError("distance matrix size mismatch");
  DistMatrix out(n, n);
  const bool symmetric = (d.array() == d.transpose().array()).all();
  const bool zero_diag = (d.diagonal().array() == 0.0).all();
  for (int s = 0; s < n; ++s) {
    for (int t = symmetric ? s : 0; t < n; ++t) {
      // With d(u,u) = 0 the diagonal coupling costs nothing, so Delta(d)(s,s) = 0.
      double v = (s == t && zero_diag) ? 0.0 : delta_pair(lambda, d, a, s, t, tp_count);
      out(s, t) = v;
      if (symmetric) out(t, s) = v;
    }
  }
  return out;
}

}  // namespace bisimdist
