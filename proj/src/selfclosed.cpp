#include "bisimdist/selfclosed.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "bisimdist/error.hpp"
#include "bisimdist/lifting.hpp"
#include "bisimdist/transport.hpp"

namespace bisimdist {

namespace {

Eigen::MatrixXd kantorovich_table(const DistMatrix& d, const Automaton& a, int s, int t,
                                  long* tp_count) {
  const auto& ds = a.delta(s);
  const auto& dt = a.delta(t);
  Eigen::MatrixXd k(ds.size(), dt.size());
  for (std::size_t i = 0; i < ds.size(); ++i)
    for (std::size_t j = 0; j < dt.size(); ++j) k(i, j) = min_cost_coupling(ds[i], dt[j], d).value;
  if (tp_count) *tp_count += k.size();
  return k;
}

// Conditions (ii) and (iii) for the pair (s, t) against relation m.
bool transfer_ok(const DistMatrix& d, const Automaton& a, int s, int t, const Eigen::MatrixXd& k,
                 const Relation& m, double eps, long* tp_count) {
  const double dst = d(s, t);
  const auto& ds = a.delta(s);
  const auto& dt = a.delta(t);
  auto closes = [&](int i, int j) {
    if (k(i, j) > dst + eps) return false;  // restricted minimum is never below K
    if (tp_count) ++*tp_count;
    auto r = restricted_min(ds[i], dt[j], d, m);
    return r && std::abs(*r - dst) <= eps;
  };
  for (int i = 0; i < k.rows(); ++i) {
    if (std::abs(k.row(i).minCoeff() - dst) > eps) continue;
    bool ok = false;
    for (int j = 0; j < k.cols() && !ok; ++j) ok = closes(i, j);
    if (!ok) return false;
  }
  for (int j = 0; j < k.cols(); ++j) {
    if (std::abs(k.col(j).minCoeff() - dst) > eps) continue;
    bool ok = false;
    for (int i = 0; i < k.rows() && !ok; ++i) ok = closes(i, j);
    if (!ok) return false;
  }
  return true;
}

}  // namespace

Relation largest_selfclosed(const DistMatrix& d, const Automaton& a, double eps, long* tp_count) {
  const int n = a.size();
  if (d.rows() != n || d.cols() != n) throw InputError("distance matrix size mismatch");
  const bool symmetric = (d.array() == d.transpose().array()).all();

  std::vector<Eigen::MatrixXd> tables(n * n);
  double residual = 0.0;
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t) {
      if (!a.same_label(s, t)) {
        residual = std::max(residual, std::abs(d(s, t) - 1.0));
        continue;
      }
      if (symmetric && t < s)
        tables[s * n + t] = tables[t * n + s].transpose();
      else
        tables[s * n + t] = kantorovich_table(d, a, s, t, tp_count);
      const auto& k = tables[s * n + t];
      const double h = std::max(k.rowwise().minCoeff().maxCoeff(), k.colwise().minCoeff().maxCoeff());
      residual = std::max(residual, std::abs(d(s, t) - h));
    }
  if (residual > eps)
    throw InputError("largest_selfclosed needs a fixed point of Delta_1 (residual " +
                     std::to_string(residual) + ")");

  Relation m = Relation::Constant(n, n, false);
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t) m(s, t) = a.same_label(s, t) && d(s, t) > eps;

  for (bool changed = true; changed;) {
    changed = false;
    std::vector<std::pair<int, int>> drop;
    for (int s = 0; s < n; ++s)
      for (int t = 0; t < n; ++t)
        if (m(s, t) && !transfer_ok(d, a, s, t, tables[s * n + t], m, eps, tp_count))
          drop.emplace_back(s, t);
    for (auto [s, t] : drop) m(s, t) = false;
    changed = !drop.empty();
  }
  return m;
}

bool is_selfclosed(const Relation& m, const DistMatrix& d, const Automaton& a, double eps) {
  const int n = a.size();
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t) {
      if (!m(s, t)) continue;
      if (!a.same_label(s, t) || !(d(s, t) > eps)) return false;
      if (!transfer_ok(d, a, s, t, kantorovich_table(d, a, s, t, nullptr), m, eps, nullptr))
        return false;
    }
  return true;
}

DecreaseCert decrease(const DistMatrix& d, const Relation& m, const Automaton& a, double eps,
                      long* tp_count) {
  if (!m.any()) throw InputError("decrease needs a nonempty relation");
  if (!is_selfclosed(m, d, a, eps)) throw InputError("decrease needs a self-closed relation");
  const int n = a.size();
  DecreaseCert cert;
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t) {
      if (!m(s, t)) continue;
      const auto k = kantorovich_table(d, a, s, t, tp_count);
      for (int i = 0; i < k.rows(); ++i) {
        const double th = d(s, t) - k.row(i).minCoeff();
        if (th > eps) cert.theta1 = std::min(cert.theta1, th);
      }
      for (int j = 0; j < k.cols(); ++j) {
        const double th = d(s, t) - k.col(j).minCoeff();
        if (th > eps) cert.theta2 = std::min(cert.theta2, th);
      }
      cert.theta3 = std::min(cert.theta3, d(s, t));
    }
  cert.theta = std::min({cert.theta1, cert.theta2, cert.theta3});
  cert.new_d = d;
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t)
      if (m(s, t)) cert.new_d(s, t) -= cert.theta;
  return cert;
}

}  // namespace bisimdist
