#include "bisimdist/bisim.hpp"

#include <algorithm>

#include "bisimdist/transport.hpp"

namespace bisimdist {

namespace {

// Every move of s is matched by some move of t inside r.
bool matches(const Automaton& a, int s, int t, const Relation& r) {
  for (const auto& mu : a.delta(s)) {
    bool found = false;
    for (const auto& nu : a.delta(t))
      if (lift_check(mu, nu, r)) {
        found = true;
        break;
      }
    if (!found) return false;
  }
  return true;
}

Relation transpose(const Relation& r) { return r.transpose(); }

}  // namespace

Relation Partition::relation() const {
  const int n = static_cast<int>(block.size());
  Relation r(n, n);
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t) r(s, t) = block[s] == block[t];
  return r;
}

bool lift_check(const Dist& mu, const Dist& nu, const Relation& r) {
  return max_flow(mu, nu, r) >= 1.0 - 1e-12;
}

Partition bisimilarity(const Automaton& a, std::vector<int>* block_counts) {
  const int n = a.size();
  Partition p;
  p.block.assign(n, -1);
  // Start from the label partition, blocks numbered by first member.
  auto renumber = [&](const std::vector<int>& key) {
    p.members.clear();
    std::vector<int> fresh(n, -1);
    for (int s = 0; s < n; ++s) {
      int rep = -1;
      for (int b = 0; b < static_cast<int>(p.members.size()); ++b)
        if (key[p.members[b].front()] == key[s]) {
          rep = b;
          break;
        }
      if (rep < 0) {
        rep = static_cast<int>(p.members.size());
        p.members.emplace_back();
      }
      p.members[rep].push_back(s);
      fresh[s] = rep;
    }
    p.block = fresh;
  };
  renumber(a.labels);
  if (block_counts) block_counts->push_back(p.count());

  for (;;) {
    const Relation r = p.relation();
    // Under an equivalence, liftability is itself an equivalence on
    // distributions, so grouping against a representative is sound.
    std::vector<int> key(n, -1);
    int next = 0;
    for (const auto& members : p.members) {
      std::vector<int> reps;
      for (int s : members) {
        int group = -1;
        for (int rep : reps)
          if (matches(a, s, rep, r) && matches(a, rep, s, r)) {
            group = key[rep];
            break;
          }
        if (group < 0) {
          group = next++;
          reps.push_back(s);
        }
        key[s] = group;
      }
    }
    const int before = p.count();
    renumber(key);
    if (block_counts) block_counts->push_back(p.count());
    if (p.count() == before) break;
  }
  return p;
}

bool is_bisimulation(const Relation& r, const Automaton& a) {
  const int n = a.size();
  const Relation rt = transpose(r);
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t) {
      if (!r(s, t)) continue;
      if (!a.same_label(s, t)) return false;
      if (!matches(a, s, t, r)) return false;
      if (!matches(a, t, s, rt)) return false;
    }
  return true;
}

}  // namespace bisimdist
