#include "bisimdist/ssg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "bisimdist/error.hpp"
#include "bisimdist/transport.hpp"
#include "reachability.hpp"

namespace bisimdist {

namespace {

constexpr long kSweepCap = 10000000;

int add_vertex(Game& g, VertexKind k, std::string name) {
  g.kind.push_back(k);
  g.name.push_back(std::move(name));
  g.succ.emplace_back();
  g.prob.emplace_back();
  return g.size() - 1;
}

std::string fmt(double x) {
  std::ostringstream out;
  out << x;
  return out.str();
}

const char* kind_name(VertexKind k) {
  switch (k) {
    case VertexKind::Zero: return "zero";
    case VertexKind::One: return "one";
    case VertexKind::Max: return "max";
    case VertexKind::Min: return "min";
    case VertexKind::Random: return "random";
  }
  return "?";
}

}  // namespace

std::vector<SetCoupling> enumerate_setcouplings(int size_a, int size_b) {
  if (size_a < 1 || size_b < 1 || size_a > 3 || size_b > 3)
    throw InputError("set-coupling enumeration guard exceeded (sizes must be 1..3)");
  const int cells = size_a * size_b;
  std::vector<SetCoupling> out;
  for (unsigned mask = 1; mask < (1u << cells); ++mask) {
    SetCoupling r;
    for (int c = 0; c < cells; ++c)
      if (mask & (1u << c)) r.emplace_back(c / size_b, c % size_b);
    if (is_set_coupling(r, size_a, size_b)) out.push_back(std::move(r));
  }
  return out;
}

Game build_game(const Automaton& a, double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw InputError("lambda must lie in (0,1]");
  const int n = a.size();
  if (n > 5) throw InputError("game guard exceeded: more than 5 states");
  for (int s = 0; s < n; ++s) {
    if (a.delta(s).size() > 3) throw InputError("game guard exceeded: more than 3 transitions");
    for (const auto& mu : a.delta(s))
      if (mu.support_size() > 3) throw InputError("game guard exceeded: support larger than 3");
  }

  Game g;
  g.bottom = add_vertex(g, VertexKind::Zero, "bottom");
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t) {
      const auto label = "(" + a.state_names[s] + "," + a.state_names[t] + ")";
      g.pair_vertex[{s, t}] =
          add_vertex(g, a.same_label(s, t) ? VertexKind::Min : VertexKind::One, label);
    }

  std::map<std::tuple<int, int, int, int>, int> dist_pair;
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t) {
      if (!a.same_label(s, t)) continue;
      const int from = g.vertex(s, t);
      const int ms = static_cast<int>(a.delta(s).size());
      const int mt = static_cast<int>(a.delta(t).size());
      for (const auto& r : enumerate_setcouplings(ms, mt)) {
        std::string label = "R" + g.name[from] + "{";
        for (auto [i, j] : r) label += "(" + std::to_string(i) + "," + std::to_string(j) + ")";
        const int rv = add_vertex(g, VertexKind::Max, label + "}");
        g.succ[from].push_back(rv);
        for (auto [i, j] : r) {
          auto [it, fresh] = dist_pair.try_emplace({s, i, t, j}, -1);
          if (fresh) {
            it->second = add_vertex(g, VertexKind::Min,
                                    "(" + a.state_names[s] + "#" + std::to_string(i) + "," +
                                        a.state_names[t] + "#" + std::to_string(j) + ")");
            const int mv = it->second;
            for (const auto& omega : enumerate_vertices(a.delta(s)[i], a.delta(t)[j])) {
              std::string wl = "w" + g.name[mv] + "{";
              for (const auto& e : omega.entries)
                wl += "(" + a.state_names[e.from] + "," + a.state_names[e.to] + "):" + fmt(e.mass) + " ";
              const int wv = add_vertex(g, VertexKind::Random, wl + "}");
              g.succ[mv].push_back(wv);
              for (const auto& e : omega.entries) {
                g.succ[wv].push_back(g.vertex(e.from, e.to));
                g.prob[wv].push_back(lambda * e.mass);
              }
              if (lambda < 1.0) {
                g.succ[wv].push_back(g.bottom);
                g.prob[wv].push_back(1.0 - lambda);
              }
            }
          }
          g.succ[rv].push_back(it->second);
        }
      }
    }
  return g;
}

std::vector<std::string> check_game(const Game& g) {
  std::vector<std::string> out;
  for (int v = 0; v < g.size(); ++v) {
    const bool sink = g.kind[v] == VertexKind::Zero || g.kind[v] == VertexKind::One;
    if (sink && !g.succ[v].empty()) out.push_back("sink " + g.name[v] + " has successors");
    if (!sink && g.succ[v].empty()) out.push_back("vertex " + g.name[v] + " has no successor");
    for (int w : g.succ[v])
      if (w < 0 || w >= g.size()) out.push_back("edge out of range at " + g.name[v]);
    if (g.kind[v] == VertexKind::Random) {
      if (g.prob[v].size() != g.succ[v].size()) {
        out.push_back("P row misaligned at " + g.name[v]);
        continue;
      }
      double total = 0.0;
      for (double p : g.prob[v]) {
        if (!(p > 0.0)) out.push_back("non-positive P entry at " + g.name[v]);
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-9) out.push_back("P row mass mismatch at " + g.name[v]);
    }
  }
  return out;
}

std::vector<double> phi_apply(const Game& g, const std::vector<double>& f) {
  std::vector<double> out(g.size(), 0.0);
  for (int v = 0; v < g.size(); ++v) {
    switch (g.kind[v]) {
      case VertexKind::Zero: out[v] = 0.0; break;
      case VertexKind::One: out[v] = 1.0; break;
      case VertexKind::Max: {
        double best = 0.0;
        for (int w : g.succ[v]) best = std::max(best, f[w]);
        out[v] = best;
        break;
      }
      case VertexKind::Min: {
        double best = 1.0;
        for (int w : g.succ[v]) best = std::min(best, f[w]);
        out[v] = best;
        break;
      }
      case VertexKind::Random: {
        double sum = 0.0;
        for (std::size_t k = 0; k < g.succ[v].size(); ++k) sum += g.prob[v][k] * f[g.succ[v][k]];
        out[v] = sum;
        break;
      }
    }
  }
  return out;
}

std::vector<double> ssg_value(const Game& g, double eps) {
  std::vector<double> f(g.size(), 0.0);
  // In-place sweeps, deepest vertices first; every iterate stays below the least fixed point.
  for (long sweep = 0;; ++sweep) {
    if (sweep >= kSweepCap) throw ConvergenceError("game value iteration cap exceeded", eps);
    double change = 0.0;
    for (int v = g.size() - 1; v >= 0; --v) {
      double x = 0.0;
      switch (g.kind[v]) {
        case VertexKind::Zero: x = 0.0; break;
        case VertexKind::One: x = 1.0; break;
        case VertexKind::Max:
          for (int w : g.succ[v]) x = std::max(x, f[w]);
          break;
        case VertexKind::Min:
          x = 1.0;
          for (int w : g.succ[v]) x = std::min(x, f[w]);
          break;
        case VertexKind::Random:
          for (std::size_t k = 0; k < g.succ[v].size(); ++k) x += g.prob[v][k] * f[g.succ[v][k]];
          break;
      }
      change = std::max(change, std::abs(x - f[v]));
      f[v] = x;
    }
    if (change <= eps) break;
  }
  return f;
}

std::vector<double> sink_reach_probability(const Game& g, const Strategy& smin, const Strategy& smax) {
  detail::SparseMdp mdp;
  for (int v = 0; v < g.size(); ++v) {
    const auto k = g.kind[v];
    mdp.add_state(k == VertexKind::Zero || k == VertexKind::One);
    if (k == VertexKind::Min || k == VertexKind::Max) {
      const int w = (k == VertexKind::Min ? smin : smax).choice.at(v);
      if (std::find(g.succ[v].begin(), g.succ[v].end(), w) == g.succ[v].end())
        throw InputError("strategy leaves the edge relation at " + g.name[v]);
      mdp.add_action({{w, 1.0}});
    } else if (k == VertexKind::Random) {
      std::vector<std::pair<int, double>> row;
      for (std::size_t i = 0; i < g.succ[v].size(); ++i) row.emplace_back(g.succ[v][i], g.prob[v][i]);
      mdp.add_action(row);
    }
  }
  return detail::solve_reachability(mdp, {}).value;
}

std::string serialize_game(const Game& g) {
  using nlohmann::ordered_json;
  ordered_json doc;
  ordered_json vertices = ordered_json::array();
  ordered_json edges = ordered_json::array();
  ordered_json rows = ordered_json::array();
  for (int v = 0; v < g.size(); ++v) {
    vertices.push_back({{"id", v}, {"kind", kind_name(g.kind[v])}, {"name", g.name[v]}});
    for (int w : g.succ[v]) edges.push_back({v, w});
    if (g.kind[v] == VertexKind::Random) {
      ordered_json row = ordered_json::object();
      for (std::size_t k = 0; k < g.succ[v].size(); ++k)
        row[std::to_string(g.succ[v][k])] = g.prob[v][k];
      rows.push_back({{"vertex", v}, {"P", row}});
    }
  }
  doc["vertices"] = vertices;
  doc["edges"] = edges;
  doc["random"] = rows;
  return doc.dump(1) + "\n";
}

}  // namespace bisimdist
