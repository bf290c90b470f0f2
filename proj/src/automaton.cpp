#include "bisimdist/automaton.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "bisimdist/error.hpp"

namespace bisimdist {

namespace {

constexpr double kMassTolerance = 1e-9;

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double parse_decimal(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InputError("malformed probability \"" + s + "\"");
  }
  if (used != s.size()) throw InputError("malformed probability \"" + s + "\"");
  return v;
}

std::int64_t parse_integer(const std::string& s, const std::string& whole) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw InputError("malformed probability \"" + whole + "\"");
  return v;
}

}  // namespace

double Dist::mass() const {
  double m = 0;
  for (const auto& [s, w] : entries) m += w;
  return m;
}

double Dist::operator()(int state) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), state,
                             [](const auto& e, int s) { return e.first < s; });
  return (it != entries.end() && it->first == state) ? it->second : 0.0;
}

int Automaton::find_state(std::string_view name) const {
  auto it = std::find(state_names.begin(), state_names.end(), name);
  return it == state_names.end() ? -1 : static_cast<int>(it - state_names.begin());
}

int Automaton::find_label(std::string_view name) const {
  auto it = std::find(label_names.begin(), label_names.end(), name);
  return it == label_names.end() ? -1 : static_cast<int>(it - label_names.begin());
}

DistMatrix Automaton::label_mismatch() const {
  const int n = size();
  DistMatrix d(n, n);
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t) d(s, t) = same_label(s, t) ? 0.0 : 1.0;
  return d;
}

double parse_probability(std::string_view text) {
  const std::string s = trim(text);
  if (s.empty()) throw InputError("empty probability");
  if (auto slash = s.find('/'); slash != std::string::npos) {
    // Integer ratio; exact while numerator and denominator fit in 53 bits.
    const std::int64_t p = parse_integer(trim(s.substr(0, slash)), s);
    const std::int64_t q = parse_integer(trim(s.substr(slash + 1)), s);
    if (q == 0) throw InputError("zero denominator in \"" + s + "\"");
    return static_cast<double>(p) / static_cast<double>(q);
  }
  return parse_decimal(s);
}

std::pair<int, int> parse_range(std::string_view text) {
  const std::string s = trim(text);
  auto to_int = [&](const std::string& part) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || ptr != part.data() + part.size() || part.empty())
      throw InputError("malformed range \"" + s + "\"");
    return v;
  };
  if (auto dots = s.find(".."); dots != std::string::npos) {
    auto lo = to_int(trim(s.substr(0, dots)));
    auto hi = to_int(trim(s.substr(dots + 2)));
    if (lo > hi) throw InputError("empty range \"" + s + "\"");
    return {lo, hi};
  }
  const int v = to_int(s);
  return {v, v};
}

Automaton parse_automaton(std::string_view text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("malformed automaton file: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("states") || !doc.contains("labels") ||
      !doc.contains("transitions"))
    throw InputError("malformed automaton file: expected states, labels, transitions");

  Automaton a;
  const auto& states = doc["states"];
  if (!states.is_array() || states.empty())
    throw InputError("malformed automaton file: states must be a nonempty array");
  for (const auto& s : states) {
    if (!s.is_string()) throw InputError("malformed automaton file: state names are strings");
    auto name = s.get<std::string>();
    if (a.find_state(name) >= 0) throw InputError("duplicate state \"" + name + "\"");
    a.state_names.push_back(std::move(name));
  }
  const int n = a.size();

  const auto& labels = doc["labels"];
  if (!labels.is_object()) throw InputError("malformed automaton file: labels must be an object");
  a.labels.assign(n, -1);
  for (const auto& [state, label] : labels.items()) {
    if (a.find_state(state) < 0) throw InputError("unknown state \"" + state + "\" in labels");
    if (!label.is_string()) throw InputError("malformed automaton file: labels are strings");
  }
  // Label ids follow state order so the numbering is independent of JSON key order.
  for (int s = 0; s < n; ++s) {
    if (!labels.contains(a.state_names[s]))
      throw InputError("state \"" + a.state_names[s] + "\" has no label");
    const auto name = labels[a.state_names[s]].get<std::string>();
    int id = a.find_label(name);
    if (id < 0) {
      id = static_cast<int>(a.label_names.size());
      a.label_names.push_back(name);
    }
    a.labels[s] = id;
  }

  const auto& transitions = doc["transitions"];
  if (!transitions.is_array())
    throw InputError("malformed automaton file: transitions must be an array");
  a.transitions.assign(n, {});
  for (const auto& tr : transitions) {
    if (!tr.is_object() || !tr.contains("from") || !tr.contains("to") || !tr["from"].is_string() ||
        !tr["to"].is_object())
      throw InputError("malformed transition entry");
    const auto from = tr["from"].get<std::string>();
    const int s = a.find_state(from);
    if (s < 0) throw InputError("unknown state \"" + from + "\" in transition");
    Dist mu;
    for (const auto& [target, weight] : tr["to"].items()) {
      const int u = a.find_state(target);
      if (u < 0) throw InputError("unknown state \"" + target + "\" in transition");
      double w = 0;
      if (weight.is_number()) {
        w = weight.get<double>();
      } else if (weight.is_string()) {
        w = parse_probability(weight.get<std::string>());
      } else {
        throw InputError("malformed probability for \"" + target + "\"");
      }
      if (!(w >= 0.0 && w <= 1.0 + kMassTolerance))
        throw InputError("weight out of range in transition from \"" + from + "\"");
      if (w > 0.0) mu.entries.emplace_back(u, w);
    }
    std::sort(mu.entries.begin(), mu.entries.end());
    if (std::abs(mu.mass() - 1.0) > kMassTolerance)
      throw InputError("mass mismatch in transition from \"" + from + "\"");
    a.transitions[s].push_back(std::move(mu));
  }
  for (int s = 0; s < n; ++s)
    if (a.transitions[s].empty())
      throw InputError("non-total transition relation: state \"" + a.state_names[s] +
                       "\" has no transitions");
  return a;
}

Automaton load_automaton(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open \"" + path + "\"");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_automaton(buf.str());
}

std::string serialize_automaton(const Automaton& a) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["states"] = a.state_names;
  ordered_json labels = ordered_json::object();
  for (int s = 0; s < a.size(); ++s) labels[a.state_names[s]] = a.label_names[a.labels[s]];
  doc["labels"] = labels;
  ordered_json transitions = ordered_json::array();
  for (int s = 0; s < a.size(); ++s) {
    for (const auto& mu : a.transitions[s]) {
      ordered_json to = ordered_json::object();
      for (const auto& [u, w] : mu.entries) to[a.state_names[u]] = w;
      transitions.push_back({{"from", a.state_names[s]}, {"to", to}});
    }
  }
  doc["transitions"] = transitions;
  return doc.dump(1) + "\n";
}

std::vector<std::string> validate(const Automaton& a) {
  std::vector<std::string> out;
  const int n = a.size();
  if (n == 0) out.push_back("empty state set");
  if (static_cast<int>(a.labels.size()) != n) out.push_back("label map size mismatch");
  if (static_cast<int>(a.transitions.size()) != n) {
    out.push_back("transition table size mismatch");
    return out;
  }
  for (int s = 0; s < n; ++s) {
    const auto& name = a.state_names[s];
    if (s < static_cast<int>(a.labels.size()) &&
        (a.labels[s] < 0 || a.labels[s] >= static_cast<int>(a.label_names.size())))
      out.push_back("state \"" + name + "\": label id out of range");
    if (a.transitions[s].empty())
      out.push_back("state \"" + name + "\": non-total transition relation");
    for (std::size_t k = 0; k < a.transitions[s].size(); ++k) {
      const auto& mu = a.transitions[s][k];
      const std::string where = "state \"" + name + "\" transition " + std::to_string(k);
      int prev = -1;
      for (const auto& [u, w] : mu.entries) {
        if (u < 0 || u >= n) out.push_back(where + ": support index out of range");
        if (!(w >= 0.0 && w <= 1.0)) out.push_back(where + ": weight out of range");
        if (u <= prev) out.push_back(where + ": support not strictly sorted");
        prev = u;
      }
      if (std::abs(mu.mass() - 1.0) > kMassTolerance) out.push_back(where + ": mass mismatch");
    }
  }
  return out;
}

Automaton generate(const GenParams& p) {
  if (p.n < 1 || p.nd_degree.first < 1 || p.nd_degree.first > p.nd_degree.second ||
      p.prob_degree.first < 1 || p.prob_degree.first > p.prob_degree.second ||
      p.label_count < 1)
    throw InputError("invalid generator parameters");

  std::mt19937_64 rng(p.seed);
  std::uniform_int_distribution<int> label_draw(0, p.label_count - 1);
  std::uniform_int_distribution<int> nd_draw(p.nd_degree.first, p.nd_degree.second);
  std::uniform_int_distribution<int> prob_draw(p.prob_degree.first, p.prob_degree.second);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Automaton a;
  for (int s = 0; s < p.n; ++s) a.state_names.push_back("s" + std::to_string(s));
  for (int l = 0; l < p.label_count; ++l) a.label_names.push_back("l" + std::to_string(l));
  a.labels.resize(p.n);
  for (int s = 0; s < p.n; ++s) a.labels[s] = label_draw(rng);

  std::vector<int> pool(p.n);
  a.transitions.resize(p.n);
  for (int s = 0; s < p.n; ++s) {
    const int k = nd_draw(rng);
    for (int c = 0; c < k; ++c) {
      const int support = std::min(prob_draw(rng), p.n);
      // Partial Fisher-Yates: the first `support` slots are a uniform sample.
      std::iota(pool.begin(), pool.end(), 0);
      for (int i = 0; i < support; ++i) {
        std::uniform_int_distribution<int> pick(i, p.n - 1);
        std::swap(pool[i], pool[pick(rng)]);
      }
      Dist mu;
      double total = 0;
      for (int i = 0; i < support; ++i) {
        const double w = 1.0 - unit(rng);  // (0,1]
        mu.entries.emplace_back(pool[i], w);
        total += w;
      }
      for (auto& e : mu.entries) e.second /= total;
      std::sort(mu.entries.begin(), mu.entries.end());
      a.transitions[s].push_back(std::move(mu));
    }
  }
  return a;
}

}  // namespace bisimdist
