#include <gtest/gtest.h>

#include <json.hpp>

#include "bisimdist/error.hpp"
#include "bisimdist/policy_iter.hpp"
#include "bisimdist/ssg.hpp"
#include "support.hpp"

using namespace bisimdist;
namespace ts = testing_support;

namespace {

int count_kind(const Game& g, VertexKind k) {
  int c = 0;
  for (auto x : g.kind) c += x == k;
  return c;
}

Strategy random_strategy(const Game& g, std::mt19937_64& rng, VertexKind k) {
  Strategy st{std::vector<int>(g.size(), -1)};
  for (int v = 0; v < g.size(); ++v)
    if (g.kind[v] == k) st.choice[v] = g.succ[v][rng() % g.succ[v].size()];
  return st;
}

}  // namespace

TEST(SetCouplings, Counts) {
  EXPECT_EQ(enumerate_setcouplings(1, 1).size(), 1u);
  EXPECT_EQ(enumerate_setcouplings(2, 1).size(), 1u);
  EXPECT_EQ(enumerate_setcouplings(2, 2).size(), 7u);
  EXPECT_EQ(enumerate_setcouplings(2, 3).size(), 25u);
  EXPECT_EQ(enumerate_setcouplings(3, 3).size(), 265u);
  for (const auto& r : enumerate_setcouplings(3, 2)) EXPECT_TRUE(is_set_coupling(r, 3, 2));
  EXPECT_THROW(enumerate_setcouplings(4, 1), InputError);
}

TEST(BuildGame, CoinShape) {
  auto a = ts::coin();
  const auto g = build_game(a, 1.0);
  EXPECT_TRUE(check_game(g).empty());
  const int t = a.find_state("t"), u = a.find_state("u"), v = a.find_state("v");
  const int tu = g.vertex(t, u);
  EXPECT_EQ(g.kind[tu], VertexKind::Min);
  ASSERT_EQ(g.succ[tu].size(), 1u);
  const int r = g.succ[tu][0];
  EXPECT_EQ(g.kind[r], VertexKind::Max);
  EXPECT_EQ(g.succ[r].size(), 2u);
  EXPECT_EQ(g.kind[g.vertex(v, u)], VertexKind::One);
  EXPECT_EQ(count_kind(g, VertexKind::Zero), 1);
}

TEST(BuildGame, AllLabelsDiffer) {
  auto a = parse_automaton(R"({"states":["x","y","z"],"labels":{"x":"a","y":"b","z":"c"},
    "transitions":[{"from":"x","to":{"y":1}},{"from":"y","to":{"z":1}},{"from":"z","to":{"x":1}}]})");
  const auto g = build_game(a, 1.0);
  for (int s = 0; s < 3; ++s)
    for (int t = 0; t < 3; ++t)
      EXPECT_EQ(g.kind[g.vertex(s, t)], s == t ? VertexKind::Min : VertexKind::One);
}

TEST(BuildGame, DiscountEdgesToBottom) {
  const auto g = build_game(ts::gamblers(), 0.5);
  EXPECT_TRUE(check_game(g).empty());
  int random = 0;
  for (int v = 0; v < g.size(); ++v) {
    if (g.kind[v] != VertexKind::Random) continue;
    ++random;
    ASSERT_EQ(g.succ[v].back(), g.bottom);
    EXPECT_DOUBLE_EQ(g.prob[v].back(), 0.5);
  }
  EXPECT_GT(random, 0);
}

TEST(BuildGame, Guards) {
  EXPECT_THROW(build_game(ts::random_automaton(1, 6, 6), 1.0), InputError);
  EXPECT_THROW(build_game(ts::coin(), 0.0), InputError);
}

TEST(CheckGame, ReportsDefects) {
  auto g = build_game(ts::coin(), 0.5);
  for (int v = 0; v < g.size(); ++v)
    if (g.kind[v] == VertexKind::Random) {
      g.prob[v][0] += 0.25;
      break;
    }
  EXPECT_FALSE(check_game(g).empty());
  auto h = build_game(ts::coin(), 0.5);
  h.succ[h.bottom].push_back(0);
  EXPECT_FALSE(check_game(h).empty());
}

TEST(Phi, SinksAndMonotonicity) {
  const auto g = build_game(ts::gamblers(), 0.8);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> f(g.size()), h(g.size());
    for (int v = 0; v < g.size(); ++v) {
      f[v] = u(rng);
      h[v] = std::min(1.0, f[v] + 0.3 * u(rng));
    }
    const auto pf = phi_apply(g, f), ph = phi_apply(g, h);
    double gap = 0.0;
    for (int v = 0; v < g.size(); ++v) gap = std::max(gap, h[v] - f[v]);
    for (int v = 0; v < g.size(); ++v) {
      if (g.kind[v] == VertexKind::Zero) { EXPECT_EQ(pf[v], 0.0); }
      if (g.kind[v] == VertexKind::One) { EXPECT_EQ(pf[v], 1.0); }
      EXPECT_LE(pf[v], ph[v] + 1e-15);
      EXPECT_LE(ph[v] - pf[v], gap + 1e-15);
    }
  }
}

TEST(SsgValue, Fixtures) {
  auto c = ts::coin();
  const auto gc = build_game(c, 1.0);
  EXPECT_NEAR(ssg_value(gc, 1e-12)[gc.vertex(c.find_state("t"), c.find_state("u"))], 0.5, 1e-9);
  auto b = ts::gamblers();
  const auto gb = build_game(b, 1.0);
  EXPECT_NEAR(ssg_value(gb, 1e-12)[gb.vertex(b.find_state("f"), b.find_state("b"))], 0.01, 1e-9);
  const auto vb = ssg_value(gb, 1e-12);
  EXPECT_LE(std::abs(vb[gb.vertex(0, 0)]), 0.0);
}

TEST(SsgValue, IsFixedPointOfPhi) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto a = ts::random_automaton(seed, 2, 4, {1, 2}, {1, 3});
    const auto g = build_game(a, 0.8);
    const auto f = ssg_value(g, 1e-12);
    const auto pf = phi_apply(g, f);
    for (int v = 0; v < g.size(); ++v) EXPECT_NEAR(pf[v], f[v], 1e-10);
  }
}

TEST(SsgValue, MatchesDistance) {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    auto a = ts::random_automaton(seed + 30, 2, 4, {1, 2}, {1, 3});
    for (double lambda : {0.5, 1.0}) {
      const auto g = build_game(a, lambda);
      const auto f = ssg_value(g, 1e-10);
      const auto d = spi(a, lambda).final;
      for (int s = 0; s < a.size(); ++s)
        for (int t = 0; t < a.size(); ++t) EXPECT_NEAR(f[g.vertex(s, t)], d(s, t), 1e-4) << seed;
    }
  }
}

TEST(SinkReach, DiscountedGamesStop) {
  auto a = ts::random_automaton(4, 3, 4, {1, 2}, {1, 3});
  const auto g = build_game(a, 0.5);
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = sink_reach_probability(g, random_strategy(g, rng, VertexKind::Min),
                                          random_strategy(g, rng, VertexKind::Max));
    for (double x : p) EXPECT_NEAR(x, 1.0, 1e-9);
  }
}

TEST(SinkReach, UndiscountedCoinNeedNotStop) {
  auto c = ts::coin();
  const auto g = build_game(c, 1.0);
  // The min player keeps (t,u) on its self-loop coupling forever.
  Strategy smin{std::vector<int>(g.size(), -1)}, smax{std::vector<int>(g.size(), -1)};
  for (int v = 0; v < g.size(); ++v) {
    if (g.kind[v] == VertexKind::Min || g.kind[v] == VertexKind::Max) {
      smin.choice[v] = g.succ[v].front();
      smax.choice[v] = g.succ[v].front();
    }
  }
  const auto p = sink_reach_probability(g, smin, smax);
  EXPECT_LT(p[g.vertex(c.find_state("t"), c.find_state("u"))], 1.0);
  Strategy off = smin;
  off.choice[g.vertex(0, 0)] = g.bottom;
  EXPECT_THROW(sink_reach_probability(g, off, smax), InputError);
}

TEST(SerializeGame, ListsEveryVertex) {
  const auto g = build_game(ts::coin(), 0.8);
  const auto doc = nlohmann::json::parse(serialize_game(g));
  EXPECT_EQ(doc["vertices"].size(), static_cast<std::size_t>(g.size()));
  std::size_t edges = 0, random = 0;
  for (int v = 0; v < g.size(); ++v) {
    edges += g.succ[v].size();
    random += g.kind[v] == VertexKind::Random;
  }
  EXPECT_EQ(doc["edges"].size(), edges);
  EXPECT_EQ(doc["random"].size(), random);
}
