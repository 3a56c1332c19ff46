#include <gtest/gtest.h>

#include <random>

#include "savi/graph.hpp"

namespace savi {
namespace {

LatentDag diamond() { return LatentDag({1, 1, 1, 1}, {{1, 2}, {1, 3}, {2, 4}, {3, 4}}); }

TEST(TopoSort, Chain) {
  EXPECT_EQ(topo_sort(make_chain(3, 1)), (std::vector<NodeId>{1, 2, 3}));
}

TEST(TopoSort, EdgelessAscending) {
  EXPECT_EQ(topo_sort(make_edgeless(3, 1)), (std::vector<NodeId>{1, 2, 3}));
}

TEST(TopoSort, DiamondTieBreak) {
  EXPECT_EQ(topo_sort(diamond()), (std::vector<NodeId>{1, 2, 3, 4}));
}

TEST(TopoSort, TieBreakPrefersSmallIdOverInsertion) {
  // 3 is a source, 1 waits on 2
  LatentDag dag({1, 1, 1}, {{2, 1}});
  EXPECT_EQ(topo_sort(dag), (std::vector<NodeId>{2, 1, 3}));
}

TEST(TopoSort, Idempotent) {
  const auto a = topo_sort(diamond());
  EXPECT_EQ(a, topo_sort(diamond()));
}

TEST(TopoSort, CycleNamesAnEdge) {
  LatentDag dag({1, 1, 1}, {{1, 2}, {2, 3}, {3, 2}});
  try {
    topo_sort(dag);
    FAIL() << "expected CycleError";
  } catch (const CycleError& e) {
    const Edge bad = e.edge();
    EXPECT_TRUE((bad == Edge{2, 3}) || (bad == Edge{3, 2}));
    EXPECT_NE(std::string(e.what()).find("cycle"), std::string::npos);
  }
}

TEST(LatentDag, RejectsSelfEdgeAndBadIds) {
  EXPECT_THROW(LatentDag({1, 1}, {{1, 1}}), GraphError);
  EXPECT_THROW(LatentDag({1, 1}, {{1, 3}}), GraphError);
  EXPECT_THROW(LatentDag({1, 0}, {}), GraphError);
}

TEST(VirtualRoot, Edgeless) {
  const LatentDag r = add_virtual_root(make_edgeless(3, 1));
  EXPECT_TRUE(r.has_root());
  EXPECT_EQ(r.children(kRoot), (std::vector<NodeId>{1, 2, 3}));
  EXPECT_EQ(r.dim(kRoot), 0);
}

TEST(VirtualRoot, ChainAndDiamond) {
  EXPECT_EQ(add_virtual_root(make_chain(3, 1)).children(kRoot), (std::vector<NodeId>{1}));
  const LatentDag r = add_virtual_root(diamond());
  EXPECT_EQ(r.children(kRoot), (std::vector<NodeId>{1}));
  EXPECT_TRUE(r.has_edge(2, 4));
  EXPECT_EQ(r.edges().size(), 4u);  // root links are not user edges
  EXPECT_EQ(r.parents(1), (std::vector<NodeId>{kRoot}));
}

TEST(VirtualRoot, TwiceIsRejected) {
  const LatentDag r = add_virtual_root(make_chain(2, 1));
  EXPECT_THROW(add_virtual_root(r), GraphError);
}

TEST(VirtualRoot, SortsFirst) { EXPECT_EQ(topo_sort(add_virtual_root(diamond())).front(), kRoot); }

TEST(Neighbours, Diamond) {
  const LatentDag d = diamond();
  EXPECT_EQ(d.children(1), (std::vector<NodeId>{2, 3}));
  EXPECT_EQ(d.parents(4), (std::vector<NodeId>{2, 3}));
  EXPECT_TRUE(make_chain(3, 1).children(3).empty());
}

TEST(Descendants, Diamond) {
  EXPECT_EQ(descendants(diamond(), 1), (std::vector<NodeId>{2, 3, 4}));
  EXPECT_TRUE(descendants(diamond(), 4).empty());
}

TEST(EdgeLiteral, RoundTrip) {
  const auto e = parse_edges(" 1>2, 2 > 3 ");
  EXPECT_EQ(e, (std::vector<Edge>{{1, 2}, {2, 3}}));
  EXPECT_EQ(format_edges(e), "1>2,2>3");
  EXPECT_TRUE(parse_edges("").empty());
  EXPECT_THROW(parse_edges("1-2"), GraphError);
  EXPECT_THROW(parse_edges("1>x"), GraphError);
}

TEST(TopoSortProperty, RandomDagsNeverVisitChildFirst) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 8);
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i + 1;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Edge> edges;
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        if (rng() % 3 == 0) edges.push_back({perm[a], perm[b]});
      }
    }
    const LatentDag dag(std::vector<int>(n, 1), edges);
    const auto order = topo_sort(dag);
    ASSERT_EQ(static_cast<int>(order.size()), n);
    std::vector<int> pos(n + 1);
    for (int p = 0; p < n; ++p) pos[order[p]] = p;
    for (const Edge& e : dag.edges()) EXPECT_LT(pos[e.parent], pos[e.child]);
    EXPECT_EQ(topo_sort(add_virtual_root(dag)).front(), kRoot);
  }
}

}  // namespace
}  // namespace savi
