#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "graphtext/graph.hpp"
#include "graphtext/io.hpp"
#include "graphtext/rng.hpp"
#include "graphtext/synth.hpp"

using namespace graphtext;

namespace {

Graph random_graph(int n, double p, Rng& rng) {
    Graph g(n, false);
    for (int i = 0; i < n; ++i) {
        g.set_node_text(i, "plain node");
        for (int j = i + 1; j < n; ++j)
            if (rng.uniform() < p) g.add_edge(i, j, "edge type alpha");
    }
    return g;
}

// Independent all-pairs oracle: Floyd-Warshall over the adjacency matrix.
std::vector<int> floyd_warshall(const Graph& g, int inf) {
    const int n = g.num_nodes();
    std::vector<int> d(static_cast<std::size_t>(n) * n, inf);
    for (int i = 0; i < n; ++i) {
        d[static_cast<std::size_t>(i) * n + i] = 0;
        for (int j = 0; j < n; ++j)
            if (g.has_edge(i, j)) d[static_cast<std::size_t>(i) * n + j] = 1;
    }
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const int via = d[static_cast<std::size_t>(i) * n + k] == inf ||
                                        d[static_cast<std::size_t>(k) * n + j] == inf
                                    ? inf
                                    : d[static_cast<std::size_t>(i) * n + k] +
                                          d[static_cast<std::size_t>(k) * n + j];
                d[static_cast<std::size_t>(i) * n + j] =
                    std::min(d[static_cast<std::size_t>(i) * n + j], via);
            }
    return d;
}

// Independent reachability oracle: boolean adjacency powers.
std::vector<std::vector<bool>> reachable_within(const Graph& g, int hops) {
    const int n = g.num_nodes();
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (int i = 0; i < n; ++i) reach[i][i] = true;
    for (int step = 0; step < hops; ++step) {
        auto next = reach;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (reach[i][j])
                    for (int k = 0; k < n; ++k)
                        if (g.has_edge(j, k)) next[i][k] = true;
        reach = std::move(next);
    }
    return reach;
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

// Enumerates every shortest path between i and j (node sequences).
void all_shortest_paths(const Graph& g, const ShortestPathTable& spd, NodeId u, NodeId j,
                        std::vector<NodeId>& prefix, std::vector<std::vector<NodeId>>& out) {
    prefix.push_back(u);
    if (u == j) {
        out.push_back(prefix);
    } else {
        for (NodeId v = 0; v < g.num_nodes(); ++v)
            if (g.has_edge(u, v) && spd.reachable(v, j) &&
                spd.at(v, j) == spd.at(u, j) - 1)
                all_shortest_paths(g, spd, v, j, prefix, out);
    }
    prefix.pop_back();
}

}  // namespace

TEST_CASE("bfs on the complete triangle") {
    Graph g(3, false);
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) g.add_edge(i, j, "e");
    const auto spd = bfs_all_pairs(g);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(spd.at(i, j) == (i == j ? 0 : 1));
}

TEST_CASE("bfs on a path graph") {
    Graph g(3, false);
    g.add_edge(0, 1, "e");
    g.add_edge(1, 2, "e");
    const auto spd = bfs_all_pairs(g);
    CHECK(spd.at(0, 2) == 2);
    CHECK(spd.at(2, 0) == 2);
    CHECK(spd.at(0, 0) == 0);
}

TEST_CASE("bfs equals the Floyd-Warshall oracle on 30 random graphs") {
    Rng rng(2024);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(11));  // N <= 12
        const Graph g = random_graph(n, 0.3, rng);
        const auto spd = bfs_all_pairs(g);
        const auto oracle = floyd_warshall(g, spd.unreachable);
        CHECK(spd.dist == oracle);
        // invariants: zero diagonal, symmetry, triangle inequality
        for (int i = 0; i < n; ++i) {
            CHECK(spd.at(i, i) == 0);
            for (int j = 0; j < n; ++j) {
                CHECK(spd.at(i, j) == spd.at(j, i));
                for (int k = 0; k < n; ++k)
                    if (spd.reachable(i, k) && spd.reachable(k, j))
                        CHECK(spd.at(i, j) <= spd.at(i, k) + spd.at(k, j));
            }
        }
    }
}

TEST_CASE("shortest_path_edges basics") {
    Graph g(3, false);
    g.add_edge(0, 1, "e");
    g.add_edge(1, 2, "e");
    const auto spd = bfs_all_pairs(g);
    CHECK(shortest_path_edges(g, spd, 0, 1) == std::vector<Edge>{{0, 1}});
    CHECK(shortest_path_edges(g, spd, 0, 2) == std::vector<Edge>{{0, 1}, {1, 2}});

    Graph two(2, false);
    const auto spd2 = bfs_all_pairs(two);
    CHECK(shortest_path_edges(two, spd2, 0, 1).empty());  // unreachable
}

TEST_CASE("shortest_path_edges tie-break picks the smallest node sequence") {
    // diamond: 0-1-3 and 0-2-3
    Graph g(4, false);
    g.add_edge(0, 1, "e");
    g.add_edge(1, 3, "e");
    g.add_edge(0, 2, "e");
    g.add_edge(2, 3, "e");
    const auto spd = bfs_all_pairs(g);
    CHECK(shortest_path_edges(g, spd, 0, 3) == std::vector<Edge>{{0, 1}, {1, 3}});

    // oracle: enumerate all shortest paths, take the lexicographically
    // smallest node sequence
    std::vector<NodeId> prefix;
    std::vector<std::vector<NodeId>> paths;
    all_shortest_paths(g, spd, 0, 3, prefix, paths);
    std::sort(paths.begin(), paths.end());
    const auto& best = paths.front();
    std::vector<Edge> expect;
    for (std::size_t i = 0; i + 1 < best.size(); ++i) expect.push_back({best[i], best[i + 1]});
    CHECK(shortest_path_edges(g, spd, 0, 3) == expect);
}

TEST_CASE("shortest_path_edges properties on random graphs") {
    Rng rng(555);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 3 + static_cast<int>(rng.below(8));
        const Graph g = random_graph(n, 0.35, rng);
        const auto spd = bfs_all_pairs(g);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                const auto path = shortest_path_edges(g, spd, i, j);
                if (!spd.reachable(i, j)) {
                    CHECK(path.empty());
                    continue;
                }
                CHECK(static_cast<int>(path.size()) == spd.at(i, j));
                // oracle: lexicographically smallest among all shortest paths
                std::vector<NodeId> prefix;
                std::vector<std::vector<NodeId>> paths;
                all_shortest_paths(g, spd, i, j, prefix, paths);
                std::sort(paths.begin(), paths.end());
                std::vector<Edge> expect;
                for (std::size_t p = 0; p + 1 < paths.front().size(); ++p)
                    expect.push_back({paths.front()[p], paths.front()[p + 1]});
                CHECK(path == expect);
                // dag edges: exactly the union over all shortest paths
                std::set<Edge> union_edges;
                for (const auto& seq : paths)
                    for (std::size_t p = 0; p + 1 < seq.size(); ++p)
                        union_edges.insert({seq[p], seq[p + 1]});
                const auto dag = shortest_path_dag_edges(g, spd, i, j);
                CHECK(std::set<Edge>(dag.begin(), dag.end()) == union_edges);
            }
    }
}

TEST_CASE("extract_khop on a star graph") {
    Graph g(6, false);
    for (int leaf = 1; leaf <= 5; ++leaf) g.add_edge(0, leaf, "e");
    const auto sample = extract_khop(g, Center::node(0), 1, 16);
    CHECK(sample.size() == 6);
    CHECK(sample.nodes == std::vector<NodeId>{0, 1, 2, 3, 4, 5});
    CHECK(sample.center_local == std::vector<int>{0});
}

TEST_CASE("extract_khop BFS layers on a path") {
    Graph g(5, false);
    for (int i = 0; i < 4; ++i) g.add_edge(i, i + 1, "e");
    const auto sample = extract_khop(g, Center::node(0), 2, 16);
    CHECK(sample.nodes == std::vector<NodeId>{0, 1, 2});
}

TEST_CASE("extract_khop matches an adjacency-power reachability oracle") {
    Rng rng(99);
    const Graph g = random_graph(20, 0.15, rng);
    const int radius = 2;
    const auto sample = extract_khop(g, Center::node(7), radius, 100);
    const auto reach = reachable_within(g, radius);
    std::set<NodeId> expect;
    for (int v = 0; v < 20; ++v)
        if (reach[7][v]) expect.insert(v);
    CHECK(std::set<NodeId>(sample.nodes.begin(), sample.nodes.end()) == expect);
    // induced adjacency is exact
    for (int i = 0; i < sample.size(); ++i)
        for (int j = 0; j < sample.size(); ++j)
            CHECK(sample.has_edge(i, j) == g.has_edge(sample.nodes[i], sample.nodes[j]));
}

TEST_CASE("extract_khop pair center unions both balls") {
    Graph g(7, false);
    g.add_edge(0, 1, "e");
    g.add_edge(2, 3, "e");
    g.add_edge(3, 4, "e");
    const auto sample = extract_khop(g, Center::pair(0, 3), 1, 16);
    CHECK(std::set<NodeId>(sample.nodes.begin(), sample.nodes.end()) ==
          std::set<NodeId>{0, 1, 2, 3, 4});
    CHECK(sample.center_local.size() == 2);
    CHECK(sample.nodes[sample.center_local[0]] == 0);
    CHECK(sample.nodes[sample.center_local[1]] == 3);
}

TEST_CASE("extract_khop truncation keeps lower layers then lower ids") {
    Graph g(6, false);
    for (int leaf = 1; leaf <= 5; ++leaf) g.add_edge(0, leaf, "e");
    const auto sample = extract_khop(g, Center::node(0), 1, 3);
    CHECK(sample.nodes == std::vector<NodeId>{0, 1, 2});
}

TEST_CASE("extract_khop is invariant to parent relabeling") {
    Rng rng(4242);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 8 + static_cast<int>(rng.below(6));
        const Graph g = random_graph(n, 0.25, rng);
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t i = perm.size(); i > 1; --i)
            std::swap(perm[i - 1], perm[rng.below(i)]);
        // relabeled parent: node v becomes perm[v]
        Graph h(n, false);
        for (int v = 0; v < n; ++v) h.set_node_text(perm[v], g.node_text(v));
        for (const auto& [a, b] : g.edges())
            h.add_edge(perm[a], perm[b], g.edge_description(a, b));

        const int center = static_cast<int>(rng.below(n));
        const auto s1 = extract_khop(g, Center::node(center), 2, n);
        const auto s2 = extract_khop(h, Center::node(perm[center]), 2, n);
        // canonicalized edge sets match after mapping back through perm
        std::set<Edge> e1, e2;
        for (int i = 0; i < s1.size(); ++i)
            for (int j = 0; j < s1.size(); ++j)
                if (s1.has_edge(i, j))
                    e1.insert({std::min(s1.nodes[i], s1.nodes[j]),
                               std::max(s1.nodes[i], s1.nodes[j])});
        std::vector<int> inverse(n);
        for (int v = 0; v < n; ++v) inverse[perm[v]] = v;
        for (int i = 0; i < s2.size(); ++i)
            for (int j = 0; j < s2.size(); ++j)
                if (s2.has_edge(i, j)) {
                    const int a = inverse[s2.nodes[i]], b = inverse[s2.nodes[j]];
                    e2.insert({std::min(a, b), std::max(a, b)});
                }
        CHECK(e1 == e2);
    }
}

TEST_CASE("cycle space dimension of a triangle is 1") {
    Graph g(3, false);
    g.add_edge(0, 1, "e");
    g.add_edge(1, 2, "e");
    g.add_edge(0, 2, "e");
    CHECK(cycle_space_dimension(g) == 1);
}

TEST_CASE("common neighbors on a path") {
    Graph g(3, false);
    g.add_edge(0, 1, "e");
    g.add_edge(1, 2, "e");
    CHECK(common_neighbor_count(g, 0, 2) == 1);
}

TEST_CASE("conn labels agree with a union-find oracle on 100 instances") {
    GenParams params;
    params.edge_prob = 0.15;
    const auto instances = gen_synthetic(TaskFamily::Conn, params, 31337, 100);
    CHECK(instances.size() == 100);
    for (const auto& inst : instances) {
        REQUIRE(inst.center.kind == CenterKind::Pair);
        UnionFind uf(inst.graph.num_nodes());
        for (const auto& [a, b] : inst.graph.edges()) uf.unite(a, b);
        const bool connected = uf.find(inst.center.a) == uf.find(inst.center.b);
        CHECK(inst.label == (connected ? "yes" : "no"));
    }
}

TEST_CASE("spd labels agree with an adjacency-power oracle") {
    GenParams params;
    const auto instances = gen_synthetic(TaskFamily::Spd, params, 901, 40);
    for (const auto& inst : instances) {
        int dist = -1;
        for (int hops = 0; hops <= inst.graph.num_nodes(); ++hops) {
            if (reachable_within(inst.graph, hops)[inst.center.a][inst.center.b]) {
                dist = hops;
                break;
            }
        }
        REQUIRE(dist >= 0);
        CHECK(inst.label == std::to_string(dist));
        CHECK(inst.numeric == doctest::Approx(dist));
    }
}

TEST_CASE("cn and cycle and graph-reg labels are exact") {
    GenParams params;
    for (const auto& inst : gen_synthetic(TaskFamily::Cn, params, 77, 30)) {
        // independent oracle: (A^2)_{uv} counts length-2 walks = common neighbors
        int walks2 = 0;
        for (int w = 0; w < inst.graph.num_nodes(); ++w)
            if (inst.graph.has_edge(inst.center.a, w) && inst.graph.has_edge(w, inst.center.b))
                ++walks2;
        CHECK(inst.label == std::to_string(walks2));
    }
    for (const auto& inst : gen_synthetic(TaskFamily::Cycle, params, 78, 30)) {
        UnionFind uf(inst.graph.num_nodes());
        for (const auto& [a, b] : inst.graph.edges()) uf.unite(a, b);
        std::set<int> roots;
        for (int v = 0; v < inst.graph.num_nodes(); ++v) roots.insert(uf.find(v));
        const int expect = inst.graph.edge_count() - inst.graph.num_nodes() +
                           static_cast<int>(roots.size());
        CHECK(inst.label == std::to_string(expect));
    }
    for (const auto& inst : gen_synthetic(TaskFamily::GraphReg, params, 79, 20))
        CHECK(inst.label == std::to_string(inst.graph.edge_count()));
}

TEST_CASE("link-pred labels match adjacency, node-cls labels match majority vote") {
    GenParams params;
    for (const auto& inst : gen_synthetic(TaskFamily::LinkPred, params, 91, 40)) {
        const bool edge = inst.graph.has_edge(inst.center.a, inst.center.b);
        CHECK(inst.label == (edge ? "yes" : "no"));
    }
    int label_matches = 0;
    const auto instances = gen_synthetic(TaskFamily::NodeCls, params, 92, 40);
    for (const auto& inst : instances) {
        // recompute the majority color from the marked node's text and
        // neighborhood texts (texts carry the colors)
        const auto color_of = [&](NodeId v) {
            const auto& text = inst.graph.node_text(v);
            for (std::size_t c = 0; c < color_names().size(); ++c)
                if (text.find(color_names()[c]) != std::string::npos) return static_cast<int>(c);
            return -1;
        };
        std::vector<int> votes(params.class_count, 0);
        const int own = color_of(inst.center.a);
        ++votes[own];
        for (NodeId u : inst.graph.neighbors_out(inst.center.a)) ++votes[color_of(u)];
        const int best = *std::max_element(votes.begin(), votes.end());
        // ties resolve to the center's color when it is among the leaders
        const int expect = votes[own] == best
                               ? own
                               : static_cast<int>(std::max_element(votes.begin(), votes.end()) -
                                                  votes.begin());
        if (inst.label == color_names()[expect]) ++label_matches;
    }
    CHECK(label_matches == static_cast<int>(instances.size()));
}

TEST_CASE("generation is deterministic and balanced for binary families") {
    GenParams params;
    const auto a = gen_synthetic(TaskFamily::Conn, params, 5150, 60);
    const auto b = gen_synthetic(TaskFamily::Conn, params, 5150, 60);
    REQUIRE(a.size() == b.size());
    int yes = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(graph_to_text(a[i].graph) == graph_to_text(b[i].graph));
        CHECK(a[i].label == b[i].label);
        yes += a[i].label == "yes" ? 1 : 0;
    }
    CHECK(yes > 15);
    CHECK(yes < 45);
}

TEST_CASE("generator rejects bad parameters") {
    GenParams params;
    params.nodes_min = 0;
    CHECK_THROWS(gen_synthetic(TaskFamily::Conn, params, 1, 1));
    params.nodes_min = 5;
    params.nodes_max = 3;
    CHECK_THROWS(gen_synthetic(TaskFamily::Conn, params, 1, 1));
    params.nodes_max = 8;
    params.edge_prob = 1.5;
    CHECK_THROWS(gen_synthetic(TaskFamily::Conn, params, 1, 1));
}

TEST_CASE("graph invariants are enforced") {
    Graph g(3, false);
    CHECK_THROWS(g.add_edge(1, 1, "self"));
    CHECK_THROWS(Graph(0, false));
    g.add_edge(0, 1, "e");
    CHECK(g.has_edge(1, 0));  // undirected symmetry
    CHECK(g.edge_description(1, 0) == "e");
    g.validate();
}

TEST_CASE("sample permutation carries ids, centers and matrices") {
    Graph g(4, false);
    g.add_edge(0, 1, "e");
    g.add_edge(1, 2, "e");
    g.add_edge(2, 3, "e");
    const auto sample = extract_khop(g, Center::pair(0, 3), 3, 16);
    const std::vector<int> perm = {2, 0, 3, 1};
    const auto permuted = sample.permuted(perm);
    for (int i = 0; i < sample.size(); ++i) {
        CHECK(permuted.nodes[i] == sample.nodes[perm[i]]);
        for (int j = 0; j < sample.size(); ++j) {
            CHECK(permuted.has_edge(i, j) == sample.has_edge(perm[i], perm[j]));
            CHECK(permuted.spd.at(i, j) == sample.spd.at(perm[i], perm[j]));
        }
    }
    CHECK(permuted.nodes[permuted.center_local[0]] == sample.nodes[sample.center_local[0]]);
    CHECK(permuted.nodes[permuted.center_local[1]] == sample.nodes[sample.center_local[1]]);
}
