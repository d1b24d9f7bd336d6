#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace graphtext {

using NodeId = int;
using Edge = std::pair<NodeId, NodeId>;

// Attributed graph: boolean adjacency, one attribute string per node, one
// description string per directed edge slot. Undirected graphs keep the
// adjacency symmetric and mirror each description to both (i,j) and (j,i).
class Graph {
public:
    Graph(int num_nodes, bool directed);

    int num_nodes() const { return n_; }
    bool directed() const { return directed_; }

    bool has_edge(NodeId i, NodeId j) const { return adj_[index(i, j)]; }
    int edge_count() const;  // undirected edges counted once

    void add_edge(NodeId i, NodeId j, std::string description);

    const std::string& node_text(NodeId i) const;
    void set_node_text(NodeId i, std::string text);

    const std::string& edge_description(NodeId i, NodeId j) const;

    std::vector<NodeId> neighbors_out(NodeId i) const;

    // Ordered list of edges: all (i,j) with A_ij = 1 for directed graphs,
    // i < j for undirected ones.
    std::vector<Edge> edges() const;

    std::vector<double> node_features;  // optional, row-major N x feature_dim
    int node_feature_dim = 0;

    // Throws if an invariant is broken (self-loop, missing description,
    // asymmetric undirected adjacency).
    void validate() const;

private:
    std::size_t index(NodeId i, NodeId j) const;
    void check_node(NodeId i) const;

    int n_;
    bool directed_;
    std::vector<std::uint8_t> adj_;
    std::vector<std::string> node_texts_;
    std::map<Edge, std::string> edge_descriptions_;
};

// All-pairs unweighted shortest path distances. `unreachable` is strictly
// greater than any realizable distance (num_nodes works: paths have at most
// num_nodes - 1 edges).
struct ShortestPathTable {
    int n = 0;
    int unreachable = 0;
    std::vector<int> dist;  // row-major n x n

    int at(NodeId i, NodeId j) const { return dist[static_cast<std::size_t>(i) * n + j]; }
    bool reachable(NodeId i, NodeId j) const { return at(i, j) != unreachable; }
};

// BFS from every source; rows are independent so they run in parallel.
ShortestPathTable bfs_all_pairs(const Graph& graph);

// One shortest path from i to j as an edge list, empty iff unreachable.
// Among all shortest paths, returns the one whose node-index sequence is
// lexicographically smallest.
std::vector<Edge> shortest_path_edges(const Graph& graph, const ShortestPathTable& spd,
                                      NodeId i, NodeId j);

// Every edge (u,w) lying on at least one shortest path from i to j, in
// lexicographic order. This set is relabeling-equivariant, unlike any single
// tie-broken path, which is what the structural bias needs.
std::vector<Edge> shortest_path_dag_edges(const Graph& graph, const ShortestPathTable& spd,
                                          NodeId i, NodeId j);

// Connected components (weak connectivity for directed graphs is not needed
// here; callers use undirected graphs).
int count_components(const Graph& graph);

// Cycle-space dimension |E| - |V| + components.
int cycle_space_dimension(const Graph& graph);

// |N(u) ∩ N(v)| over out-neighborhoods, excluding u and v themselves.
int common_neighbor_count(const Graph& graph, NodeId u, NodeId v);

enum class CenterKind { Node, Pair, WholeGraph };

struct Center {
    CenterKind kind = CenterKind::WholeGraph;
    NodeId a = -1;
    NodeId b = -1;

    static Center node(NodeId v) { return {CenterKind::Node, v, -1}; }
    static Center pair(NodeId u, NodeId v) { return {CenterKind::Pair, u, v}; }
    static Center whole_graph() { return {CenterKind::WholeGraph, -1, -1}; }
};

// Induced k-hop subgraph. `nodes` holds the original ids of the parent
// graph, in (BFS layer, original id) order; adjacency and spd are recomputed
// on the subgraph. center_local holds the sample-local indices of the center
// node(s); empty for whole-graph samples.
struct SubgraphSample {
    std::vector<NodeId> nodes;
    std::vector<std::uint8_t> adjacency;  // row-major n x n
    ShortestPathTable spd;
    Center center;
    std::vector<int> center_local;
    int hop_radius = 0;

    int size() const { return static_cast<int>(nodes.size()); }
    bool has_edge(int i, int j) const {
        return adjacency[static_cast<std::size_t>(i) * nodes.size() + j] != 0;
    }
    // Degree within the sample (out-degree for directed parents).
    int degree(int i) const;
    // Applies a permutation to the sample's node order: row i of the result
    // is row perm[i] of the input. Original ids and center designations
    // travel with the rows.
    SubgraphSample permuted(const std::vector<int>& perm) const;
};

SubgraphSample extract_khop(const Graph& graph, const Center& center, int hop_radius,
                            int max_nodes);

enum class TaskFamily {
    NodeCls,
    LinkPred,
    GraphCls,
    GraphReg,
    Conn,
    Spd,
    Cn,
    Cycle,
};

const char* family_name(TaskFamily f);
TaskFamily family_from_name(const std::string& name);
bool family_is_regression(TaskFamily f);

// One training/eval item: the sampled subgraph plus the tokenized answer and
// reconstruction targets.
struct TaskInstance {
    SubgraphSample sample;
    TaskFamily family = TaskFamily::Conn;
    std::vector<int> target_tokens;
    std::vector<int> reconstruction_tokens;
    std::optional<double> numeric_target;
};

}  // namespace graphtext
