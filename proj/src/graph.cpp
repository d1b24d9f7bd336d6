#include "graphtext/graph.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace graphtext {

Graph::Graph(int num_nodes, bool directed)
    : n_(num_nodes),
      directed_(directed),
      adj_(static_cast<std::size_t>(num_nodes) * num_nodes, 0),
      node_texts_(num_nodes) {
    if (num_nodes < 1) throw std::invalid_argument("Graph: need at least one node");
}

std::size_t Graph::index(NodeId i, NodeId j) const {
    return static_cast<std::size_t>(i) * n_ + j;
}

void Graph::check_node(NodeId i) const {
    if (i < 0 || i >= n_) throw std::out_of_range("Graph: node id out of range");
}

int Graph::edge_count() const {
    int total = 0;
    for (auto v : adj_) total += v;
    return directed_ ? total : total / 2;
}

void Graph::add_edge(NodeId i, NodeId j, std::string description) {
    check_node(i);
    check_node(j);
    if (i == j) throw std::invalid_argument("Graph: self-loops are not allowed");
    adj_[index(i, j)] = 1;
    edge_descriptions_[{i, j}] = description;
    if (!directed_) {
        adj_[index(j, i)] = 1;
        edge_descriptions_[{j, i}] = std::move(description);
    }
}

const std::string& Graph::node_text(NodeId i) const {
    check_node(i);
    return node_texts_[i];
}

void Graph::set_node_text(NodeId i, std::string text) {
    check_node(i);
    node_texts_[i] = std::move(text);
}

const std::string& Graph::edge_description(NodeId i, NodeId j) const {
    auto it = edge_descriptions_.find({i, j});
    if (it == edge_descriptions_.end())
        throw std::out_of_range("Graph: no description for requested edge");
    return it->second;
}

std::vector<NodeId> Graph::neighbors_out(NodeId i) const {
    check_node(i);
    std::vector<NodeId> out;
    for (NodeId j = 0; j < n_; ++j)
        if (adj_[index(i, j)]) out.push_back(j);
    return out;
}

std::vector<Edge> Graph::edges() const {
    std::vector<Edge> result;
    for (NodeId i = 0; i < n_; ++i)
        for (NodeId j = 0; j < n_; ++j)
            if (adj_[index(i, j)] && (directed_ || i < j)) result.push_back({i, j});
    return result;
}

void Graph::validate() const {
    for (NodeId i = 0; i < n_; ++i)
        if (adj_[index(i, i)]) throw std::runtime_error("Graph: self-loop found");
    if (!directed_) {
        for (NodeId i = 0; i < n_; ++i)
            for (NodeId j = 0; j < n_; ++j)
                if (adj_[index(i, j)] != adj_[index(j, i)])
                    throw std::runtime_error("Graph: undirected adjacency not symmetric");
    }
    for (NodeId i = 0; i < n_; ++i)
        for (NodeId j = 0; j < n_; ++j)
            if (adj_[index(i, j)] && edge_descriptions_.find({i, j}) == edge_descriptions_.end())
                throw std::runtime_error("Graph: edge without description");
}

namespace {

// Single-source BFS over an adjacency matrix; dist must be preset to
// `unreachable`.
void bfs_fill(const std::uint8_t* adj, int n, NodeId source, int unreachable, int* dist) {
    dist[source] = 0;
    std::deque<NodeId> queue{source};
    while (!queue.empty()) {
        const NodeId u = queue.front();
        queue.pop_front();
        const std::uint8_t* row = adj + static_cast<std::size_t>(u) * n;
        for (NodeId v = 0; v < n; ++v) {
            if (row[v] && dist[v] == unreachable) {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
}

ShortestPathTable all_pairs_from_matrix(const std::uint8_t* adj, int n) {
    ShortestPathTable table;
    table.n = n;
    table.unreachable = n;
    table.dist.assign(static_cast<std::size_t>(n) * n, table.unreachable);
#pragma omp parallel for schedule(static) if (n > 16)
    for (NodeId s = 0; s < n; ++s) {
        bfs_fill(adj, n, s, table.unreachable, table.dist.data() + static_cast<std::size_t>(s) * n);
    }
    return table;
}

}  // namespace

ShortestPathTable bfs_all_pairs(const Graph& graph) {
    const int n = graph.num_nodes();
    std::vector<std::uint8_t> adj(static_cast<std::size_t>(n) * n, 0);
    for (NodeId i = 0; i < n; ++i)
        for (NodeId j = 0; j < n; ++j)
            adj[static_cast<std::size_t>(i) * n + j] = graph.has_edge(i, j) ? 1 : 0;
    return all_pairs_from_matrix(adj.data(), n);
}

std::vector<Edge> shortest_path_edges(const Graph& graph, const ShortestPathTable& spd,
                                      NodeId i, NodeId j) {
    if (i == j) throw std::invalid_argument("shortest_path_edges: endpoints must differ");
    if (!spd.reachable(i, j)) return {};
    // Greedy step to the smallest-index neighbor that stays on a shortest
    // path; this yields the lexicographically smallest node sequence.
    std::vector<Edge> path;
    NodeId u = i;
    while (u != j) {
        const int remaining = spd.at(u, j);
        for (NodeId v = 0; v < graph.num_nodes(); ++v) {
            if (graph.has_edge(u, v) && spd.at(v, j) == remaining - 1) {
                path.push_back({u, v});
                u = v;
                break;
            }
        }
    }
    return path;
}

std::vector<Edge> shortest_path_dag_edges(const Graph& graph, const ShortestPathTable& spd,
                                          NodeId i, NodeId j) {
    if (i == j) return {};
    if (!spd.reachable(i, j)) return {};
    const int d = spd.at(i, j);
    std::vector<Edge> result;
    for (NodeId u = 0; u < graph.num_nodes(); ++u) {
        if (spd.at(i, u) == spd.unreachable) continue;
        for (NodeId w = 0; w < graph.num_nodes(); ++w) {
            if (!graph.has_edge(u, w)) continue;
            if (spd.at(w, j) == spd.unreachable) continue;
            if (spd.at(i, u) + 1 + spd.at(w, j) == d) result.push_back({u, w});
        }
    }
    return result;
}

int count_components(const Graph& graph) {
    const auto spd = bfs_all_pairs(graph);
    const int n = graph.num_nodes();
    std::vector<char> seen(n, 0);
    int count = 0;
    for (int v = 0; v < n; ++v) {
        if (seen[v]) continue;
        ++count;
        for (int u = 0; u < n; ++u)
            if (spd.reachable(v, u)) seen[u] = 1;
    }
    return count;
}

int cycle_space_dimension(const Graph& graph) {
    return graph.edge_count() - graph.num_nodes() + count_components(graph);
}

int common_neighbor_count(const Graph& graph, NodeId u, NodeId v) {
    int common = 0;
    for (NodeId w = 0; w < graph.num_nodes(); ++w)
        if (w != u && w != v && graph.has_edge(u, w) && graph.has_edge(v, w)) ++common;
    return common;
}

int SubgraphSample::degree(int i) const {
    const int n = size();
    int deg = 0;
    for (int j = 0; j < n; ++j) deg += adjacency[static_cast<std::size_t>(i) * n + j];
    return deg;
}

SubgraphSample SubgraphSample::permuted(const std::vector<int>& perm) const {
    const int n = size();
    if (static_cast<int>(perm.size()) != n)
        throw std::invalid_argument("SubgraphSample::permuted: bad permutation size");
    SubgraphSample out;
    out.center = center;
    out.hop_radius = hop_radius;
    out.nodes.resize(n);
    out.adjacency.assign(static_cast<std::size_t>(n) * n, 0);
    out.spd.n = n;
    out.spd.unreachable = spd.unreachable;
    out.spd.dist.assign(static_cast<std::size_t>(n) * n, 0);
    std::vector<int> inverse(n, -1);
    for (int i = 0; i < n; ++i) {
        out.nodes[i] = nodes[perm[i]];
        inverse[perm[i]] = i;
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            out.adjacency[static_cast<std::size_t>(i) * n + j] =
                adjacency[static_cast<std::size_t>(perm[i]) * n + perm[j]];
            out.spd.dist[static_cast<std::size_t>(i) * n + j] =
                spd.dist[static_cast<std::size_t>(perm[i]) * n + perm[j]];
        }
    for (int c : center_local) out.center_local.push_back(inverse[c]);
    return out;
}

SubgraphSample extract_khop(const Graph& graph, const Center& center, int hop_radius,
                            int max_nodes) {
    if (hop_radius < 0) throw std::invalid_argument("extract_khop: hop_radius must be >= 0");
    if (max_nodes < 1) throw std::invalid_argument("extract_khop: max_nodes must be >= 1");
    const int n = graph.num_nodes();

    // layer[v] = BFS distance to the nearest center node (multi-source for
    // pair centers); whole-graph samples take every node at layer 0.
    std::vector<int> layer(n, -1);
    std::vector<NodeId> seeds;
    switch (center.kind) {
        case CenterKind::Node:
            seeds = {center.a};
            break;
        case CenterKind::Pair:
            seeds = {center.a, center.b};
            break;
        case CenterKind::WholeGraph:
            break;
    }
    for (NodeId s : seeds)
        if (s < 0 || s >= n) throw std::out_of_range("extract_khop: center out of range");

    SubgraphSample sample;
    sample.center = center;
    sample.hop_radius = hop_radius;

    if (center.kind == CenterKind::WholeGraph) {
        sample.nodes.resize(n);
        for (int v = 0; v < n; ++v) sample.nodes[v] = v;
    } else {
        std::deque<NodeId> queue;
        for (NodeId s : seeds) {
            if (layer[s] == -1) {
                layer[s] = 0;
                queue.push_back(s);
            }
        }
        while (!queue.empty()) {
            const NodeId u = queue.front();
            queue.pop_front();
            if (layer[u] == hop_radius) continue;
            // Hop expansion follows edges in either direction so directed
            // parents still yield a neighborhood around the center.
            for (NodeId v = 0; v < n; ++v) {
                if ((graph.has_edge(u, v) || graph.has_edge(v, u)) && layer[v] == -1) {
                    layer[v] = layer[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        std::vector<NodeId> members;
        for (NodeId v = 0; v < n; ++v)
            if (layer[v] >= 0) members.push_back(v);
        std::sort(members.begin(), members.end(), [&](NodeId a, NodeId b) {
            if (layer[a] != layer[b]) return layer[a] < layer[b];
            return a < b;
        });
        if (static_cast<int>(members.size()) > max_nodes) members.resize(max_nodes);
        sample.nodes = std::move(members);
    }

    const int sn = sample.size();
    std::vector<int> local(n, -1);
    for (int i = 0; i < sn; ++i) local[sample.nodes[i]] = i;

    sample.adjacency.assign(static_cast<std::size_t>(sn) * sn, 0);
    for (int i = 0; i < sn; ++i)
        for (int j = 0; j < sn; ++j)
            sample.adjacency[static_cast<std::size_t>(i) * sn + j] =
                graph.has_edge(sample.nodes[i], sample.nodes[j]) ? 1 : 0;

    sample.spd = all_pairs_from_matrix(sample.adjacency.data(), sn);

    for (NodeId s : seeds) {
        if (local[s] < 0) throw std::runtime_error("extract_khop: center dropped by truncation");
        sample.center_local.push_back(local[s]);
    }
    return sample;
}

const char* family_name(TaskFamily f) {
    switch (f) {
        case TaskFamily::NodeCls: return "node-cls";
        case TaskFamily::LinkPred: return "link-pred";
        case TaskFamily::GraphCls: return "graph-cls";
        case TaskFamily::GraphReg: return "graph-reg";
        case TaskFamily::Conn: return "conn";
        case TaskFamily::Spd: return "spd";
        case TaskFamily::Cn: return "cn";
        case TaskFamily::Cycle: return "cycle";
    }
    throw std::logic_error("family_name: unknown family");
}

TaskFamily family_from_name(const std::string& name) {
    for (TaskFamily f : {TaskFamily::NodeCls, TaskFamily::LinkPred, TaskFamily::GraphCls,
                         TaskFamily::GraphReg, TaskFamily::Conn, TaskFamily::Spd, TaskFamily::Cn,
                         TaskFamily::Cycle}) {
        if (name == family_name(f)) return f;
    }
    throw std::invalid_argument("unknown task family: " + name);
}

bool family_is_regression(TaskFamily f) {
    return f == TaskFamily::GraphReg || f == TaskFamily::Spd || f == TaskFamily::Cn ||
           f == TaskFamily::Cycle;
}

}  // namespace graphtext
