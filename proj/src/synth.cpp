#include "graphtext/synth.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "graphtext/rng.hpp"

namespace graphtext {

const std::vector<std::string>& color_names() {
    static const std::vector<std::string> names = {"red",    "green",  "blue",
                                                   "yellow", "purple", "orange"};
    return names;
}

const std::vector<std::string>& edge_type_names() {
    static const std::vector<std::string> names = {"alpha", "beta", "gamma"};
    return names;
}

namespace {

struct Drawn {
    Graph graph;
    std::vector<int> colors;
};

Drawn draw_graph(Rng& rng, const GenParams& params) {
    const int span = params.nodes_max - params.nodes_min + 1;
    const int n = params.nodes_min + static_cast<int>(rng.below(span));
    Graph g(n, /*directed=*/false);
    std::vector<int> colors(n);
    for (int v = 0; v < n; ++v) colors[v] = static_cast<int>(rng.below(params.class_count));
    const auto& types = edge_type_names();
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (rng.bernoulli(params.edge_prob)) {
                const auto& t = types[rng.below(types.size())];
                g.add_edge(i, j, "edge type " + t);
            }
        }
    }
    // Base attribute text; the chosen center gets a marker word prepended so
    // the target entity is identifiable from attributes alone.
    for (int v = 0; v < n; ++v) g.set_node_text(v, color_names()[colors[v]] + " node");
    return {std::move(g), std::move(colors)};
}

void mark_node(Graph& g, NodeId v, const std::string& marker) {
    g.set_node_text(v, marker + " " + g.node_text(v));
}

std::pair<NodeId, NodeId> draw_pair(Rng& rng, int n) {
    const NodeId u = static_cast<NodeId>(rng.below(n));
    NodeId v = static_cast<NodeId>(rng.below(n - 1));
    if (v >= u) ++v;
    return {u, v};
}

GeneratedInstance make_pair_instance(Graph&& g, NodeId u, NodeId v, TaskFamily family,
                                     std::string label, std::optional<double> numeric) {
    mark_node(g, u, "first");
    mark_node(g, v, "second");
    return {std::move(g), Center::pair(u, v), family, std::move(label), numeric};
}

GeneratedInstance generate_one(TaskFamily family, const GenParams& params, Rng& rng,
                               int instance_index) {
    const bool want_positive = instance_index % 2 == 0;
    const int want_class = instance_index;
    switch (family) {
        case TaskFamily::Conn: {
            for (int attempt = 0;; ++attempt) {
                Drawn d = draw_graph(rng, params);
                if (d.graph.num_nodes() < 2) continue;
                auto spd = bfs_all_pairs(d.graph);
                auto [u, v] = draw_pair(rng, d.graph.num_nodes());
                const bool connected = spd.reachable(u, v);
                if (connected != want_positive && attempt < params.max_retry) continue;
                return make_pair_instance(std::move(d.graph), u, v, family,
                                          connected ? "yes" : "no", std::nullopt);
            }
        }
        case TaskFamily::Spd: {
            for (int attempt = 0;; ++attempt) {
                Drawn d = draw_graph(rng, params);
                if (d.graph.num_nodes() < 2) continue;
                auto spd = bfs_all_pairs(d.graph);
                auto [u, v] = draw_pair(rng, d.graph.num_nodes());
                if (!spd.reachable(u, v) && attempt < params.max_retry) continue;
                if (!spd.reachable(u, v)) continue;  // never emit unreachable pairs
                const int dist = spd.at(u, v);
                return make_pair_instance(std::move(d.graph), u, v, family,
                                          std::to_string(dist), dist);
            }
        }
        case TaskFamily::Cn: {
            Drawn d = draw_graph(rng, params);
            while (d.graph.num_nodes() < 2) d = draw_graph(rng, params);
            auto [u, v] = draw_pair(rng, d.graph.num_nodes());
            const int common = common_neighbor_count(d.graph, u, v);
            return make_pair_instance(std::move(d.graph), u, v, family, std::to_string(common),
                                      common);
        }
        case TaskFamily::Cycle: {
            Drawn d = draw_graph(rng, params);
            const int dim = cycle_space_dimension(d.graph);
            return {std::move(d.graph), Center::whole_graph(), family, std::to_string(dim),
                    static_cast<double>(dim)};
        }
        case TaskFamily::NodeCls: {
            // Majority color over the closed 1-hop neighborhood; ties go to
            // the center's own color when it is among the leaders, otherwise
            // to the lowest class index. Rejection keeps classes balanced.
            const int desired = want_class % params.class_count;
            for (int attempt = 0;; ++attempt) {
                Drawn d = draw_graph(rng, params);
                const NodeId v = static_cast<NodeId>(rng.below(d.graph.num_nodes()));
                std::vector<int> votes(params.class_count, 0);
                ++votes[d.colors[v]];
                for (NodeId u : d.graph.neighbors_out(v)) ++votes[d.colors[u]];
                const int best = *std::max_element(votes.begin(), votes.end());
                int label = votes[d.colors[v]] == best
                                ? d.colors[v]
                                : static_cast<int>(std::max_element(votes.begin(), votes.end()) -
                                                   votes.begin());
                if (label != desired && attempt < params.max_retry) continue;
                mark_node(d.graph, v, "target");
                return {std::move(d.graph), Center::node(v), family, color_names()[label],
                        std::nullopt};
            }
        }
        case TaskFamily::LinkPred: {
            for (int attempt = 0;; ++attempt) {
                Drawn d = draw_graph(rng, params);
                if (d.graph.num_nodes() < 2) continue;
                if (want_positive) {
                    auto edges = d.graph.edges();
                    if (edges.empty()) {
                        if (attempt < params.max_retry) continue;
                        throw std::runtime_error("gen_synthetic: no edges for link-pred positive");
                    }
                    auto [u, v] = edges[rng.below(edges.size())];
                    return make_pair_instance(std::move(d.graph), u, v, family, "yes",
                                              std::nullopt);
                }
                auto [u, v] = draw_pair(rng, d.graph.num_nodes());
                if (d.graph.has_edge(u, v) && attempt < params.max_retry) continue;
                if (d.graph.has_edge(u, v)) continue;
                return make_pair_instance(std::move(d.graph), u, v, family, "no", std::nullopt);
            }
        }
        case TaskFamily::GraphCls: {
            for (int attempt = 0;; ++attempt) {
                Drawn d = draw_graph(rng, params);
                const bool cyclic = cycle_space_dimension(d.graph) > 0;
                if (cyclic != want_positive && attempt < params.max_retry) continue;
                return {std::move(d.graph), Center::whole_graph(), family,
                        cyclic ? "yes" : "no", std::nullopt};
            }
        }
        case TaskFamily::GraphReg: {
            Drawn d = draw_graph(rng, params);
            const int e = d.graph.edge_count();
            return {std::move(d.graph), Center::whole_graph(), family, std::to_string(e),
                    static_cast<double>(e)};
        }
    }
    throw std::logic_error("gen_synthetic: unknown family");
}

}  // namespace

std::vector<GeneratedInstance> gen_synthetic(TaskFamily family, const GenParams& params,
                                             std::uint64_t seed, int count) {
    if (params.nodes_min < 1)
        throw std::invalid_argument("gen_synthetic: nodes_min must be >= 1 (empty graphs rejected)");
    if (params.nodes_max < params.nodes_min)
        throw std::invalid_argument("gen_synthetic: nodes_max < nodes_min");
    if (params.edge_prob < 0.0 || params.edge_prob > 1.0)
        throw std::invalid_argument("gen_synthetic: edge_prob out of [0,1]");
    if (params.class_count < 2 ||
        params.class_count > static_cast<int>(color_names().size()))
        throw std::invalid_argument("gen_synthetic: class_count out of range");

    std::vector<GeneratedInstance> out;
    out.reserve(count);
    for (int k = 0; k < count; ++k) {
        Rng rng(derive_seed(seed + static_cast<std::uint64_t>(k),
                            std::string("gen:") + family_name(family)));
        // Alternate the desired label so binary and class labels balance.
        out.push_back(generate_one(family, params, rng, k));
    }
    return out;
}

}  // namespace graphtext
