#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "graphtext/embedder.hpp"
#include "graphtext/graph.hpp"
#include "graphtext/tape.hpp"
#include "graphtext/tensor.hpp"

namespace graphtext {

enum class Modality : std::uint8_t { GraphTok, TextTok, AlignTok };

// Attention mask over the [graph ; text ; alignment] sequence. Rows are
// queries, columns are keys. Graph tokens attend to each other in both
// directions and may read the text that follows them; text tokens are causal
// among themselves and never read graph tokens; alignment tokens are causal
// over the whole sequence. Forbidden pairs act as a -inf additive bias.
struct MaskSpec {
    int n = 0, l = 0, m = 0;
    std::vector<std::uint8_t> allowed;  // (n+l+m)^2, row-major

    int total() const { return n + l + m; }
    bool is_allowed(int q, int k) const {
        return allowed[static_cast<std::size_t>(q) * total() + k] != 0;
    }
};

inline MaskSpec build_mask(int n, int l, int m) {
    if (n < 1 || l < 0 || m < 0) throw std::invalid_argument("build_mask: bad segment sizes");
    MaskSpec mask;
    mask.n = n;
    mask.l = l;
    mask.m = m;
    const int total = n + l + m;
    mask.allowed.assign(static_cast<std::size_t>(total) * total, 0);
    auto set = [&](int q, int k) { mask.allowed[static_cast<std::size_t>(q) * total + k] = 1; };
    for (int q = 0; q < total; ++q) {
        if (q < n) {
            for (int k = 0; k < n + l; ++k) set(q, k);  // graph + forward into text
        } else if (q < n + l) {
            for (int k = n; k <= q; ++k) set(q, k);  // causal within text, no graph
        } else {
            for (int k = 0; k <= q; ++k) set(q, k);  // causal across everything
        }
    }
    return mask;
}

// Per-token rotary position values for the unified sequence: every graph
// token shares the learnable scalar position, text token t sits at
// text_base + t, and alignment tokens continue after the text. The (mult,
// add) recipe expresses value_i = p_g * mult_i + add_i so the same rule
// serves plain evaluation and the tape path.
struct PositionRecipe {
    std::vector<double> mult;
    std::vector<double> add;
    std::vector<Modality> modality;
};

inline PositionRecipe position_recipe(int n, int l, int m, double text_base = 1.0) {
    if (n < 1 || l < 0 || m < 0)
        throw std::invalid_argument("position_recipe: bad segment sizes");
    PositionRecipe r;
    const int total = n + l + m;
    r.mult.resize(total);
    r.add.resize(total);
    r.modality.resize(total);
    for (int i = 0; i < total; ++i) {
        if (i < n) {
            r.mult[i] = 1.0;
            r.add[i] = 0.0;
            r.modality[i] = Modality::GraphTok;
        } else {
            r.mult[i] = 0.0;
            r.add[i] = text_base + (i - n);
            r.modality[i] = i < n + l ? Modality::TextTok : Modality::AlignTok;
        }
    }
    return r;
}

template <typename T>
struct PositionAssignment {
    std::vector<Modality> modality;
    std::vector<T> value;
    T graph_pos;
};

template <typename T>
PositionAssignment<T> assign_positions(int n, int l, int m, T p_g, T text_base = T(1)) {
    const PositionRecipe recipe = position_recipe(n, l, m, static_cast<double>(text_base));
    PositionAssignment<T> out;
    out.graph_pos = p_g;
    out.modality = recipe.modality;
    out.value.resize(recipe.mult.size());
    for (std::size_t i = 0; i < out.value.size(); ++i)
        out.value[i] = p_g * static_cast<T>(recipe.mult[i]) + static_cast<T>(recipe.add[i]);
    return out;
}

// Standard rotary frequency set for an even head dimension.
template <typename T>
std::vector<T> rope_frequencies(int head_dim, double base = 10000.0) {
    if (head_dim <= 0 || head_dim % 2 != 0)
        throw std::invalid_argument("rope_frequencies: head dimension must be positive even");
    std::vector<T> freqs(head_dim / 2);
    for (int p = 0; p < head_dim / 2; ++p)
        freqs[p] = static_cast<T>(std::pow(base, -2.0 * p / head_dim));
    return freqs;
}

template <typename T>
std::vector<T> rope_rotate(const std::vector<T>& x, T position, const std::vector<T>& freqs) {
    if (x.size() % 2 != 0) throw std::invalid_argument("rope_rotate: odd dimension");
    if (freqs.size() * 2 != x.size())
        throw std::invalid_argument("rope_rotate: need one frequency per pair");
    std::vector<T> out(x.size());
    for (std::size_t p = 0; p < freqs.size(); ++p) {
        const T angle = position * freqs[p];
        const T cs = std::cos(angle), sn = std::sin(angle);
        out[2 * p] = x[2 * p] * cs - x[2 * p + 1] * sn;
        out[2 * p + 1] = x[2 * p] * sn + x[2 * p + 1] * cs;
    }
    return out;
}

// Relative rotary score: <rotate(q, offset), k>. Equals
// <rotate(q, a), rotate(k, b)> for every (a, b) with a - b = offset, and the
// plain dot product at offset zero.
template <typename T>
T rope_score(const std::vector<T>& q, const std::vector<T>& k, T offset,
             const std::vector<T>& freqs) {
    if (q.size() != k.size()) throw std::invalid_argument("rope_score: dimension mismatch");
    const std::vector<T> qr = rope_rotate(q, offset, freqs);
    T acc = T(0);
    for (std::size_t i = 0; i < k.size(); ++i) acc += qr[i] * k[i];
    return acc;
}

// Learnable structural-bias parameters: one scalar per (distance bucket,
// head) plus the two-layer perceptron that turns an edge-description
// embedding into per-head biases.
template <typename T>
struct BiasTables {
    int max_dist_bucket = 8;
    Tensor<T> distance_table;  // (max_dist_bucket + 2) x heads; last row = unreachable
    Tensor<T> mlp_w1;          // d_h x d_mlp
    Tensor<T> mlp_b1;          // d_mlp
    Tensor<T> mlp_w2;          // d_mlp x heads
    Tensor<T> mlp_b2;          // heads

    int heads() const { return distance_table.cols(); }

    int bucket_of(int dist, int unreachable) const {
        if (dist == unreachable) return max_dist_bucket + 1;
        return dist < max_dist_bucket ? dist : max_dist_bucket;
    }
};

template <typename T>
BiasTables<T> make_bias_tables(int d_h, int d_mlp, int heads, int max_dist_bucket,
                               std::uint64_t seed) {
    BiasTables<T> tables;
    tables.max_dist_bucket = max_dist_bucket;
    tables.distance_table = Tensor<T>::zeros({max_dist_bucket + 2, heads});
    tables.distance_table.name = "bias.distance_table";
    Rng rng(derive_seed(seed, "bias-tables"));
    auto init = [&](Tensor<T>& t, const char* name, double scale) {
        for (auto& v : t.values) v = static_cast<T>(rng.normal() * scale);
        t.name = name;
    };
    tables.mlp_w1 = Tensor<T>::zeros({d_h, d_mlp});
    init(tables.mlp_w1, "bias.mlp_w1", 0.2);
    tables.mlp_b1 = Tensor<T>::zeros({d_mlp});
    tables.mlp_b1.name = "bias.mlp_b1";
    tables.mlp_w2 = Tensor<T>::zeros({d_mlp, heads});
    init(tables.mlp_w2, "bias.mlp_w2", 0.2);
    tables.mlp_b2 = Tensor<T>::zeros({heads});
    tables.mlp_b2.name = "bias.mlp_b2";
    return tables;
}

// Per-sample payload for the structural biases: bucketized pairwise
// distances plus the edge-description embeddings and the averaging matrix
// that maps per-edge MLP outputs to node pairs. The averaging set for (i,j)
// is every edge on any shortest path between them, which keeps the bias
// exactly equivariant under node relabeling even when shortest paths tie.
template <typename T>
struct StructBiasPayload {
    int n = 0;
    std::vector<int> buckets;   // n*n indices into the distance table rows
    Tensor<T> edge_embeds;      // E x d_h (E = 0 when the sample has no edges)
    Tensor<T> edge_avg;         // n*n x E, row (i*n+j) averages SP-DAG edges of (i,j)
};

template <typename T>
StructBiasPayload<T> build_bias_payload(const SubgraphSample& sample, const Graph& parent,
                                        const TextEmbedder<T>& embedder,
                                        const BiasTables<T>& tables) {
    const int n = sample.size();
    StructBiasPayload<T> payload;
    payload.n = n;
    payload.buckets.resize(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            payload.buckets[static_cast<std::size_t>(i) * n + j] =
                tables.bucket_of(sample.spd.at(i, j), sample.spd.unreachable);

    // Local graph view over the sample for shortest-path queries.
    Graph local(n, /*directed=*/false);
    std::vector<Edge> local_edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (sample.has_edge(i, j)) {
                local.add_edge(i, j,
                               parent.edge_description(sample.nodes[i], sample.nodes[j]));
                local_edges.push_back({i, j});
            }

    const int e = static_cast<int>(local_edges.size());
    const int d_h = embedder.dim();
    payload.edge_embeds = Tensor<T>::zeros({e, d_h});
    std::vector<int> edge_index(static_cast<std::size_t>(n) * n, -1);
    for (int k = 0; k < e; ++k) {
        const auto [a, b] = local_edges[k];
        edge_index[static_cast<std::size_t>(a) * n + b] = k;
        edge_index[static_cast<std::size_t>(b) * n + a] = k;
        const auto vec = embedder.embed(local.edge_description(a, b));
        for (int d = 0; d < d_h; ++d) payload.edge_embeds.values[static_cast<std::size_t>(k) * d_h + d] = vec[d];
    }

    payload.edge_avg = Tensor<T>::zeros({n * n, e});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j || !sample.spd.reachable(i, j)) continue;
            const auto edges = shortest_path_dag_edges(local, sample.spd, i, j);
            if (edges.empty()) continue;
            const T w = T(1) / static_cast<T>(edges.size());
            for (const auto& [a, b] : edges) {
                const int k = edge_index[static_cast<std::size_t>(a) * n + b];
                payload.edge_avg.values[(static_cast<std::size_t>(i) * n + j) * e + k] += w;
            }
        }
    return payload;
}

// Distance bias b_pe as plain per-head matrices (row-major n*n per head),
// computed through the same tape op the training path uses.
template <typename T>
std::vector<std::vector<T>> distance_bias(const ShortestPathTable& spd, BiasTables<T>& tables) {
    const int n = spd.n;
    std::vector<int> buckets(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            buckets[static_cast<std::size_t>(i) * n + j] =
                tables.bucket_of(spd.at(i, j), spd.unreachable);
    std::vector<std::vector<T>> out;
    Tape<T> tape;
    const auto table = tape.leaf(tables.distance_table);
    for (int h = 0; h < tables.heads(); ++h) {
        const auto bias = tape.table_bias(table, buckets, h, n, n);
        out.push_back(tape.val(bias));
    }
    return out;
}

// Edge-aware bias b_edge per head for one sample, through the tape path.
template <typename T>
std::vector<std::vector<T>> edge_bias(const SubgraphSample& sample, const Graph& parent,
                                      const TextEmbedder<T>& embedder, BiasTables<T>& tables) {
    const auto payload = build_bias_payload(sample, parent, embedder, tables);
    const int n = sample.size();
    std::vector<std::vector<T>> out(tables.heads(),
                                    std::vector<T>(static_cast<std::size_t>(n) * n, T(0)));
    if (payload.edge_embeds.rows() == 0) return out;
    Tape<T> tape;
    const auto embeds = tape.constant_of(payload.edge_embeds);
    const auto avg = tape.constant_of(payload.edge_avg);
    const auto h1 = tape.tanh_act(tape.add_rowvec(
        tape.matmul(embeds, tape.leaf(tables.mlp_w1)), tape.leaf(tables.mlp_b1)));
    const auto mlp_out = tape.add_rowvec(tape.matmul(h1, tape.leaf(tables.mlp_w2)),
                                         tape.leaf(tables.mlp_b2));
    for (int h = 0; h < tables.heads(); ++h) {
        const auto col = tape.slice_cols(mlp_out, h, h + 1);
        const auto per_pair = tape.matmul(avg, col);  // n*n x 1
        out[h] = tape.val(per_pair);
    }
    return out;
}

// One multi-head structure-aware attention application on an existing tape.
// Scores are rope_score / sqrt(head_dim) plus (for graph-graph pairs only)
// the distance and edge biases, with forbidden pairs masked to -inf before
// the row softmax. Biases are passed as per-head score matrices restricted
// to the graph block (already padded to the full sequence).
template <typename T>
struct AttendWeights {
    typename Tape<T>::Id w_q, w_k, w_v, w_o;
};

template <typename T>
typename Tape<T>::Id attend(Tape<T>& tape, typename Tape<T>::Id x,
                            const AttendWeights<T>& w, int heads,
                            const std::vector<T>& freqs, typename Tape<T>::Id positions,
                            const std::vector<typename Tape<T>::Id>& graph_bias_per_head,
                            const MaskSpec& mask) {
    using Id = typename Tape<T>::Id;
    const int total = tape.shape(x)[0];
    if (mask.total() != total) throw std::invalid_argument("attend: mask size mismatch");
    const int d_k = tape.shape(w.w_q)[1];
    if (d_k % heads != 0) throw std::invalid_argument("attend: d_k not divisible by heads");
    const int head_dim = d_k / heads;
    if (!graph_bias_per_head.empty() &&
        static_cast<int>(graph_bias_per_head.size()) != heads)
        throw std::invalid_argument("attend: need one bias matrix per head");

    const Id q = tape.matmul(x, w.w_q);
    const Id k = tape.matmul(x, w.w_k);
    const Id v = tape.matmul(x, w.w_v);

    std::vector<std::uint8_t> keep = mask.allowed;
    const T neg_inf = -std::numeric_limits<T>::infinity();
    const T inv_sqrt = T(1) / std::sqrt(static_cast<T>(head_dim));

    std::vector<Id> head_outputs;
    for (int h = 0; h < heads; ++h) {
        const Id qh = tape.rope_rows(tape.slice_cols(q, h * head_dim, (h + 1) * head_dim),
                                     positions, freqs);
        const Id kh = tape.rope_rows(tape.slice_cols(k, h * head_dim, (h + 1) * head_dim),
                                     positions, freqs);
        Id scores = tape.scale(tape.matmul(qh, tape.transpose(kh)), inv_sqrt);
        if (!graph_bias_per_head.empty()) scores = tape.add(scores, graph_bias_per_head[h]);
        // Contract check: allowed logits must be finite before masking.
        {
            const auto& sv = tape.val(scores);
            for (int qi = 0; qi < total; ++qi)
                for (int ki = 0; ki < total; ++ki)
                    if (mask.is_allowed(qi, ki) &&
                        !std::isfinite(static_cast<double>(
                            sv[static_cast<std::size_t>(qi) * total + ki])))
                        throw std::runtime_error("attend: non-finite logit on allowed pair");
        }
        const Id masked = tape.masked_fill(scores, keep, neg_inf);
        const Id weights = tape.softmax_rows(masked);
        head_outputs.push_back(
            tape.matmul(weights, tape.slice_cols(v, h * head_dim, (h + 1) * head_dim)));
    }

    // Concatenate heads along columns: transpose trick keeps ops minimal.
    Id concat;
    if (heads == 1) {
        concat = head_outputs[0];
    } else {
        std::vector<typename Tape<T>::Id> transposed;
        for (Id ho : head_outputs) transposed.push_back(tape.transpose(ho));
        concat = tape.transpose(tape.concat_rows(transposed));
    }
    return tape.matmul(concat, w.w_o);
}

}  // namespace graphtext
