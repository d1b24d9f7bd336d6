#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "graphtext/attention.hpp"
#include "graphtext/embedder.hpp"
#include "graphtext/graph.hpp"
#include "graphtext/tape.hpp"
#include "graphtext/tensor.hpp"
#include "graphtext/text.hpp"

namespace graphtext {

// Low-rank additive adapter: effective weight = base + scale * down * up.
// `up` starts at zero so the initial delta is exactly zero.
template <typename T>
struct LowRankAdapter {
    Tensor<T> down;  // rows x r
    Tensor<T> up;    // r x cols
    T scale = T(1);
};

template <typename T>
struct EncoderLayer {
    Tensor<T> w_q, w_k, w_v, w_o;                  // frozen base projections
    LowRankAdapter<T> a_q, a_k, a_v, a_o;          // trainable deltas
    Tensor<T> f_w1, f_b1, f_w2, f_b2;              // frozen feed-forward
};

template <typename T>
struct AlignmentTokens {
    Tensor<T> embeddings;  // m x d_h
    int count() const { return embeddings.rows(); }
};

struct EncoderConfig {
    int d_h = 32;
    int d_k = 32;
    int heads = 4;
    int layers = 2;
    int align_tokens = 8;
    int lora_rank = 4;
    double lora_alpha = 8.0;
    int d_mlp = 16;
    int max_dist_bucket = 8;
    int hash_buckets = 512;
    double rope_base = 10000.0;
    double text_pos_base = 1.0;
};

// The unified graph-text encoder: a frozen randomly initialized base stack
// with trainable adapters, alignment-token embeddings, structural bias
// tables, and the shared graph position scalar.
template <typename T>
struct EncoderModel {
    EncoderConfig cfg;
    std::vector<T> freqs;
    Tensor<T> token_embed;  // vocab x d_h, frozen
    std::vector<EncoderLayer<T>> layers;
    AlignmentTokens<T> align;
    BiasTables<T> tables;
    Tensor<T> p_g;  // {1}
    TextEmbedder<T> embedder;
    bool base_frozen = true;
};

template <typename T>
EncoderModel<T> make_encoder_model(const EncoderConfig& cfg, int vocab_size,
                                   std::uint64_t seed) {
    if (cfg.d_k % cfg.heads != 0)
        throw std::invalid_argument("make_encoder_model: d_k must divide by heads");
    if ((cfg.d_k / cfg.heads) % 2 != 0)
        throw std::invalid_argument("make_encoder_model: per-head dim must be even");
    EncoderModel<T> model;
    model.cfg = cfg;
    model.freqs = rope_frequencies<T>(cfg.d_k / cfg.heads, cfg.rope_base);
    Rng rng(derive_seed(seed, "encoder-init"));
    auto gaussian = [&](std::vector<int> shape, double std, const std::string& name,
                        bool trainable) {
        Tensor<T> t = Tensor<T>::zeros(std::move(shape));
        for (auto& v : t.values) v = static_cast<T>(rng.normal() * std);
        t.name = name;
        t.requires_grad = trainable;
        return t;
    };
    const double w_std = 1.0 / std::sqrt(static_cast<double>(cfg.d_h));
    model.token_embed = gaussian({vocab_size, cfg.d_h}, w_std, "enc.token_embed", false);
    for (int l = 0; l < cfg.layers; ++l) {
        EncoderLayer<T> layer;
        const std::string p = "enc.layer" + std::to_string(l) + ".";
        layer.w_q = gaussian({cfg.d_h, cfg.d_k}, w_std, p + "w_q", false);
        layer.w_k = gaussian({cfg.d_h, cfg.d_k}, w_std, p + "w_k", false);
        layer.w_v = gaussian({cfg.d_h, cfg.d_k}, w_std, p + "w_v", false);
        layer.w_o = gaussian({cfg.d_k, cfg.d_h}, w_std, p + "w_o", false);
        auto adapter = [&](int rows, int cols, const std::string& name) {
            LowRankAdapter<T> a;
            a.down = gaussian({rows, cfg.lora_rank}, 0.02, name + ".down", true);
            a.up = Tensor<T>::zeros({cfg.lora_rank, cols});
            a.up.name = name + ".up";
            a.up.requires_grad = true;
            a.scale = static_cast<T>(cfg.lora_alpha / cfg.lora_rank);
            return a;
        };
        layer.a_q = adapter(cfg.d_h, cfg.d_k, p + "a_q");
        layer.a_k = adapter(cfg.d_h, cfg.d_k, p + "a_k");
        layer.a_v = adapter(cfg.d_h, cfg.d_k, p + "a_v");
        layer.a_o = adapter(cfg.d_k, cfg.d_h, p + "a_o");
        layer.f_w1 = gaussian({cfg.d_h, 4 * cfg.d_h}, w_std, p + "f_w1", false);
        layer.f_b1 = Tensor<T>::zeros({4 * cfg.d_h});
        layer.f_b1.name = p + "f_b1";
        layer.f_w2 = gaussian({4 * cfg.d_h, cfg.d_h},
                              1.0 / std::sqrt(4.0 * cfg.d_h), p + "f_w2", false);
        layer.f_b2 = Tensor<T>::zeros({cfg.d_h});
        layer.f_b2.name = p + "f_b2";
        model.layers.push_back(std::move(layer));
    }
    model.align.embeddings = gaussian({cfg.align_tokens, cfg.d_h}, 0.02, "enc.align", true);
    model.tables = make_bias_tables<T>(cfg.d_h, cfg.d_mlp, cfg.heads, cfg.max_dist_bucket,
                                       derive_seed(seed, "encoder-bias"));
    model.tables.distance_table.requires_grad = true;
    model.tables.mlp_w1.requires_grad = true;
    model.tables.mlp_b1.requires_grad = true;
    model.tables.mlp_w2.requires_grad = true;
    model.tables.mlp_b2.requires_grad = true;
    model.p_g = Tensor<T>::scalar(T(0));
    model.p_g.name = "enc.p_g";
    model.p_g.requires_grad = true;
    model.embedder = TextEmbedder<T>(cfg.d_h, cfg.hash_buckets, derive_seed(seed, "embedder"));
    return model;
}

// The trainable subset: adapters, alignment embeddings, distance table,
// edge MLP, and the graph position scalar. Order is canonical and shared by
// the optimizer and the checkpoint format.
template <typename T>
std::vector<Tensor<T>*> trainable_params(EncoderModel<T>& model) {
    std::vector<Tensor<T>*> out;
    for (auto& layer : model.layers) {
        for (auto* a : {&layer.a_q, &layer.a_k, &layer.a_v, &layer.a_o}) {
            out.push_back(&a->down);
            out.push_back(&a->up);
        }
    }
    out.push_back(&model.align.embeddings);
    out.push_back(&model.tables.distance_table);
    out.push_back(&model.tables.mlp_w1);
    out.push_back(&model.tables.mlp_b1);
    out.push_back(&model.tables.mlp_w2);
    out.push_back(&model.tables.mlp_b2);
    out.push_back(&model.p_g);
    return out;
}

// Frozen base tensors (everything the instruction-tuning run must not touch).
template <typename T>
std::vector<Tensor<T>*> base_params(EncoderModel<T>& model) {
    std::vector<Tensor<T>*> out{&model.token_embed};
    for (auto& layer : model.layers) {
        for (auto* w : {&layer.w_q, &layer.w_k, &layer.w_v, &layer.w_o, &layer.f_w1,
                        &layer.f_b1, &layer.f_w2, &layer.f_b2})
            out.push_back(w);
    }
    return out;
}

// Position-related learnables get their own learning-rate group.
template <typename T>
std::vector<Tensor<T>*> position_group(EncoderModel<T>& model) {
    return {&model.tables.distance_table, &model.p_g};
}

// Assembled encoder input: [graph rows ; description rows] are fixed per
// instance, alignment rows are appended from the live parameter at tape
// construction time.
template <typename T>
struct EncoderInput {
    Tensor<T> base_rows;  // (n + l) x d_h : graph token then text token rows
    int n = 0, l = 0, m = 0;
    MaskSpec mask;
    PositionRecipe positions;
    StructBiasPayload<T> bias_payload;
    std::vector<int> desc_tokens;
};

template <typename T>
EncoderInput<T> assemble_input_with_desc(const SubgraphSample& sample, const Graph& parent,
                                         const std::vector<int>& desc_tokens,
                                         const EncoderModel<T>& model) {
    const int n = sample.size();
    const int l = static_cast<int>(desc_tokens.size());
    const int m = model.align.count();
    if (n < 1) throw std::invalid_argument("assemble_input: empty sample");
    if (2 * m > n + l)
        throw std::invalid_argument(
            "assemble_input: alignment token count exceeds (n + l) / 2");
    EncoderInput<T> input;
    input.n = n;
    input.l = l;
    input.m = m;
    input.desc_tokens = desc_tokens;
    const int d_h = model.cfg.d_h;
    input.base_rows = Tensor<T>::zeros({n + l, d_h});
    for (int i = 0; i < n; ++i) {
        const auto vec = model.embedder.embed(parent.node_text(sample.nodes[i]));
        for (int d = 0; d < d_h; ++d) input.base_rows.at(i, d) = vec[d];
    }
    for (int t = 0; t < l; ++t) {
        const int tok = desc_tokens[t];
        for (int d = 0; d < d_h; ++d)
            input.base_rows.at(n + t, d) = model.token_embed.at(tok, d);
    }
    input.mask = build_mask(n, l, m);
    input.positions = position_recipe(n, l, m, model.cfg.text_pos_base);
    input.bias_payload = build_bias_payload(sample, parent, model.embedder, model.tables);
    return input;
}

template <typename T>
EncoderInput<T> assemble_input(const SubgraphSample& sample, const Graph& parent,
                               TaskFamily family, const Templates& templates,
                               const Vocab& vocab, const EncoderModel<T>& model) {
    return assemble_input_with_desc(sample, parent, render_desc(templates, vocab, family),
                                    model);
}

namespace detail {

template <typename T>
typename Tape<T>::Id effective_weight(Tape<T>& tape, Tensor<T>& base,
                                      LowRankAdapter<T>& adapter) {
    const auto w = tape.leaf(base);
    const auto delta = tape.scale(tape.matmul(tape.leaf(adapter.down), tape.leaf(adapter.up)),
                                  adapter.scale);
    return tape.add(w, delta);
}

}  // namespace detail

// Runs the full stack on an existing tape and returns the H_A node
// (m x d_h rows at the alignment positions). Gradients reach exactly the
// tensors whose requires_grad flag is set.
template <typename T>
typename Tape<T>::Id encode_on_tape(Tape<T>& tape, const EncoderInput<T>& input,
                                    EncoderModel<T>& model) {
    using Id = typename Tape<T>::Id;
    const int total = input.n + input.l + input.m;
    const int n = input.n;

    const Id p_g = tape.leaf(model.p_g);
    std::vector<T> mult(input.positions.mult.begin(), input.positions.mult.end());
    std::vector<T> add(input.positions.add.begin(), input.positions.add.end());
    const Id positions = tape.affine_of_scalar(p_g, std::move(mult), std::move(add));

    // Per-head graph-block biases, shared by every layer.
    const Id table = tape.leaf(model.tables.distance_table);
    std::vector<Id> bias_per_head;
    Id mlp_out = -1;
    const bool have_edges = input.bias_payload.edge_embeds.rows() > 0;
    if (have_edges) {
        const Id embeds = tape.constant_of(input.bias_payload.edge_embeds);
        const Id h1 = tape.tanh_act(tape.add_rowvec(
            tape.matmul(embeds, tape.leaf(model.tables.mlp_w1)),
            tape.leaf(model.tables.mlp_b1)));
        mlp_out = tape.add_rowvec(tape.matmul(h1, tape.leaf(model.tables.mlp_w2)),
                                  tape.leaf(model.tables.mlp_b2));
    }
    for (int h = 0; h < model.cfg.heads; ++h) {
        Id bias = tape.table_bias(table, input.bias_payload.buckets, h, n, total);
        if (have_edges) {
            const Id col = tape.slice_cols(mlp_out, h, h + 1);
            const Id per_pair = tape.matmul(tape.constant_of(input.bias_payload.edge_avg), col);
            bias = tape.add(bias, tape.pad_block(tape.reshape(per_pair, {n, n}), total));
        }
        bias_per_head.push_back(bias);
    }

    Id x = tape.concat_rows(
        {tape.constant_of(input.base_rows), tape.leaf(model.align.embeddings)});

    int layer_index = 0;
    for (auto& layer : model.layers) {
        AttendWeights<T> w;
        w.w_q = detail::effective_weight(tape, layer.w_q, layer.a_q);
        w.w_k = detail::effective_weight(tape, layer.w_k, layer.a_k);
        w.w_v = detail::effective_weight(tape, layer.w_v, layer.a_v);
        w.w_o = detail::effective_weight(tape, layer.w_o, layer.a_o);
        const Id attn = attend(tape, tape.layer_norm_rows(x), w, model.cfg.heads, model.freqs,
                               positions, bias_per_head, input.mask);
        x = tape.add(x, attn);
        const Id ffn_in = tape.layer_norm_rows(x);
        const Id h1 = tape.gelu(tape.add_rowvec(tape.matmul(ffn_in, tape.leaf(layer.f_w1)),
                                                tape.leaf(layer.f_b1)));
        const Id ffn = tape.add_rowvec(tape.matmul(h1, tape.leaf(layer.f_w2)),
                                       tape.leaf(layer.f_b2));
        x = tape.add(x, ffn);
        for (T v : tape.val(x))
            if (!std::isfinite(static_cast<double>(v)))
                throw std::runtime_error("encode: non-finite activation after layer " +
                                         std::to_string(layer_index));
        ++layer_index;
    }
    x = tape.layer_norm_rows(x);

    return tape.slice_rows(x, input.n + input.l, total);
}

// Forward-only convenience: returns H_A as a plain tensor.
template <typename T>
Tensor<T> encode(const EncoderInput<T>& input, EncoderModel<T>& model) {
    Tape<T> tape;
    const auto h_a = encode_on_tape(tape, input, model);
    Tensor<T> out;
    out.shape = tape.shape(h_a);
    out.values = tape.val(h_a);
    out.name = "H_A";
    return out;
}

}  // namespace graphtext
