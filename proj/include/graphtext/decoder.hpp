#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "graphtext/attention.hpp"
#include "graphtext/optim.hpp"
#include "graphtext/rng.hpp"
#include "graphtext/tape.hpp"
#include "graphtext/tensor.hpp"
#include "graphtext/text.hpp"

namespace graphtext {

struct DecoderConfig {
    int d_h = 32;
    int d_k = 32;
    int heads = 4;
    int layers = 2;
    double rope_base = 10000.0;
};

template <typename T>
struct DecoderLayer {
    Tensor<T> w_q, w_k, w_v, w_o;
    Tensor<T> f_w1, f_b1, f_w2, f_b2;
};

// Small causal language model. The task representation enters as a
// hidden-state prefix occupying the first m positions; everything after it
// is ordinary token embedding rows. Frozen after pretraining: no parameter
// receives gradients, but gradients still flow through to the prefix.
template <typename T>
struct DecoderModel {
    DecoderConfig cfg;
    int vocab_size = 0;
    std::vector<T> freqs;
    Tensor<T> token_embed;  // vocab x d_h
    std::vector<DecoderLayer<T>> layers;
    Tensor<T> head_w;  // d_h x vocab
    Tensor<T> head_b;  // vocab
    bool frozen = false;
};

template <typename T>
std::vector<Tensor<T>*> decoder_params(DecoderModel<T>& model) {
    std::vector<Tensor<T>*> out{&model.token_embed};
    for (auto& layer : model.layers)
        for (auto* w : {&layer.w_q, &layer.w_k, &layer.w_v, &layer.w_o, &layer.f_w1,
                        &layer.f_b1, &layer.f_w2, &layer.f_b2})
            out.push_back(w);
    out.push_back(&model.head_w);
    out.push_back(&model.head_b);
    return out;
}

template <typename T>
void set_decoder_frozen(DecoderModel<T>& model, bool frozen) {
    model.frozen = frozen;
    for (auto* p : decoder_params(model)) p->requires_grad = !frozen;
}

template <typename T>
DecoderModel<T> make_decoder_model(const DecoderConfig& cfg, int vocab_size,
                                   std::uint64_t seed) {
    if (cfg.d_k % cfg.heads != 0 || (cfg.d_k / cfg.heads) % 2 != 0)
        throw std::invalid_argument("make_decoder_model: bad head split");
    DecoderModel<T> model;
    model.cfg = cfg;
    model.vocab_size = vocab_size;
    model.freqs = rope_frequencies<T>(cfg.d_k / cfg.heads, cfg.rope_base);
    Rng rng(derive_seed(seed, "decoder-init"));
    auto gaussian = [&](std::vector<int> shape, double std, const std::string& name) {
        Tensor<T> t = Tensor<T>::zeros(std::move(shape));
        for (auto& v : t.values) v = static_cast<T>(rng.normal() * std);
        t.name = name;
        t.requires_grad = true;
        return t;
    };
    const double w_std = 1.0 / std::sqrt(static_cast<double>(cfg.d_h));
    model.token_embed = gaussian({vocab_size, cfg.d_h}, 0.1, "dec.token_embed");
    for (int l = 0; l < cfg.layers; ++l) {
        DecoderLayer<T> layer;
        const std::string p = "dec.layer" + std::to_string(l) + ".";
        layer.w_q = gaussian({cfg.d_h, cfg.d_k}, w_std, p + "w_q");
        layer.w_k = gaussian({cfg.d_h, cfg.d_k}, w_std, p + "w_k");
        layer.w_v = gaussian({cfg.d_h, cfg.d_k}, w_std, p + "w_v");
        layer.w_o = gaussian({cfg.d_k, cfg.d_h}, w_std, p + "w_o");
        layer.f_w1 = gaussian({cfg.d_h, 4 * cfg.d_h}, w_std, p + "f_w1");
        layer.f_b1 = Tensor<T>::zeros({4 * cfg.d_h});
        layer.f_b1.name = p + "f_b1";
        layer.f_b1.requires_grad = true;
        layer.f_w2 = gaussian({4 * cfg.d_h, cfg.d_h}, 1.0 / std::sqrt(4.0 * cfg.d_h),
                              p + "f_w2");
        layer.f_b2 = Tensor<T>::zeros({cfg.d_h});
        layer.f_b2.name = p + "f_b2";
        layer.f_b2.requires_grad = true;
        model.layers.push_back(std::move(layer));
    }
    model.head_w = gaussian({cfg.d_h, vocab_size}, 0.02, "dec.head_w");
    model.head_b = Tensor<T>::zeros({vocab_size});
    model.head_b.name = "dec.head_b";
    model.head_b.requires_grad = true;
    return model;
}

inline MaskSpec causal_mask(int total) {
    MaskSpec mask;
    mask.n = total;
    mask.l = 0;
    mask.m = 0;
    mask.allowed.assign(static_cast<std::size_t>(total) * total, 0);
    for (int q = 0; q < total; ++q)
        for (int k = 0; k <= q; ++k)
            mask.allowed[static_cast<std::size_t>(q) * total + k] = 1;
    return mask;
}

// Runs the decoder over [prefix rows ; token rows] and returns the logits
// node (seq x vocab). prefix may be -1 for plain language modeling.
template <typename T>
typename Tape<T>::Id decoder_logits_on_tape(Tape<T>& tape, DecoderModel<T>& model,
                                            typename Tape<T>::Id prefix,
                                            const std::vector<int>& tokens) {
    using Id = typename Tape<T>::Id;
    const int m = prefix >= 0 ? tape.shape(prefix)[0] : 0;
    const int total = m + static_cast<int>(tokens.size());
    if (total < 1) throw std::invalid_argument("decoder: empty input");

    Id x;
    if (!tokens.empty()) {
        const Id tok_rows = tape.gather_rows(tape.leaf(model.token_embed), tokens);
        x = prefix >= 0 ? tape.concat_rows({prefix, tok_rows}) : tok_rows;
    } else {
        x = prefix;
    }

    std::vector<T> pos_values(total);
    for (int i = 0; i < total; ++i) pos_values[i] = static_cast<T>(i);
    const Id positions = tape.constant({total}, std::move(pos_values));
    const MaskSpec mask = causal_mask(total);

    for (auto& layer : model.layers) {
        AttendWeights<T> w{tape.leaf(layer.w_q), tape.leaf(layer.w_k), tape.leaf(layer.w_v),
                           tape.leaf(layer.w_o)};
        const Id attn = attend(tape, tape.layer_norm_rows(x), w, model.cfg.heads, model.freqs,
                               positions, {}, mask);
        x = tape.add(x, attn);
        const Id ffn_in = tape.layer_norm_rows(x);
        const Id h1 = tape.gelu(tape.add_rowvec(tape.matmul(ffn_in, tape.leaf(layer.f_w1)),
                                                tape.leaf(layer.f_b1)));
        x = tape.add(x, tape.add_rowvec(tape.matmul(h1, tape.leaf(layer.f_w2)),
                                        tape.leaf(layer.f_b2)));
    }
    x = tape.layer_norm_rows(x);
    return tape.add_rowvec(tape.matmul(x, tape.leaf(model.head_w)), tape.leaf(model.head_b));
}

namespace detail {

inline void check_target(const std::vector<int>& target, int pad_id, const char* what) {
    if (target.empty()) throw std::invalid_argument(std::string(what) + ": empty target");
    for (int t : target)
        if (t == pad_id)
            throw std::invalid_argument(std::string(what) + ": target contains PAD");
}

}  // namespace detail

// Summed teacher-forced NLL of `target` given the task representation
// prefix and the instance instruction. Input rows: [H_A ; detail ; BOS ;
// target[0..T-2]]; the BOS row predicts target[0].
template <typename T>
typename Tape<T>::Id loss_it_on_tape(Tape<T>& tape, DecoderModel<T>& model,
                                     typename Tape<T>::Id h_a,
                                     const std::vector<int>& detail_tokens,
                                     const std::vector<int>& target, const Vocab& vocab) {
    detail::check_target(target, vocab.pad, "loss_it");
    std::vector<int> tokens = detail_tokens;
    tokens.push_back(vocab.bos);
    tokens.insert(tokens.end(), target.begin(), target.end() - 1);
    const auto logits = decoder_logits_on_tape(tape, model, h_a, tokens);
    const int m = tape.shape(h_a)[0];
    const int p0 = m + static_cast<int>(detail_tokens.size());
    const auto rows = tape.slice_rows(logits, p0, p0 + static_cast<int>(target.size()));
    return tape.cross_entropy_sum(rows, target);
}

// Summed NLL of the canonical graph description conditioned only on the
// prefix: [H_A ; SEP ; d_G[0..L-2]]. The instruction never enters. SEP
// (not BOS) starts reconstruction decodes so the decoder can tell the two
// output modes apart.
template <typename T>
typename Tape<T>::Id loss_prompt_on_tape(Tape<T>& tape, DecoderModel<T>& model,
                                         typename Tape<T>::Id h_a,
                                         const std::vector<int>& description,
                                         const Vocab& vocab) {
    detail::check_target(description, vocab.pad, "loss_prompt");
    std::vector<int> tokens{vocab.sep};
    tokens.insert(tokens.end(), description.begin(), description.end() - 1);
    const auto logits = decoder_logits_on_tape(tape, model, h_a, tokens);
    const int m = tape.shape(h_a)[0];
    const auto rows =
        tape.slice_rows(logits, m, m + static_cast<int>(description.size()));
    return tape.cross_entropy_sum(rows, description);
}

template <typename T>
T loss_total(T l_it, T l_prompt) {
    if (!std::isfinite(static_cast<double>(l_it)) ||
        !std::isfinite(static_cast<double>(l_prompt)))
        throw std::runtime_error("loss_total: non-finite term");
    return l_it + l_prompt;
}

// Plain-tensor convenience wrappers (tests and evaluation).
template <typename T>
T loss_it_value(DecoderModel<T>& model, const Tensor<T>& h_a,
                const std::vector<int>& detail_tokens, const std::vector<int>& target,
                const Vocab& vocab) {
    Tape<T> tape;
    const auto prefix = tape.constant_of(h_a);
    return tape.scalar(loss_it_on_tape(tape, model, prefix, detail_tokens, target, vocab));
}

template <typename T>
T loss_prompt_value(DecoderModel<T>& model, const Tensor<T>& h_a,
                    const std::vector<int>& description, const Vocab& vocab) {
    Tape<T> tape;
    const auto prefix = tape.constant_of(h_a);
    return tape.scalar(loss_prompt_on_tape(tape, model, prefix, description, vocab));
}

// Greedy decoding until EOS or max_len tokens.
template <typename T>
std::vector<int> generate(DecoderModel<T>& model, const Tensor<T>& h_a,
                          const std::vector<int>& detail_tokens, int max_len,
                          const Vocab& vocab) {
    if (max_len < 1) throw std::invalid_argument("generate: max_len must be >= 1");
    std::vector<int> generated;
    for (int step = 0; step < max_len; ++step) {
        Tape<T> tape;
        const auto prefix = tape.constant_of(h_a);
        std::vector<int> tokens = detail_tokens;
        tokens.push_back(vocab.bos);
        tokens.insert(tokens.end(), generated.begin(), generated.end());
        const auto logits = decoder_logits_on_tape(tape, model, prefix, tokens);
        const auto& values = tape.val(logits);
        const int v = model.vocab_size;
        const std::size_t base = values.size() - static_cast<std::size_t>(v);
        int best = 0;
        for (int j = 1; j < v; ++j)
            if (values[base + j] > values[base + best]) best = j;
        generated.push_back(best);
        if (best == vocab.eos) break;
    }
    return generated;
}

// Language-model NLL of one corpus sequence. The sequence's first token is
// its start marker (BOS for answer strings, SEP for graph descriptions) and
// is never predicted; EOS closes the targets. Returns (summed nll node,
// predicted token count).
template <typename T>
std::pair<typename Tape<T>::Id, int> lm_nll_on_tape(Tape<T>& tape, DecoderModel<T>& model,
                                                    const std::vector<int>& sequence,
                                                    const Vocab& vocab) {
    if (sequence.empty()) throw std::invalid_argument("lm_nll: empty sequence");
    std::vector<int> targets(sequence.begin() + 1, sequence.end());
    targets.push_back(vocab.eos);
    const auto logits = decoder_logits_on_tape(tape, model, -1, sequence);
    return {tape.cross_entropy_sum(logits, targets), static_cast<int>(targets.size())};
}

template <typename T>
double perplexity(DecoderModel<T>& model, const std::vector<std::vector<int>>& sequences,
                  const Vocab& vocab) {
    if (sequences.empty()) throw std::invalid_argument("perplexity: no sequences");
    double nll = 0.0;
    long tokens = 0;
    for (const auto& seq : sequences) {
        Tape<T> tape;
        const auto [loss, count] = lm_nll_on_tape(tape, model, seq, vocab);
        nll += static_cast<double>(tape.scalar(loss));
        tokens += count;
    }
    return std::exp(nll / static_cast<double>(tokens));
}

struct PretrainConfig {
    int steps = 1200;
    int batch = 8;
    double lr = 3e-3;
    double holdout_fraction = 0.1;
    std::uint64_t seed = 1;
};

struct PretrainReport {
    double heldout_perplexity = 0.0;
    int heldout_sequences = 0;
    std::vector<double> loss_curve;  // mean per-token nll per step
};

// Trains the decoder as a plain language model on the corpus, then freezes
// it. The held-out perplexity must come out strictly below the uniform
// bound (the vocabulary size).
template <typename T>
PretrainReport pretrain_decoder(DecoderModel<T>& model,
                                const std::vector<std::vector<int>>& corpus,
                                const PretrainConfig& cfg, const Vocab& vocab) {
    if (corpus.size() < 2) throw std::invalid_argument("pretrain_decoder: corpus too small");
    set_decoder_frozen(model, false);

    Rng rng(derive_seed(cfg.seed, "decoder-pretrain"));
    std::vector<std::size_t> order(corpus.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.below(i)]);
    std::size_t heldout_count =
        static_cast<std::size_t>(corpus.size() * cfg.holdout_fraction);
    heldout_count = std::max<std::size_t>(1, std::min(heldout_count, corpus.size() - 1));
    std::vector<std::vector<int>> heldout, train;
    for (std::size_t i = 0; i < order.size(); ++i)
        (i < heldout_count ? heldout : train).push_back(corpus[order[i]]);

    auto params = decoder_params(model);
    Adam<T> opt = Adam<T>::uniform(params, cfg.lr);
    PretrainReport report;
    for (int step = 0; step < cfg.steps; ++step) {
        zero_grads(params);
        double step_nll = 0.0;
        long step_tokens = 0;
        for (int b = 0; b < cfg.batch; ++b) {
            const auto& seq = train[rng.below(train.size())];
            Tape<T> tape;
            const auto [loss, count] = lm_nll_on_tape(tape, model, seq, vocab);
            step_nll += static_cast<double>(tape.scalar(loss));
            step_tokens += count;
            tape.backward(loss);
        }
        if (!std::isfinite(step_nll))
            throw std::runtime_error("pretrain_decoder: loss diverged at step " +
                                     std::to_string(step));
        const T inv = static_cast<T>(1.0 / static_cast<double>(step_tokens));
        for (auto* p : params)
            for (T& g : p->grad) g *= inv;
        opt.step();
        report.loss_curve.push_back(step_nll / static_cast<double>(step_tokens));
    }
    zero_grads(params);
    for (auto* p : params) p->clear_grad();
    set_decoder_frozen(model, true);
    report.heldout_perplexity = perplexity(model, heldout, vocab);
    report.heldout_sequences = static_cast<int>(heldout.size());
    return report;
}

// P(YES) / (P(YES) + P(NO)) from the first-step distribution.
template <typename T>
double score_binary(DecoderModel<T>& model, const Tensor<T>& h_a,
                    const std::vector<int>& detail_tokens, const Vocab& vocab) {
    Tape<T> tape;
    const auto prefix = tape.constant_of(h_a);
    std::vector<int> tokens = detail_tokens;
    tokens.push_back(vocab.bos);
    const auto logits = decoder_logits_on_tape(tape, model, prefix, tokens);
    const auto& values = tape.val(logits);
    const int v = model.vocab_size;
    const std::size_t base = values.size() - static_cast<std::size_t>(v);
    const double z_yes = static_cast<double>(values[base + vocab.yes]);
    const double z_no = static_cast<double>(values[base + vocab.no]);
    return 1.0 / (1.0 + std::exp(z_no - z_yes));
}

}  // namespace graphtext
