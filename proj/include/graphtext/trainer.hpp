#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "graphtext/dataset.hpp"
#include "graphtext/decoder.hpp"
#include "graphtext/encoder.hpp"
#include "graphtext/optim.hpp"
#include "graphtext/rng.hpp"

namespace graphtext {

// Instruction-tuning hyperparameters. The learning-rate defaults are the
// full-scale values; toy configs override them.
struct TrainConfig {
    int steps = 2000;
    int batch_size = 2;
    int accum_every = 2;
    double clip_max_norm = 10.0;
    double lr_adapters_and_mlp = 2e-4;
    double lr_position_table = 2e-3;
    std::uint64_t seed = 17;
    std::map<TaskFamily, double> mixture;  // empty => proportional to dataset sizes
    int probe_every = 50;
    int probe_size = 16;
    int checkpoint_every = 500;

    void validate() const {
        if (steps < 0) throw std::invalid_argument("TrainConfig: steps must be >= 0");
        if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
        if (accum_every < 1) throw std::invalid_argument("TrainConfig: accum_every must be >= 1");
        if (clip_max_norm <= 0)
            throw std::invalid_argument("TrainConfig: clip_max_norm must be > 0");
        if (lr_adapters_and_mlp <= 0 || lr_position_table <= 0)
            throw std::invalid_argument("TrainConfig: learning rates must be > 0");
    }
};

// Normalized mixture over the families present in `data`; configured weights
// must cover nonempty families and sum to 1.
template <typename T>
std::map<TaskFamily, double> resolve_mixture(const FamilyDatasets<T>& data,
                                             const std::map<TaskFamily, double>& configured) {
    std::map<TaskFamily, double> mixture;
    if (configured.empty()) {
        double total = 0;
        for (const auto& [f, v] : data) total += static_cast<double>(v.size());
        if (total == 0) throw std::invalid_argument("resolve_mixture: no instances");
        for (const auto& [f, v] : data)
            mixture[f] = static_cast<double>(v.size()) / total;
        return mixture;
    }
    double sum = 0;
    for (const auto& [f, w] : configured) {
        if (w < 0) throw std::invalid_argument("resolve_mixture: negative weight");
        if (w > 0) {
            auto it = data.find(f);
            if (it == data.end() || it->second.empty())
                throw std::invalid_argument(std::string("resolve_mixture: family ") +
                                            family_name(f) + " has no instances");
            mixture[f] = w;
        }
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("resolve_mixture: weights must sum to 1");
    return mixture;
}

// Draws a batch: family by mixture weight, instance uniformly within the
// family. Deterministic given the rng state.
template <typename T>
std::vector<const Prepared<T>*> sample_batch(const FamilyDatasets<T>& data,
                                             const std::map<TaskFamily, double>& mixture,
                                             int batch_size, Rng& rng) {
    if (mixture.empty()) throw std::invalid_argument("sample_batch: empty mixture");
    std::vector<const Prepared<T>*> batch;
    batch.reserve(batch_size);
    for (int b = 0; b < batch_size; ++b) {
        const double u = rng.uniform();
        double acc = 0;
        TaskFamily chosen = mixture.begin()->first;
        for (const auto& [f, w] : mixture) {
            acc += w;
            chosen = f;
            if (u < acc) break;
        }
        const auto& pool = data.at(chosen);
        batch.push_back(&pool[rng.below(pool.size())]);
    }
    return batch;
}

// L_total for one instance on a fresh tape; returns the loss node.
template <typename T>
typename Tape<T>::Id instance_loss_on_tape(Tape<T>& tape, const Prepared<T>& item,
                                           EncoderModel<T>& enc, DecoderModel<T>& dec,
                                           const Vocab& vocab) {
    const auto h_a = encode_on_tape(tape, item.enc, enc);
    const auto l_it = loss_it_on_tape(tape, dec, h_a, item.detail, item.inst.target_tokens,
                                      vocab);
    const auto l_prompt =
        loss_prompt_on_tape(tape, dec, h_a, item.inst.reconstruction_tokens, vocab);
    return tape.add(l_it, l_prompt);
}

template <typename T>
double instance_loss_value(const Prepared<T>& item, EncoderModel<T>& enc,
                           DecoderModel<T>& dec, const Vocab& vocab) {
    Tape<T> tape;
    return static_cast<double>(tape.scalar(instance_loss_on_tape(tape, item, enc, dec, vocab)));
}

struct TrainReport {
    std::vector<double> step_loss;                    // mean per-instance loss per step
    std::vector<std::pair<int, double>> probe_curve;  // (step, probe loss)
    double probe_initial = 0.0;
    double probe_final_smoothed = 0.0;
    double clip_events = 0;
    long instances_seen = 0;
};

template <typename T>
double probe_loss(const std::vector<const Prepared<T>*>& probe, EncoderModel<T>& enc,
                  DecoderModel<T>& dec, const Vocab& vocab) {
    double total = 0;
    for (const auto* item : probe) total += instance_loss_value(*item, enc, dec, vocab);
    return total / static_cast<double>(probe.size());
}

// The instruction-tuning loop: accumulate gradients over `accum_every`
// micro-batches, average per instance, clip by global norm, then apply the
// two-group adaptive update. Only theta_enc moves; the decoder must already
// be frozen.
template <typename T>
TrainReport train(const TrainConfig& cfg, const FamilyDatasets<T>& data,
                  EncoderModel<T>& enc, DecoderModel<T>& dec, const Vocab& vocab,
                  Adam<T>& optimizer, Rng& rng, int start_step = 0,
                  const std::function<void(int, const TrainReport&)>& checkpoint_hook = {}) {
    cfg.validate();
    if (!dec.frozen) throw std::invalid_argument("train: decoder must be pretrained and frozen");
    const auto mixture = resolve_mixture(data, cfg.mixture);
    auto params = trainable_params(enc);

    // Fixed probe batch, independent of the training stream.
    Rng probe_rng(derive_seed(cfg.seed, "probe-batch"));
    const auto probe = sample_batch(data, mixture, cfg.probe_size, probe_rng);

    TrainReport report;
    report.probe_initial = probe_loss(probe, enc, dec, vocab);
    if (start_step == 0) report.probe_curve.push_back({0, report.probe_initial});

    for (int step = start_step + 1; step <= cfg.steps; ++step) {
        zero_grads(params);
        double loss_sum = 0;
        const int instances = cfg.accum_every * cfg.batch_size;
        for (int micro = 0; micro < cfg.accum_every; ++micro) {
            const auto batch = sample_batch(data, mixture, cfg.batch_size, rng);
            for (const auto* item : batch) {
                Tape<T> tape;
                const auto loss = instance_loss_on_tape(tape, *item, enc, dec, vocab);
                loss_sum += static_cast<double>(tape.scalar(loss));
                tape.backward(loss);
            }
        }
        if (!std::isfinite(loss_sum))
            throw std::runtime_error("train: non-finite loss at step " + std::to_string(step));
        const T inv = static_cast<T>(1.0 / static_cast<double>(instances));
        for (auto* p : params)
            for (T& g : p->grad) g *= inv;
        if (clip_gradients(params, cfg.clip_max_norm) != 1.0) report.clip_events += 1;
        optimizer.step();
        zero_grads(params);

        report.instances_seen += instances;
        report.step_loss.push_back(loss_sum / static_cast<double>(instances));
        if (step % cfg.probe_every == 0 || step == cfg.steps)
            report.probe_curve.push_back({step, probe_loss(probe, enc, dec, vocab)});
        if (checkpoint_hook && (step % cfg.checkpoint_every == 0 || step == cfg.steps))
            checkpoint_hook(step, report);
    }

    // Smoothed terminal value: mean of the last few probe evaluations.
    const std::size_t window = std::min<std::size_t>(5, report.probe_curve.size());
    double acc = 0;
    for (std::size_t i = report.probe_curve.size() - window; i < report.probe_curve.size();
         ++i)
        acc += report.probe_curve[i].second;
    report.probe_final_smoothed =
        window > 0 ? acc / static_cast<double>(window) : report.probe_initial;
    return report;
}

}  // namespace graphtext
