#pragma once

#include <filesystem>
#include <string>

#include "graphtext/config.hpp"
#include "graphtext/decoder.hpp"
#include "graphtext/encoder.hpp"
#include "graphtext/io.hpp"
#include "graphtext/optim.hpp"
#include "graphtext/text.hpp"

namespace graphtext {

// Model checkpointing glue: tensors go into named sections (trainable and
// frozen kept separate), the run config and seed travel in the manifest meta
// so models can be rebuilt from the file alone.

inline RunConfig config_from_checkpoint(const CheckpointReader& reader) {
    if (!reader.meta().contains("config"))
        throw ValidationError("checkpoint: missing config echo in meta");
    return config_from_json(reader.meta().at("config"));
}

template <typename T>
void save_decoder_checkpoint(const std::filesystem::path& path, DecoderModel<T>& model,
                             const RunConfig& cfg,
                             nlohmann::json extra_meta = nlohmann::json::object()) {
    CheckpointWriter writer;
    writer.meta = std::move(extra_meta);
    writer.meta["config"] = config_to_json(cfg);
    writer.meta["seed"] = cfg.seed;
    writer.meta["precision"] = precision_name(cfg.precision);
    writer.meta["frozen"] = model.frozen;
    writer.meta["vocab_size"] = model.vocab_size;
    for (auto* p : decoder_params(model)) writer.add_tensor("decoder", *p);
    writer.write(path);
}

template <typename T>
DecoderModel<T> load_decoder_model(const CheckpointReader& reader, const RunConfig& cfg,
                                   int vocab_size) {
    DecoderModel<T> model = make_decoder_model<T>(cfg.decoder_config(), vocab_size,
                                                  derive_seed(cfg.seed, "decoder"));
    for (auto* p : decoder_params(model)) reader.load_tensor("decoder", *p);
    set_decoder_frozen(model, reader.meta().value("frozen", true));
    return model;
}

template <typename T>
void save_encoder_checkpoint(const std::filesystem::path& path, EncoderModel<T>& model,
                             const RunConfig& cfg, Adam<T>* optimizer,
                             const std::string& rng_state, int step) {
    CheckpointWriter writer;
    writer.meta["config"] = config_to_json(cfg);
    writer.meta["seed"] = cfg.seed;
    writer.meta["precision"] = precision_name(cfg.precision);
    writer.meta["step"] = step;
    writer.meta["rng_state"] = rng_state;
    for (auto* p : trainable_params(model)) writer.add_tensor("enc_trainable", *p);
    for (auto* p : base_params(model)) writer.add_tensor("enc_base", *p);
    if (optimizer) {
        writer.meta["adam_step"] = optimizer->step_count();
        const auto& params = optimizer->params();
        for (std::size_t i = 0; i < params.size(); ++i) {
            writer.add_array("optimizer", "adam.m." + params[i]->name, params[i]->shape,
                             optimizer->first_moments()[i]);
            writer.add_array("optimizer", "adam.v." + params[i]->name, params[i]->shape,
                             optimizer->second_moments()[i]);
        }
    }
    writer.write(path);
}

template <typename T>
EncoderModel<T> load_encoder_model(const CheckpointReader& reader, const RunConfig& cfg,
                                   int vocab_size) {
    EncoderModel<T> model =
        make_encoder_model<T>(cfg.model, vocab_size, derive_seed(cfg.seed, "encoder"));
    for (auto* p : trainable_params(model)) reader.load_tensor("enc_trainable", *p);
    for (auto* p : base_params(model)) reader.load_tensor("enc_base", *p);
    return model;
}

template <typename T>
void load_optimizer_state(const CheckpointReader& reader, Adam<T>& optimizer) {
    optimizer.set_step_count(reader.meta().value("adam_step", 0L));
    const auto& params = optimizer.params();
    for (std::size_t i = 0; i < params.size(); ++i) {
        optimizer.first_moments()[i] =
            reader.load_array<T>("optimizer", "adam.m." + params[i]->name);
        optimizer.second_moments()[i] =
            reader.load_array<T>("optimizer", "adam.v." + params[i]->name);
        if (optimizer.first_moments()[i].size() != params[i]->values.size())
            throw ValidationError("checkpoint: optimizer state size mismatch for " +
                                  params[i]->name);
    }
}

// The canonical instruction-tuning optimizer: adapters, alignment and the
// edge MLP in one group, position-related learnables in the other.
template <typename T>
Adam<T> make_tuning_optimizer(EncoderModel<T>& model, const TrainConfig& cfg) {
    auto params = trainable_params(model);
    const auto pos_group = position_group(model);
    std::vector<double> lrs;
    for (auto* p : params) {
        const bool positional =
            std::find(pos_group.begin(), pos_group.end(), p) != pos_group.end();
        lrs.push_back(positional ? cfg.lr_position_table : cfg.lr_adapters_and_mlp);
    }
    return Adam<T>(std::move(params), std::move(lrs));
}

}  // namespace graphtext
