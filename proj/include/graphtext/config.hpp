#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "graphtext/decoder.hpp"
#include "graphtext/encoder.hpp"
#include "graphtext/synth.hpp"
#include "graphtext/trainer.hpp"

namespace graphtext {

struct DataConfig {
    std::vector<TaskFamily> train_families = {TaskFamily::Conn, TaskFamily::Cn,
                                              TaskFamily::NodeCls, TaskFamily::LinkPred};
    std::vector<TaskFamily> cross_task_families = {TaskFamily::Spd};
    int instances_per_family = 600;
    int eval_instances = 100;
    GenParams gen;
    GenParams cross_domain_gen{10, 16, 0.18, 3, 300};
    int hop_radius = 2;
    int max_subgraph_nodes = 16;
};

struct PretrainConfigSection {
    int steps = 1200;
    int batch = 8;
    double lr = 3e-3;
    int descriptions = 5000;
    double holdout_fraction = 0.1;
};

enum class Precision { F32, F64 };

const char* precision_name(Precision p);
Precision precision_from_name(const std::string& name);

struct RunConfig {
    int schema_version = 1;
    std::uint64_t seed = 17;
    DataConfig data;
    EncoderConfig model;
    int decoder_layers = 2;
    int decoder_heads = 4;
    PretrainConfigSection pretrain;
    TrainConfig train;
    Precision precision = Precision::F64;
    int eval_max_len = 8;

    DecoderConfig decoder_config() const {
        DecoderConfig d;
        d.d_h = model.d_h;
        d.d_k = model.d_k;
        d.heads = decoder_heads;
        d.layers = decoder_layers;
        d.rope_base = model.rope_base;
        return d;
    }
};

// Strict parser: schema_version must match, unknown keys are hard errors.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const RunConfig& config);

}  // namespace graphtext
