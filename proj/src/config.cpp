#include "graphtext/config.hpp"

#include <set>

#include "graphtext/io.hpp"

namespace graphtext {

const char* precision_name(Precision p) { return p == Precision::F64 ? "f64" : "f32"; }

Precision precision_from_name(const std::string& name) {
    if (name == "f64") return Precision::F64;
    if (name == "f32") return Precision::F32;
    throw ValidationError("config: precision must be f64 or f32, got " + name);
}

namespace {

// Tracks consumed keys so typos become hard errors.
class StrictObject {
public:
    StrictObject(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ValidationError("config: " + path_ + " must be an object");
    }

    // Call after reading every expected key; unknown keys are hard errors.
    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.count(key))
                throw ValidationError("config: unknown key '" + path_ + key + "'");
        }
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    template <typename T>
    void get(const std::string& key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("config: bad value for '" + path_ + key + "': " + e.what());
        }
    }

    const nlohmann::json& child(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

private:
    const nlohmann::json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

std::vector<TaskFamily> families_from_json(const nlohmann::json& j, const std::string& path) {
    if (!j.is_array()) throw ValidationError("config: " + path + " must be an array");
    std::vector<TaskFamily> out;
    for (const auto& name : j) {
        try {
            out.push_back(family_from_name(name.get<std::string>()));
        } catch (const std::exception& e) {
            throw ValidationError("config: " + path + ": " + e.what());
        }
    }
    return out;
}

void gen_from_json(const nlohmann::json& j, const std::string& path, GenParams& gen) {
    StrictObject o(j, path);
    o.get("nodes_min", gen.nodes_min);
    o.get("nodes_max", gen.nodes_max);
    o.get("edge_prob", gen.edge_prob);
    o.get("class_count", gen.class_count);
    o.get("max_retry", gen.max_retry);
    o.finish();
}

}  // namespace

RunConfig config_from_json(const nlohmann::json& j) {
    RunConfig cfg;
    StrictObject root(j, "");
    root.get("schema_version", cfg.schema_version);
    if (cfg.schema_version != 1)
        throw ValidationError("config: unsupported schema_version " +
                              std::to_string(cfg.schema_version));
    root.get("seed", cfg.seed);

    if (root.has("data")) {
        StrictObject d(root.child("data"), "data.");
        if (d.has("train_families"))
            cfg.data.train_families =
                families_from_json(d.child("train_families"), "data.train_families");
        if (d.has("cross_task_families"))
            cfg.data.cross_task_families =
                families_from_json(d.child("cross_task_families"), "data.cross_task_families");
        d.get("instances_per_family", cfg.data.instances_per_family);
        d.get("eval_instances", cfg.data.eval_instances);
        if (d.has("generator")) gen_from_json(d.child("generator"), "data.generator.", cfg.data.gen);
        if (d.has("cross_domain_generator"))
            gen_from_json(d.child("cross_domain_generator"), "data.cross_domain_generator.",
                          cfg.data.cross_domain_gen);
        d.get("hop_radius", cfg.data.hop_radius);
        d.get("max_subgraph_nodes", cfg.data.max_subgraph_nodes);
        if (cfg.data.train_families.empty())
            throw ValidationError("config: data.train_families may not be empty");
        d.finish();
    }

    if (root.has("model")) {
        StrictObject m(root.child("model"), "model.");
        m.get("d_h", cfg.model.d_h);
        m.get("d_k", cfg.model.d_k);
        m.get("heads", cfg.model.heads);
        m.get("layers", cfg.model.layers);
        m.get("align_tokens", cfg.model.align_tokens);
        m.get("lora_rank", cfg.model.lora_rank);
        m.get("lora_alpha", cfg.model.lora_alpha);
        m.get("d_mlp", cfg.model.d_mlp);
        m.get("max_dist_bucket", cfg.model.max_dist_bucket);
        m.get("hash_buckets", cfg.model.hash_buckets);
        m.get("rope_base", cfg.model.rope_base);
        m.get("text_pos_base", cfg.model.text_pos_base);
        m.get("decoder_layers", cfg.decoder_layers);
        m.get("decoder_heads", cfg.decoder_heads);
        m.finish();
    }

    if (root.has("pretrain")) {
        StrictObject p(root.child("pretrain"), "pretrain.");
        p.get("steps", cfg.pretrain.steps);
        p.get("batch", cfg.pretrain.batch);
        p.get("lr", cfg.pretrain.lr);
        p.get("descriptions", cfg.pretrain.descriptions);
        p.get("holdout_fraction", cfg.pretrain.holdout_fraction);
        p.finish();
    }

    if (root.has("train")) {
        StrictObject t(root.child("train"), "train.");
        t.get("steps", cfg.train.steps);
        t.get("batch_size", cfg.train.batch_size);
        t.get("accum_every", cfg.train.accum_every);
        t.get("clip_max_norm", cfg.train.clip_max_norm);
        t.get("lr_adapters_and_mlp", cfg.train.lr_adapters_and_mlp);
        t.get("lr_position_table", cfg.train.lr_position_table);
        t.get("probe_every", cfg.train.probe_every);
        t.get("probe_size", cfg.train.probe_size);
        t.get("checkpoint_every", cfg.train.checkpoint_every);
        if (t.has("precision"))
            cfg.precision = precision_from_name(t.child("precision").get<std::string>());
        if (t.has("mixture")) {
            const auto& mix = t.child("mixture");
            if (!mix.is_object()) throw ValidationError("config: train.mixture must be an object");
            for (const auto& [name, weight] : mix.items())
                cfg.train.mixture[family_from_name(name)] = weight.get<double>();
        }
        t.finish();
    }
    cfg.train.seed = cfg.seed;

    if (root.has("eval")) {
        StrictObject e(root.child("eval"), "eval.");
        e.get("max_len", cfg.eval_max_len);
        e.finish();
    }

    root.finish();
    try {
        cfg.train.validate();
    } catch (const std::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config: invalid JSON in " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

nlohmann::json config_to_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["schema_version"] = cfg.schema_version;
    j["seed"] = cfg.seed;
    nlohmann::json d;
    {
        nlohmann::json fams = nlohmann::json::array();
        for (auto f : cfg.data.train_families) fams.push_back(family_name(f));
        d["train_families"] = fams;
        nlohmann::json cross = nlohmann::json::array();
        for (auto f : cfg.data.cross_task_families) cross.push_back(family_name(f));
        d["cross_task_families"] = cross;
        d["instances_per_family"] = cfg.data.instances_per_family;
        d["eval_instances"] = cfg.data.eval_instances;
        auto gen_json = [](const GenParams& g) {
            return nlohmann::json{{"nodes_min", g.nodes_min},
                                  {"nodes_max", g.nodes_max},
                                  {"edge_prob", g.edge_prob},
                                  {"class_count", g.class_count},
                                  {"max_retry", g.max_retry}};
        };
        d["generator"] = gen_json(cfg.data.gen);
        d["cross_domain_generator"] = gen_json(cfg.data.cross_domain_gen);
        d["hop_radius"] = cfg.data.hop_radius;
        d["max_subgraph_nodes"] = cfg.data.max_subgraph_nodes;
    }
    j["data"] = d;
    j["model"] = {{"d_h", cfg.model.d_h},
                  {"d_k", cfg.model.d_k},
                  {"heads", cfg.model.heads},
                  {"layers", cfg.model.layers},
                  {"align_tokens", cfg.model.align_tokens},
                  {"lora_rank", cfg.model.lora_rank},
                  {"lora_alpha", cfg.model.lora_alpha},
                  {"d_mlp", cfg.model.d_mlp},
                  {"max_dist_bucket", cfg.model.max_dist_bucket},
                  {"hash_buckets", cfg.model.hash_buckets},
                  {"rope_base", cfg.model.rope_base},
                  {"text_pos_base", cfg.model.text_pos_base},
                  {"decoder_layers", cfg.decoder_layers},
                  {"decoder_heads", cfg.decoder_heads}};
    j["pretrain"] = {{"steps", cfg.pretrain.steps},
                     {"batch", cfg.pretrain.batch},
                     {"lr", cfg.pretrain.lr},
                     {"descriptions", cfg.pretrain.descriptions},
                     {"holdout_fraction", cfg.pretrain.holdout_fraction}};
    nlohmann::json mixture = nlohmann::json::object();
    for (const auto& [f, w] : cfg.train.mixture) mixture[family_name(f)] = w;
    j["train"] = {{"steps", cfg.train.steps},
                  {"batch_size", cfg.train.batch_size},
                  {"accum_every", cfg.train.accum_every},
                  {"clip_max_norm", cfg.train.clip_max_norm},
                  {"lr_adapters_and_mlp", cfg.train.lr_adapters_and_mlp},
                  {"lr_position_table", cfg.train.lr_position_table},
                  {"probe_every", cfg.train.probe_every},
                  {"probe_size", cfg.train.probe_size},
                  {"checkpoint_every", cfg.train.checkpoint_every},
                  {"precision", precision_name(cfg.precision)},
                  {"mixture", mixture}};
    j["eval"] = {{"max_len", cfg.eval_max_len}};
    return j;
}

}  // namespace graphtext
