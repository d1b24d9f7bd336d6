#include "graphtext/cli.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "graphtext/config.hpp"
#include "graphtext/dataset.hpp"
#include "graphtext/eval.hpp"
#include "graphtext/io.hpp"
#include "graphtext/model_io.hpp"
#include "graphtext/trainer.hpp"

namespace graphtext {

namespace {

namespace fs = std::filesystem;

RunConfig load_run_config(const CliArgs& args) {
    if (args.config_path.empty()) throw ValidationError("missing --config");
    RunConfig cfg = load_config(args.config_path);
    if (args.seed_override) {
        cfg.seed = *args.seed_override;
        cfg.train.seed = cfg.seed;
    }
    return cfg;
}

fs::path require_out_dir(const CliArgs& args) {
    if (args.out_dir.empty()) throw ValidationError("missing --out");
    fs::create_directories(args.out_dir);
    return args.out_dir;
}

fs::path require_data_dir(const CliArgs& args) {
    if (args.data_dir.empty()) throw ValidationError("missing --data");
    if (!fs::is_directory(args.data_dir))
        throw ValidationError("data directory does not exist: " + args.data_dir);
    return args.data_dir;
}

std::string split_file(TaskFamily family, const std::string& split) {
    return std::string(family_name(family)) + "_" + split + ".jsonl";
}

std::vector<DatasetRecord> generated_records(TaskFamily family, const GenParams& gen,
                                             std::uint64_t seed, int count, int hop_radius,
                                             int max_nodes, const char* label_prefix) {
    const auto instances = gen_synthetic(
        family, gen, derive_seed(seed, std::string(label_prefix) + family_name(family)),
        count);
    std::vector<DatasetRecord> records;
    records.reserve(instances.size());
    for (const auto& g : instances)
        records.push_back(record_from_generated(g, hop_radius, max_nodes));
    return records;
}

double mean_numeric_target(const std::vector<DatasetRecord>& records) {
    double total = 0;
    long count = 0;
    for (const auto& r : records) {
        if (r.numeric) {
            total += *r.numeric;
            ++count;
        }
    }
    return count > 0 ? total / static_cast<double>(count) : 0.0;
}

nlohmann::json eval_report_to_json(const EvalReport& report, const RunConfig& cfg,
                                   const Vocab& vocab) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["suite"] = report.suite;
    j["ablation"] = report.ablation;
    j["seed"] = report.seed;
    j["config_echo"] = config_to_json(cfg);
    nlohmann::json datasets = nlohmann::json::array();
    for (const auto& d : report.datasets) {
        nlohmann::json dj;
        dj["name"] = d.name;
        dj["family"] = family_name(d.family);
        dj["metric"] = metric_name(d.metric);
        dj["value"] = d.value;
        dj["legality_rate"] = d.legality;
        dj["count"] = d.count;
        nlohmann::json records = nlohmann::json::array();
        for (const auto& r : d.records) {
            nlohmann::json rj;
            rj["generated"] = r.generated;
            rj["generated_text"] = vocab.detokenize(r.generated);
            rj["parsed"] = r.parsed_text;
            rj["legal"] = r.legal;
            rj["target"] = r.target;
            if (d.metric == MetricKind::Accuracy) rj["correct"] = r.correct;
            if (d.metric == MetricKind::Auc) rj["score"] = r.score;
            if (d.metric == MetricKind::Mae) rj["predicted"] = r.predicted;
            records.push_back(std::move(rj));
        }
        dj["records"] = std::move(records);
        datasets.push_back(std::move(dj));
    }
    j["datasets"] = std::move(datasets);
    return j;
}

std::string eval_metrics_csv(const EvalReport& report) {
    std::ostringstream csv;
    csv << "dataset,metric,value\n";
    csv.precision(12);
    for (const auto& d : report.datasets) {
        csv << d.name << ',' << metric_name(d.metric) << ',' << d.value << '\n';
        csv << d.name << ",legality_rate," << d.legality << '\n';
    }
    return csv.str();
}

// ---- gen-data ----

void run_gen_data(const RunConfig& cfg, const CliArgs& args) {
    const fs::path out = require_out_dir(args);
    const Vocab vocab = Vocab::standard();
    const Templates templates = Templates::standard(cfg.data.gen.class_count);

    std::vector<std::string> written;
    nlohmann::json file_index = nlohmann::json::object();

    std::set<std::string> seen;
    std::vector<TaskFamily> all_families = cfg.data.train_families;
    for (auto f : cfg.data.cross_task_families) all_families.push_back(f);
    for (TaskFamily family : all_families) {
        if (!seen.insert(family_name(family)).second)
            throw ValidationError(std::string("duplicate family in config: ") +
                                  family_name(family));
        auto records = generated_records(family, cfg.data.gen, cfg.seed,
                                         cfg.data.instances_per_family, cfg.data.hop_radius,
                                         cfg.data.max_subgraph_nodes, "data:");
        const int n = static_cast<int>(records.size());
        const int n_train = n * 8 / 10;
        const int n_val = n / 10;
        const auto write_split = [&](const std::string& split, int begin, int end) {
            const std::string name = split_file(family, split);
            write_records(out / name,
                          {records.begin() + begin, records.begin() + end});
            written.push_back(name);
            file_index[name] = end - begin;
        };
        write_split("train", 0, n_train);
        write_split("val", n_train, n_train + n_val);
        write_split("test", n_train + n_val, n);
    }
    for (TaskFamily family : cfg.data.train_families) {
        auto records = generated_records(family, cfg.data.cross_domain_gen, cfg.seed,
                                         cfg.data.eval_instances, cfg.data.hop_radius,
                                         cfg.data.max_subgraph_nodes, "crossdomain:");
        const std::string name = split_file(family, "cross-domain");
        write_records(out / name, records);
        written.push_back(name);
        file_index[name] = records.size();
    }

    write_file(out / "vocab.txt", vocab.to_file_text());
    written.push_back("vocab.txt");
    write_file(out / "templates.txt", templates.to_file_text());
    written.push_back("templates.txt");

    nlohmann::json index;
    index["schema_version"] = 1;
    index["files"] = file_index;
    index["config_echo"] = config_to_json(cfg);
    write_file(out / "dataset_index.json", index.dump(2) + "\n");
    written.push_back("dataset_index.json");

    RunManifest manifest{"gen-data", args.config_path, cfg.seed, {}, {}};
    finalize_manifest(manifest, out, written);
}

// ---- pretrain-decoder ----

std::vector<std::vector<int>> build_pretrain_corpus(const RunConfig& cfg,
                                                    const fs::path& data_dir,
                                                    const Vocab& vocab) {
    // All legal answer strings: every distinct train label, the binary
    // answers, every class name, and small integers.
    std::set<std::string> answers{"yes", "no"};
    for (int c = 0; c < cfg.data.gen.class_count; ++c) answers.insert(color_names()[c]);
    for (int k = 0; k <= 30; ++k) answers.insert(std::to_string(k));

    std::vector<std::vector<int>> descriptions;
    std::vector<TaskFamily> all_families = cfg.data.train_families;
    for (auto f : cfg.data.cross_task_families) all_families.push_back(f);
    for (TaskFamily family : all_families) {
        const fs::path file = data_dir / split_file(family, "train");
        if (!fs::exists(file))
            throw ValidationError("pretrain-decoder: missing dataset file " + file.string());
        for (const auto& record : read_records(file)) {
            answers.insert(record.label);
            auto inst = build_instance(record, vocab);
            // SEP marks description sequences; the LM loss appends EOS.
            std::vector<int> d_g{vocab.sep};
            d_g.insert(d_g.end(), inst.reconstruction_tokens.begin(),
                       inst.reconstruction_tokens.end() - 1);
            descriptions.push_back(std::move(d_g));
        }
    }
    // Top up with whole-graph samples until the configured corpus size.
    std::uint64_t extra_seed = derive_seed(cfg.seed, "pretrain-extra");
    int extra_index = 0;
    while (static_cast<int>(descriptions.size()) < cfg.pretrain.descriptions) {
        const auto batch = gen_synthetic(TaskFamily::Cycle, cfg.data.gen,
                                         extra_seed + extra_index, 64);
        for (const auto& g : batch) {
            if (static_cast<int>(descriptions.size()) >= cfg.pretrain.descriptions) break;
            const auto record =
                record_from_generated(g, cfg.data.hop_radius, cfg.data.max_subgraph_nodes);
            const auto tokens = build_instance(record, vocab).reconstruction_tokens;
            std::vector<int> d_g{vocab.sep};
            d_g.insert(d_g.end(), tokens.begin(), tokens.end() - 1);
            descriptions.push_back(std::move(d_g));
        }
        extra_index += 64;
    }
    if (static_cast<int>(descriptions.size()) > cfg.pretrain.descriptions)
        descriptions.resize(cfg.pretrain.descriptions);

    // Three sequence kinds: bare descriptions, bare answers, and packed
    // sequences that mirror the tuning layout
    // [SEP description ; answer-type cue ; EOS BOS answer]. The cue is the
    // instruction tail that announces the answer type, and the packed answer
    // is a function of the description (node count, edge presence) or a
    // cycled class name. This is what lets the frozen decoder pick the
    // answer mode from the instruction and read content far behind BOS.
    std::string candidate_tail = "the most likely answer from :";
    for (int c = 0; c < cfg.data.gen.class_count; ++c) {
        if (c) candidate_tail += " or";
        candidate_tail += " " + color_names()[c];
    }
    const std::vector<int> cue_number = vocab.tokenize("answer with a single numerical value");
    const std::vector<int> cue_binary = vocab.tokenize("answer yes or no");
    const std::vector<int> cue_class = vocab.tokenize(candidate_tail);

    std::vector<std::vector<int>> corpus;
    for (std::size_t i = 0; i < descriptions.size(); ++i) {
        corpus.push_back(descriptions[i]);
        const auto& d = descriptions[i];
        std::vector<int> packed = d;
        std::vector<int> answer;
        const std::vector<int>* cue = nullptr;
        switch (i % 3) {
            case 0: {  // copy the node count (digits right after SEP)
                cue = &cue_number;
                for (std::size_t t = 1; t < d.size() && vocab.is_digit(d[t]); ++t)
                    answer.push_back(d[t]);
                break;
            }
            case 1: {  // edge presence as a binary answer
                cue = &cue_binary;
                const bool none = std::find(d.begin(), d.end(), vocab.id("none")) != d.end();
                answer.push_back(none ? vocab.no : vocab.yes);
                break;
            }
            case 2: {  // cycled class name keeps label-word mass in the prior
                cue = &cue_class;
                const auto classes = vocab.class_ids(cfg.data.gen.class_count);
                answer.push_back(classes[(i / 3) % classes.size()]);
                break;
            }
        }
        packed.insert(packed.end(), cue->begin(), cue->end());
        packed.push_back(vocab.eos);
        packed.push_back(vocab.bos);
        packed.insert(packed.end(), answer.begin(), answer.end());
        corpus.push_back(std::move(packed));
    }
    // Bare answers, weighted so binary words, class names and small numbers
    // stay comparably likely at the answer position.
    auto repeat_answer = [&](const std::string& answer, int copies) {
        std::vector<int> ids{vocab.bos};
        const auto toks = vocab.tokenize(answer);
        ids.insert(ids.end(), toks.begin(), toks.end());
        for (int copy = 0; copy < copies; ++copy) corpus.push_back(ids);
    };
    for (const auto& answer : answers) {
        int copies = 10;
        if (answer == "yes" || answer == "no")
            copies = 80;
        else if (!answer.empty() && !std::isdigit(static_cast<unsigned char>(answer[0])))
            copies = 50;  // class names
        repeat_answer(answer, copies);
    }
    return corpus;
}

template <typename T>
void run_pretrain(const RunConfig& cfg, const CliArgs& args) {
    const fs::path out = require_out_dir(args);
    const fs::path data_dir = require_data_dir(args);
    const Vocab vocab = Vocab::standard();
    const auto corpus = build_pretrain_corpus(cfg, data_dir, vocab);

    DecoderModel<T> model = make_decoder_model<T>(cfg.decoder_config(), vocab.size(),
                                                  derive_seed(cfg.seed, "decoder"));
    PretrainConfig pcfg;
    pcfg.steps = cfg.pretrain.steps;
    pcfg.batch = cfg.pretrain.batch;
    pcfg.lr = cfg.pretrain.lr;
    pcfg.holdout_fraction = cfg.pretrain.holdout_fraction;
    pcfg.seed = cfg.seed;
    const PretrainReport report = pretrain_decoder(model, corpus, pcfg, vocab);

    save_decoder_checkpoint(out / "decoder.ckpt", model, cfg);

    nlohmann::json j;
    j["schema_version"] = 1;
    j["heldout_perplexity"] = report.heldout_perplexity;
    j["heldout_sequences"] = report.heldout_sequences;
    j["vocab_size"] = vocab.size();
    j["uniform_perplexity_bound"] = vocab.size();
    j["corpus_sequences"] = corpus.size();
    j["loss_curve"] = report.loss_curve;
    write_file(out / "pretrain_report.json", j.dump(2) + "\n");

    if (report.heldout_perplexity >= vocab.size())
        std::cerr << "warning: held-out perplexity " << report.heldout_perplexity
                  << " is not below the uniform bound " << vocab.size() << "\n";

    RunManifest manifest{"pretrain-decoder", args.config_path, cfg.seed,
                         {{"data", data_dir.string()}}, {}};
    finalize_manifest(manifest, out, {"decoder.ckpt", "pretrain_report.json"});
}

// ---- train ----

template <typename T>
FamilyDatasets<T> load_family_datasets(const RunConfig& cfg, const fs::path& data_dir,
                                       const Vocab& vocab, const Templates& templates,
                                       const EncoderModel<T>& model) {
    FamilyDatasets<T> data;
    for (TaskFamily family : cfg.data.train_families) {
        const fs::path file = data_dir / split_file(family, "train");
        if (!fs::exists(file))
            throw ValidationError("train: missing dataset file " + file.string());
        data[family] = prepare_records(read_records(file), vocab, templates, model);
    }
    return data;
}

template <typename T>
void run_train(const RunConfig& cfg, const CliArgs& args) {
    const fs::path out = require_out_dir(args);
    const fs::path data_dir = require_data_dir(args);
    if (args.decoder_ckpt.empty()) throw ValidationError("missing --decoder");
    const Vocab vocab = Vocab::standard();
    const Templates templates = Templates::standard(cfg.data.gen.class_count);

    CheckpointReader dec_reader(args.decoder_ckpt);
    if (dec_reader.meta().value("precision", "") != precision_name(cfg.precision))
        throw ValidationError("train: decoder checkpoint precision differs from config");
    DecoderModel<T> decoder = load_decoder_model<T>(dec_reader, cfg, vocab.size());
    if (!decoder.frozen) throw ValidationError("train: decoder checkpoint is not frozen");

    EncoderModel<T> encoder =
        make_encoder_model<T>(cfg.model, vocab.size(), derive_seed(cfg.seed, "encoder"));
    Rng rng(derive_seed(cfg.seed, "train-stream"));
    int start_step = 0;
    if (!args.resume_ckpt.empty()) {
        CheckpointReader enc_reader(args.resume_ckpt);
        encoder = load_encoder_model<T>(enc_reader, cfg, vocab.size());
        rng.restore(enc_reader.meta().at("rng_state").get<std::string>());
        start_step = enc_reader.meta().at("step").get<int>();
    }
    // The optimizer holds pointers into the encoder, so it must be built
    // after any resume load replaces the model.
    Adam<T> optimizer = make_tuning_optimizer(encoder, cfg.train);
    if (!args.resume_ckpt.empty()) {
        CheckpointReader enc_reader(args.resume_ckpt);
        load_optimizer_state(enc_reader, optimizer);
    }

    const auto data = load_family_datasets(cfg, data_dir, vocab, templates, encoder);

    std::vector<std::string> written;
    const auto checkpoint_hook = [&](int step, const TrainReport&) {
        const std::string name = "encoder_step_" + std::to_string(step) + ".ckpt";
        save_encoder_checkpoint(out / name, encoder, cfg, &optimizer, rng.state(), step);
        written.push_back(name);
    };

    const TrainReport report = train(cfg.train, data, encoder, decoder, vocab, optimizer,
                                     rng, start_step, checkpoint_hook);

    save_encoder_checkpoint(out / "encoder.ckpt", encoder, cfg, &optimizer, rng.state(),
                            cfg.train.steps);
    written.push_back("encoder.ckpt");

    std::ostringstream csv;
    csv.precision(12);
    for (std::size_t i = 0; i < report.step_loss.size(); ++i)
        csv << (start_step + 1 + static_cast<int>(i)) << ',' << report.step_loss[i] << '\n';
    write_file(out / "losses.csv", csv.str());
    written.push_back("losses.csv");

    nlohmann::json j;
    j["schema_version"] = 1;
    j["seed"] = cfg.seed;
    j["config_echo"] = config_to_json(cfg);
    j["start_step"] = start_step;
    j["steps"] = cfg.train.steps;
    j["probe_initial"] = report.probe_initial;
    j["probe_final_smoothed"] = report.probe_final_smoothed;
    nlohmann::json probe = nlohmann::json::array();
    for (const auto& [step, value] : report.probe_curve) probe.push_back({step, value});
    j["probe_curve"] = probe;
    j["instances_seen"] = report.instances_seen;
    write_file(out / "train_report.json", j.dump(2) + "\n");
    written.push_back("train_report.json");

    RunManifest manifest{"train", args.config_path, cfg.seed,
                         {{"data", data_dir.string()}, {"decoder", args.decoder_ckpt}},
                         {}};
    finalize_manifest(manifest, out, written);
}

// ---- eval ----

template <typename T>
std::vector<EvalDataset<T>> load_suite(const RunConfig& cfg, const fs::path& data_dir,
                                       const std::string& suite, const Vocab& vocab,
                                       const Templates& templates,
                                       const EncoderModel<T>& model) {
    std::vector<EvalDataset<T>> datasets;
    auto add = [&](TaskFamily family, const std::string& file_split,
                   const std::string& display_suffix) {
        const fs::path file = data_dir / split_file(family, file_split);
        if (!fs::exists(file))
            throw ValidationError("eval: missing dataset file " + file.string());
        EvalDataset<T> ds;
        ds.name = std::string(family_name(family)) + "_" + display_suffix;
        ds.family = family;
        ds.instances = prepare_records(read_records(file), vocab, templates, model);
        if (metric_for_family(family) == MetricKind::Mae) {
            const fs::path train_file = data_dir / split_file(family, "train");
            if (!fs::exists(train_file))
                throw ValidationError("eval: missing train split for imputation: " +
                                      train_file.string());
            ds.train_mean_target = mean_numeric_target(read_records(train_file));
        }
        datasets.push_back(std::move(ds));
    };
    if (suite == "in-domain") {
        for (TaskFamily family : cfg.data.train_families) add(family, "test", "test");
    } else if (suite == "cross-domain") {
        for (TaskFamily family : cfg.data.train_families)
            add(family, "cross-domain", "cross-domain");
    } else if (suite == "cross-task") {
        for (TaskFamily family : cfg.data.cross_task_families) add(family, "test", "test");
    } else {
        throw ValidationError("eval: unknown suite '" + suite +
                              "' (expected in-domain, cross-domain or cross-task)");
    }
    return datasets;
}

EvalOptions options_for_ablation(const std::string& ablation, int max_len) {
    EvalOptions options;
    options.max_len = max_len;
    if (ablation == "none") return options;
    if (ablation == "no-align") {
        options.zero_prefix = true;
        return options;
    }
    if (ablation == "generic-desc") {
        options.generic_desc = true;
        return options;
    }
    throw ValidationError("eval: unknown ablation '" + ablation +
                          "' (expected none, no-align or generic-desc)");
}

template <typename T>
void run_eval(const RunConfig& cfg, const CliArgs& args) {
    const fs::path out = require_out_dir(args);
    const fs::path data_dir = require_data_dir(args);
    if (args.decoder_ckpt.empty()) throw ValidationError("missing --decoder");
    if (args.encoder_ckpt.empty()) throw ValidationError("missing --encoder");
    const Vocab vocab = Vocab::standard();
    const Templates templates = Templates::standard(cfg.data.gen.class_count);

    CheckpointReader enc_reader(args.encoder_ckpt);
    CheckpointReader dec_reader(args.decoder_ckpt);
    EncoderModel<T> encoder = load_encoder_model<T>(enc_reader, cfg, vocab.size());
    DecoderModel<T> decoder = load_decoder_model<T>(dec_reader, cfg, vocab.size());

    const auto datasets = load_suite(cfg, data_dir, args.suite, vocab, templates, encoder);
    const EvalOptions options = options_for_ablation(args.ablation, cfg.eval_max_len);
    EvalReport report =
        zero_shot_eval(encoder, decoder, datasets, options, vocab, templates, cfg.seed);
    report.suite = args.suite;

    write_file(out / "eval_report.json",
               eval_report_to_json(report, cfg, vocab).dump(2) + "\n");
    write_file(out / "metrics.csv", eval_metrics_csv(report));

    RunManifest manifest{"eval", args.config_path, cfg.seed,
                         {{"data", data_dir.string()},
                          {"encoder", args.encoder_ckpt},
                          {"decoder", args.decoder_ckpt}},
                         {}};
    finalize_manifest(manifest, out, {"eval_report.json", "metrics.csv"});
}

// ---- report ----

void run_report(const CliArgs& args) {
    const fs::path out = require_out_dir(args);
    if (args.report_inputs.empty()) throw ValidationError("report: no input directories");

    std::vector<std::string> columns;
    std::map<std::pair<std::string, std::string>, std::map<std::string, double>> cells;
    for (const auto& input : args.report_inputs) {
        fs::path file = input;
        if (fs::is_directory(file)) file /= "eval_report.json";
        if (!fs::exists(file)) throw ValidationError("report: missing " + file.string());
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(read_file(file));
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("report: invalid JSON in " + file.string() + ": " + e.what());
        }
        std::string column = j.value("suite", "eval");
        const std::string ablation = j.value("ablation", "none");
        if (ablation != "none") column += "/" + ablation;
        // Disambiguate duplicate column names by input order.
        std::string unique = column;
        int k = 2;
        while (std::find(columns.begin(), columns.end(), unique) != columns.end())
            unique = column + "#" + std::to_string(k++);
        columns.push_back(unique);
        for (const auto& d : j.at("datasets")) {
            cells[{d.at("name").get<std::string>(), d.at("metric").get<std::string>()}]
                 [unique] = d.at("value").get<double>();
            cells[{d.at("name").get<std::string>(), "legality_rate"}][unique] =
                d.at("legality_rate").get<double>();
        }
    }

    std::ostringstream csv, txt;
    csv << "dataset,metric";
    for (const auto& c : columns) csv << ',' << c;
    csv << '\n';
    csv.precision(12);
    txt.precision(4);
    txt << std::left;
    txt.width(28);
    txt << "dataset/metric";
    for (const auto& c : columns) {
        txt.width(22);
        txt << c;
    }
    txt << '\n';
    for (const auto& [key, row] : cells) {
        csv << key.first << ',' << key.second;
        txt.width(28);
        txt << (key.first + " " + key.second);
        for (const auto& c : columns) {
            auto it = row.find(c);
            if (it == row.end()) {
                csv << ",-";
                txt.width(22);
                txt << "-";
            } else {
                csv << ',' << it->second;
                txt.width(22);
                txt << it->second;
            }
        }
        csv << '\n';
        txt << '\n';
    }
    write_file(out / "report.csv", csv.str());
    write_file(out / "report.txt", txt.str());

    RunManifest manifest{"report", "", 0, {}, {}};
    for (std::size_t i = 0; i < args.report_inputs.size(); ++i)
        manifest.inputs["input" + std::to_string(i)] = args.report_inputs[i];
    finalize_manifest(manifest, out, {"report.csv", "report.txt"});
}

}  // namespace

void cmd_gen_data(const CliArgs& args) { run_gen_data(load_run_config(args), args); }

void cmd_pretrain_decoder(const CliArgs& args) {
    const RunConfig cfg = load_run_config(args);
    if (cfg.precision == Precision::F64)
        run_pretrain<double>(cfg, args);
    else
        run_pretrain<float>(cfg, args);
}

void cmd_train(const CliArgs& args) {
    const RunConfig cfg = load_run_config(args);
    if (cfg.precision == Precision::F64)
        run_train<double>(cfg, args);
    else
        run_train<float>(cfg, args);
}

void cmd_eval(const CliArgs& args) {
    if (args.encoder_ckpt.empty()) throw ValidationError("missing --encoder");
    const CheckpointReader reader(args.encoder_ckpt);
    RunConfig cfg = config_from_checkpoint(reader);
    if (args.seed_override) cfg.seed = *args.seed_override;
    if (cfg.precision == Precision::F64)
        run_eval<double>(cfg, args);
    else
        run_eval<float>(cfg, args);
}

void cmd_report(const CliArgs& args) { run_report(args); }

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"structure-aware graph-text encoder pipeline"};
    app.require_subcommand(1);
    CliArgs args;

    auto add_common = [&](CLI::App* cmd, bool with_config) {
        if (with_config) cmd->add_option("--config", args.config_path, "run config (JSON)");
        cmd->add_option("--out", args.out_dir, "output directory")->required();
        cmd->add_option("--seed", args.seed_override, "override the config seed");
    };

    auto* gen = app.add_subcommand("gen-data", "generate synthetic task datasets");
    add_common(gen, true);

    auto* pre = app.add_subcommand("pretrain-decoder", "pretrain and freeze the decoder");
    add_common(pre, true);
    pre->add_option("--data", args.data_dir, "dataset directory")->required();

    auto* tr = app.add_subcommand("train", "instruction-tune the encoder");
    add_common(tr, true);
    tr->add_option("--data", args.data_dir, "dataset directory")->required();
    tr->add_option("--decoder", args.decoder_ckpt, "decoder checkpoint")->required();
    tr->add_option("--resume", args.resume_ckpt, "encoder checkpoint to resume from");

    auto* ev = app.add_subcommand("eval", "zero-shot evaluation");
    add_common(ev, false);
    ev->add_option("--encoder", args.encoder_ckpt, "encoder checkpoint")->required();
    ev->add_option("--decoder", args.decoder_ckpt, "decoder checkpoint")->required();
    ev->add_option("--data", args.data_dir, "dataset directory")->required();
    ev->add_option("--suite", args.suite, "in-domain | cross-domain | cross-task");
    ev->add_option("--ablation", args.ablation, "none | no-align | generic-desc");

    auto* rep = app.add_subcommand("report", "merge evaluation reports");
    add_common(rep, false);
    rep->add_option("inputs", args.report_inputs, "eval output directories")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) cmd_gen_data(args);
        if (pre->parsed()) cmd_pretrain_decoder(args);
        if (tr->parsed()) cmd_train(args);
        if (ev->parsed()) cmd_eval(args);
        if (rep->parsed()) cmd_report(args);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace graphtext
