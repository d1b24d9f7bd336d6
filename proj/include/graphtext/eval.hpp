#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "graphtext/dataset.hpp"
#include "graphtext/decoder.hpp"
#include "graphtext/encoder.hpp"

namespace graphtext {

// ---- metrics (implemented in eval.cpp) ----

// Rank-statistic AUC with ties counted one half; throws when only one class
// is present.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

double mean_absolute_error(const std::vector<double>& predictions,
                           const std::vector<double>& targets);

// 1 - (mae - mae_min) / (mae_max - mae_min); throws on a degenerate range or
// a value outside it.
double normalized_mae(double mae, double mae_min, double mae_max);

enum class MetricKind { Accuracy, Auc, Mae };

// Primary metric per family: accuracy for node classification, AUC for the
// binary families, MAE for the regression families.
MetricKind metric_for_family(TaskFamily family);
const char* metric_name(MetricKind kind);

// ---- answer parsing ----

struct ParsedAnswer {
    enum class Kind { Label, Number, Illegal } kind = Kind::Illegal;
    int label_token = -1;
    double number = 0.0;

    bool legal() const { return kind != Kind::Illegal; }
};

// Classification: the first generated token must be a candidate label.
// Regression: the maximal leading run of digit/sign/point tokens must parse
// as a decimal. Anything else is ILLEGAL (a value, not an error).
ParsedAnswer parse_answer(const std::vector<int>& tokens, TaskFamily family,
                          const Vocab& vocab, int class_count);

struct InstanceRecord {
    std::vector<int> generated;
    std::string parsed_text;
    bool legal = false;
    bool correct = false;           // classification families
    double score = 0.0;             // auc families
    double predicted = 0.0;         // regression families (after imputation)
    std::string target;
};

double legality_rate(const std::vector<InstanceRecord>& records);

struct DatasetEval {
    std::string name;
    TaskFamily family = TaskFamily::Conn;
    MetricKind metric = MetricKind::Accuracy;
    double value = 0.0;
    double legality = 0.0;
    int count = 0;
    std::vector<InstanceRecord> records;
};

struct EvalReport {
    std::vector<DatasetEval> datasets;
    std::uint64_t seed = 0;
    std::string suite;
    std::string ablation = "none";
};

// ---- zero-shot protocol ----

template <typename T>
struct EvalDataset {
    std::string name;
    TaskFamily family = TaskFamily::Conn;
    std::vector<Prepared<T>> instances;
    // Mean numeric target of the dataset's train split; imputed for ILLEGAL
    // regression answers.
    double train_mean_target = 0.0;
};

struct EvalOptions {
    int max_len = 8;
    bool zero_prefix = false;   // ablation: remove alignment-token conditioning
    bool generic_desc = false;  // ablation: replace the task description
};

// Majority-class fraction of the label distribution (baseline for accuracy).
template <typename T>
double majority_fraction(const EvalDataset<T>& dataset) {
    std::map<std::string, int> counts;
    for (const auto& item : dataset.instances) ++counts[item.record.label];
    int best = 0;
    for (const auto& [label, c] : counts) best = std::max(best, c);
    return dataset.instances.empty()
               ? 0.0
               : static_cast<double>(best) / static_cast<double>(dataset.instances.size());
}

// Evaluates every dataset with greedy decoding and the harsh ILLEGAL
// conventions: wrong for accuracy, worst rank for AUC, train-mean imputation
// for regression. Read-only over the models.
template <typename T>
EvalReport zero_shot_eval(EncoderModel<T>& enc, DecoderModel<T>& dec,
                          const std::vector<EvalDataset<T>>& datasets,
                          const EvalOptions& options, const Vocab& vocab,
                          const Templates& templates, std::uint64_t seed) {
    EvalReport report;
    report.seed = seed;
    if (options.zero_prefix) report.ablation = "no-align";
    if (options.generic_desc)
        report.ablation = options.zero_prefix ? "no-align+generic-desc" : "generic-desc";
    const auto generic_ids = render_generic_desc(templates, vocab);

    for (const auto& dataset : datasets) {
        if (dataset.instances.empty())
            throw std::invalid_argument("zero_shot_eval: empty dataset " + dataset.name);
        DatasetEval result;
        result.name = dataset.name;
        result.family = dataset.family;
        result.metric = metric_for_family(dataset.family);
        result.count = static_cast<int>(dataset.instances.size());

        std::vector<double> scores, predictions, targets;
        std::vector<int> labels;
        int correct = 0;

        for (const auto& item : dataset.instances) {
            Tensor<T> h_a;
            if (options.generic_desc) {
                const auto input = assemble_input_with_desc(item.inst.sample,
                                                            item.record.graph, generic_ids,
                                                            enc);
                h_a = encode(input, enc);
            } else {
                h_a = encode(item.enc, enc);
            }
            if (options.zero_prefix)
                std::fill(h_a.values.begin(), h_a.values.end(), T(0));

            InstanceRecord rec;
            rec.target = item.record.label;
            rec.generated = generate(dec, h_a, item.detail, options.max_len, vocab);
            const auto parsed = parse_answer(rec.generated, dataset.family, vocab,
                                             templates.class_count());
            rec.legal = parsed.legal();
            switch (result.metric) {
                case MetricKind::Accuracy: {
                    if (parsed.kind == ParsedAnswer::Kind::Label) {
                        rec.parsed_text = vocab.token(parsed.label_token);
                        rec.correct = rec.parsed_text == item.record.label;
                    }
                    correct += rec.correct ? 1 : 0;
                    break;
                }
                case MetricKind::Auc: {
                    rec.score = parsed.legal()
                                    ? score_binary(dec, h_a, item.detail, vocab)
                                    : -std::numeric_limits<double>::infinity();
                    if (parsed.kind == ParsedAnswer::Kind::Label)
                        rec.parsed_text = vocab.token(parsed.label_token);
                    scores.push_back(rec.score);
                    labels.push_back(item.record.label == "yes" ? 1 : 0);
                    break;
                }
                case MetricKind::Mae: {
                    if (!item.inst.numeric_target)
                        throw std::runtime_error("zero_shot_eval: missing numeric target in " +
                                                 dataset.name);
                    rec.predicted = parsed.kind == ParsedAnswer::Kind::Number
                                        ? parsed.number
                                        : dataset.train_mean_target;
                    if (parsed.kind == ParsedAnswer::Kind::Number)
                        rec.parsed_text = std::to_string(parsed.number);
                    predictions.push_back(rec.predicted);
                    targets.push_back(*item.inst.numeric_target);
                    break;
                }
            }
            result.records.push_back(std::move(rec));
        }

        switch (result.metric) {
            case MetricKind::Accuracy:
                result.value = static_cast<double>(correct) / result.count;
                break;
            case MetricKind::Auc:
                result.value = auc(scores, labels);
                break;
            case MetricKind::Mae:
                result.value = mean_absolute_error(predictions, targets);
                break;
        }
        result.legality = legality_rate(result.records);
        report.datasets.push_back(std::move(result));
    }
    return report;
}

}  // namespace graphtext
