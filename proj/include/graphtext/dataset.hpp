#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "graphtext/encoder.hpp"
#include "graphtext/graph.hpp"
#include "graphtext/synth.hpp"
#include "graphtext/text.hpp"

namespace graphtext {

// One stored dataset row: the full parent graph plus everything needed to
// rebuild the task instance deterministically.
struct DatasetRecord {
    Graph graph;
    Center center;
    TaskFamily family = TaskFamily::Conn;
    std::string label;
    std::optional<double> numeric;
    int hop_radius = 2;
    int max_nodes = 16;
};

inline DatasetRecord record_from_generated(const GeneratedInstance& gen, int hop_radius,
                                           int max_nodes) {
    return DatasetRecord{gen.graph, gen.center, gen.family, gen.label,
                         gen.numeric, hop_radius, max_nodes};
}

// Extracts the subgraph and tokenizes the targets.
inline TaskInstance build_instance(const DatasetRecord& record, const Vocab& vocab) {
    TaskInstance inst;
    inst.sample = extract_khop(record.graph, record.center, record.hop_radius,
                               record.max_nodes);
    inst.family = record.family;
    inst.target_tokens = vocab.tokenize(record.label);
    inst.target_tokens.push_back(vocab.eos);
    inst.reconstruction_tokens = render_graph_description(inst.sample, vocab);
    inst.numeric_target = record.numeric;
    return inst;
}

// Fully prepared training/eval item: instance plus the assembled encoder
// input under the family description and the instruction token ids.
template <typename T>
struct Prepared {
    DatasetRecord record;
    TaskInstance inst;
    std::vector<int> detail;
    EncoderInput<T> enc;
};

template <typename T>
Prepared<T> prepare_record(const DatasetRecord& record, const Vocab& vocab,
                           const Templates& templates, const EncoderModel<T>& model) {
    TaskInstance inst = build_instance(record, vocab);
    std::vector<int> detail = render_detail(templates, vocab, record.graph, inst);
    EncoderInput<T> enc =
        assemble_input(inst.sample, record.graph, record.family, templates, vocab, model);
    return Prepared<T>{record, std::move(inst), std::move(detail), std::move(enc)};
}

template <typename T>
std::vector<Prepared<T>> prepare_records(const std::vector<DatasetRecord>& records,
                                         const Vocab& vocab, const Templates& templates,
                                         const EncoderModel<T>& model) {
    std::vector<Prepared<T>> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(prepare_record(r, vocab, templates, model));
    return out;
}

template <typename T>
using FamilyDatasets = std::map<TaskFamily, std::vector<Prepared<T>>>;

}  // namespace graphtext
