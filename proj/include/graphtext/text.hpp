#pragma once

#include <map>
#include <string>
#include <vector>

#include "graphtext/graph.hpp"

namespace graphtext {

// Closed synthetic vocabulary. Token ids are stable: specials first, then
// digits, punctuation, class names and the template words. Multi-character
// numbers fall back to per-character digit tokens when tokenized.
class Vocab {
public:
    static Vocab standard();

    int size() const { return static_cast<int>(tokens_.size()); }
    bool contains(const std::string& token) const { return ids_.count(token) != 0; }
    int id(const std::string& token) const;
    const std::string& token(int id) const;

    std::vector<int> tokenize(const std::string& text) const;
    std::string detokenize(const std::vector<int>& ids, bool drop_specials = true) const;

    // Tokenizes an integer as a digit (and sign) sequence.
    std::vector<int> number_tokens(long value) const;

    int pad = -1, bos = -1, eos = -1, sep = -1, unk = -1, yes = -1, no = -1;
    int dot = -1, minus = -1;
    std::vector<int> digits;  // ids of "0".."9"

    bool is_digit(int id) const;
    bool is_numeric_piece(int id) const { return is_digit(id) || id == dot || id == minus; }

    // Class-name token ids for the first `class_count` colors.
    std::vector<int> class_ids(int class_count) const;

    // One token per line; the line number is the id.
    std::string to_file_text() const;
    static Vocab from_file_text(const std::string& text);

private:
    void index();
    std::vector<std::string> tokens_;
    std::map<std::string, int> ids_;
};

struct PromptTemplate {
    TaskFamily family;
    std::string desc_text;
    std::string detail_pattern;  // slots: {center} {first} {second} {candidates}
};

// Per-family prompt templates plus the generic description used by the
// task-awareness ablation.
class Templates {
public:
    static Templates standard(int class_count);

    const PromptTemplate& for_family(TaskFamily f) const;
    int class_count() const { return class_count_; }
    const std::string& generic_desc() const { return generic_desc_; }

    std::string to_file_text() const;

    std::map<TaskFamily, PromptTemplate> entries;

private:
    int class_count_ = 3;
    std::string generic_desc_;
};

// Fixed token sequence announcing the task family; ends with EOS.
std::vector<int> render_desc(const Templates& templates, const Vocab& vocab, TaskFamily family);

// Generic description sequence for the ablation that removes task-aware
// encoding.
std::vector<int> render_generic_desc(const Templates& templates, const Vocab& vocab);

// Instance-level instruction with center attributes and candidate labels
// filled in; ends with EOS. Throws (naming the slot) when the instance lacks
// the data a slot needs.
std::vector<int> render_detail(const Templates& templates, const Vocab& vocab,
                               const Graph& parent, const TaskInstance& instance);

// Canonical serialization of the sample: node count, descending degree
// sequence, edge list in canonical order (nodes sorted by degree then
// original id). Invariant under permutations of the sample's node order;
// ends with EOS.
std::vector<int> render_graph_description(const SubgraphSample& sample, const Vocab& vocab);

}  // namespace graphtext
