#include "graphtext/text.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "graphtext/synth.hpp"

namespace graphtext {

namespace {

const char* kWords[] = {
    // answers and structural names
    "target", "first", "second", "node", "nodes", "edge", "edges", "graph", "degrees",
    "degree", "none", "type", "alpha", "beta", "gamma",
    // task description words
    "determine", "this", "most", "likely", "category", "within", "the", "network",
    "classification", "schema", "using", "its", "neighborhood", "whether", "there", "is",
    "a", "specific", "link", "relationship", "between", "these", "two", "marked", "in",
    "are", "connected", "by", "some", "path", "structure", "possesses", "structural",
    "property", "predict", "continuous", "numerical", "value", "of", "shortest",
    "distance", "number", "common", "neighbors", "cycles", "global", "information",
    "analyze", "following", "and", "produce", "answer", "for", "given", "task",
    // instruction words
    "with", "question", "which", "belong", "to", "please", "directly", "give", "from",
    "categories", "representation", "do", "have", "choose", "or", "how", "many",
    "provide", "single", "what", "contain", "does", "possess", "cyclic", "count",
};

}  // namespace

Vocab Vocab::standard() {
    Vocab v;
    v.tokens_ = {"<pad>", "<bos>", "<eos>", "<sep>", "<unk>", "yes", "no"};
    for (char d = '0'; d <= '9'; ++d) v.tokens_.push_back(std::string(1, d));
    for (const char* p : {".", "-", "(", ")", ",", ";", ":", "?"}) v.tokens_.push_back(p);
    for (const auto& c : color_names()) v.tokens_.push_back(c);
    for (const char* w : kWords) v.tokens_.push_back(w);
    v.index();
    return v;
}

void Vocab::index() {
    ids_.clear();
    for (int i = 0; i < static_cast<int>(tokens_.size()); ++i) {
        if (!ids_.emplace(tokens_[i], i).second)
            throw std::logic_error("Vocab: duplicate token " + tokens_[i]);
    }
    pad = id("<pad>");
    bos = id("<bos>");
    eos = id("<eos>");
    sep = id("<sep>");
    unk = id("<unk>");
    yes = id("yes");
    no = id("no");
    dot = id(".");
    minus = id("-");
    digits.clear();
    for (char d = '0'; d <= '9'; ++d) digits.push_back(id(std::string(1, d)));
}

int Vocab::id(const std::string& token) const {
    auto it = ids_.find(token);
    if (it == ids_.end()) throw std::out_of_range("Vocab: unknown token '" + token + "'");
    return it->second;
}

const std::string& Vocab::token(int tid) const {
    if (tid < 0 || tid >= size()) throw std::out_of_range("Vocab: id out of range");
    return tokens_[tid];
}

bool Vocab::is_digit(int tid) const {
    return std::find(digits.begin(), digits.end(), tid) != digits.end();
}

std::vector<int> Vocab::tokenize(const std::string& text) const {
    std::vector<int> out;
    std::istringstream stream(text);
    std::string word;
    while (stream >> word) {
        auto it = ids_.find(word);
        if (it != ids_.end()) {
            out.push_back(it->second);
            continue;
        }
        // Per-character fallback for numbers like "12" or "7.5".
        std::vector<int> chars;
        bool ok = !word.empty();
        for (char c : word) {
            auto cit = ids_.find(std::string(1, c));
            if (cit == ids_.end() || !is_numeric_piece(cit->second)) {
                ok = false;
                break;
            }
            chars.push_back(cit->second);
        }
        if (!ok) throw std::out_of_range("Vocab: cannot tokenize word '" + word + "'");
        out.insert(out.end(), chars.begin(), chars.end());
    }
    return out;
}

std::string Vocab::detokenize(const std::vector<int>& ids, bool drop_specials) const {
    std::string out;
    for (int tid : ids) {
        if (drop_specials && (tid == pad || tid == bos || tid == eos || tid == sep)) continue;
        if (!out.empty()) out += ' ';
        out += token(tid);
    }
    return out;
}

std::vector<int> Vocab::number_tokens(long value) const {
    std::vector<int> out;
    for (char c : std::to_string(value)) {
        if (c == '-')
            out.push_back(minus);
        else
            out.push_back(digits[c - '0']);
    }
    return out;
}

std::vector<int> Vocab::class_ids(int class_count) const {
    const auto& names = color_names();
    if (class_count < 1 || class_count > static_cast<int>(names.size()))
        throw std::invalid_argument("Vocab: class_count out of range");
    std::vector<int> out;
    for (int c = 0; c < class_count; ++c) out.push_back(id(names[c]));
    return out;
}

std::string Vocab::to_file_text() const {
    std::string out;
    for (const auto& t : tokens_) {
        out += t;
        out += '\n';
    }
    return out;
}

Vocab Vocab::from_file_text(const std::string& text) {
    Vocab v;
    std::istringstream stream(text);
    std::string line;
    while (std::getline(stream, line)) {
        if (!line.empty()) v.tokens_.push_back(line);
    }
    if (v.tokens_.empty()) throw std::runtime_error("Vocab: empty vocabulary file");
    v.index();
    return v;
}

Templates Templates::standard(int class_count) {
    Templates t;
    t.class_count_ = class_count;
    t.generic_desc_ =
        "analyze the following graph and produce the most likely answer for the given task";
    auto put = [&](TaskFamily f, std::string desc, std::string detail) {
        t.entries[f] = PromptTemplate{f, std::move(desc), std::move(detail)};
    };
    put(TaskFamily::NodeCls,
        "determine this target node most likely category within the network classification "
        "schema using its neighborhood",
        "target node : {center} . which category does this node belong to ? please "
        "directly give the most likely answer from : {candidates}");
    put(TaskFamily::LinkPred,
        "determine whether there is a specific link relationship between these two marked "
        "nodes in the network",
        "first node : {first} . second node : {second} . do these two nodes have a link "
        "relationship ? answer yes or no");
    put(TaskFamily::GraphCls,
        "determine whether the graph possesses a specific structural property within the "
        "graph classification schema",
        "does the graph possess the cyclic structure property ? answer yes or no");
    put(TaskFamily::GraphReg,
        "predict the continuous numerical value of a structural property of the graph using "
        "its structure",
        "what is the edge count of the graph ? answer with a single numerical value");
    put(TaskFamily::Conn,
        "determine whether two marked nodes are connected by some path in the network "
        "structure",
        "first node : {first} . second node : {second} . are these two nodes connected by "
        "some path ? answer yes or no");
    put(TaskFamily::Spd,
        "predict the shortest path distance between the two marked nodes in the network "
        "structure",
        "first node : {first} . second node : {second} . what is the shortest path "
        "distance between these two nodes ? answer with a single numerical value");
    put(TaskFamily::Cn,
        "predict the number of common neighbors between the two marked nodes in the network",
        "first node : {first} . second node : {second} . how many common neighbors do "
        "these two nodes have ? answer with a single numerical value");
    put(TaskFamily::Cycle,
        "predict the number of cycles in the graph using its global structure information",
        "how many cycles does the graph contain ? answer with a single numerical value");
    return t;
}

const PromptTemplate& Templates::for_family(TaskFamily f) const {
    auto it = entries.find(f);
    if (it == entries.end())
        throw std::out_of_range(std::string("Templates: no template for family ") +
                                family_name(f));
    return it->second;
}

std::string Templates::to_file_text() const {
    std::string out;
    for (const auto& [f, t] : entries) {
        out += std::string(family_name(f)) + ".desc = " + t.desc_text + "\n";
        out += std::string(family_name(f)) + ".detail = " + t.detail_pattern + "\n";
    }
    out += "generic.desc = " + generic_desc_ + "\n";
    return out;
}

std::vector<int> render_desc(const Templates& templates, const Vocab& vocab,
                             TaskFamily family) {
    auto ids = vocab.tokenize(templates.for_family(family).desc_text);
    ids.push_back(vocab.eos);
    return ids;
}

std::vector<int> render_generic_desc(const Templates& templates, const Vocab& vocab) {
    auto ids = vocab.tokenize(templates.generic_desc());
    ids.push_back(vocab.eos);
    return ids;
}

namespace {

std::string center_text(const Graph& parent, const TaskInstance& inst, std::size_t which,
                        const std::string& slot) {
    if (inst.sample.center_local.size() <= which)
        throw std::runtime_error("render_detail: missing slot data for {" + slot + "}");
    const int local = inst.sample.center_local[which];
    return parent.node_text(inst.sample.nodes[local]);
}

void replace_all(std::string& text, const std::string& slot, const std::string& value) {
    for (std::size_t pos = text.find(slot); pos != std::string::npos;
         pos = text.find(slot, pos + value.size())) {
        text.replace(pos, slot.size(), value);
    }
}

}  // namespace

std::vector<int> render_detail(const Templates& templates, const Vocab& vocab,
                               const Graph& parent, const TaskInstance& instance) {
    std::string text = templates.for_family(instance.family).detail_pattern;
    if (text.find("{center}") != std::string::npos)
        replace_all(text, "{center}", center_text(parent, instance, 0, "center"));
    if (text.find("{first}") != std::string::npos)
        replace_all(text, "{first}", center_text(parent, instance, 0, "first"));
    if (text.find("{second}") != std::string::npos)
        replace_all(text, "{second}", center_text(parent, instance, 1, "second"));
    if (text.find("{candidates}") != std::string::npos) {
        std::string cands;
        const auto& names = color_names();
        for (int c = 0; c < templates.class_count(); ++c) {
            if (c) cands += " or ";
            cands += names[c];
        }
        replace_all(text, "{candidates}", cands);
    }
    auto ids = vocab.tokenize(text);
    ids.push_back(vocab.eos);
    return ids;
}

std::vector<int> render_graph_description(const SubgraphSample& sample, const Vocab& vocab) {
    const int n = sample.size();
    // Canonical node order: degree descending, then original id ascending.
    // Both keys travel with the rows, so the rendering is invariant under
    // permutations of the sample's node order.
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const int da = sample.degree(a), db = sample.degree(b);
        if (da != db) return da > db;
        return sample.nodes[a] < sample.nodes[b];
    });
    std::vector<int> rank(n);
    for (int i = 0; i < n; ++i) rank[order[i]] = i;

    std::vector<int> ids;
    auto push_number = [&](long x) {
        const auto toks = vocab.number_tokens(x);
        ids.insert(ids.end(), toks.begin(), toks.end());
    };
    push_number(n);
    ids.push_back(vocab.id("nodes"));
    ids.push_back(vocab.id(";"));
    ids.push_back(vocab.id("degrees"));
    for (int i = 0; i < n; ++i) push_number(sample.degree(order[i]));
    ids.push_back(vocab.id(";"));
    ids.push_back(vocab.id("edges"));

    std::vector<std::pair<int, int>> canon_edges;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (!sample.has_edge(i, j)) continue;
            const int a = std::min(rank[i], rank[j]);
            const int b = std::max(rank[i], rank[j]);
            canon_edges.push_back({a, b});
        }
    std::sort(canon_edges.begin(), canon_edges.end());
    canon_edges.erase(std::unique(canon_edges.begin(), canon_edges.end()), canon_edges.end());

    if (canon_edges.empty()) {
        ids.push_back(vocab.id("none"));
    } else {
        for (const auto& [a, b] : canon_edges) {
            ids.push_back(vocab.id("("));
            push_number(a);
            ids.push_back(vocab.id(","));
            push_number(b);
            ids.push_back(vocab.id(")"));
        }
    }
    ids.push_back(vocab.eos);
    return ids;
}

}  // namespace graphtext
