#include "graphtext/io.hpp"

#include <fstream>
#include <sstream>

#include "graphtext/rng.hpp"

namespace graphtext {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write file: " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string content_hash_hex(const std::string& content) {
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(content)));
    return std::string("fnv64:") + buffer;
}

namespace {

void check_plain_string(const std::string& s, const char* what) {
    for (char c : s)
        if (c == '"' || c == '\n' || c == '\r')
            throw ValidationError(std::string(what) +
                                  " may not contain quotes or newlines: " + s);
}

std::string parse_quoted(std::istringstream& in, const char* what) {
    std::string rest;
    std::getline(in, rest);
    const auto first = rest.find('"');
    const auto last = rest.rfind('"');
    if (first == std::string::npos || last == first)
        throw ValidationError(std::string("graph text: malformed quoted string in ") + what);
    return rest.substr(first + 1, last - first - 1);
}

}  // namespace

std::string graph_to_text(const Graph& graph) {
    std::ostringstream out;
    out << graph.num_nodes() << ' ' << (graph.directed() ? 1 : 0) << '\n';
    for (const auto& [i, j] : graph.edges()) {
        const auto& desc = graph.edge_description(i, j);
        check_plain_string(desc, "edge description");
        out << "edge " << i << ' ' << j << " \"" << desc << "\"\n";
    }
    for (int v = 0; v < graph.num_nodes(); ++v) {
        check_plain_string(graph.node_text(v), "node text");
        out << "node " << v << " \"" << graph.node_text(v) << "\"\n";
    }
    return out.str();
}

Graph graph_from_text(const std::string& text) {
    std::istringstream in(text);
    int n = 0, directed = 0;
    if (!(in >> n >> directed)) throw ValidationError("graph text: bad header");
    if (n < 1) throw ValidationError("graph text: need at least one node");
    Graph graph(n, directed != 0);
    std::string kind;
    while (in >> kind) {
        if (kind == "edge") {
            int i = 0, j = 0;
            if (!(in >> i >> j)) throw ValidationError("graph text: bad edge line");
            graph.add_edge(i, j, parse_quoted(in, "edge"));
        } else if (kind == "node") {
            int i = 0;
            if (!(in >> i)) throw ValidationError("graph text: bad node line");
            graph.set_node_text(i, parse_quoted(in, "node"));
        } else {
            throw ValidationError("graph text: unknown line kind '" + kind + "'");
        }
    }
    graph.validate();
    return graph;
}

std::string record_to_json_line(const DatasetRecord& record) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["family"] = family_name(record.family);
    j["graph"] = graph_to_text(record.graph);
    switch (record.center.kind) {
        case CenterKind::Node:
            j["center"] = {record.center.a};
            break;
        case CenterKind::Pair:
            j["center"] = {record.center.a, record.center.b};
            break;
        case CenterKind::WholeGraph:
            j["center"] = nlohmann::json::array();
            break;
    }
    j["hop_radius"] = record.hop_radius;
    j["max_nodes"] = record.max_nodes;
    j["label"] = record.label;
    if (record.numeric)
        j["numeric"] = *record.numeric;
    else
        j["numeric"] = nullptr;
    return j.dump();
}

DatasetRecord record_from_json_line(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("dataset record: invalid JSON: ") + e.what());
    }
    if (!j.contains("schema_version") || j["schema_version"].get<int>() != 1)
        throw ValidationError("dataset record: unsupported schema_version");
    DatasetRecord record{graph_from_text(j.at("graph").get<std::string>()),
                         Center::whole_graph(),
                         family_from_name(j.at("family").get<std::string>()),
                         j.at("label").get<std::string>(),
                         std::nullopt,
                         j.at("hop_radius").get<int>(),
                         j.at("max_nodes").get<int>()};
    const auto& center = j.at("center");
    if (center.size() == 1)
        record.center = Center::node(center[0].get<int>());
    else if (center.size() == 2)
        record.center = Center::pair(center[0].get<int>(), center[1].get<int>());
    if (!j.at("numeric").is_null()) record.numeric = j["numeric"].get<double>();
    return record;
}

void write_records(const std::filesystem::path& path,
                   const std::vector<DatasetRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += record_to_json_line(r);
        out += '\n';
    }
    write_file(path, out);
}

std::vector<DatasetRecord> read_records(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::vector<DatasetRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) records.push_back(record_from_json_line(line));
    }
    if (records.empty()) throw ValidationError("dataset file is empty: " + path.string());
    return records;
}

void CheckpointWriter::write(const std::filesystem::path& path) const {
    nlohmann::json manifest;
    manifest["schema_version"] = 1;
    manifest["meta"] = meta;
    nlohmann::json sections = nlohmann::json::object();
    std::size_t offset = 0;
    std::string payload;
    for (const auto& e : entries_) {
        nlohmann::json entry;
        entry["name"] = e.name;
        entry["shape"] = e.shape;
        entry["dtype"] = e.dtype;
        entry["offset"] = offset;
        entry["nbytes"] = e.bytes.size();
        sections[e.section].push_back(entry);
        payload += e.bytes;
        offset += e.bytes.size();
    }
    manifest["sections"] = sections;
    const std::string manifest_text = manifest.dump();

    std::string out(kCheckpointMagic, sizeof(kCheckpointMagic));
    std::uint64_t len = manifest_text.size();
    char lenbuf[8];
    for (int i = 0; i < 8; ++i) lenbuf[i] = static_cast<char>((len >> (8 * i)) & 0xff);
    out.append(lenbuf, 8);
    out += manifest_text;
    out += payload;
    write_file(path, out);
}

CheckpointReader::CheckpointReader(const std::filesystem::path& path) {
    const std::string blob = read_file(path);
    if (blob.size() < sizeof(kCheckpointMagic) + 8 ||
        std::memcmp(blob.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0)
        throw ValidationError("checkpoint: bad magic in " + path.string());
    std::uint64_t len = 0;
    for (int i = 0; i < 8; ++i)
        len |= static_cast<std::uint64_t>(
                   static_cast<unsigned char>(blob[sizeof(kCheckpointMagic) + i]))
               << (8 * i);
    const std::size_t manifest_start = sizeof(kCheckpointMagic) + 8;
    if (blob.size() < manifest_start + len)
        throw ValidationError("checkpoint: truncated manifest");
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(blob.substr(manifest_start, len));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("checkpoint: invalid manifest: ") + e.what());
    }
    if (manifest.at("schema_version").get<int>() != 1)
        throw ValidationError("checkpoint: unsupported schema_version");
    meta_ = manifest.value("meta", nlohmann::json::object());
    payload_ = blob.substr(manifest_start + len);
    for (const auto& [section, entries] : manifest.at("sections").items()) {
        for (const auto& entry : entries) {
            Entry e;
            e.dtype = entry.at("dtype").get<std::string>();
            e.shape = entry.at("shape").get<std::vector<int>>();
            e.offset = entry.at("offset").get<std::size_t>();
            const std::size_t nbytes = entry.at("nbytes").get<std::size_t>();
            const std::size_t elem = e.dtype == "f64" ? 8 : 4;
            e.count = nbytes / elem;
            if (e.offset + nbytes > payload_.size())
                throw ValidationError("checkpoint: entry out of bounds");
            sections_[section][entry.at("name").get<std::string>()] = e;
        }
    }
}

bool CheckpointReader::has(const std::string& section, const std::string& name) const {
    auto it = sections_.find(section);
    return it != sections_.end() && it->second.count(name) != 0;
}

std::vector<std::string> CheckpointReader::names(const std::string& section) const {
    std::vector<std::string> out;
    auto it = sections_.find(section);
    if (it == sections_.end()) return out;
    for (const auto& [name, entry] : it->second) out.push_back(name);
    return out;
}

const CheckpointReader::Entry& CheckpointReader::find(const std::string& section,
                                                      const std::string& name) const {
    auto sit = sections_.find(section);
    if (sit == sections_.end())
        throw ValidationError("checkpoint: missing section " + section);
    auto it = sit->second.find(name);
    if (it == sit->second.end())
        throw ValidationError("checkpoint: missing entry " + section + "/" + name);
    return it->second;
}

void write_manifest(const std::filesystem::path& out_dir, const RunManifest& manifest) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["command"] = manifest.command;
    j["config"] = manifest.config_path;
    j["seed"] = manifest.seed;
    j["inputs"] = manifest.inputs;
    j["outputs"] = manifest.outputs;
    write_file(out_dir / "manifest.json", j.dump(2) + "\n");
}

void finalize_manifest(RunManifest& manifest, const std::filesystem::path& out_dir,
                       const std::vector<std::string>& filenames) {
    for (const auto& name : filenames)
        manifest.outputs[name] = content_hash_hex(read_file(out_dir / name));
    write_manifest(out_dir, manifest);
}

}  // namespace graphtext
