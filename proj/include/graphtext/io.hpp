#pragma once

#include <cstring>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "graphtext/dataset.hpp"
#include "graphtext/graph.hpp"
#include "graphtext/tensor.hpp"

namespace graphtext {

// Input/config/schema problems (CLI exit code 1); everything else that
// escapes is a runtime failure (exit code 2).
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

// Content hash for run manifests (FNV-1a 64, hex).
std::string content_hash_hex(const std::string& content);

// ---- graph text format ----
// Line 1: "N directed_flag". Then one `edge i j "description"` line per
// edge (once per undirected pair) and one `node i "text"` line per node.
std::string graph_to_text(const Graph& graph);
Graph graph_from_text(const std::string& text);

// ---- dataset records: one JSON object per line ----
std::string record_to_json_line(const DatasetRecord& record);
DatasetRecord record_from_json_line(const std::string& line);
void write_records(const std::filesystem::path& path,
                   const std::vector<DatasetRecord>& records);
std::vector<DatasetRecord> read_records(const std::filesystem::path& path);

// ---- checkpoint container ----
// Single binary file: magic, u64 little-endian manifest length, JSON
// manifest (sections -> entries with name/shape/dtype/offset), raw
// little-endian arrays. Sections keep the trainable and frozen parameter
// sets separate.
inline constexpr char kCheckpointMagic[8] = {'G', 'T', 'C', 'K', '0', '0', '0', '1'};

class CheckpointWriter {
public:
    nlohmann::json meta = nlohmann::json::object();

    template <typename T>
    void add_tensor(const std::string& section, const Tensor<T>& tensor) {
        if (tensor.name.empty())
            throw std::logic_error("CheckpointWriter: tensor without a name");
        add_array(section, tensor.name, tensor.shape, tensor.values);
    }

    template <typename T>
    void add_array(const std::string& section, const std::string& name,
                   const std::vector<int>& shape, const std::vector<T>& values) {
        static_assert(std::is_floating_point_v<T>);
        Entry entry;
        entry.section = section;
        entry.name = name;
        entry.shape = shape;
        entry.dtype = sizeof(T) == 8 ? "f64" : "f32";
        entry.bytes.resize(values.size() * sizeof(T));
        std::memcpy(entry.bytes.data(), values.data(), entry.bytes.size());
        entries_.push_back(std::move(entry));
    }

    void write(const std::filesystem::path& path) const;

private:
    struct Entry {
        std::string section, name, dtype;
        std::vector<int> shape;
        std::string bytes;
    };
    std::vector<Entry> entries_;
};

class CheckpointReader {
public:
    explicit CheckpointReader(const std::filesystem::path& path);

    const nlohmann::json& meta() const { return meta_; }
    bool has(const std::string& section, const std::string& name) const;
    std::vector<std::string> names(const std::string& section) const;

    template <typename T>
    void load_tensor(const std::string& section, Tensor<T>& tensor) const {
        const Entry& e = find(section, tensor.name);
        check_dtype<T>(e);
        if (e.shape != tensor.shape)
            throw ValidationError("checkpoint: shape mismatch for " + tensor.name);
        std::memcpy(tensor.values.data(), payload_.data() + e.offset,
                    tensor.values.size() * sizeof(T));
    }

    template <typename T>
    std::vector<T> load_array(const std::string& section, const std::string& name) const {
        const Entry& e = find(section, name);
        check_dtype<T>(e);
        std::vector<T> out(e.count);
        std::memcpy(out.data(), payload_.data() + e.offset, e.count * sizeof(T));
        return out;
    }

private:
    struct Entry {
        std::string dtype;
        std::vector<int> shape;
        std::size_t offset = 0;
        std::size_t count = 0;
    };

    template <typename T>
    static void check_dtype(const Entry& e) {
        const char* want = sizeof(T) == 8 ? "f64" : "f32";
        if (e.dtype != want)
            throw ValidationError("checkpoint: dtype mismatch (stored " + e.dtype +
                                  ", requested " + want + ")");
    }

    const Entry& find(const std::string& section, const std::string& name) const;

    nlohmann::json meta_;
    std::map<std::string, std::map<std::string, Entry>> sections_;
    std::string payload_;
};

// ---- run manifest ----
// Every command drops one of these in its output directory.
struct RunManifest {
    std::string command;
    std::string config_path;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> inputs;   // label -> path
    std::map<std::string, std::string> outputs;  // filename -> content hash
};

void write_manifest(const std::filesystem::path& out_dir, const RunManifest& manifest);

// Hashes every named output file into the manifest.
void finalize_manifest(RunManifest& manifest, const std::filesystem::path& out_dir,
                       const std::vector<std::string>& filenames);

}  // namespace graphtext
