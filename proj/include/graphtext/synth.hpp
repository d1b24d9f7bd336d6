#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "graphtext/graph.hpp"

namespace graphtext {

// Generator configuration for the synthetic task families.
struct GenParams {
    int nodes_min = 6;
    int nodes_max = 12;
    double edge_prob = 0.3;
    int class_count = 3;
    int max_retry = 300;  // resampling budget when balancing binary labels
};

struct GeneratedInstance {
    Graph graph;
    Center center;
    TaskFamily family;
    std::string label;                   // answer string over the task vocabulary
    std::optional<double> numeric;       // set for regression families
};

// Names used for node colors (class labels) and edge types. The first
// `class_count` colors are the candidate classes.
const std::vector<std::string>& color_names();
const std::vector<std::string>& edge_type_names();

// Deterministic generator: instance k draws its randomness from
// seed + k, so generation can be partitioned without changing output.
// Labels are exact by construction on the full generated graph.
std::vector<GeneratedInstance> gen_synthetic(TaskFamily family, const GenParams& params,
                                             std::uint64_t seed, int count);

}  // namespace graphtext
