#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "graphtext/rng.hpp"
#include "graphtext/tensor.hpp"

namespace graphtext {

// Deterministic text-embedding stand-in for the pretrained language model:
// hashed bag-of-words into `hash_buckets` slots, a frozen seeded random
// projection to dim, then L2 normalization. Equal inputs give bitwise-equal
// outputs; the projection is never trained.
template <typename T>
class TextEmbedder {
public:
    TextEmbedder() = default;

    TextEmbedder(const TextEmbedder& other)
        : dim_(other.dim_),
          buckets_(other.buckets_),
          seed_(other.seed_),
          projection_(other.projection_),
          empty_text_count_(other.empty_text_count_.load()) {}

    TextEmbedder& operator=(const TextEmbedder& other) {
        dim_ = other.dim_;
        buckets_ = other.buckets_;
        seed_ = other.seed_;
        projection_ = other.projection_;
        empty_text_count_ = other.empty_text_count_.load();
        return *this;
    }

    TextEmbedder(int dim, int hash_buckets, std::uint64_t seed)
        : dim_(dim), buckets_(hash_buckets), seed_(seed) {
        Rng rng(derive_seed(seed, "text-embedder"));
        projection_ = Tensor<T>::zeros({hash_buckets, dim});
        for (auto& v : projection_.values) v = static_cast<T>(rng.normal());
        projection_.name = "embedder.projection";
    }

    int dim() const { return dim_; }
    int hash_buckets() const { return buckets_; }
    std::uint64_t seed() const { return seed_; }

    // Empty or whitespace-only text maps to the zero vector; occurrences are
    // counted so callers can surface the condition in logs.
    std::vector<T> embed(const std::string& text) const {
        std::vector<T> out(dim_, T(0));
        std::istringstream stream(text);
        std::string word;
        bool any = false;
        while (stream >> word) {
            any = true;
            const std::size_t bucket =
                static_cast<std::size_t>(fnv1a64(word) % static_cast<std::uint64_t>(buckets_));
            const T* row = projection_.values.data() + bucket * dim_;
            for (int d = 0; d < dim_; ++d) out[d] += row[d];
        }
        if (!any) {
            ++empty_text_count_;
            return out;
        }
        T norm = T(0);
        for (T v : out) norm += v * v;
        norm = std::sqrt(norm);
        if (norm > T(0))
            for (T& v : out) v /= norm;
        return out;
    }

    std::uint64_t empty_text_count() const { return empty_text_count_.load(); }

private:
    int dim_ = 0;
    int buckets_ = 0;
    std::uint64_t seed_ = 0;
    Tensor<T> projection_;
    mutable std::atomic<std::uint64_t> empty_text_count_{0};
};

}  // namespace graphtext
