#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace graphtext {

// Dense row-major tensor. Gradient storage is allocated on demand and stays
// allocated until cleared; "populated" (non-empty) grad is how callers tell
// trainable-and-touched tensors from frozen ones.
template <typename T>
struct Tensor {
    std::vector<int> shape;
    std::vector<T> values;
    std::vector<T> grad;
    bool requires_grad = false;
    std::string name;

    Tensor() = default;
    Tensor(std::vector<int> s, std::vector<T> v) : shape(std::move(s)), values(std::move(v)) {
        if (static_cast<std::int64_t>(values.size()) != numel(shape))
            throw std::invalid_argument("Tensor: value count does not match shape");
    }

    static std::int64_t numel(const std::vector<int>& s) {
        std::int64_t n = 1;
        for (int d : s) {
            if (d < 0) throw std::invalid_argument("Tensor: negative dimension");
            n *= d;
        }
        return n;
    }

    static Tensor zeros(std::vector<int> s) {
        auto n = numel(s);
        return Tensor(std::move(s), std::vector<T>(n, T(0)));
    }

    static Tensor full(std::vector<int> s, T value) {
        auto n = numel(s);
        return Tensor(std::move(s), std::vector<T>(n, value));
    }

    static Tensor scalar(T value) { return Tensor({1}, {value}); }

    std::int64_t size() const { return static_cast<std::int64_t>(values.size()); }

    int rows() const {
        if (shape.size() != 2) throw std::logic_error("Tensor: rows() needs 2-d shape");
        return shape[0];
    }
    int cols() const {
        if (shape.size() != 2) throw std::logic_error("Tensor: cols() needs 2-d shape");
        return shape[1];
    }

    T& at(int i, int j) { return values[static_cast<std::size_t>(i) * cols() + j]; }
    const T& at(int i, int j) const { return values[static_cast<std::size_t>(i) * cols() + j]; }

    bool grad_populated() const { return !grad.empty(); }

    void ensure_grad() {
        if (grad.empty()) grad.assign(values.size(), T(0));
    }

    void zero_grad() {
        if (!grad.empty()) std::fill(grad.begin(), grad.end(), T(0));
    }

    void clear_grad() { grad.clear(); }

    // Converts value precision (used when loading checkpoints written in the
    // other mode is not allowed; kept for tests that cross-check precisions).
    template <typename U>
    Tensor<U> cast() const {
        Tensor<U> out;
        out.shape = shape;
        out.requires_grad = requires_grad;
        out.name = name;
        out.values.resize(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) out.values[i] = static_cast<U>(values[i]);
        return out;
    }
};

template <typename T>
void zero_grads(const std::vector<Tensor<T>*>& params) {
    for (auto* p : params) {
        p->ensure_grad();
        p->zero_grad();
    }
}

}  // namespace graphtext
