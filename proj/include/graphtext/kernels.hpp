#pragma once

#include <cstddef>

namespace graphtext::kernels {

// Dense row-major kernels. The OpenMP variants parallelize over independent
// output elements while keeping the per-element accumulation order identical
// to the serial reference, so serial and parallel results are bitwise equal
// for any thread count. The serial versions stay as the test reference and
// as the baseline for tools/bench_kernels.

// C[m x n] = A[m x k] * B[k x n]
template <typename T>
void matmul_serial(const T* a, const T* b, T* c, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        const T* arow = a + static_cast<std::size_t>(i) * k;
        T* crow = c + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            T acc = T(0);
            for (int p = 0; p < k; ++p) {
                acc += arow[p] * b[static_cast<std::size_t>(p) * n + j];
            }
            crow[j] = acc;
        }
    }
}

template <typename T>
void matmul(const T* a, const T* b, T* c, int m, int k, int n) {
    const std::size_t work = static_cast<std::size_t>(m) * k * n;
#pragma omp parallel for schedule(static) if (work > 16384 && m > 1)
    for (int i = 0; i < m; ++i) {
        const T* arow = a + static_cast<std::size_t>(i) * k;
        T* crow = c + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            T acc = T(0);
            for (int p = 0; p < k; ++p) {
                acc += arow[p] * b[static_cast<std::size_t>(p) * n + j];
            }
            crow[j] = acc;
        }
    }
}

// C[m x n] = A[m x k] * B[n x k]^T  (B stored row-major, used untransposed in
// memory; this is the layout attention scores want)
template <typename T>
void matmul_bt_serial(const T* a, const T* b, T* c, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        const T* arow = a + static_cast<std::size_t>(i) * k;
        T* crow = c + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            const T* brow = b + static_cast<std::size_t>(j) * k;
            T acc = T(0);
            for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
            crow[j] = acc;
        }
    }
}

template <typename T>
void matmul_bt(const T* a, const T* b, T* c, int m, int k, int n) {
    const std::size_t work = static_cast<std::size_t>(m) * k * n;
#pragma omp parallel for schedule(static) if (work > 16384 && m > 1)
    for (int i = 0; i < m; ++i) {
        const T* arow = a + static_cast<std::size_t>(i) * k;
        T* crow = c + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            const T* brow = b + static_cast<std::size_t>(j) * k;
            T acc = T(0);
            for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
            crow[j] = acc;
        }
    }
}

}  // namespace graphtext::kernels
