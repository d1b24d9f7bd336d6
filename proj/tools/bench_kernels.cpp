// Compares the serial reference kernels against their OpenMP variants:
// throughput side by side plus a bitwise equality check, since the parallel
// kernels promise the exact serial reduction order per output element.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "graphtext/graph.hpp"
#include "graphtext/kernels.hpp"
#include "graphtext/rng.hpp"

using graphtext::Rng;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

template <typename F>
double time_best_of(int reps, F&& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto start = std::chrono::steady_clock::now();
        fn();
        best = std::min(best, seconds_since(start));
    }
    return best;
}

void bench_matmul(int n) {
    Rng rng(42);
    std::vector<double> a(static_cast<std::size_t>(n) * n), b(a.size()), c_serial(a.size()),
        c_parallel(a.size());
    for (auto& v : a) v = rng.uniform(-1, 1);
    for (auto& v : b) v = rng.uniform(-1, 1);

    const double t_serial = time_best_of(3, [&] {
        graphtext::kernels::matmul_serial(a.data(), b.data(), c_serial.data(), n, n, n);
    });
    const double t_parallel = time_best_of(3, [&] {
        graphtext::kernels::matmul(a.data(), b.data(), c_parallel.data(), n, n, n);
    });
    const bool bitwise =
        std::memcmp(c_serial.data(), c_parallel.data(), c_serial.size() * sizeof(double)) == 0;
    const double gflops = 2.0 * n * n * n / 1e9;
    std::printf("matmul %4d  serial %8.4fs (%6.2f GF/s)  omp %8.4fs (%6.2f GF/s)  "
                "speedup %5.2fx  bitwise %s\n",
                n, t_serial, gflops / t_serial, t_parallel, gflops / t_parallel,
                t_serial / t_parallel, bitwise ? "ok" : "MISMATCH");
}

graphtext::Graph random_graph(int n, double p, Rng& rng) {
    graphtext::Graph g(n, false);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.uniform() < p) g.add_edge(i, j, "edge");
    return g;
}

void bench_bfs(int n) {
    Rng rng(7);
    const auto g = random_graph(n, 8.0 / n, rng);
#ifdef _OPENMP
    const int max_threads = omp_get_max_threads();
#else
    const int max_threads = 1;
#endif
    std::vector<int> serial_dist, parallel_dist;
#ifdef _OPENMP
    omp_set_num_threads(1);
#endif
    const double t_serial = time_best_of(3, [&] { serial_dist = bfs_all_pairs(g).dist; });
#ifdef _OPENMP
    omp_set_num_threads(max_threads);
#endif
    const double t_parallel = time_best_of(3, [&] { parallel_dist = bfs_all_pairs(g).dist; });
    const bool equal = serial_dist == parallel_dist;
    std::printf("bfs    %4d  1 thread %7.4fs  %d threads %7.4fs  speedup %5.2fx  equal %s\n",
                n, t_serial, max_threads, t_parallel, t_serial / t_parallel,
                equal ? "ok" : "MISMATCH");
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
    std::printf("openmp: disabled\n");
#endif
    for (int n : {64, 128, 256, 512}) bench_matmul(n);
    for (int n : {256, 512, 1024}) bench_bfs(n);
    return 0;
}
