// Timing harness for the OpenMP kernels against their serial references.
// Usage: bench_kernels [n_source n_target d repeats]

#include "adaprune/kernel.hpp"
#include "adaprune/mmd.hpp"
#include "adaprune/random.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>

namespace {

using adaprune::EmbeddingSet;
using adaprune::KernelModel;
using adaprune::RowMatrixXd;

EmbeddingSet random_set(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
    adaprune::rng::NormalSampler sampler(seed);
    RowMatrixXd data(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            data(i, j) = sampler.next();
        }
    }
    return EmbeddingSet(std::move(data));
}

double time_ms(int repeats, const std::function<double()>& body, double* sink) {
    const auto start = std::chrono::steady_clock::now();
    double acc = 0.0;
    for (int r = 0; r < repeats; ++r) acc += body();
    const auto stop = std::chrono::steady_clock::now();
    *sink = acc;
    return std::chrono::duration<double, std::milli>(stop - start).count() /
           repeats;
}

}  // namespace

int main(int argc, char** argv) {
    Eigen::Index n_source = 512;
    Eigen::Index n_target = 256;
    Eigen::Index d = 16;
    int repeats = 3;
    if (argc >= 4) {
        n_source = std::atol(argv[1]);
        n_target = std::atol(argv[2]);
        d = std::atol(argv[3]);
    }
    if (argc >= 5) repeats = std::atoi(argv[4]);

    const KernelModel model = KernelModel::standard();
    const EmbeddingSet source = random_set(n_source, d, 7);
    const EmbeddingSet target = random_set(n_target, d, 13);

    std::printf("threads=%d n_source=%ld n_target=%ld d=%ld repeats=%d\n",
                omp_get_max_threads(), long(n_source), long(n_target), long(d),
                repeats);
    std::printf("%-18s %12s %12s %8s\n", "kernel", "serial ms", "parallel ms",
                "speedup");

    double sink_a = 0.0, sink_b = 0.0;
    const auto report = [&](const char* name, double serial_ms,
                            double parallel_ms) {
        std::printf("%-18s %12.3f %12.3f %8.2fx\n", name, serial_ms, parallel_ms,
                    serial_ms / parallel_ms);
    };

    report("gram_source",
           time_ms(repeats,
                   [&] {
                       return adaprune::serial::gram_source(source, model).sum();
                   },
                   &sink_a),
           time_ms(repeats,
                   [&] { return adaprune::gram_source(source, model).sum(); },
                   &sink_b));
    if (std::abs(sink_a - sink_b) > 1e-6 * std::abs(sink_a)) {
        std::printf("gram_source checksum mismatch: %.17g vs %.17g\n", sink_a,
                    sink_b);
        return 1;
    }

    report("cross_affinity",
           time_ms(repeats,
                   [&] {
                       return adaprune::serial::cross_affinity(source, target,
                                                               model)
                           .sum();
                   },
                   &sink_a),
           time_ms(repeats,
                   [&] {
                       return adaprune::cross_affinity(source, target, model)
                           .sum();
                   },
                   &sink_b));
    if (std::abs(sink_a - sink_b) > 1e-6 * std::abs(sink_a)) {
        std::printf("cross_affinity checksum mismatch\n");
        return 1;
    }

    report("target_self_term",
           time_ms(repeats,
                   [&] { return adaprune::serial::target_self_term(target, model); },
                   &sink_a),
           time_ms(repeats,
                   [&] { return adaprune::target_self_term(target, model); },
                   &sink_b));

    report("mmd_squared",
           time_ms(repeats,
                   [&] { return adaprune::serial::mmd_squared(source, target, model); },
                   &sink_a),
           time_ms(repeats,
                   [&] { return adaprune::mmd_squared(source, target, model); },
                   &sink_b));
    if (std::abs(sink_a - sink_b) > 1e-9 * (1.0 + std::abs(sink_a))) {
        std::printf("mmd_squared mismatch: %.17g vs %.17g\n", sink_a, sink_b);
        return 1;
    }
    return 0;
}
