// Micro-benchmark: serial reference candidate scan vs the OpenMP scan.
// Verifies the two agree on every instance while timing them.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "gomp/assoc.hpp"
#include "gomp/simgen.hpp"

using namespace gomp;

namespace {

double time_ms(int iters, const std::function<void()>& fn) {
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < iters; ++i) fn();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / iters;
}

}  // namespace

int main(int argc, char** argv) {
    int reps = argc > 1 ? std::atoi(argv[1]) : 5;
    std::printf("threads: %d\n", omp_get_max_threads());
    std::printf("%8s %8s %12s %12s %9s\n", "n", "p", "serial(ms)", "openmp(ms)", "speedup");

    for (int p : {1000, 5000, 20000}) {
        SimSpec spec;
        spec.n = 500;
        spec.p = p;
        spec.n_true = 10;
        spec.snr = 32.5;
        spec.seed = 7;
        SimData sim = generate(spec);
        Dataset d = standardize(sim.data).data;
        Eigen::VectorXd r = d.outcome.y;
        std::vector<char> excluded(p, 0);

        auto serial = scan_candidates_serial(r, d, excluded);
        auto parallel = scan_candidates(r, d, excluded);
        if (!serial || !parallel || serial->feature_index != parallel->feature_index ||
            serial->log_p != parallel->log_p) {
            std::fprintf(stderr, "MISMATCH at p=%d\n", p);
            return 1;
        }

        double ts = time_ms(reps, [&] { scan_candidates_serial(r, d, excluded); });
        double tp = time_ms(reps, [&] { scan_candidates(r, d, excluded); });
        std::printf("%8lld %8d %12.3f %12.3f %8.2fx\n",
                    static_cast<long long>(spec.n), p, ts, tp, ts / tp);
    }
    return 0;
}
