// Compares the serial reference engine against the OpenMP path on the
// same workload, plus the two detector routes.

#include <chrono>
#include <cstdio>

#include "stfsim/link.hpp"

using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

}  // namespace

int main() {
    stfsim::SystemConfig cfg;
    cfg.l_taps = 5;
    cfg.seed = 42;

    stfsim::SweepOptions serial;
    serial.threads = 1;
    serial.trial_cap = 200000;
    serial.target_errors = 1L << 60;  // run the full cap
    stfsim::SweepOptions parallel = serial;
    parallel.threads = 0;

    std::printf("%-34s %10s %10s %8s\n", "workload", "serial[s]", "openmp[s]", "speedup");

    {
        auto t0 = clock_type::now();
        const auto a = stfsim::run_point(cfg, stfsim::Scheme::statistical_waterfill, 0.0, 10.0,
                                         serial);
        const double ts = seconds_since(t0);
        t0 = clock_type::now();
        const auto b = stfsim::run_point(cfg, stfsim::Scheme::statistical_waterfill, 0.0, 10.0,
                                         parallel);
        const double tp = seconds_since(t0);
        std::printf("%-34s %10.3f %10.3f %8.2f\n", "SER point, 200k frames, L=5", ts, tp, ts / tp);
        if (a.errors != b.errors || a.symbols != b.symbols) {
            std::printf("MISMATCH: serial and parallel engines disagree\n");
            return 1;
        }
    }

    {
        auto t0 = clock_type::now();
        const auto a = stfsim::estimate_mui_variance(cfg, stfsim::Scheme::statistical_waterfill,
                                                     100000, 1);
        const double ts = seconds_since(t0);
        t0 = clock_type::now();
        const auto b = stfsim::estimate_mui_variance(cfg, stfsim::Scheme::statistical_waterfill,
                                                     100000, 0);
        const double tp = seconds_since(t0);
        std::printf("%-34s %10.3f %10.3f %8.2f\n", "MUI estimate, 100k frames", ts, tp, ts / tp);
        if (a.variance != b.variance) {
            std::printf("MISMATCH: MUI estimates disagree\n");
            return 1;
        }
    }

    {
        // exhaustive ML vs Alamouti decoupling, single thread
        const auto& cons = stfsim::Constellation::qam16();
        stfsim::Rng rng(7);
        const long n = 20000;
        Eigen::RowVector2cd h, y;

        auto t0 = clock_type::now();
        for (long i = 0; i < n; ++i) {
            h << rng.cgauss(), rng.cgauss();
            y << rng.cgauss(), rng.cgauss();
            volatile auto r = stfsim::ml_detect(y, h, cons);
            (void)r;
        }
        const double tex = seconds_since(t0);

        t0 = clock_type::now();
        for (long i = 0; i < n; ++i) {
            h << rng.cgauss(), rng.cgauss();
            y << rng.cgauss(), rng.cgauss();
            volatile auto r = stfsim::ml_detect_decoupled(y, h, cons);
            (void)r;
        }
        const double tde = seconds_since(t0);
        std::printf("%-34s %10.3f %10.3f %8.2f\n", "detector: exhaustive vs decoupled", tex, tde,
                    tex / tde);
    }

    return 0;
}
