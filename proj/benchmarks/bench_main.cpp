// Timing comparison of the Monte Carlo kernels: serial reference vs the
// OpenMP path at increasing worker counts. Also checks that the counts agree.
#include <chrono>
#include <cstdio>

#include "ucc/parallel.hpp"
#include "ucc/second_order.hpp"

using namespace ucc;

namespace {

double time_error_kernel(const CodeEnsemble& ens, const ChannelPoint& pt, long long trials, int workers,
                         ErrorEstimate& out) {
    worker_count() = workers;
    const auto t0 = std::chrono::steady_clock::now();
    out = estimate_error_random_coding(ens, pt, trials, 20240);
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

int main() {
    // operating point near the mutual information so the counters stay busy
    const auto pt = make_bsc(0.05);
    const auto P = round_to_type(std::vector<double>{0.5, 0.5}, 512);
    std::vector<PriorSpec> wx(2, PriorSpec::mean_dirichlet(0.5));
    CodeEnsemble ens(pt.family, P, 0.45, 0.48, wx, PriorSpec::mean_dirichlet(0.5));

    const long long trials = 40000;
    ErrorEstimate serial, parallel;
    const double ts = time_error_kernel(ens, pt, trials, 1, serial);
    std::printf("%-28s %10.3fs  errors=%lld\n", "random-coding serial", ts, serial.errors);
    for (int w = 2; w <= effective_workers() || w == 2; w *= 2) {
        worker_count() = 0;
        const int cap = effective_workers();
        if (w > cap) break;
        const double tp = time_error_kernel(ens, pt, trials, w, parallel);
        std::printf("%-25s x%d %10.3fs  errors=%lld  speedup=%.2f %s\n", "random-coding omp", w, tp, parallel.errors,
                    ts / tp, parallel.errors == serial.errors ? "" : "MISMATCH");
    }

    worker_count() = 1;
    auto t0 = std::chrono::steady_clock::now();
    auto chk1 = chi_square_score_check(pt, 0, 500, 4000, RngStream(7));
    double c_serial = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    worker_count() = 0;
    t0 = std::chrono::steady_clock::now();
    auto chk2 = chi_square_score_check(pt, 0, 500, 4000, RngStream(7));
    double c_par = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%-28s %10.3fs vs %.3fs  speedup=%.2f %s\n", "score-statistic kernel", c_serial, c_par,
                c_serial / c_par, chk1.ks_distance == chk2.ks_distance ? "" : "MISMATCH");
    return 0;
}
