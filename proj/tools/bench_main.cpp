// Compares the serial reference kernels against the OpenMP ones on
// enumeration, Monte Carlo, and the guarantee sweep, and checks that both
// paths produce bit-identical results.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "peermax/engine.hpp"
#include "peermax/verify.hpp"

using namespace peermax;

namespace {

double wall_ms(const std::function<void()>& fn) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(stop - start).count();
}

void row(const char* name, double serial_ms, double parallel_ms, bool identical) {
    std::printf("%-22s %10.1f ms %10.1f ms   x%-5.2f %s\n", name, serial_ms, parallel_ms,
                parallel_ms > 0 ? serial_ms / parallel_ms : 0.0,
                identical ? "bit-identical" : "MISMATCH");
}

bool same(const PerBuyerStats& a, const PerBuyerStats& b) {
    return a.w == b.w && a.s == b.s && a.r == b.r && a.wel == b.wel && a.base_rev == b.base_rev;
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
    std::printf("openmp: not enabled\n");
#endif
    std::printf("%-22s %13s %13s   %-7s\n", "kernel", "serial", "openmp", "speedup");

    {
        RngStream stream(1);
        const Instance big = random_discrete_instance(6, 10, 10.0, stream);  // 1e6 profiles
        PerBuyerStats ser, par;
        const double t_ser = wall_ms([&] {
            ser = stats_exact(big, BaseModel::SingleItemSpa, 2'000'000, ExecMode::Serial);
        });
        const double t_par = wall_ms([&] {
            par = stats_exact(big, BaseModel::SingleItemSpa, 2'000'000, ExecMode::Parallel);
        });
        row("exact enumeration", t_ser, t_par, same(ser, par));
    }

    {
        const Instance er = make_truncated_er_iid(4, 8.0, 1.0).instance;
        PerBuyerStats ser, par;
        RngStream s1(2), s2(2);
        const double t_ser = wall_ms([&] {
            ser = stats_mc(er, BaseModel::SingleItemSpa, 2'000'000, s1, ExecMode::Serial);
        });
        const double t_par = wall_ms([&] {
            par = stats_mc(er, BaseModel::SingleItemSpa, 2'000'000, s2, ExecMode::Parallel);
        });
        row("monte carlo", t_ser, t_par, same(ser, par));
    }

    {
        SweepConfig config;
        config.count = 400;
        config.n_min = 2;
        config.n_max = 5;
        config.k_min = 1;
        config.k_max = 3;
        config.seed = 3;
        SweepResult ser, par;
        config.mode = ExecMode::Serial;
        const double t_ser = wall_ms([&] { ser = sweep(config); });
        config.mode = ExecMode::Parallel;
        const double t_par = wall_ms([&] { par = sweep(config); });
        bool identical = ser.reports.size() == par.reports.size();
        for (std::size_t i = 0; identical && i < ser.reports.size(); ++i)
            identical = ser.reports[i].revenue == par.reports[i].revenue &&
                        ser.reports[i].bound == par.reports[i].bound;
        row("guarantee sweep", t_ser, t_par, identical);
    }
    return 0;
}
