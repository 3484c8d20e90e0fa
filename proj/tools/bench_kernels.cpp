// Timing harness comparing the serial reference kernels against the OpenMP
// dispatch path, and verifying that both produce bitwise-identical reductions.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fde/kernels.hpp"

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

template <typename F>
double time_loop(std::size_t reps, F&& f) {
    f(); // warm up
    const auto t0 = clock_type::now();
    for (std::size_t i = 0; i < reps; ++i) f();
    return seconds_since(t0) / double(reps);
}

struct Row {
    const char* name;
    double serial_s;
    double parallel_s;
    bool bitwise;
};

void print_row(const Row& r) {
    std::printf("%-16s  serial %10.3e s   parallel %10.3e s   speedup %5.2fx   %s\n",
                r.name, r.serial_s, r.parallel_s, r.serial_s / r.parallel_s,
                r.bitwise ? "bitwise-equal" : "MISMATCH");
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

} // namespace

int main(int argc, char** argv) {
    bool quick = false;
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--quick") == 0) quick = true;

    const std::size_t n = quick ? (1u << 16) : (1u << 22);
    const std::size_t reps = quick ? 5 : 40;
    const std::size_t nn = quick ? 257 : 2049; // 2D grid edge

    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> x(n), y(n), w(n), out(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = unit(rng);
        y[i] = 2.0 * unit(rng) - 1.0;
        w[i] = unit(rng);
    }

#ifdef _OPENMP
    std::printf("OpenMP max threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; parallel path == serial path\n");
#endif
    std::printf("vector length %zu, stencil grid %zux%zu, %zu reps\n\n", n, nn, nn, reps);

    std::vector<Row> rows;

    {
        double rs = 0.0, rp = 0.0;
        const double a = time_loop(reps, [&] { rs = fde::kern::dot_serial(x.data(), y.data(), n); });
        fde::kern::set_parallel(true);
        const double b = time_loop(reps, [&] { rp = fde::kern::dot(x.data(), y.data(), n); });
        rows.push_back({"dot", a, b, same_bits(rs, rp)});
    }
    {
        double rs = 0.0, rp = 0.0;
        const double a =
            time_loop(reps, [&] { rs = fde::kern::wdot_serial(w.data(), x.data(), y.data(), n); });
        const double b = time_loop(reps, [&] { rp = fde::kern::wdot(w.data(), x.data(), y.data(), n); });
        rows.push_back({"wdot", a, b, same_bits(rs, rp)});
    }
    {
        double rs = 0.0, rp = 0.0;
        const double a =
            time_loop(reps, [&] { rs = fde::kern::wpow_sum_serial(w.data(), x.data(), 2.5, n); });
        const double b = time_loop(reps, [&] { rp = fde::kern::wpow_sum(w.data(), x.data(), 2.5, n); });
        rows.push_back({"wpow_sum", a, b, same_bits(rs, rp)});
    }
    {
        double rs = 0.0, rp = 0.0;
        const double a = time_loop(reps, [&] { rs = fde::kern::sum_serial(x.data(), n); });
        const double b = time_loop(reps, [&] { rp = fde::kern::sum(x.data(), n); });
        rows.push_back({"sum", a, b, same_bits(rs, rp)});
    }
    {
        double rs = 0.0, rp = 0.0;
        const double a = time_loop(reps, [&] { rs = fde::kern::max_abs_serial(y.data(), n); });
        const double b = time_loop(reps, [&] { rp = fde::kern::max_abs(y.data(), n); });
        rows.push_back({"max_abs", a, b, same_bits(rs, rp)});
    }
    {
        std::vector<double> f(nn * nn), g_serial(nn * nn), g_par(nn * nn);
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = unit(rng);
        for (std::size_t i = 0; i < nn; ++i) {
            f[i] = f[(nn - 1) * nn + i] = 0.0;
            f[i * nn] = f[i * nn + nn - 1] = 0.0;
        }
        const double invh2 = double((nn - 1) * (nn - 1));
        const double a = time_loop(reps, [&] {
            fde::kern::neg_laplacian_2d_serial(f.data(), g_serial.data(), nn, nn, invh2, invh2);
        });
        const double b = time_loop(reps, [&] {
            fde::kern::neg_laplacian_2d(f.data(), g_par.data(), nn, nn, invh2, invh2);
        });
        bool bitwise = true;
        for (std::size_t i = 0; i < f.size(); ++i)
            if (!same_bits(g_serial[i], g_par[i])) bitwise = false;
        rows.push_back({"neg_laplacian_2d", a, b, bitwise});
    }

    bool all_bitwise = true;
    for (const Row& r : rows) {
        print_row(r);
        all_bitwise = all_bitwise && r.bitwise;
    }
    std::printf("\n%s\n", all_bitwise ? "all kernels bitwise-consistent"
                                      : "bitwise mismatch between serial and parallel kernels");
    return all_bitwise ? 0 : 1;
}
