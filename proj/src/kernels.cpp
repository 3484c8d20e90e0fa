#include "fde/kernels.hpp"

#include <atomic>
#include <cmath>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fde::kern {

namespace {
std::atomic<bool> g_parallel{true};

std::size_t block_count(std::size_t n) { return (n + block - 1) / block; }

// Serial sum of one block; shared by the serial and parallel reductions so
// both produce the same partials.
double block_dot(const double* x, const double* y, std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += x[i] * y[i];
    return s;
}

double block_wdot(const double* w, const double* x, const double* y, std::size_t lo,
                  std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += w[i] * x[i] * y[i];
    return s;
}

double block_wpow(const double* w, const double* x, double r, std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += w[i] * std::pow(std::fabs(x[i]), r);
    return s;
}

double block_sum(const double* x, std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += x[i];
    return s;
}

// Combine per-block partials in block order. The combine is serial, so the
// result does not depend on how blocks were assigned to threads.
double combine(const std::vector<double>& parts) {
    double s = 0.0;
    for (double p : parts) s += p;
    return s;
}
} // namespace

void set_parallel(bool on) { g_parallel.store(on); }

bool parallel_enabled() {
#ifdef _OPENMP
    return g_parallel.load();
#else
    return false;
#endif
}

void copy(const double* x, double* out, std::size_t n) {
    if (parallel_enabled()) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < (long long)n; ++i) out[i] = x[i];
    } else {
        for (std::size_t i = 0; i < n; ++i) out[i] = x[i];
    }
}

void fill(double* x, double value, std::size_t n) {
    if (parallel_enabled()) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < (long long)n; ++i) x[i] = value;
    } else {
        for (std::size_t i = 0; i < n; ++i) x[i] = value;
    }
}

void scale(double* x, double a, std::size_t n) {
    if (parallel_enabled()) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < (long long)n; ++i) x[i] *= a;
    } else {
        for (std::size_t i = 0; i < n; ++i) x[i] *= a;
    }
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    if (parallel_enabled()) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < (long long)n; ++i) y[i] += a * x[i];
    } else {
        for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
    }
}

void sub(const double* x, const double* y, double* out, std::size_t n) {
    if (parallel_enabled()) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < (long long)n; ++i) out[i] = x[i] - y[i];
    } else {
        for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - y[i];
    }
}

void mul(const double* x, const double* y, double* out, std::size_t n) {
    if (parallel_enabled()) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < (long long)n; ++i) out[i] = x[i] * y[i];
    } else {
        for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
    }
}

void pow_nonneg(const double* x, double e, double* out, std::size_t n) {
    if (parallel_enabled()) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < (long long)n; ++i) out[i] = std::pow(x[i], e);
    } else {
        for (std::size_t i = 0; i < n; ++i) out[i] = std::pow(x[i], e);
    }
}

double dot_serial(const double* x, const double* y, std::size_t n) {
    const std::size_t nb = block_count(n);
    std::vector<double> parts(nb);
    for (std::size_t b = 0; b < nb; ++b)
        parts[b] = block_dot(x, y, b * block, std::min(n, (b + 1) * block));
    return combine(parts);
}

double dot(const double* x, const double* y, std::size_t n) {
    if (!parallel_enabled()) return dot_serial(x, y, n);
    const std::size_t nb = block_count(n);
    std::vector<double> parts(nb);
#pragma omp parallel for schedule(static)
    for (long long b = 0; b < (long long)nb; ++b)
        parts[b] = block_dot(x, y, b * block, std::min(n, (std::size_t)(b + 1) * block));
    return combine(parts);
}

double wdot_serial(const double* w, const double* x, const double* y, std::size_t n) {
    const std::size_t nb = block_count(n);
    std::vector<double> parts(nb);
    for (std::size_t b = 0; b < nb; ++b)
        parts[b] = block_wdot(w, x, y, b * block, std::min(n, (b + 1) * block));
    return combine(parts);
}

double wdot(const double* w, const double* x, const double* y, std::size_t n) {
    if (!parallel_enabled()) return wdot_serial(w, x, y, n);
    const std::size_t nb = block_count(n);
    std::vector<double> parts(nb);
#pragma omp parallel for schedule(static)
    for (long long b = 0; b < (long long)nb; ++b)
        parts[b] = block_wdot(w, x, y, b * block, std::min(n, (std::size_t)(b + 1) * block));
    return combine(parts);
}

double wpow_sum_serial(const double* w, const double* x, double r, std::size_t n) {
    const std::size_t nb = block_count(n);
    std::vector<double> parts(nb);
    for (std::size_t b = 0; b < nb; ++b)
        parts[b] = block_wpow(w, x, r, b * block, std::min(n, (b + 1) * block));
    return combine(parts);
}

double wpow_sum(const double* w, const double* x, double r, std::size_t n) {
    if (!parallel_enabled()) return wpow_sum_serial(w, x, r, n);
    const std::size_t nb = block_count(n);
    std::vector<double> parts(nb);
#pragma omp parallel for schedule(static)
    for (long long b = 0; b < (long long)nb; ++b)
        parts[b] = block_wpow(w, x, r, b * block, std::min(n, (std::size_t)(b + 1) * block));
    return combine(parts);
}

double sum_serial(const double* x, std::size_t n) {
    const std::size_t nb = block_count(n);
    std::vector<double> parts(nb);
    for (std::size_t b = 0; b < nb; ++b)
        parts[b] = block_sum(x, b * block, std::min(n, (b + 1) * block));
    return combine(parts);
}

double sum(const double* x, std::size_t n) {
    if (!parallel_enabled()) return sum_serial(x, n);
    const std::size_t nb = block_count(n);
    std::vector<double> parts(nb);
#pragma omp parallel for schedule(static)
    for (long long b = 0; b < (long long)nb; ++b)
        parts[b] = block_sum(x, b * block, std::min(n, (std::size_t)(b + 1) * block));
    return combine(parts);
}

// Max reductions are exact in floating point, so plain OpenMP reductions are
// already deterministic.
double max_abs_serial(const double* x, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(x[i]));
    return m;
}

double max_abs(const double* x, std::size_t n) {
    if (!parallel_enabled()) return max_abs_serial(x, n);
    double m = 0.0;
#pragma omp parallel for schedule(static) reduction(max : m)
    for (long long i = 0; i < (long long)n; ++i) m = std::max(m, std::fabs(x[i]));
    return m;
}

double max_val(const double* x, std::size_t n) {
    double m = -HUGE_VAL;
    if (parallel_enabled()) {
#pragma omp parallel for schedule(static) reduction(max : m)
        for (long long i = 0; i < (long long)n; ++i) m = std::max(m, x[i]);
    } else {
        for (std::size_t i = 0; i < n; ++i) m = std::max(m, x[i]);
    }
    return m;
}

double min_val(const double* x, std::size_t n) {
    double m = HUGE_VAL;
    if (parallel_enabled()) {
#pragma omp parallel for schedule(static) reduction(min : m)
        for (long long i = 0; i < (long long)n; ++i) m = std::min(m, x[i]);
    } else {
        for (std::size_t i = 0; i < n; ++i) m = std::min(m, x[i]);
    }
    return m;
}

void neg_laplacian_1d_serial(const double* f, double* out, std::size_t nn, double invh2) {
    out[0] = 0.0;
    out[nn - 1] = 0.0;
    for (std::size_t i = 1; i + 1 < nn; ++i)
        out[i] = (2.0 * f[i] - f[i - 1] - f[i + 1]) * invh2;
}

void neg_laplacian_1d(const double* f, double* out, std::size_t nn, double invh2) {
    if (!parallel_enabled()) {
        neg_laplacian_1d_serial(f, out, nn, invh2);
        return;
    }
    out[0] = 0.0;
    out[nn - 1] = 0.0;
    const long long last = (long long)nn - 1;
#pragma omp parallel for schedule(static)
    for (long long i = 1; i < last; ++i)
        out[i] = (2.0 * f[i] - f[i - 1] - f[i + 1]) * invh2;
}

void neg_laplacian_2d_serial(const double* f, double* out, std::size_t nnx, std::size_t nny,
                             double invhx2, double invhy2) {
    for (std::size_t ix = 0; ix < nnx; ++ix) {
        out[ix] = 0.0;
        out[(nny - 1) * nnx + ix] = 0.0;
    }
    for (std::size_t iy = 1; iy + 1 < nny; ++iy) {
        const std::size_t row = iy * nnx;
        out[row] = 0.0;
        out[row + nnx - 1] = 0.0;
        for (std::size_t ix = 1; ix + 1 < nnx; ++ix) {
            const std::size_t k = row + ix;
            out[k] = (2.0 * f[k] - f[k - 1] - f[k + 1]) * invhx2 +
                     (2.0 * f[k] - f[k - nnx] - f[k + nnx]) * invhy2;
        }
    }
}

void neg_laplacian_2d(const double* f, double* out, std::size_t nnx, std::size_t nny,
                      double invhx2, double invhy2) {
    if (!parallel_enabled()) {
        neg_laplacian_2d_serial(f, out, nnx, nny, invhx2, invhy2);
        return;
    }
    for (std::size_t ix = 0; ix < nnx; ++ix) {
        out[ix] = 0.0;
        out[(nny - 1) * nnx + ix] = 0.0;
    }
    const long long last_row = (long long)nny - 1;
#pragma omp parallel for schedule(static)
    for (long long iy = 1; iy < last_row; ++iy) {
        const std::size_t row = (std::size_t)iy * nnx;
        out[row] = 0.0;
        out[row + nnx - 1] = 0.0;
        for (std::size_t ix = 1; ix + 1 < nnx; ++ix) {
            const std::size_t k = row + ix;
            out[k] = (2.0 * f[k] - f[k - 1] - f[k + 1]) * invhx2 +
                     (2.0 * f[k] - f[k - nnx] - f[k + nnx]) * invhy2;
        }
    }
}

} // namespace fde::kern
