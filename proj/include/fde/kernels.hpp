#pragma once

#include <cstddef>

// Low-level array kernels. Every kernel has a serial reference implementation
// (suffix _serial) and a dispatching front that may run the OpenMP variant.
// Reductions use a fixed block decomposition with a serial combine pass, so
// results are bitwise identical for any thread count, including serial runs.
namespace fde::kern {

// Block length for deterministic reductions. Fixed: changing it changes the
// rounding of every reduction.
inline constexpr std::size_t block = 1024;

void set_parallel(bool on);
bool parallel_enabled();

// out[i] = x[i]
void copy(const double* x, double* out, std::size_t n);
// x[i] = value
void fill(double* x, double value, std::size_t n);
// x[i] *= a
void scale(double* x, double a, std::size_t n);
// y[i] += a * x[i]
void axpy(double a, const double* x, double* y, std::size_t n);
// out[i] = x[i] - y[i]
void sub(const double* x, const double* y, double* out, std::size_t n);
// out[i] = x[i] * y[i]
void mul(const double* x, const double* y, double* out, std::size_t n);
// out[i] = x[i]^e for x[i] >= 0
void pow_nonneg(const double* x, double e, double* out, std::size_t n);

double dot(const double* x, const double* y, std::size_t n);
double dot_serial(const double* x, const double* y, std::size_t n);
// sum_i w[i] * x[i] * y[i]
double wdot(const double* w, const double* x, const double* y, std::size_t n);
double wdot_serial(const double* w, const double* x, const double* y, std::size_t n);
// sum_i w[i] * |x[i]|^r
double wpow_sum(const double* w, const double* x, double r, std::size_t n);
double wpow_sum_serial(const double* w, const double* x, double r, std::size_t n);
double sum(const double* x, std::size_t n);
double sum_serial(const double* x, std::size_t n);
double max_abs(const double* x, std::size_t n);
double max_abs_serial(const double* x, std::size_t n);
double max_val(const double* x, std::size_t n);
double min_val(const double* x, std::size_t n);

// out = (-Delta_h) f on interior nodes of a 1D grid with nn nodes; boundary
// entries of out are set to 0. f carries zero Dirichlet values on the ends.
void neg_laplacian_1d(const double* f, double* out, std::size_t nn, double invh2);
void neg_laplacian_1d_serial(const double* f, double* out, std::size_t nn, double invh2);

// 2D five-point stencil, row-major nodes (iy * nnx + ix).
void neg_laplacian_2d(const double* f, double* out, std::size_t nnx, std::size_t nny,
                      double invhx2, double invhy2);
void neg_laplacian_2d_serial(const double* f, double* out, std::size_t nnx, std::size_t nny,
                             double invhx2, double invhy2);

} // namespace fde::kern
