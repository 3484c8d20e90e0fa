#include "fde/special.hpp"

#include <cmath>
#include <stdexcept>

#include "fde/errors.hpp"

namespace fde {

namespace {

// Lentz continued fraction for the regularized incomplete Beta; converges for
// x < (a+1)/(a+b+2).
double betacf(double a, double b, double x) {
    constexpr int maxit = 300;
    constexpr double eps = 3e-16;
    constexpr double fpmin = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= maxit; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) return h;
    }
    throw SolverError("incomplete_beta: continued fraction did not converge", "betacf", maxit,
                      h);
}

} // namespace

double beta_function(double a, double b) {
    return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

double regularized_beta(double x, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::invalid_argument("regularized_beta: parameters must be positive");
    if (!(x >= 0.0 && x <= 1.0))
        throw std::invalid_argument("regularized_beta: x must lie in [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                  a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double incomplete_beta(double z, double alpha, double beta) {
    if (!(z >= 0.0 && z <= 1.0))
        throw std::invalid_argument("incomplete_beta: z must lie in [0, 1]");
    // Upper tail: B(alpha, beta) * I_(1-z)(beta, alpha).
    return beta_function(alpha, beta) * regularized_beta(1.0 - z, beta, alpha);
}

} // namespace fde
