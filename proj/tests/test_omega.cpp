#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "fde/omega.hpp"

using namespace fde;

namespace {

constexpr double pi = 3.14159265358979323846;

// RK4 for omega'' = -gamma^2 omega - |omega|^(p-1) omega from omega(0) = 0,
// omega'(0) = sigma, integrated to pi/2. Returns (omega, omega') there.
std::pair<double, double> integrate_half(double p, double gamma, double sigma, int steps) {
    const double h = (pi / 2.0) / steps;
    double w = 0.0, v = sigma;
    auto f = [&](double y) { return -gamma * gamma * y - std::pow(std::fabs(y), p - 1.0) * y; };
    for (int i = 0; i < steps; ++i) {
        const double k1w = v,                k1v = f(w);
        const double k2w = v + 0.5 * h * k1v, k2v = f(w + 0.5 * h * k1w);
        const double k3w = v + 0.5 * h * k2v, k3v = f(w + 0.5 * h * k2w);
        const double k4w = v + h * k3v,       k4v = f(w + h * k3w);
        w += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    return {w, v};
}

// Independent shooting: bisection on omega'(pi/2; sigma).
double oracle_sigma(double p, double gamma) {
    double lo = 1e-8, hi = 1e-8;
    while (integrate_half(p, gamma, hi, 4096).second > 0.0) {
        lo = hi;
        hi *= 2.0;
        REQUIRE(hi < 1e12);
    }
    for (int it = 0; it < 200 && (hi - lo) > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (integrate_half(p, gamma, mid, 4096).second > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("omega profile for p = 5 satisfies its contract") {
    OmegaProfile prof = shoot_omega(5.0);
    CHECK(prof.p == 5.0);
    CHECK(prof.gamma == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(prof.residual <= 1e-8);
    CHECK(prof.symmetry_defect <= 1e-8);
    REQUIRE(prof.theta.size() == prof.omega.size());
    REQUIRE(prof.theta.size() >= 3);
    CHECK(prof.omega.front() == 0.0);
    CHECK(prof.omega.back() == 0.0);
    CHECK(prof.theta.front() == 0.0);
    CHECK(prof.theta.back() == doctest::Approx(pi).epsilon(1e-14));
    for (std::size_t i = 1; i + 1 < prof.omega.size(); ++i) CHECK(prof.omega[i] > 0.0);
    CHECK(prof.sigma > 0.0);
}

TEST_CASE("omega at the apex matches an independent fine-step integrator") {
    OmegaProfile prof = shoot_omega(5.0);
    const double sigma = oracle_sigma(5.0, 0.5);
    CHECK(std::fabs(prof.sigma - sigma) <= 1e-6 * sigma);

    // Step pi/65536 over (0, pi/2).
    const double apex = integrate_half(5.0, 0.5, sigma, 32768).first;
    std::size_t mid = 0;
    for (std::size_t i = 0; i < prof.theta.size(); ++i)
        if (std::fabs(prof.theta[i] - pi / 2.0) < std::fabs(prof.theta[mid] - pi / 2.0)) mid = i;
    CHECK(std::fabs(prof.theta[mid] - pi / 2.0) <= 1e-12);
    CHECK(std::fabs(prof.omega[mid] - apex) <= 1e-6);
}

TEST_CASE("omega rejects p at or below the existence threshold") {
    CHECK_THROWS_AS((void)shoot_omega(2.5), std::invalid_argument);
    CHECK_THROWS_AS((void)shoot_omega(3.0), std::invalid_argument);
}

TEST_CASE("shooting function has exactly one root in the scanned range") {
    CHECK(count_shooting_roots(5.0) == 1);
    CHECK(count_shooting_roots(4.0) == 1);
    CHECK(shooting_sigma_max(5.0) > 0.0);
}

TEST_CASE("omega profile for p = 4 converges") {
    OmegaProfile prof = shoot_omega(4.0);
    CHECK(prof.gamma == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(prof.residual <= 1e-8);
    CHECK(prof.symmetry_defect <= 1e-8);
    const double sigma = oracle_sigma(4.0, 2.0 / 3.0);
    CHECK(std::fabs(prof.sigma - sigma) <= 1e-6 * sigma);
}
