#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "fde/grid.hpp"
#include "fde/operators.hpp"
#include "fde/spectral.hpp"

using namespace fde;

namespace {

constexpr double pi = 3.14159265358979323846;

ScalarField random_interior(const DomainPtr& dom, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    ScalarField f(dom);
    for (std::size_t k = 0; k < dom->total_nodes; ++k)
        if (dom->is_interior(k)) f.values[k] = dist(rng);
    return f;
}

// Dense Gaussian elimination with partial pivoting; oracle-only (<= 64 unknowns).
std::vector<double> dense_solve(std::vector<double> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r * n + col]) > std::fabs(a[piv * n + col])) piv = r;
        for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
        std::swap(b[col], b[piv]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double m = a[r * n + col] / a[col * n + col];
            for (std::size_t c = col; c < n; ++c) a[r * n + c] -= m * a[col * n + c];
            b[r] -= m * b[col];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= a[i * n + c] * b[c];
        b[i] = s / a[i * n + i];
    }
    return b;
}

} // namespace

TEST_CASE("domain layout: 1d, 4 cells") {
    auto dom = build_domain(1, {1.0}, {4});
    CHECK(dom->total_nodes == 5);
    CHECK(dom->spacing[0] == 0.25);

    std::vector<double> interior;
    for (std::size_t k = 0; k < 5; ++k)
        if (dom->is_interior(k)) interior.push_back(dom->x_of(k));
    CHECK(interior == std::vector<double>{0.25, 0.5, 0.75});

    CHECK(dom->boundary_distance[0] == 0.0);
    CHECK(dom->boundary_distance[1] == 0.25);
    CHECK(dom->boundary_distance[2] == 0.5);
    CHECK(dom->boundary_distance[4] == 0.0);
}

TEST_CASE("quadrature weights sum to the domain measure") {
    for (auto& [dim, extents, cells] :
         {std::tuple<int, std::vector<double>, std::vector<std::size_t>>{1, {1.0}, {4}},
          {1, {2.5}, {17}},
          {2, {1.0, 1.0}, {8, 8}},
          {2, {2.0, 0.5}, {12, 9}}}) {
        auto dom = build_domain(dim, extents, cells);
        double total = 0.0, interior = 0.0;
        for (std::size_t k = 0; k < dom->total_nodes; ++k) {
            total += dom->quad_weights[k];
            if (dom->is_interior(k)) interior += dom->quad_weights[k];
        }
        CHECK(std::fabs(total - dom->measure()) <= 1e-12 * dom->measure());
        CHECK(interior < total);
    }
    // Interior-only mass for the 8x8 unit square: 49 cells of h^2.
    auto dom = build_domain(2, {1.0, 1.0}, {8, 8});
    double interior = 0.0;
    for (std::size_t k = 0; k < dom->total_nodes; ++k)
        if (dom->is_interior(k)) interior += dom->quad_weights[k];
    CHECK(std::fabs(interior - 49.0 / 64.0) <= 1e-15);
}

TEST_CASE("domain rejects degenerate input") {
    CHECK_THROWS_AS(build_domain(1, {1.0}, {3}), std::invalid_argument);
    CHECK_THROWS_AS(build_domain(3, {1.0, 1.0, 1.0}, {8, 8, 8}), std::invalid_argument);
    CHECK_THROWS_AS(build_domain(1, {-1.0}, {8}), std::invalid_argument);
    CHECK_THROWS_AS(build_domain(2, {1.0}, {8}), std::invalid_argument);
}

TEST_CASE("scalar field boundary and finiteness guards") {
    auto dom = build_domain(1, {1.0}, {8});
    ScalarField f(dom, 3.0);
    CHECK(f.values[0] == 0.0);
    CHECK(f.values[8] == 0.0);
    CHECK(f.values[4] == 3.0);

    f.values[2] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(f.require_finite("test"), std::runtime_error);

    ScalarField g(build_domain(1, {1.0}, {8}));
    CHECK_THROWS_AS(require_same_domain(f, g, "test"), std::invalid_argument);
}

TEST_CASE("apply_laplacian exact on quadratics, zero on zero") {
    auto dom = build_domain(1, {1.0}, {16});
    NegLaplacian op(dom);

    ScalarField f(dom);
    for (std::size_t k = 0; k < dom->total_nodes; ++k) {
        const double x = dom->x_of(k);
        f.values[k] = x * (1.0 - x);
    }
    f.zero_boundary();
    ScalarField lap = apply_laplacian(op, f);
    for (std::size_t k = 0; k < dom->total_nodes; ++k)
        if (dom->is_interior(k)) CHECK(std::fabs(lap.values[k] + 2.0) <= 1e-11);

    ScalarField z(dom);
    ScalarField lz = apply_laplacian(op, z);
    for (double v : lz.values) CHECK(v == 0.0);
}

TEST_CASE("operator symmetry and positive definiteness on random fields") {
    for (auto dom : {build_domain(1, {1.0}, {32}), build_domain(2, {1.0, 1.5}, {12, 10})}) {
        NegLaplacian op(dom);
        for (int trial = 0; trial < 50; ++trial) {
            ScalarField f = random_interior(dom, 1000 + trial);
            ScalarField g = random_interior(dom, 5000 + trial);
            const double afg = quad_inner(op.apply(f), g);
            const double fag = quad_inner(f, op.apply(g));
            CHECK(std::fabs(afg - fag) <= 1e-12 * (std::fabs(afg) + 1.0));
            CHECK(quad_inner(op.apply(f), f) > 0.0);
        }
    }
}

TEST_CASE("poisson: stencil-exact quadratic and zero right-hand side") {
    for (auto dom : {build_domain(1, {1.0}, {16}), build_domain(1, {1.0}, {64})}) {
        NegLaplacian op(dom);
        ScalarField rhs(dom, 2.0);
        ScalarField u = solve_poisson(op, rhs);
        for (std::size_t k = 0; k < dom->total_nodes; ++k) {
            const double x = dom->x_of(k);
            CHECK(std::fabs(u.values[k] - x * (1.0 - x)) <= 1e-12);
        }

        ScalarField z(dom);
        ScalarField uz = solve_poisson(op, z);
        for (double v : uz.values) CHECK(v == 0.0);
    }
}

TEST_CASE("poisson convergence order >= 1.9 for a sine load") {
    double errs[2];
    std::size_t cells[2] = {64, 128};
    for (int lvl = 0; lvl < 2; ++lvl) {
        auto dom = build_domain(1, {1.0}, {cells[lvl]});
        NegLaplacian op(dom);
        ScalarField rhs(dom);
        for (std::size_t k = 0; k < dom->total_nodes; ++k)
            rhs.values[k] = pi * pi * std::sin(pi * dom->x_of(k));
        rhs.zero_boundary();
        ScalarField u = solve_poisson(op, rhs);
        double e = 0.0;
        for (std::size_t k = 0; k < dom->total_nodes; ++k)
            e = std::max(e, std::fabs(u.values[k] - std::sin(pi * dom->x_of(k))));
        errs[lvl] = e;
    }
    const double order = std::log2(errs[0] / errs[1]);
    CHECK(order >= 1.9);
}

TEST_CASE("1d green function is x(1-y) at the nodes") {
    auto dom = build_domain(1, {1.0}, {16});
    NegLaplacian op(dom);
    for (std::size_t src = 1; src + 1 < dom->total_nodes; ++src) {
        ScalarField col = green_column(op, src);
        const double y = dom->x_of(src);
        for (std::size_t k = 0; k < dom->total_nodes; ++k) {
            const double x = dom->x_of(k);
            const double exact = x <= y ? x * (1.0 - y) : y * (1.0 - x);
            CHECK(std::fabs(col.values[k] - exact) <= 1e-12);
        }
    }
    CHECK(std::fabs(green_column(op, 4).values[8] - 0.125) <= 1e-12);
    CHECK_THROWS_AS(green_column(op, 0), std::invalid_argument);
}

TEST_CASE("green symmetry in 2d") {
    auto dom = build_domain(2, {1.0, 1.0}, {10, 10});
    NegLaplacian op(dom);
    auto picks = sample_interior_nodes(*dom, 6);
    for (std::size_t a : picks)
        for (std::size_t b : picks) {
            const double gab = green_column(op, a).values[b];
            const double gba = green_column(op, b).values[a];
            CHECK(std::fabs(gab - gba) <= 1e-10 * (std::fabs(gab) + 1e-30));
        }
}

TEST_CASE("2d green columns match a dense inverse oracle at 8x8") {
    auto dom = build_domain(2, {1.0, 1.0}, {8, 8});
    NegLaplacian op(dom);

    std::vector<std::size_t> interior;
    for (std::size_t k = 0; k < dom->total_nodes; ++k)
        if (dom->is_interior(k)) interior.push_back(k);
    const std::size_t n = interior.size();
    REQUIRE(n == 49);

    // Dense -Delta_h on interior unknowns.
    std::vector<double> a(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        ScalarField e(dom);
        e.values[interior[j]] = 1.0;
        ScalarField ae = op.apply(e);
        for (std::size_t i = 0; i < n; ++i) a[i * n + j] = ae.values[interior[i]];
    }

    for (std::size_t src : {interior[0], interior[24], interior[48]}) {
        std::vector<double> b(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            if (interior[i] == src) b[i] = 1.0 / dom->quad_weights[src];
        std::vector<double> x = dense_solve(a, b);
        ScalarField col = green_column(op, src);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(std::fabs(col.values[interior[i]] - x[i]) <= 1e-9 * (std::fabs(x[i]) + 1.0));
    }
}

TEST_CASE("green kernel floor: positive and matching the 1d closed form") {
    auto dom = build_domain(1, {1.0}, {64});
    NegLaplacian op(dom);
    EigenPair eig = principal_eigenpair(op);

    const double c0 = green_kernel_floor(op, eig.phi, 16);
    CHECK(c0 > 0.0);

    // Same sample set, exact discrete kernel x(1-y) and the computed phi1.
    auto picks = sample_interior_nodes(*dom, 16);
    double oracle = std::numeric_limits<double>::infinity();
    for (std::size_t a : picks)
        for (std::size_t b : picks) {
            const double xa = dom->x_of(a), yb = dom->x_of(b);
            const double g = xa <= yb ? xa * (1.0 - yb) : yb * (1.0 - xa);
            oracle = std::min(oracle, g / (eig.phi.values[a] * eig.phi.values[b]));
        }
    CHECK(std::fabs(c0 - oracle) <= 1e-9 * oracle);

    auto dom2 = build_domain(2, {1.0, 1.0}, {12, 12});
    NegLaplacian op2(dom2);
    EigenPair eig2 = principal_eigenpair(op2);
    CHECK(green_kernel_floor(op2, eig2.phi, 8) > 0.0);
}

TEST_CASE("weighted norms: constants, homogeneity, guards") {
    auto dom = build_domain(1, {1.0}, {32});
    ScalarField f(dom, 2.0, false);
    ScalarField one(dom, 1.0, false);
    CHECK(std::fabs(weighted_norm(f, 2.0, one) - 2.0) <= 1e-13);

    ScalarField g = random_interior(dom, 99);
    ScalarField w = random_interior(dom, 77);
    for (double& v : w.values) v = std::fabs(v);
    const double base = weighted_norm(g, 3.0, w);
    ScalarField g3 = g;
    for (double& v : g3.values) v *= -3.0;
    CHECK(std::fabs(weighted_norm(g3, 3.0, w) - 3.0 * base) <= 1e-12 * base);

    CHECK_THROWS_AS(weighted_norm(g, 0.0, w), std::invalid_argument);
    CHECK_THROWS_AS(lp_norm(g, -1.0), std::invalid_argument);
}

TEST_CASE("quadrature of the discrete eigenvector against closed forms") {
    // On (0,1) the discrete principal eigenvector is sin(pi x) at the nodes.
    // weighted_norm(phi1, 3, phi1)^3 quadratures sin^4, a trig polynomial the
    // trapezoid rule integrates exactly; the value is 3/8 to roundoff.
    // quad_integral(phi1) carries the generic O(h^2) Euler-Maclaurin error
    // against 2/pi, giving the order check.
    double errs[2];
    std::size_t cells[2] = {64, 128};
    for (int lvl = 0; lvl < 2; ++lvl) {
        auto dom = build_domain(1, {1.0}, {cells[lvl]});
        NegLaplacian op(dom);
        EigenPair eig = principal_eigenpair(op);
        const double v = std::pow(weighted_norm(eig.phi, 3.0, eig.phi), 3.0);
        CHECK(std::fabs(v - 3.0 / 8.0) <= 2e-11);
        errs[lvl] = std::fabs(quad_integral(eig.phi) - 2.0 / pi);
    }
    CHECK(std::log2(errs[0] / errs[1]) >= 1.9);
}

TEST_CASE("ratio envelope identities and the hopf comparison") {
    auto dom = build_domain(1, {1.0}, {64});
    NegLaplacian op(dom);
    EigenPair eig = principal_eigenpair(op);

    auto [mn1, mx1] = ratio_envelope(eig.phi, eig.phi);
    CHECK(mn1 == 1.0);
    CHECK(mx1 == 1.0);

    ScalarField twice = eig.phi;
    for (double& v : twice.values) v *= 2.0;
    auto [mn2, mx2] = ratio_envelope(twice, eig.phi);
    CHECK(mn2 == 2.0);
    CHECK(mx2 == 2.0);

    ScalarField dist(dom);
    for (std::size_t k = 0; k < dom->total_nodes; ++k)
        dist.values[k] = dom->boundary_distance[k];
    auto [mn, mx] = ratio_envelope(eig.phi, dist);
    CHECK(mn > 0.0);
    CHECK(mx < std::numeric_limits<double>::infinity());
    CHECK(mx / mn <= 2.0);

    ScalarField zero(dom);
    CHECK_THROWS_AS(ratio_envelope(eig.phi, zero), std::invalid_argument);
}

TEST_CASE("gradient energy agrees with the operator quadratic form") {
    for (auto dom : {build_domain(1, {1.0}, {48}), build_domain(2, {1.0, 2.0}, {10, 14})}) {
        NegLaplacian op(dom);
        for (int trial = 0; trial < 5; ++trial) {
            ScalarField f = random_interior(dom, 31 + trial);
            const double quad_form = quad_inner(op.apply(f), f);
            const double edges = gradient_energy(f);
            CHECK(std::fabs(quad_form - edges) <= 1e-11 * (std::fabs(quad_form) + 1.0));
        }
    }
}

TEST_CASE("solve_shifted inverts diag + c * neg laplacian") {
    auto dom = build_domain(2, {1.0, 1.0}, {8, 8});
    NegLaplacian op(dom);
    ScalarField b = random_interior(dom, 8);
    std::vector<double> d(dom->total_nodes, 0.5);
    ScalarField x = solve_shifted(op, d.data(), 0.3, b, true, 1e-12, "test");
    ScalarField res = op.apply(x);
    for (std::size_t k = 0; k < dom->total_nodes; ++k)
        if (dom->is_interior(k)) {
            const double lhs = d[k] * x.values[k] + 0.3 * res.values[k];
            CHECK(std::fabs(lhs - b.values[k]) <= 1e-9 * (std::fabs(b.values[k]) + 1.0));
        }
}
