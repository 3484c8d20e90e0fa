#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "fde/evolution.hpp"
#include "fde/experiments.hpp"
#include "fde/grid.hpp"
#include "fde/operators.hpp"
#include "fde/spectral.hpp"
#include "fde/steady.hpp"

using namespace fde;

namespace {

// Long-double Newton for x^p + dt x = rhs, x > 0.
double amplitude_recursion(double p, double dt, double rhs) {
    long double x = std::pow((long double)rhs, (long double)1.0 / p);
    for (int it = 0; it < 200; ++it) {
        const long double f = std::pow(x, (long double)p) + (long double)dt * x - rhs;
        const long double df = p * std::pow(x, (long double)p - 1.0) + (long double)dt;
        const long double step = f / df;
        x -= step;
        if (std::fabs((double)step) <= 1e-18 * (double)x) break;
    }
    return (double)x;
}

double rel_sup_diff(const ScalarField& a, const ScalarField& b) {
    double d = 0.0, s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        d = std::max(d, std::fabs(a.values[k] - b.values[k]));
        s = std::max(s, std::fabs(b.values[k]));
    }
    return d / s;
}

} // namespace

TEST_CASE("a vanishing step returns the field unchanged") {
    auto dom = build_domain(1, {1.0}, {64});
    NegLaplacian op(dom);
    ScalarField u = two_bump_data(dom, 1.0, 0.1);
    StepConfig cfg;
    ScalarField next = step_cdp(op, u, 2.0, 1e-300, cfg);
    CHECK(rel_sup_diff(next, u) <= 1e-14);
}

TEST_CASE("separable data reduces to the scalar amplitude recursion") {
    for (double p : {2.0, 3.0}) {
        auto dom = build_domain(1, {1.0}, {128});
        NegLaplacian op(dom);
        SteadyState ss = solve_lane_emden(op, p);
        StepConfig cfg;
        std::mt19937 rng(1234);
        std::uniform_real_distribution<double> amp(0.3, 3.0), step(1e-4, 0.1);
        for (int trial = 0; trial < 10; ++trial) {
            const double a = amp(rng), dt = step(rng);
            ScalarField u = ss.S;
            for (auto& v : u.values) v *= a;
            ScalarField next = step_cdp(op, u, p, dt, cfg);
            const double a_next = amplitude_recursion(p, dt, std::pow(a, p));
            double worst = 0.0;
            for (std::size_t k = 0; k < dom->total_nodes; ++k)
                worst = std::max(worst,
                                 std::fabs(next.values[k] - a_next * ss.S.values[k]));
            CHECK(worst <= 1e-9 * a_next * sup_norm(ss.S));
        }
    }
}

TEST_CASE("each implicit step obeys the phi1 pairing identity") {
    const double p = 2.0;
    auto dom = build_domain(1, {1.0}, {128});
    NegLaplacian op(dom);
    EigenPair eig = principal_eigenpair(op);
    StepConfig cfg;
    ScalarField u = two_bump_data(dom, 1.5, 0.1);
    for (double dt : {1e-3, 5e-3, 2e-2}) {
        for (int k = 0; k < 5; ++k) {
            ScalarField next = step_cdp(op, u, p, dt, cfg);
            ScalarField up(dom), nextp(dom);
            for (std::size_t j = 0; j < dom->total_nodes; ++j) {
                up.values[j] = std::pow(u.values[j], p);
                nextp.values[j] = std::pow(next.values[j], p);
            }
            const double lhs = quad_inner(nextp, eig.phi) - quad_inner(up, eig.phi);
            const double rhs = -dt * eig.lambda * quad_inner(next, eig.phi);
            const double scale = std::max(std::fabs(quad_inner(up, eig.phi)),
                                          std::fabs(rhs));
            CHECK(std::fabs(lhs - rhs) <= 10.0 * cfg.newton_tol * scale);
            u = std::move(next);
        }
    }
}

TEST_CASE("extinction: separable estimate, bookkeeping, amplitude scaling") {
    const double p = 2.0;
    auto dom = build_domain(1, {1.0}, {256});
    NegLaplacian op(dom);
    EigenPair eig = principal_eigenpair(op);
    SteadyState ss = solve_lane_emden(op, p);
    StepConfig cfg;
    ScalarField u0 = separable_solution(ss, 1.0, 0.0);
    Trajectory traj = run_to_extinction(op, u0, p, cfg, eig, {p, p + 1.0, 2.0 * p});

    REQUIRE(traj.has_extinction);
    CHECK(traj.extinction.t_star >= 0.98);
    CHECK(traj.extinction.t_star <= 1.02);

    REQUIRE(traj.size() >= 100);
    REQUIRE(traj.snapshots.size() == traj.size());
    CHECK(traj.diag.sup_norm.size() == traj.size());
    CHECK(traj.diag.energy.size() == traj.size());
    CHECK(traj.diag.rayleigh.size() == traj.size());
    CHECK(traj.diag.phi1_pairing.size() == traj.size());
    CHECK(traj.diag.bc_violation.size() == traj.size());
    REQUIRE(traj.diag.r_list.size() == 3);
    for (const auto& col : traj.diag.weighted) CHECK(col.size() == traj.size());
    for (std::size_t j = 1; j < traj.size(); ++j) CHECK(traj.times[j] > traj.times[j - 1]);

    const double sup0 = sup_norm(u0);
    for (std::size_t j = 0; j < traj.size(); j += 97) {
        const ScalarField& snap = traj.snapshots[j];
        for (std::size_t k = 0; k < dom->total_nodes; ++k) {
            CHECK(snap.values[k] >= 0.0);
            if (!dom->is_interior(k)) CHECK(snap.values[k] == 0.0);
        }
    }
    // Benilan-Crandall: the separable solution satisfies the bound strictly.
    for (double v : traj.diag.bc_violation) CHECK(v <= 1e-6 * sup0);

    // u -> 2u rescales the discrete system exactly once dt leaves the dt0 cap;
    // the estimated extinction times scale by 2^(p-1) up to fit error.
    for (double pp : {2.0, 3.0}) {
        auto dom2 = build_domain(1, {1.0}, {128});
        NegLaplacian op2(dom2);
        EigenPair eig2 = principal_eigenpair(op2);
        SteadyState ss2 = solve_lane_emden(op2, pp);
        ScalarField a = separable_solution(ss2, 0.5, 0.0);
        ScalarField b = a;
        for (auto& v : b.values) v *= 2.0;
        Trajectory ta = run_to_extinction(op2, a, pp, cfg, eig2, {pp + 1.0});
        Trajectory tb = run_to_extinction(op2, b, pp, cfg, eig2, {pp + 1.0});
        REQUIRE(ta.has_extinction);
        REQUIRE(tb.has_extinction);
        const double expect = std::pow(2.0, pp - 1.0);
        CHECK(std::fabs(tb.extinction.t_star / ta.extinction.t_star - expect) <=
              0.02 * expect);
    }
}

TEST_CASE("comparison principle: ordered data stay ordered") {
    const double p = 2.0;
    auto dom = build_domain(1, {1.0}, {128});
    NegLaplacian op(dom);
    SteadyState ss = solve_lane_emden(op, p);
    StepConfig cfg;

    std::vector<std::pair<ScalarField, ScalarField>> pairs;
    pairs.emplace_back(two_bump_data(dom, 1.0, 0.1), two_bump_data(dom, 2.0, 0.1));
    ScalarField half = ss.S, full = ss.S;
    for (auto& v : half.values) v *= 0.35;
    pairs.emplace_back(std::move(half), std::move(full));
    ScalarField base = ss.S, raised = ss.S;
    for (auto& v : base.values) v *= 0.3;
    raised = base;
    {
        ScalarField bumps = two_bump_data(dom, 0.5, 0.08);
        for (std::size_t k = 0; k < dom->total_nodes; ++k)
            raised.values[k] += bumps.values[k];
    }
    pairs.emplace_back(std::move(base), std::move(raised));

    for (auto& [lo, hi] : pairs) {
        ScalarField a = lo, b = hi;
        const double tol = 1e-9 * sup_norm(b);
        for (int steps = 0; steps < 50; ++steps) {
            a = step_cdp(op, a, p, 1e-3, cfg);
            b = step_cdp(op, b, p, 1e-3, cfg);
            for (std::size_t k = 0; k < dom->total_nodes; ++k)
                CHECK(a.values[k] <= b.values[k] + tol);
        }
    }
}

TEST_CASE("rescaled flow fixes the discrete steady state") {
    const double p = 2.0;
    auto dom = build_domain(1, {1.0}, {128});
    NegLaplacian op(dom);
    SteadyState ss = solve_lane_emden(op, p);
    StepConfig cfg;
    ScalarField v = ss.S;
    for (int k = 0; k < 1000; ++k) v = step_rescaled(op, v, p, 1e-3, cfg);
    CHECK(rel_sup_diff(v, ss.S) <= 10.0 * cfg.newton_tol);
}

TEST_CASE("perturbed steady state contracts at the linearized rate") {
    const double p = 2.0, ds = 1e-3, eps = 1e-3;
    auto dom = build_domain(1, {1.0}, {128});
    NegLaplacian op(dom);
    SteadyState ss = solve_lane_emden(op, p);
    SpectrumSet spec = linearized_spectrum(op, ss.S, p, 2);
    REQUIRE(spec.eigenvalues[1] > 0.0);
    StepConfig cfg;

    // v = S + eps * e_tilde_1; implicit linearization contracts the mode by
    // 1/(1 + ds lambda_1/p) per step.
    ScalarField v = ss.S;
    for (std::size_t k = 0; k < dom->total_nodes; ++k)
        v.values[k] += eps * spec.fields[1].values[k];

    ScalarField diff(dom);
    auto defect = [&](const ScalarField& w) {
        for (std::size_t k = 0; k < dom->total_nodes; ++k)
            diff.values[k] = w.values[k] - ss.S.values[k];
        return std::sqrt(weighted_inner(diff, diff, spec.weight));
    };

    std::vector<double> norms{defect(v)};
    ScalarField energy_track = v;
    Trajectory resc = run_rescaled(op, energy_track, p, ds, 200, cfg, principal_eigenpair(op),
                                   {p + 1.0});
    for (int k = 0; k < 200; ++k) {
        v = step_rescaled(op, v, p, ds, cfg);
        norms.push_back(defect(v));
    }
    double mean_ratio = 0.0;
    int count = 0;
    for (std::size_t k = 10; k + 1 < norms.size(); ++k) {
        mean_ratio += norms[k + 1] / norms[k];
        ++count;
    }
    mean_ratio /= count;
    const double target = 1.0 - ds * spec.eigenvalues[1] / p;
    CHECK(std::fabs(mean_ratio - target) <= 1e-5);

    // Lyapunov property of the rescaled energy along the same relaxation.
    REQUIRE(resc.diag.energy.size() >= 2);
    for (std::size_t k = 1; k < resc.diag.energy.size(); ++k)
        CHECK(resc.diag.energy[k] <=
              resc.diag.energy[k - 1] + 10.0 * cfg.newton_tol * std::fabs(resc.diag.energy[k - 1]));
}

TEST_CASE("transforms: separable freezes, round trips, dual-path consistency") {
    const double p = 2.0;
    auto dom = build_domain(1, {1.0}, {128});
    NegLaplacian op(dom);
    SteadyState ss = solve_lane_emden(op, p);
    const double t_star = 1.0;

    for (double t : {0.0, 0.4, 0.8, 0.95}) {
        ScalarField u = separable_solution(ss, t_star, t);
        ScalarField v = to_rescaled(u, p, t - t_star);
        CHECK(rel_sup_diff(v, ss.S) <= 1e-12);
    }

    std::mt19937 rng(77);
    std::uniform_real_distribution<double> val(0.0, 2.0);
    for (double ts : {-1.3, -0.2, -1e-3}) {
        ScalarField u(dom);
        for (std::size_t k = 0; k < dom->total_nodes; ++k)
            if (dom->is_interior(k)) u.values[k] = val(rng);
        ScalarField back = from_rescaled(to_rescaled(u, p, ts), p, to_rescaled_time(p, ts));
        CHECK(rel_sup_diff(back, u) <= 1e-12);
        CHECK(std::fabs(from_rescaled_time(p, to_rescaled_time(p, ts)) - ts) <=
              1e-12 * std::fabs(ts));
    }

    // Dual path: evolve CDP at fixed dt and map through the transform, vs
    // stepping the rescaled flow directly on the induced s-grid.
    StepConfig cfg;
    EigenPair eig = principal_eigenpair(op);
    ScalarField u0 = two_bump_data(dom, 1.0, 0.1);
    Trajectory ref = run_to_extinction(op, u0, p, cfg, eig, {p + 1.0});
    REQUIRE(ref.has_extinction);
    const double T = ref.extinction.t_star;

    auto dual_defect = [&](double dt) {
        const int n = (int)(0.4 * T / dt);
        ScalarField u = u0;
        ScalarField w = to_rescaled(u0, p, -T);
        double worst = 0.0;
        double t = 0.0;
        for (int k = 0; k < n; ++k) {
            u = step_cdp(op, u, p, dt, cfg);
            const double t1 = t + dt;
            const double ds = to_rescaled_time(p, t1 - T) - to_rescaled_time(p, t - T);
            w = step_rescaled(op, w, p, ds, cfg);
            worst = std::max(worst, rel_sup_diff(w, to_rescaled(u, p, t1 - T)));
            t = t1;
        }
        return worst;
    };
    const double d1 = dual_defect(2e-3);
    const double d2 = dual_defect(1e-3);
    CHECK(d1 <= 0.05);
    CHECK(d1 / d2 >= 1.6);
    CHECK(d1 / d2 <= 2.6);
}
