#include "fde/evolution.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <stdexcept>

#include "fde/errors.hpp"
#include "fde/kernels.hpp"
#include "fde/steady.hpp"

namespace fde {

namespace {

// Newton solve of c_p w^p + c_A (-Delta_h) w = rhs with w >= 0. Shared by the
// physical and rescaled steps.
ScalarField implicit_power_solve(const NegLaplacian& op, const ScalarField& guess,
                                 const ScalarField& rhs, double p, double c_p, double c_A,
                                 const StepConfig& cfg, const char* what) {
    const DomainPtr dom = op.domain();
    const double scale = kern::max_abs(rhs.data(), rhs.size());
    ScalarField w = guess;
    // A subnormal right-hand side is beyond extinction at representable
    // amplitude: the linear term dominates and the nonnegative solve collapses
    // to denormal noise, so the zero field is the correct limit.
    if (scale < std::numeric_limits<double>::min()) {
        kern::fill(w.data(), 0.0, w.size());
        return w;
    }

    // Evaluating c_A (-Delta_h) w rounds at eps * c_A * (4/h^2) * |w|, which
    // deep in the extinction tail exceeds newton_tol * max|rhs|; accept once
    // the residual reaches that representation floor.
    double row_sum = 0.0;
    for (int a = 0; a < dom->dim; ++a) row_sum += 4.0 / (dom->spacing[a] * dom->spacing[a]);
    const double eps_mach = std::numeric_limits<double>::epsilon();
    auto tol_at = [&](const ScalarField& f) {
        const double wmax = kern::max_abs(f.data(), f.size());
        return std::max(cfg.newton_tol * scale,
                        8.0 * eps_mach * (std::fabs(c_A) * row_sum * wmax + scale));
    };

    ScalarField wp(dom), R(dom), trial(dom);
    std::vector<double> jdiag(dom->total_nodes, 0.0);

    auto residual = [&](const ScalarField& f, ScalarField& out) {
        kern::pow_nonneg(f.data(), p, wp.data(), wp.size());
        wp.zero_boundary();
        op.apply(f, out);
        kern::scale(out.data(), c_A, out.size());
        kern::axpy(c_p, wp.data(), out.data(), out.size());
        kern::axpy(-1.0, rhs.data(), out.data(), out.size());
        return kern::max_abs(out.data(), out.size());
    };

    double rn = residual(w, R);
    for (int it = 0; it < cfg.newton_max; ++it) {
        if (rn <= tol_at(w)) {
            w.require_finite(what);
            return w;
        }
        for (std::size_t k = 0; k < dom->total_nodes; ++k)
            jdiag[k] =
                dom->is_interior(k) ? c_p * p * std::pow(w.values[k], p - 1.0) : 0.0;
        ScalarField neg_R = R;
        kern::scale(neg_R.data(), -1.0, neg_R.size());
        ScalarField delta = solve_shifted(op, jdiag.data(), c_A, neg_R, true, 1e-12, what);

        double alpha = 1.0;
        bool accepted = false;
        for (int half = 0; half < 40; ++half) {
            trial = w;
            kern::axpy(alpha, delta.data(), trial.data(), trial.size());
            double mn = 0.0;
            for (std::size_t k = 0; k < trial.size(); ++k) mn = std::min(mn, trial.values[k]);
            if (mn >= -cfg.positivity_floor) {
                for (double& v : trial.values) v = std::max(v, 0.0);
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted)
            throw SolverError(std::string(what) + ": positivity lost after full damping",
                              "newton", it, rn / scale);
        w = trial;
        rn = residual(w, R);
    }
    if (rn <= tol_at(w)) {
        w.require_finite(what);
        return w;
    }
    throw SolverError(std::string(what) + ": Newton did not converge", "newton", cfg.newton_max,
                      rn / scale);
}

std::vector<double> sorted_r_list(std::vector<double> r_list) {
    std::sort(r_list.begin(), r_list.end());
    return r_list;
}

void record_sample(Trajectory& traj, const NegLaplacian& op, const EigenPair& eig,
                   const ScalarField& u, double t, double dt_from_prev) {
    const double p = traj.p;
    traj.diag.sup_norm.push_back(sup_norm(u));
    for (std::size_t j = 0; j < traj.diag.r_list.size(); ++j)
        traj.diag.weighted[j].push_back(weighted_norm(u, traj.diag.r_list[j], eig.phi));
    traj.diag.energy.push_back(energy_F(op, u, p));
    // Q is 2-homogeneous; normalize by the sup so the quadratic forms cannot
    // underflow to 0/0 when u sits deep in the denormal range.
    const double sup = traj.diag.sup_norm.back();
    if (sup > 0.0) {
        ScalarField un(u);
        for (double& v : un.values) v /= sup;
        traj.diag.rayleigh.push_back(rayleigh_Q(op, un, p));
    } else {
        traj.diag.rayleigh.push_back(0.0);
    }

    ScalarField up(u.domain);
    kern::pow_nonneg(u.data(), p, up.data(), up.size());
    up.zero_boundary();
    traj.diag.phi1_pairing.push_back(quad_inner(up, eig.phi));

    double viol = 0.0;
    if (!traj.snapshots.empty() && t > 0.0 && dt_from_prev > 0.0) {
        const ScalarField& prev = traj.snapshots.back();
        const Domain& dom = *u.domain;
        for (std::size_t k = 0; k < u.size(); ++k) {
            if (!dom.is_interior(k)) continue;
            const double ut = (u.values[k] - prev.values[k]) / dt_from_prev;
            const double bound = u.values[k] / ((p - 1.0) * t);
            viol = std::max(viol, ut - bound);
        }
        viol = std::max(viol, 0.0);
    }
    traj.diag.bc_violation.push_back(viol);

    traj.times.push_back(t);
    traj.snapshots.push_back(u);
}

void fit_extinction(Trajectory& traj, const StepConfig& cfg, double eps_ext) {
    const double p = traj.p;
    // y = ||u||_(p+1)^(p-1), affine in t for the separable branch.
    std::vector<double> y(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k)
        y[k] = std::pow(lp_norm(traj.snapshots[k], p + 1.0), p - 1.0);

    std::size_t end = 0;
    for (std::size_t k = 0; k < traj.size(); ++k)
        if (traj.diag.sup_norm[k] >= 1e3 * eps_ext) end = k + 1;
    if (end < 2) throw SolverError("run_to_extinction: too few samples for the T* fit",
                                   "extinction_fit", (long long)end, 0.0);
    const std::size_t begin = end > cfg.fit_window ? end - cfg.fit_window : 0;

    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    const double m = (double)(end - begin);
    for (std::size_t k = begin; k < end; ++k) {
        st += traj.times[k];
        sy += y[k];
        stt += traj.times[k] * traj.times[k];
        sty += traj.times[k] * y[k];
    }
    const double det = m * stt - st * st;
    const double slope = (m * sty - st * sy) / det;
    const double icept = (sy * stt - st * sty) / det;
    if (!(slope < 0.0))
        throw SolverError("run_to_extinction: extinction fit has non-negative slope",
                          "extinction_fit", (long long)(end - begin), slope);

    double rss = 0.0, ymax = 0.0;
    for (std::size_t k = begin; k < end; ++k) {
        const double r = y[k] - (icept + slope * traj.times[k]);
        rss += r * r;
        ymax = std::max(ymax, std::fabs(y[k]));
    }
    traj.extinction.t_star = -icept / slope;
    traj.extinction.window_begin = begin;
    traj.extinction.window_end = end;
    traj.extinction.fit_residual = std::sqrt(rss / m) / std::max(ymax, 1e-300);
    traj.has_extinction = true;
}

} // namespace

ScalarField step_cdp(const NegLaplacian& op, const ScalarField& u, double p, double dt,
                     const StepConfig& cfg) {
    if (!(p > 1.0)) throw std::invalid_argument("step_cdp: requires p > 1");
    if (!(dt > 0.0)) throw std::invalid_argument("step_cdp: requires dt > 0");
    ScalarField rhs(u.domain);
    kern::pow_nonneg(u.data(), p, rhs.data(), rhs.size());
    rhs.zero_boundary();
    return implicit_power_solve(op, u, rhs, p, 1.0, dt, cfg, "step_cdp");
}

ScalarField step_rescaled(const NegLaplacian& op, const ScalarField& v, double p, double ds,
                          const StepConfig& cfg) {
    if (!(p > 1.0)) throw std::invalid_argument("step_rescaled: requires p > 1");
    if (!(ds > 0.0 && ds < 1.0)) throw std::invalid_argument("step_rescaled: requires 0 < ds < 1");
    ScalarField rhs(v.domain);
    kern::pow_nonneg(v.data(), p, rhs.data(), rhs.size());
    rhs.zero_boundary();
    return implicit_power_solve(op, v, rhs, p, 1.0 - ds, ds, cfg, "step_rescaled");
}

Trajectory run_to_extinction(const NegLaplacian& op, const ScalarField& u0, double p,
                             const StepConfig& cfg, const EigenPair& eig,
                             const std::vector<double>& r_list) {
    if (u0.domain.get() != op.domain().get())
        throw std::invalid_argument("run_to_extinction: domain mismatch");
    for (double v : u0.values)
        if (v < 0.0) throw std::invalid_argument("run_to_extinction: initial data negative");

    Trajectory traj;
    traj.p = p;
    traj.diag.r_list = sorted_r_list(r_list);
    traj.diag.weighted.assign(traj.diag.r_list.size(), {});

    const double sup0 = sup_norm(u0);
    if (!(sup0 > 0.0)) throw std::invalid_argument("run_to_extinction: initial data vanishes");
    const double eps_ext = cfg.eps_ext_rel * sup0;

    ScalarField u = u0;
    u.zero_boundary();
    record_sample(traj, op, eig, u, 0.0, 0.0);

    double t = 0.0;
    int stall = 0;
    for (std::size_t step = 0; step < cfg.max_steps; ++step) {
        const double sup = traj.diag.sup_norm.back();
        if (sup < eps_ext) break;
        // For p > 2 the adaptive step shrinks faster than the remaining time
        // and would underflow t + dt == t; floor it at the resolution of t.
        const double dt_floor =
            16.0 * std::numeric_limits<double>::epsilon() * std::max(t, cfg.dt0);
        const double dt =
            std::max(std::min(cfg.dt0, cfg.kappa * std::pow(sup, p - 1.0)), dt_floor);
        ScalarField next = step_cdp(op, u, p, dt, cfg);
        t += dt;
        const double sup_next = sup_norm(next);
        stall = sup_next >= sup ? stall + 1 : 0;
        if (stall >= 10)
            throw SolverError("run_to_extinction: sup norm non-decreasing for 10 steps",
                              "evolution", (long long)step, sup_next);
        record_sample(traj, op, eig, next, t, dt);
        u = std::move(next);
        if (step + 1 == cfg.max_steps)
            throw SolverError("run_to_extinction: step budget exhausted", "evolution",
                              (long long)cfg.max_steps, sup_next);
    }

    fit_extinction(traj, cfg, eps_ext);
    return traj;
}

Trajectory run_rescaled(const NegLaplacian& op, const ScalarField& v0, double p, double ds,
                        std::size_t n_steps, const StepConfig& cfg, const EigenPair& eig,
                        const std::vector<double>& r_list) {
    if (v0.domain.get() != op.domain().get())
        throw std::invalid_argument("run_rescaled: domain mismatch");
    Trajectory traj;
    traj.p = p;
    traj.diag.r_list = sorted_r_list(r_list);
    traj.diag.weighted.assign(traj.diag.r_list.size(), {});

    ScalarField v = v0;
    v.zero_boundary();
    record_sample(traj, op, eig, v, 0.0, 0.0);
    for (std::size_t k = 1; k <= n_steps; ++k) {
        ScalarField next = step_rescaled(op, v, p, ds, cfg);
        record_sample(traj, op, eig, next, (double)k * ds, ds);
        // bc_violation has no meaning under the rescaled flow; keep zeros.
        traj.diag.bc_violation.back() = 0.0;
        v = std::move(next);
    }
    return traj;
}

ScalarField to_rescaled(const ScalarField& u, double p, double t_shifted) {
    if (!(t_shifted < 0.0))
        throw std::invalid_argument("to_rescaled: requires a negative shifted time");
    const double amp = std::pow(p / (-(p - 1.0) * t_shifted), 1.0 / (p - 1.0));
    ScalarField v = u;
    kern::scale(v.data(), amp, v.size());
    return v;
}

double to_rescaled_time(double p, double t_shifted) {
    if (!(t_shifted < 0.0))
        throw std::invalid_argument("to_rescaled_time: requires a negative shifted time");
    return p / (p - 1.0) * std::log(1.0 / (-t_shifted));
}

ScalarField from_rescaled(const ScalarField& v, double p, double s) {
    const double t = from_rescaled_time(p, s);
    const double amp = std::pow(-(p - 1.0) * t / p, 1.0 / (p - 1.0));
    ScalarField u = v;
    kern::scale(u.data(), amp, u.size());
    return u;
}

double from_rescaled_time(double p, double s) {
    return -std::exp(-(p - 1.0) * s / p);
}

} // namespace fde
