#include "fde/steady.hpp"

#include <cmath>
#include <stdexcept>

#include "fde/errors.hpp"
#include "fde/kernels.hpp"

namespace fde {

double galerkin_amplitude(const EigenPair& eig, double p) {
    const ScalarField& phi = eig.phi;
    const double m2 = quad_inner(phi, phi);
    const double mp1 = kern::wpow_sum(phi.domain->quad_weights.data(), phi.data(), p + 1.0,
                                      phi.size());
    return std::pow(eig.lambda * m2 / mp1, 1.0 / (p - 1.0));
}

namespace {

double residual_max(const NegLaplacian& op, const ScalarField& S, double p, ScalarField& R,
                    ScalarField& Sp) {
    kern::pow_nonneg(S.data(), p, Sp.data(), Sp.size());
    Sp.zero_boundary();
    op.apply(S, R);
    kern::axpy(-1.0, Sp.data(), R.data(), R.size());
    return kern::max_abs(R.data(), R.size());
}

double min_interior(const ScalarField& f) {
    double m = HUGE_VAL;
    for (std::size_t k = 0; k < f.size(); ++k)
        if (f.domain->is_interior(k)) m = std::min(m, f.values[k]);
    return m;
}

} // namespace

SteadyState solve_lane_emden(const NegLaplacian& op, double p, double init_amplitude) {
    if (!(p > 1.0)) throw std::invalid_argument("solve_lane_emden: requires p > 1");
    const DomainPtr dom = op.domain();

    EigenPair eig = principal_eigenpair(op);
    const double c = init_amplitude > 0.0 ? init_amplitude : galerkin_amplitude(eig, p);

    ScalarField S = eig.phi;
    kern::scale(S.data(), c, S.size());

    ScalarField R(dom), Sp(dom), trial(dom), Rt(dom);
    std::vector<double> jac_diag(dom->total_nodes, 0.0);
    double rn = residual_max(op, S, p, R, Sp);

    const int max_newton = 100;
    for (int it = 0; it < max_newton; ++it) {
        const double scale = kern::max_abs(Sp.data(), Sp.size());
        if (rn <= 1e-11 * scale) break;
        if (it == max_newton - 1)
            throw SolverError("solve_lane_emden: Newton did not converge", "newton", it,
                              rn / scale);

        // J = (-Delta_h) - p diag(S^(p-1)); symmetric indefinite.
        for (std::size_t k = 0; k < dom->total_nodes; ++k)
            jac_diag[k] = dom->is_interior(k) ? -p * std::pow(S.values[k], p - 1.0) : 0.0;
        ScalarField rhs = R;
        kern::scale(rhs.data(), -1.0, rhs.size());
        ScalarField delta =
            solve_shifted(op, jac_diag.data(), 1.0, rhs, false, 1e-13, "solve_lane_emden");

        double alpha = 1.0;
        bool accepted = false;
        for (int half = 0; half < 40; ++half) {
            trial = S;
            kern::axpy(alpha, delta.data(), trial.data(), trial.size());
            if (min_interior(trial) > 0.0) {
                const double rt = residual_max(op, trial, p, Rt, Sp);
                if (rt < rn) {
                    S = trial;
                    std::swap(R.values, Rt.values);
                    rn = rt;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if (!accepted)
            throw SolverError("solve_lane_emden: damping exhausted", "newton", it, rn);
    }

    SteadyState ss;
    ss.p = p;
    ss.S = std::move(S);
    ss.S.require_finite("solve_lane_emden");
    kern::pow_nonneg(ss.S.data(), p, Sp.data(), Sp.size());
    Sp.zero_boundary();
    // Relative to ||S^p||_inf so the contract is amplitude- and grid-independent.
    ss.residual_norm = rn / kern::max_abs(Sp.data(), Sp.size());
    ss.lambda1 = eig.lambda;
    ss.hopf_envelope = ratio_envelope(ss.S, eig.phi);
    ss.phi1 = std::move(eig.phi);
    if (!(min_interior(ss.S) > 0.0))
        throw SolverError("solve_lane_emden: steady state not positive", "newton", 0,
                          min_interior(ss.S));
    return ss;
}

ScalarField separable_solution(const SteadyState& ss, double t_star, double t) {
    if (!(t <= t_star))
        throw std::invalid_argument("separable_solution: requires t <= t_star");
    const double amp = std::pow((ss.p - 1.0) * (t_star - t) / ss.p, 1.0 / (ss.p - 1.0));
    ScalarField u = ss.S;
    kern::scale(u.data(), amp, u.size());
    return u;
}

double energy_F(const NegLaplacian& op, const ScalarField& v, double p) {
    ScalarField Av = op.apply(v);
    const double dirichlet = quad_inner(Av, v);
    const double mass =
        kern::wpow_sum(v.domain->quad_weights.data(), v.data(), p + 1.0, v.size());
    return dirichlet - 2.0 / (p + 1.0) * mass;
}

double rayleigh_Q(const NegLaplacian& op, const ScalarField& u, double p) {
    ScalarField Au = op.apply(u);
    const double dirichlet = quad_inner(Au, u);
    const double denom =
        kern::wpow_sum(u.domain->quad_weights.data(), u.data(), p + 1.0, u.size());
    if (!(denom > 0.0)) throw std::invalid_argument("rayleigh_Q: field vanishes");
    return dirichlet / std::pow(denom, 2.0 / (p + 1.0));
}

} // namespace fde
