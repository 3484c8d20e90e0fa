#pragma once

#include <cstddef>
#include <vector>

#include "fde/grid.hpp"
#include "fde/operators.hpp"
#include "fde/spectral.hpp"

namespace fde {

struct StepConfig {
    double dt0 = 1e-3;
    double kappa = 0.05;       // adaptive step: dt = min(dt0, kappa * sup^(p-1))
    double newton_tol = 1e-12; // residual tolerance relative to max |u^p|
    int newton_max = 50;
    double positivity_floor = 1e-14;
    double eps_ext_rel = 1e-8; // extinction threshold relative to the initial sup
    std::size_t fit_window = 20;
    std::size_t max_steps = 2000000;
};

struct ExtinctionEstimate {
    double t_star = 0.0;
    std::size_t window_begin = 0; // sample index range used by the affine fit
    std::size_t window_end = 0;
    double fit_residual = 0.0;    // RMS misfit over the window, relative to max |y|
};

struct TrajectoryDiagnostics {
    std::vector<double> r_list; // exponents of the weighted norms, ascending
    std::vector<double> sup_norm;
    std::vector<std::vector<double>> weighted; // weighted[j][k]: exponent j, sample k
    std::vector<double> energy;
    std::vector<double> rayleigh;
    std::vector<double> phi1_pairing;  // <u^p, phi1> quadrature pairing
    std::vector<double> bc_violation;  // max positive part of u_t - u/((p-1) t)
};

// Snapshots are immutable once recorded; times strictly increase and all
// diagnostic arrays share their length.
struct Trajectory {
    double p = 2.0;
    std::vector<double> times;
    std::vector<ScalarField> snapshots;
    TrajectoryDiagnostics diag;
    ExtinctionEstimate extinction;
    bool has_extinction = false;

    std::size_t size() const { return times.size(); }
};

// One implicit Euler step of d(u^p)/dt = Delta_h u:
//   u_next^p - dt Delta_h u_next = u^p.
// Damped Newton with Jacobian p diag(u^(p-1)) + dt (-Delta_h); iterates
// dipping below -positivity_floor are damped, residual tolerance is relative
// to max |u^p|. The result is nonnegative.
ScalarField step_cdp(const NegLaplacian& op, const ScalarField& u, double p, double dt,
                     const StepConfig& cfg);

// One implicit step of the rescaled flow d(v^p)/ds = Delta_h v + v^p:
//   v_next^p - ds (Delta_h v_next + v_next^p) = v^p.  Requires ds < 1.
ScalarField step_rescaled(const NegLaplacian& op, const ScalarField& v, double p, double ds,
                          const StepConfig& cfg);

// Adaptive implicit evolution until sup u < eps_ext. Records every step with
// diagnostics; fits T* by an affine fit of ||u||_(p+1)^(p-1) over the last
// fit_window samples with sup >= 1e3 * eps_ext. Fails if the sup norm does
// not decrease for 10 consecutive steps.
Trajectory run_to_extinction(const NegLaplacian& op, const ScalarField& u0, double p,
                             const StepConfig& cfg, const EigenPair& eig,
                             const std::vector<double>& r_list);

// Fixed-step rescaled evolution for n_steps steps; diagnostics as above with
// the energy column carrying F[v(s)].
Trajectory run_rescaled(const NegLaplacian& op, const ScalarField& v0, double p, double ds,
                        std::size_t n_steps, const StepConfig& cfg, const EigenPair& eig,
                        const std::vector<double>& r_list);

// v = (p / (-(p-1) t))^(1/(p-1)) u and s = (p/(p-1)) log(1/(-t)) for t < 0.
ScalarField to_rescaled(const ScalarField& u, double p, double t_shifted);
double to_rescaled_time(double p, double t_shifted);
// Inverse map; returns t < 0.
ScalarField from_rescaled(const ScalarField& v, double p, double s);
double from_rescaled_time(double p, double s);

} // namespace fde
