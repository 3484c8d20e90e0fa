#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fde/evolution.hpp"
#include "fde/grid.hpp"
#include "fde/spectral.hpp"
#include "fde/steady.hpp"

namespace fde {

// Exponent bookkeeping for the audited estimates. An estimate whose exponent
// gate fails is reported "inapplicable", never "fail".
struct AuditParams {
    int n = 1;        // spatial dimension
    double p = 2.0;
    double r = 2.0;   // integrability exponent of the initial datum
    double q = 1.5;   // weight exponent; fixed to (n+1)/2 for n = 2
    double q_star = 6.0;

    double a() const { return 2.0 / (p - 1.0); }
    double denom() const { return r - q * (p - 1.0); }
    double b() const { return (r + q) / denom(); }

    // r >= p, valid for n <= 2.
    bool range_r1() const { return n <= 2 && r >= p; }
    // r >= p below the critical exponent (n+1)/(n-1), r > (n+1)(p-1)/2 at or
    // above it; the weighted exponents additionally need r > q (p-1).
    bool range_r2() const;
    std::string gate_reason() const;
};

// Fills the q/q_star defaults: q = (n+1)/2 for n = 2 (1.5 also used as the 1D
// default), q_star = 2(n+1)/(n-1) for n = 2 and the conjugate 2q/(q-1) in 1D.
AuditParams make_audit_params(int n, double p, double r, double q = 0.0, double q_star = 0.0);

struct AuditRecord {
    std::string check_id;
    std::string paper_anchor;
    std::string status = "pass"; // pass | fail | inapplicable
    double empirical_constant = 0.0;
    double worst_margin = 0.0;
    double worst_time = 0.0;
    long long worst_node = -1;
    double refinement_drift = -1.0; // negative: not measured
    std::string note;
};

// Indices of trajectory samples nearest to a geometric time grid in (0, T*)
// accumulating at T*; deduplicated, ascending.
std::vector<std::size_t> geometric_sample_indices(const Trajectory& traj, double t_star,
                                                  std::size_t count);

// sup u(t) <= C t^(-q/denom) (integral u0^r phi1)^(1/denom): reports the
// empirical C over geometric samples.
AuditRecord check_smoothing(const Trajectory& traj, const AuditParams& params,
                            const EigenPair& eig);

// One record per exponent in traj.diag.r_list with exponent >= p: the weighted
// norm is nonincreasing within 1e-9 * initial scale. For exponent == p the
// decay is also compared against the lower line of slope
// lambda1 (p-1)/p ||phi1||_1^((p-1)/p).
std::vector<AuditRecord> check_norm_monotonicity(const Trajectory& traj, const EigenPair& eig);

// T*_est >= 0.98 * p/(lambda1 (p-1)) ||phi1||_1^((1-p)/p) ||u0||_(L^p_phi1)^(p-1).
AuditRecord check_extinction_bound(const Trajectory& traj, const EigenPair& eig);

// Near-extinction envelope E(t) = (T*-t)^(-1/(p-1)) u/phi1 over the window
// (2T*/3, 0.95T*): positive, finite, global max/min ratio <= ratio_cap.
// Inapplicable unless n = 1 or p < (n+1)/(n-1).
AuditRecord check_harnack_special(const Trajectory& traj, const AuditParams& params,
                                  const EigenPair& eig, double ratio_cap = 50.0);

// Two-sided global Harnack envelopes; returns the lower-constant and
// upper-constant records.
std::vector<AuditRecord> check_harnack_general(const Trajectory& traj,
                                               const AuditParams& params, const EigenPair& eig);

// Green representation sandwich between times t0_frac*T* and t1_frac*T* at
// sample interior points; slack >= -1e-3 * scale.
AuditRecord check_representation(const Trajectory& traj, const NegLaplacian& op,
                                 std::size_t n_points, double t0_frac, double t1_frac);

// max over samples of the recorded backward-difference violation of
// u_t <= u/((p-1) t), tolerance 1e-6 * initial sup.
AuditRecord check_benilan_crandall(const Trajectory& traj);

// Three records: Rayleigh quotient nonincreasing, ||u||_(p+1)^(p-1) convex,
// (T*-t)^(-1/(p-1)) ||u||_(p+1) nonincreasing.
std::vector<AuditRecord> check_p_plus_1_structure(const Trajectory& traj);

// Along a rescaled trajectory: F nonincreasing up to 10 * newton_tol, and the
// per-step defect of dF/ds = -2p integral v^(p-1) |ds v|^2 below 5 percent
// (midpoint weight; steps with negligible dissipation are skipped).
AuditRecord check_energy_dissipation(const Trajectory& rescaled, const NegLaplacian& op,
                                     double newton_tol);

// Defect comparison between a run at ds and one at ds/2: the defect should
// shrink by roughly half (factor in [0.3, 0.7] passes).
AuditRecord check_energy_dissipation_halving(const Trajectory& at_ds,
                                             const Trajectory& at_half_ds,
                                             const NegLaplacian& op, double newton_tol);

struct ModeDecayFit {
    double fitted_rate = 0.0;
    double target_rate = 0.0;
    double relative_error = 0.0;
    double r_squared = 0.0;
};

// Fits d/ds log ||v/S - 1||_(S^(p+1)) along a rescaled run and compares with
// -lambda_i / p.
ModeDecayFit fit_mode_decay(const Trajectory& rescaled, const SteadyState& ss,
                            const SpectrumSet& spec, std::size_t mode_index);
AuditRecord mode_decay_record(const ModeDecayFit& fit);

struct RelativeProjection {
    std::vector<double> coeffs;
    double norm_sq = 0.0;     // ||v/S - 1||^2 in the S^(p+1) product
    double coeff_sq = 0.0;    // sum of squared coefficients
    double negative_block = 0.0;
    double neutral_block = 0.0;
    double positive_block = 0.0;
};

// Coefficients of g = v/S - 1 in the relative eigenbasis; block norms split by
// eigenvalue sign with the +-1e-6 neutral window.
RelativeProjection project_relative_error(const ScalarField& v, const SteadyState& ss,
                                          const SpectrumSet& spec,
                                          const std::vector<ScalarField>& basis);

// Empirical constant of (integral |f|^q* phi1)^(2/q*) <= C integral |grad f|^2 phi1
// over a field corpus.
AuditRecord check_weighted_sobolev(const std::vector<ScalarField>& fields, const EigenPair& eig,
                                   double q_star);

// Random + structured corpus for the Sobolev audit; the boundary-concentrated
// bumps are the stress family.
std::vector<ScalarField> sobolev_corpus(const DomainPtr& dom, std::size_t count,
                                        std::uint64_t seed);

// Ancient (t < 0) bounds on a trajectory reconstructed from a rescaled run
// with extinction shifted to 0: r-norm growth constant and v/phi1 envelope.
std::vector<AuditRecord> check_ancient_bounds(const Trajectory& rescaled, double p,
                                              const EigenPair& eig, double r_exponent);

// Fills refinement_drift on `base` from a refined rerun of the same check.
void attach_refinement_drift(AuditRecord& base, const AuditRecord& refined);

} // namespace fde
