#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fde/audit.hpp"
#include "fde/config.hpp"
#include "fde/evolution.hpp"
#include "fde/spectral.hpp"
#include "fde/steady.hpp"

namespace fde {

// Shared per-experiment state: domain, stencil, principal eigenpair, steady
// state. Built once and reused by every subcommand.
struct Workspace {
    DomainPtr domain;
    std::shared_ptr<NegLaplacian> op;
    EigenPair eig;
    SteadyState steady;
};

Workspace build_workspace(const ExperimentConfig& cfg);

// Uniform refinement: cell counts scaled by 2^levels, dt0 and ds by 2^-levels
// so audited constants stay comparable across levels.
ExperimentConfig refined(const ExperimentConfig& cfg, std::size_t levels);

ScalarField build_initial_data(const ExperimentConfig& cfg, const Workspace& ws);

// Two gaussian bumps at 30% and 70% of each extent; not a config kind (drive
// it from a config via kind = "file").
ScalarField two_bump_data(const DomainPtr& dom, double height, double width_frac = 0.08);

StepConfig step_config(const ExperimentConfig& cfg);

Trajectory run_cdp(const ExperimentConfig& cfg, const Workspace& ws);

// Rescaled run started from S (1 + perturbation * e_mode) with e_mode the
// relative eigenfield of spec at cfg.rescale.mode.
Trajectory run_rescaled_experiment(const ExperimentConfig& cfg, const Workspace& ws,
                                   const SpectrumSet& spec, std::size_t mode,
                                   double ds_override = 0.0, std::size_t steps_override = 0);

struct AuditOutcome {
    std::vector<AuditRecord> records;
    Trajectory cdp;
    Trajectory rescaled;
    bool any_fail = false;
};

// Full battery: CDP checks, rescaled-flow checks, Sobolev corpus, plus a
// refined rerun that stamps refinement_drift on the constant-type records.
// Deterministic for fixed cfg (including seed).
AuditOutcome run_audits(const ExperimentConfig& cfg, bool with_refinement = true);

// run_audits + report files under cfg.output.directory.
AuditOutcome run_all(const ExperimentConfig& cfg);

} // namespace fde
