#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"

#include "fde/config.hpp"
#include "fde/errors.hpp"
#include "fde/experiments.hpp"
#include "fde/omega.hpp"
#include "fde/report.hpp"

namespace {

using fde::format_g17;

void ensure_dir(const std::string& dir) { std::filesystem::create_directories(dir); }

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << text;
}

void write_series(const fde::Trajectory& traj, const std::string& out_dir,
                  const std::string& name) {
    ensure_dir(out_dir + "/series");
    write_text(out_dir + "/series/" + name + ".csv", fde::render_series_csv(traj));
    std::cout << "wrote " << out_dir << "/series/" << name << ".csv ("
              << traj.size() << " samples)\n";
}

void print_records(const std::vector<fde::AuditRecord>& records) {
    for (const fde::AuditRecord& r : records) {
        std::cout << r.status << "  " << r.check_id << "  margin=" << format_g17(r.worst_margin)
                  << "  constant=" << format_g17(r.empirical_constant);
        if (r.refinement_drift >= 0.0)
            std::cout << "  drift=" << format_g17(r.refinement_drift);
        std::cout << "\n";
    }
}

int cmd_eigen(const fde::ExperimentConfig& cfg) {
    const fde::DomainPtr dom = fde::build_domain(cfg.dim, cfg.extents, cfg.cells);
    const fde::NegLaplacian op(dom);
    const fde::EigenPair eig = fde::principal_eigenpair(op);
    const auto hopf = fde::hopf_ratio(eig.phi);
    std::cout << "lambda1 = " << format_g17(eig.lambda) << "\n"
              << "residual = " << format_g17(eig.residual) << "\n"
              << "iterations = " << eig.iterations << "\n"
              << "hopf_envelope = [" << format_g17(hopf.first) << ", "
              << format_g17(hopf.second) << "]\n";
    ensure_dir(cfg.output.directory);
    const std::string path = cfg.output.directory + "/phi1.field";
    fde::write_field(eig.phi, path);
    std::cout << "wrote " << path << "\n";
    return 0;
}

int cmd_steady(const fde::ExperimentConfig& cfg) {
    const fde::Workspace ws = fde::build_workspace(cfg);
    std::cout << "p = " << format_g17(cfg.p) << "\n"
              << "residual_norm = " << format_g17(ws.steady.residual_norm) << "\n"
              << "sup_S = " << format_g17(fde::sup_norm(ws.steady.S)) << "\n"
              << "lambda1 = " << format_g17(ws.steady.lambda1) << "\n"
              << "hopf_envelope = [" << format_g17(ws.steady.hopf_envelope.first) << ", "
              << format_g17(ws.steady.hopf_envelope.second) << "]\n";
    ensure_dir(cfg.output.directory);
    const std::string path = cfg.output.directory + "/steady.field";
    fde::write_field(ws.steady.S, path);
    std::cout << "wrote " << path << "\n";
    return 0;
}

int cmd_omega(const fde::ExperimentConfig& cfg) {
    const fde::OmegaProfile om = fde::shoot_omega(cfg.p);
    double amp = 0.0;
    for (double v : om.omega) amp = std::max(amp, v);
    std::cout << "p = " << format_g17(om.p) << "\n"
              << "gamma = " << format_g17(om.gamma) << "\n"
              << "sigma = " << format_g17(om.sigma) << "\n"
              << "amplitude = " << format_g17(amp) << "\n"
              << "residual = " << format_g17(om.residual) << "\n"
              << "symmetry_defect = " << format_g17(om.symmetry_defect) << "\n";
    ensure_dir(cfg.output.directory);
    std::string csv = "theta,omega\n";
    for (std::size_t i = 0; i < om.theta.size(); ++i)
        csv += format_g17(om.theta[i]) + "," + format_g17(om.omega[i]) + "\n";
    const std::string path = cfg.output.directory + "/omega.csv";
    write_text(path, csv);
    std::cout << "wrote " << path << "\n";
    return 0;
}

int cmd_evolve(const fde::ExperimentConfig& cfg) {
    const fde::Workspace ws = fde::build_workspace(cfg);
    const fde::Trajectory traj = fde::run_cdp(cfg, ws);
    if (traj.has_extinction)
        std::cout << "t_star = " << format_g17(traj.extinction.t_star) << "\n"
                  << "fit_window = [" << format_g17(traj.extinction.window_begin) << ", "
                  << format_g17(traj.extinction.window_end) << "]\n"
                  << "fit_residual = " << format_g17(traj.extinction.fit_residual) << "\n";
    else
        std::cout << "no extinction within the step budget\n";
    std::cout << "final_sup = " << format_g17(traj.diag.sup_norm.back()) << "\n";
    write_series(traj, cfg.output.directory, "cdp");
    return 0;
}

int cmd_rescale(const fde::ExperimentConfig& cfg) {
    const fde::Workspace ws = fde::build_workspace(cfg);
    const fde::SpectrumSet spec =
        fde::linearized_spectrum(*ws.op, ws.steady.S, cfg.p, cfg.rescale.modes);
    std::cout << "eigenvalues =";
    for (double ev : spec.eigenvalues) std::cout << " " << format_g17(ev);
    std::cout << "\n";
    const fde::Trajectory traj =
        fde::run_rescaled_experiment(cfg, ws, spec, cfg.rescale.mode);
    const fde::ModeDecayFit fit =
        fde::fit_mode_decay(traj, ws.steady, spec, cfg.rescale.mode);
    std::cout << "fitted_rate = " << format_g17(fit.fitted_rate) << "\n"
              << "target_rate = " << format_g17(fit.target_rate) << "\n"
              << "relative_error = " << format_g17(fit.relative_error) << "\n"
              << "r_squared = " << format_g17(fit.r_squared) << "\n";
    double dist = 0.0;
    const fde::ScalarField& last = traj.snapshots.back();
    for (std::size_t k = 0; k < last.size(); ++k)
        dist = std::max(dist, std::abs(last.values[k] - ws.steady.S.values[k]));
    std::cout << "final_distance_sup = " << format_g17(dist) << "\n";
    write_series(traj, cfg.output.directory, "rescaled");
    return 0;
}

int cmd_audit(const fde::ExperimentConfig& cfg) {
    const fde::AuditOutcome outcome = fde::run_audits(cfg);
    print_records(outcome.records);
    return outcome.any_fail ? 1 : 0;
}

int cmd_report(const fde::ExperimentConfig& cfg) {
    const fde::AuditOutcome outcome = fde::run_all(cfg);
    print_records(outcome.records);
    std::cout << "wrote " << cfg.output.directory << "/report.json\n"
              << "wrote " << cfg.output.directory << "/summary.csv\n";
    return outcome.any_fail ? 1 : 0;
}

int cmd_all(const fde::ExperimentConfig& cfg) {
    const int eigen_rc = cmd_eigen(cfg);
    const int steady_rc = cmd_steady(cfg);
    if (cfg.p > 3.0) {
        const int omega_rc = cmd_omega(cfg);
        if (omega_rc != 0) return omega_rc;
    }
    if (eigen_rc != 0 || steady_rc != 0) return std::max(eigen_rc, steady_rc);
    return cmd_report(cfg);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fast diffusion laboratory: eigenpairs, steady states, extinction runs, "
                 "rescaled flows, and quantitative audits"};
    app.fallthrough(true);
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    long long seed_override = -1;
    std::size_t refine = 0;
    app.add_option("-c,--config", config_path, "experiment config file")->required();
    app.add_option("--out", out_override, "override the output directory");
    app.add_option("--seed", seed_override, "override the corpus seed");
    app.add_option("--refine", refine, "uniform refinements applied to the config");

    CLI::App* sub_eigen = app.add_subcommand("eigen", "principal Dirichlet eigenpair");
    CLI::App* sub_steady = app.add_subcommand("steady", "Lane-Emden steady state");
    CLI::App* sub_omega = app.add_subcommand("omega", "angular profile (p > 3)");
    CLI::App* sub_evolve = app.add_subcommand("evolve", "run the diffusion flow to extinction");
    CLI::App* sub_rescale = app.add_subcommand("rescale", "run the rescaled flow near the steady state");
    CLI::App* sub_audit = app.add_subcommand("audit", "run the audit battery");
    CLI::App* sub_report = app.add_subcommand("report", "audit battery plus report files");
    CLI::App* sub_all = app.add_subcommand("all", "fields, battery, and report files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << fde::render_error_json("usage", e.what()) << "\n";
        return 2;
    }

    try {
        fde::ExperimentConfig cfg = fde::load_config(config_path);
        if (!out_override.empty()) cfg.output.directory = out_override;
        if (seed_override >= 0) cfg.seed = (std::uint64_t)seed_override;
        if (refine > 0) cfg = fde::refined(cfg, refine);

        if (sub_eigen->parsed()) return cmd_eigen(cfg);
        if (sub_steady->parsed()) return cmd_steady(cfg);
        if (sub_omega->parsed()) return cmd_omega(cfg);
        if (sub_evolve->parsed()) return cmd_evolve(cfg);
        if (sub_rescale->parsed()) return cmd_rescale(cfg);
        if (sub_audit->parsed()) return cmd_audit(cfg);
        if (sub_report->parsed()) return cmd_report(cfg);
        if (sub_all->parsed()) return cmd_all(cfg);
        std::cerr << fde::render_error_json("usage", "no subcommand selected") << "\n";
        return 2;
    } catch (const fde::ConfigError& e) {
        std::cerr << fde::render_error_json("config", e.what()) << "\n";
        return 2;
    } catch (const fde::SolverError& e) {
        std::cerr << fde::render_error_json("solver", e.what()) << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << fde::render_error_json("config", e.what()) << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << fde::render_error_json("runtime", e.what()) << "\n";
        return 3;
    }
}
