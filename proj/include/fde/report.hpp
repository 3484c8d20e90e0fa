#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fde/audit.hpp"
#include "fde/evolution.hpp"

namespace fde {

// %.17g; every writer funnels doubles through this so identical runs yield
// byte-identical files.
std::string format_g17(double v);

// Full records as a JSON array sorted by check_id. Non-finite numbers render
// as null; unmeasured refinement_drift (negative) renders as null.
std::string render_report_json(std::vector<AuditRecord> records);

// Header id,status,constant,margin,drift; one row per record, sorted by
// check_id; drift column empty when unmeasured.
std::string render_summary_csv(std::vector<AuditRecord> records);

// Columns: time, sup_norm, weighted norms in r_list order, energy_F,
// rayleigh_Q, phi1_pairing, bc_violation.
std::string render_series_csv(const Trajectory& traj);

// {"error": kind, "message": ...} for the diagnostic stream.
std::string render_error_json(const std::string& kind, const std::string& message);

// report.json + summary.csv + series/<name>.csv under out_dir (directories
// created as needed). Throws std::runtime_error on unwritable paths.
void write_report(const std::vector<AuditRecord>& records,
                  const std::vector<std::pair<std::string, const Trajectory*>>& trajectories,
                  const std::string& out_dir);

// One %.17g value per line; the reader accepts any whitespace separation.
void write_field(const ScalarField& f, const std::string& path);
std::vector<double> read_field_values(const std::string& path);

} // namespace fde
