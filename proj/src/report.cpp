#include "fde/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fde {

namespace {

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 8);
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default:
            if ((unsigned char)c < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                out += buf;
            } else {
                out += c;
            }
        }
    }
    return out;
}

std::string json_number(double v) {
    if (!std::isfinite(v)) return "null";
    return format_g17(v);
}

void sort_records(std::vector<AuditRecord>& records) {
    std::stable_sort(records.begin(), records.end(),
                     [](const AuditRecord& a, const AuditRecord& b) { return a.check_id < b.check_id; });
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

} // namespace

std::string format_g17(double v) {
    if (v == 0.0) v = 0.0; // canonicalize -0
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

std::string render_report_json(std::vector<AuditRecord> records) {
    sort_records(records);
    std::ostringstream out;
    out << "[\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
        const AuditRecord& r = records[i];
        out << "  {\n";
        out << "    \"check_id\": \"" << json_escape(r.check_id) << "\",\n";
        out << "    \"paper_anchor\": \"" << json_escape(r.paper_anchor) << "\",\n";
        out << "    \"status\": \"" << json_escape(r.status) << "\",\n";
        out << "    \"empirical_constant\": " << json_number(r.empirical_constant) << ",\n";
        out << "    \"worst_margin\": " << json_number(r.worst_margin) << ",\n";
        out << "    \"worst_location\": {\"time\": " << json_number(r.worst_time)
            << ", \"node\": " << r.worst_node << "},\n";
        out << "    \"refinement_drift\": "
            << (r.refinement_drift < 0.0 ? std::string("null") : json_number(r.refinement_drift))
            << ",\n";
        out << "    \"note\": \"" << json_escape(r.note) << "\"\n";
        out << "  }" << (i + 1 < records.size() ? "," : "") << "\n";
    }
    out << "]\n";
    return out.str();
}

std::string render_summary_csv(std::vector<AuditRecord> records) {
    sort_records(records);
    std::ostringstream out;
    out << "id,status,constant,margin,drift\n";
    for (const AuditRecord& r : records) {
        out << r.check_id << ',' << r.status << ',' << format_g17(r.empirical_constant) << ','
            << format_g17(r.worst_margin) << ','
            << (r.refinement_drift < 0.0 ? std::string() : format_g17(r.refinement_drift)) << '\n';
    }
    return out.str();
}

std::string render_series_csv(const Trajectory& traj) {
    std::ostringstream out;
    out << "time,sup_norm";
    for (double r : traj.diag.r_list) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%g", r);
        out << ",wnorm_r" << buf;
    }
    out << ",energy_F,rayleigh_Q,phi1_pairing,bc_violation\n";
    for (std::size_t j = 0; j < traj.size(); ++j) {
        out << format_g17(traj.times[j]) << ',' << format_g17(traj.diag.sup_norm[j]);
        for (std::size_t k = 0; k < traj.diag.r_list.size(); ++k)
            out << ',' << format_g17(traj.diag.weighted[k][j]);
        out << ',' << format_g17(traj.diag.energy[j]) << ',' << format_g17(traj.diag.rayleigh[j])
            << ',' << format_g17(traj.diag.phi1_pairing[j]) << ','
            << format_g17(traj.diag.bc_violation[j]) << '\n';
    }
    return out.str();
}

std::string render_error_json(const std::string& kind, const std::string& message) {
    return "{\"error\": \"" + json_escape(kind) + "\", \"message\": \"" + json_escape(message) +
           "\"}";
}

void write_report(const std::vector<AuditRecord>& records,
                  const std::vector<std::pair<std::string, const Trajectory*>>& trajectories,
                  const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(out_dir) / "series");
    write_text((fs::path(out_dir) / "report.json").string(), render_report_json(records));
    write_text((fs::path(out_dir) / "summary.csv").string(), render_summary_csv(records));
    for (const auto& [name, traj] : trajectories)
        write_text((fs::path(out_dir) / "series" / (name + ".csv")).string(),
                   render_series_csv(*traj));
}

void write_field(const ScalarField& f, const std::string& path) {
    std::ostringstream out;
    for (double v : f.values) out << format_g17(v) << '\n';
    write_text(path, out.str());
}

std::vector<double> read_field_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read field file '" + path + "'");
    std::vector<double> out;
    double v;
    while (in >> v) out.push_back(v);
    if (!in.eof()) throw std::runtime_error("malformed field file '" + path + "'");
    return out;
}

} // namespace fde
