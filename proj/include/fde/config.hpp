#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace fde {

// One parsed `key = value` entry of a config file. Keys are stored fully
// qualified ("table.sub.key"); the line number feeds ConfigError diagnostics.
struct ConfigValue {
    enum class Kind { boolean, number, string, number_array, string_array };
    Kind kind = Kind::number;
    bool b = false;
    double num = 0.0;
    std::string str;
    std::vector<double> nums;
    std::vector<std::string> strs;
    int line = 0;
    bool consumed = false;
};

// Strict TOML-subset reader: [table] and [table.sub] headers, scalar values
// (quoted strings, booleans, numbers), single-line homogeneous arrays, '#'
// comments. Duplicate keys, malformed lines, and (after extraction)
// unconsumed keys raise ConfigError with line/field diagnostics.
class ConfigFile {
public:
    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_text(const std::string& text, const std::string& origin);

    bool has(const std::string& key) const;
    double number(const std::string& key, double fallback);
    std::size_t count(const std::string& key, std::size_t fallback);
    bool boolean(const std::string& key, bool fallback);
    std::string str(const std::string& key, const std::string& fallback);
    std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback);
    std::vector<std::string> strings(const std::string& key,
                                     const std::vector<std::string>& fallback);

    // Throws ConfigError naming the first key never requested by a getter.
    void reject_unknown() const;

private:
    const ConfigValue* find(const std::string& key, ConfigValue::Kind kind);

    std::map<std::string, ConfigValue> entries_;
    std::string origin_;
};

// separable | eigen_bump | gaussian_bump | file
struct InitialDataSpec {
    std::string kind = "separable";
    double t_star = 1.0;               // separable: prescribed extinction time
    double amplitude = 1.0;            // eigen_bump: c in c * phi1
    std::vector<double> center{0.5};   // gaussian_bump
    double width = 0.1;
    double height = 1.0;
    std::string path;                  // file: whitespace-separated nodal values
};

struct TimeConfig {
    double dt0 = 1e-3;
    double kappa = 0.05;
    double eps_ext = 1e-8;
    double newton_tol = 1e-12;
};

struct AuditConfig {
    std::vector<double> r_list;        // empty selects {p, p+1, 2p}
    double q = 0.0;                    // 0 selects the dimensional default
    double q_star = 0.0;
    double r = 0.0;                    // smoothing/Harnack exponent; 0 selects p
    std::size_t samples = 64;
    std::size_t representation_points = 5;
    double representation_t0 = 0.2;   // fractions of T*
    double representation_t1 = 0.6;
    double harnack_ratio_cap = 50.0;
    std::size_t sobolev_fields = 200;
};

struct RescaleConfig {
    double ds = 1e-3;
    std::size_t steps = 2000;
    double perturbation = 1e-3;        // relative amplitude on the perturbed mode
    std::size_t mode = 1;              // eigenmode index driving the perturbation
    std::size_t modes = 6;             // spectrum size to compute
};

struct OutputConfig {
    std::string directory = "out";
    std::vector<std::string> formats{"json", "csv"};
};

struct ExperimentConfig {
    std::string name = "experiment";
    int dim = 1;
    std::vector<double> extents{1.0};
    std::vector<std::size_t> cells{256};
    double p = 2.0;
    InitialDataSpec initial;
    TimeConfig time;
    AuditConfig audit;
    RescaleConfig rescale;
    OutputConfig output;

    // CLI overrides, not config keys
    std::uint64_t seed = 42;
    std::size_t refine = 0;

    std::vector<double> effective_r_list() const; // r_list or {p, p+1, 2p}, ascending
    double effective_r() const;                   // audit.r or p
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);

// Round-trip serialization with all defaults materialized; parsing the result
// reproduces the same settings.
std::string serialize_config(const ExperimentConfig& cfg);

} // namespace fde
