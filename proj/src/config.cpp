#include "fde/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fde/errors.hpp"

namespace fde {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace((unsigned char)s[b])) ++b;
    while (e > b && std::isspace((unsigned char)s[e - 1])) --e;
    return s.substr(b, e - b);
}

std::string strip_comment(const std::string& s) {
    bool in_string = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') in_string = !in_string;
        if (s[i] == '#' && !in_string) return s.substr(0, i);
    }
    return s;
}

bool valid_key(const std::string& s, bool allow_dots) {
    if (s.empty()) return false;
    for (char c : s) {
        if (std::isalnum((unsigned char)c) || c == '_' || (allow_dots && c == '.')) continue;
        return false;
    }
    return !(allow_dots && (s.front() == '.' || s.back() == '.'));
}

double parse_number(const std::string& s, int line, const std::string& key) {
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end != begin + s.size() || s.empty())
        throw ConfigError("expected a number for '" + key + "', got '" + s + "'", line, key);
    return v;
}

std::string parse_string_token(const std::string& s, int line, const std::string& key) {
    if (s.size() < 2 || s.front() != '"' || s.back() != '"')
        throw ConfigError("expected a quoted string for '" + key + "'", line, key);
    const std::string inner = s.substr(1, s.size() - 2);
    if (inner.find('"') != std::string::npos)
        throw ConfigError("embedded quotes are not supported in '" + key + "'", line, key);
    return inner;
}

ConfigValue parse_value(const std::string& text, int line, const std::string& key) {
    ConfigValue v;
    v.line = line;
    if (!text.empty() && text.front() == '"') {
        v.kind = ConfigValue::Kind::string;
        v.str = parse_string_token(text, line, key);
        return v;
    }
    if (text == "true" || text == "false") {
        v.kind = ConfigValue::Kind::boolean;
        v.b = text == "true";
        return v;
    }
    if (!text.empty() && text.front() == '[') {
        if (text.back() != ']')
            throw ConfigError("array must open and close on one line for '" + key + "'", line, key);
        const std::string inner = trim(text.substr(1, text.size() - 2));
        std::vector<std::string> parts;
        std::string cur;
        bool in_string = false;
        for (char c : inner) {
            if (c == '"') in_string = !in_string;
            if (c == ',' && !in_string) {
                parts.push_back(trim(cur));
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (!trim(cur).empty() || !parts.empty()) parts.push_back(trim(cur));
        const bool strings = !parts.empty() && !parts.front().empty() && parts.front().front() == '"';
        v.kind = strings ? ConfigValue::Kind::string_array : ConfigValue::Kind::number_array;
        for (const std::string& part : parts) {
            if (part.empty())
                throw ConfigError("empty array element in '" + key + "'", line, key);
            if (strings)
                v.strs.push_back(parse_string_token(part, line, key));
            else
                v.nums.push_back(parse_number(part, line, key));
        }
        return v;
    }
    v.kind = ConfigValue::Kind::number;
    v.num = parse_number(text, line, key);
    return v;
}

const char* kind_name(ConfigValue::Kind k) {
    switch (k) {
    case ConfigValue::Kind::boolean: return "boolean";
    case ConfigValue::Kind::number: return "number";
    case ConfigValue::Kind::string: return "string";
    case ConfigValue::Kind::number_array: return "number array";
    default: return "string array";
    }
}

std::string num17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

} // namespace

ConfigFile ConfigFile::parse_text(const std::string& text, const std::string& origin) {
    ConfigFile f;
    f.origin_ = origin;
    std::istringstream in(text);
    std::string raw;
    std::string prefix;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(origin + ": malformed table header", lineno, line);
            const std::string name = trim(line.substr(1, line.size() - 2));
            if (!valid_key(name, true))
                throw ConfigError(origin + ": invalid table name '" + name + "'", lineno, name);
            prefix = name;
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ": expected 'key = value'", lineno, line);
        const std::string key = trim(line.substr(0, eq));
        const std::string valtext = trim(line.substr(eq + 1));
        if (!valid_key(key, false))
            throw ConfigError(origin + ": invalid key '" + key + "'", lineno, key);
        if (valtext.empty())
            throw ConfigError(origin + ": missing value for '" + key + "'", lineno, key);
        const std::string full = prefix.empty() ? key : prefix + "." + key;
        if (f.entries_.count(full))
            throw ConfigError(origin + ": duplicate key '" + full + "'", lineno, full);
        f.entries_[full] = parse_value(valtext, lineno, full);
    }
    return f;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'", 0, path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str(), path);
}

bool ConfigFile::has(const std::string& key) const { return entries_.count(key) != 0; }

const ConfigValue* ConfigFile::find(const std::string& key, ConfigValue::Kind kind) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    it->second.consumed = true;
    if (it->second.kind != kind)
        throw ConfigError(origin_ + ": '" + key + "' must be a " + kind_name(kind) + ", got " +
                              kind_name(it->second.kind),
                          it->second.line, key);
    return &it->second;
}

double ConfigFile::number(const std::string& key, double fallback) {
    const ConfigValue* v = find(key, ConfigValue::Kind::number);
    return v ? v->num : fallback;
}

std::size_t ConfigFile::count(const std::string& key, std::size_t fallback) {
    const ConfigValue* v = find(key, ConfigValue::Kind::number);
    if (!v) return fallback;
    if (v->num < 0.0 || v->num != std::floor(v->num) || v->num > 9e15)
        throw ConfigError(origin_ + ": '" + key + "' must be a nonnegative integer", v->line, key);
    return (std::size_t)v->num;
}

bool ConfigFile::boolean(const std::string& key, bool fallback) {
    const ConfigValue* v = find(key, ConfigValue::Kind::boolean);
    return v ? v->b : fallback;
}

std::string ConfigFile::str(const std::string& key, const std::string& fallback) {
    const ConfigValue* v = find(key, ConfigValue::Kind::string);
    return v ? v->str : fallback;
}

std::vector<double> ConfigFile::numbers(const std::string& key,
                                        const std::vector<double>& fallback) {
    const ConfigValue* v = find(key, ConfigValue::Kind::number_array);
    return v ? v->nums : fallback;
}

std::vector<std::string> ConfigFile::strings(const std::string& key,
                                             const std::vector<std::string>& fallback) {
    const ConfigValue* v = find(key, ConfigValue::Kind::string_array);
    return v ? v->strs : fallback;
}

void ConfigFile::reject_unknown() const {
    for (const auto& [key, value] : entries_)
        if (!value.consumed)
            throw ConfigError(origin_ + ": unknown key '" + key + "'", value.line, key);
}

std::vector<double> ExperimentConfig::effective_r_list() const {
    std::vector<double> out = audit.r_list;
    if (out.empty()) out = {p, p + 1.0, 2.0 * p};
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double ExperimentConfig::effective_r() const { return audit.r > 0.0 ? audit.r : p; }

namespace {

ExperimentConfig convert(ConfigFile f, const std::string& origin) {
    ExperimentConfig cfg;
    cfg.name = f.str("name", cfg.name);

    cfg.dim = (int)f.count("domain.dim", 1);
    if (cfg.dim != 1 && cfg.dim != 2)
        throw ConfigError(origin + ": domain.dim must be 1 or 2", 0, "domain.dim");
    cfg.extents = f.numbers("domain.extents", std::vector<double>(cfg.dim, 1.0));
    const std::vector<double> cell_default(cfg.dim, 256.0);
    const std::vector<double> cells = f.numbers("domain.cells", cell_default);
    if ((int)cfg.extents.size() != cfg.dim || (int)cells.size() != cfg.dim)
        throw ConfigError(origin + ": extents/cells must have dim entries", 0, "domain");
    cfg.cells.clear();
    for (double c : cells) {
        if (c < 4.0 || c != std::floor(c))
            throw ConfigError(origin + ": cells entries must be integers >= 4", 0, "domain.cells");
        cfg.cells.push_back((std::size_t)c);
    }
    for (double e : cfg.extents)
        if (!(e > 0.0))
            throw ConfigError(origin + ": extents must be positive", 0, "domain.extents");

    cfg.p = f.number("model.p", cfg.p);
    if (!(cfg.p > 1.0)) throw ConfigError(origin + ": model.p must exceed 1", 0, "model.p");

    cfg.initial.kind = f.str("model.initial_data.kind", cfg.initial.kind);
    if (cfg.initial.kind == "separable") {
        cfg.initial.t_star = f.number("model.initial_data.t_star", cfg.initial.t_star);
        if (!(cfg.initial.t_star > 0.0))
            throw ConfigError(origin + ": t_star must be positive", 0, "model.initial_data.t_star");
    } else if (cfg.initial.kind == "eigen_bump") {
        cfg.initial.amplitude = f.number("model.initial_data.amplitude", cfg.initial.amplitude);
        if (!(cfg.initial.amplitude > 0.0))
            throw ConfigError(origin + ": amplitude must be positive", 0,
                              "model.initial_data.amplitude");
    } else if (cfg.initial.kind == "gaussian_bump") {
        std::vector<double> center_default;
        for (int a = 0; a < cfg.dim; ++a) center_default.push_back(0.5 * cfg.extents[a]);
        cfg.initial.center = f.numbers("model.initial_data.center", center_default);
        cfg.initial.width = f.number("model.initial_data.width", cfg.initial.width);
        cfg.initial.height = f.number("model.initial_data.height", cfg.initial.height);
        if ((int)cfg.initial.center.size() != cfg.dim)
            throw ConfigError(origin + ": center must have dim entries", 0,
                              "model.initial_data.center");
        for (int a = 0; a < cfg.dim; ++a)
            if (!(cfg.initial.center[a] > 0.0 && cfg.initial.center[a] < cfg.extents[a]))
                throw ConfigError(origin + ": center must lie inside the domain", 0,
                                  "model.initial_data.center");
        if (!(cfg.initial.width > 0.0) || !(cfg.initial.height > 0.0))
            throw ConfigError(origin + ": width/height must be positive", 0,
                              "model.initial_data");
    } else if (cfg.initial.kind == "file") {
        cfg.initial.path = f.str("model.initial_data.path", "");
        if (cfg.initial.path.empty())
            throw ConfigError(origin + ": file initial data needs a path", 0,
                              "model.initial_data.path");
    } else {
        throw ConfigError(origin + ": unknown initial data kind '" + cfg.initial.kind + "'", 0,
                          "model.initial_data.kind");
    }

    cfg.time.dt0 = f.number("time.dt0", cfg.time.dt0);
    cfg.time.kappa = f.number("time.kappa", cfg.time.kappa);
    cfg.time.eps_ext = f.number("time.eps_ext", cfg.time.eps_ext);
    cfg.time.newton_tol = f.number("time.newton_tol", cfg.time.newton_tol);
    if (!(cfg.time.dt0 > 0.0) || !(cfg.time.kappa > 0.0) || !(cfg.time.eps_ext > 0.0) ||
        !(cfg.time.newton_tol > 0.0))
        throw ConfigError(origin + ": time parameters must be positive", 0, "time");

    cfg.audit.r_list = f.numbers("audit.r_list", cfg.audit.r_list);
    for (double r : cfg.audit.r_list)
        if (!(r > 0.0)) throw ConfigError(origin + ": r_list must be positive", 0, "audit.r_list");
    cfg.audit.q = f.number("audit.q", cfg.audit.q);
    cfg.audit.q_star = f.number("audit.q_star", cfg.audit.q_star);
    cfg.audit.r = f.number("audit.r", cfg.audit.r);
    cfg.audit.samples = f.count("audit.samples", cfg.audit.samples);
    cfg.audit.representation_points =
        f.count("audit.representation_points", cfg.audit.representation_points);
    cfg.audit.representation_t0 = f.number("audit.representation_t0", cfg.audit.representation_t0);
    cfg.audit.representation_t1 = f.number("audit.representation_t1", cfg.audit.representation_t1);
    if (!(cfg.audit.representation_t0 > 0.0 && cfg.audit.representation_t0 < cfg.audit.representation_t1 &&
          cfg.audit.representation_t1 < 1.0))
        throw ConfigError(origin + ": representation fractions need 0 < t0 < t1 < 1", 0,
                          "audit.representation_t0");
    cfg.audit.harnack_ratio_cap = f.number("audit.harnack_ratio_cap", cfg.audit.harnack_ratio_cap);
    cfg.audit.sobolev_fields = f.count("audit.sobolev_fields", cfg.audit.sobolev_fields);

    cfg.rescale.ds = f.number("rescale.ds", cfg.rescale.ds);
    if (!(cfg.rescale.ds > 0.0 && cfg.rescale.ds < 1.0))
        throw ConfigError(origin + ": rescale.ds must lie in (0, 1)", 0, "rescale.ds");
    cfg.rescale.steps = f.count("rescale.steps", cfg.rescale.steps);
    cfg.rescale.perturbation = f.number("rescale.perturbation", cfg.rescale.perturbation);
    cfg.rescale.mode = f.count("rescale.mode", cfg.rescale.mode);
    cfg.rescale.modes = f.count("rescale.modes", cfg.rescale.modes);
    if (cfg.rescale.modes == 0)
        throw ConfigError(origin + ": rescale.modes must be positive", 0, "rescale.modes");

    cfg.output.directory = f.str("output.directory", cfg.output.directory);
    cfg.output.formats = f.strings("output.formats", cfg.output.formats);
    for (const std::string& fmt : cfg.output.formats)
        if (fmt != "json" && fmt != "csv")
            throw ConfigError(origin + ": output format must be json or csv", 0, "output.formats");

    f.reject_unknown();
    return cfg;
}

} // namespace

ExperimentConfig load_config(const std::string& path) {
    return convert(ConfigFile::parse_file(path), path);
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
    return convert(ConfigFile::parse_text(text, origin), origin);
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "name = \"" << cfg.name << "\"\n\n";
    out << "[domain]\n";
    out << "dim = " << cfg.dim << "\n";
    out << "extents = [";
    for (std::size_t i = 0; i < cfg.extents.size(); ++i)
        out << (i ? ", " : "") << num17(cfg.extents[i]);
    out << "]\ncells = [";
    for (std::size_t i = 0; i < cfg.cells.size(); ++i) out << (i ? ", " : "") << cfg.cells[i];
    out << "]\n\n";

    out << "[model]\np = " << num17(cfg.p) << "\n\n";
    out << "[model.initial_data]\nkind = \"" << cfg.initial.kind << "\"\n";
    if (cfg.initial.kind == "separable") {
        out << "t_star = " << num17(cfg.initial.t_star) << "\n";
    } else if (cfg.initial.kind == "eigen_bump") {
        out << "amplitude = " << num17(cfg.initial.amplitude) << "\n";
    } else if (cfg.initial.kind == "gaussian_bump") {
        out << "center = [";
        for (std::size_t i = 0; i < cfg.initial.center.size(); ++i)
            out << (i ? ", " : "") << num17(cfg.initial.center[i]);
        out << "]\nwidth = " << num17(cfg.initial.width)
            << "\nheight = " << num17(cfg.initial.height) << "\n";
    } else {
        out << "path = \"" << cfg.initial.path << "\"\n";
    }
    out << "\n[time]\n";
    out << "dt0 = " << num17(cfg.time.dt0) << "\n";
    out << "kappa = " << num17(cfg.time.kappa) << "\n";
    out << "eps_ext = " << num17(cfg.time.eps_ext) << "\n";
    out << "newton_tol = " << num17(cfg.time.newton_tol) << "\n";

    out << "\n[audit]\n";
    const std::vector<double> rl = cfg.effective_r_list();
    out << "r_list = [";
    for (std::size_t i = 0; i < rl.size(); ++i) out << (i ? ", " : "") << num17(rl[i]);
    out << "]\n";
    if (cfg.audit.q > 0.0) out << "q = " << num17(cfg.audit.q) << "\n";
    if (cfg.audit.q_star > 0.0) out << "q_star = " << num17(cfg.audit.q_star) << "\n";
    out << "r = " << num17(cfg.effective_r()) << "\n";
    out << "samples = " << cfg.audit.samples << "\n";
    out << "representation_points = " << cfg.audit.representation_points << "\n";
    out << "representation_t0 = " << num17(cfg.audit.representation_t0) << "\n";
    out << "representation_t1 = " << num17(cfg.audit.representation_t1) << "\n";
    out << "harnack_ratio_cap = " << num17(cfg.audit.harnack_ratio_cap) << "\n";
    out << "sobolev_fields = " << cfg.audit.sobolev_fields << "\n";

    out << "\n[rescale]\n";
    out << "ds = " << num17(cfg.rescale.ds) << "\n";
    out << "steps = " << cfg.rescale.steps << "\n";
    out << "perturbation = " << num17(cfg.rescale.perturbation) << "\n";
    out << "mode = " << cfg.rescale.mode << "\n";
    out << "modes = " << cfg.rescale.modes << "\n";

    out << "\n[output]\n";
    out << "directory = \"" << cfg.output.directory << "\"\n";
    out << "formats = [";
    for (std::size_t i = 0; i < cfg.output.formats.size(); ++i)
        out << (i ? ", " : "") << '"' << cfg.output.formats[i] << '"';
    out << "]\n";
    return out.str();
}

} // namespace fde
