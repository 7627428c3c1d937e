#include "ringspec/io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ringspec {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

bool is_identifier(const std::string& s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.' && c != '-')
            return false;
    return true;
}

[[noreturn]] void fail_parse(const std::string& path, std::size_t line, const std::string& msg) {
    throw parse_error(path + ":" + std::to_string(line) + ": " + msg);
}

double parse_double_tok(const std::string& tok, const std::string& path, std::size_t line) {
    const std::string t = trim(tok);
    if (t.empty()) fail_parse(path, line, "empty numeric field");
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size()) fail_parse(path, line, "malformed number '" + t + "'");
    return v;
}

long double parse_long_double_tok(const std::string& tok, const std::string& path,
                                  std::size_t line) {
    const std::string t = trim(tok);
    if (t.empty()) fail_parse(path, line, "empty numeric field");
    char* end = nullptr;
    const long double v = std::strtold(t.c_str(), &end);
    if (end != t.c_str() + t.size()) fail_parse(path, line, "malformed number '" + t + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

std::string format_khz(double internal) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.21Lg", internal_to_khz(internal));
    return buf;
}

// doubles that may be infinite/NaN are stored as strings in JSON
json json_double(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

double double_from_json(const json& j, const std::string& path) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    throw parse_error(path + ": malformed numeric field " + j.dump());
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw io_error("number formatting failed");
    return std::string(buf, ptr);
}

void write_text_file(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.parent_path() / (".tmp-" + target.filename().string());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error("cannot open for writing: " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw io_error("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw io_error("cannot rename " + tmp.string() + " to " + path + ": " + ec.message());
    }
}

// ---------- spectrum files ----------

void write_spectrum(const Spectrum& s, const std::string& path) {
    validate_spectrum(s);
    for (const auto& [k, v] : s.meta) {
        if (!is_identifier(k)) throw invalid_params("spectrum meta key not writable: '" + k + "'");
        if (v.find('\n') != std::string::npos || v.find('\r') != std::string::npos)
            throw invalid_params("spectrum meta value contains a line break: key '" + k + "'");
    }
    std::string out;
    out += "# ringspec spectrum\n";
    out += "# detuning in kHz; one gamma_c corresponds to 8.75 kHz\n";
    for (const auto& [k, v] : s.meta) out += "# " + k + " = " + v + "\n";
    out += s.has_sigma() ? "detuning_khz,value,sigma\n" : "detuning_khz,value\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out += format_khz(s.detuning[i]);
        out += ',';
        out += format_double(s.value[i]);
        if (s.has_sigma()) {
            out += ',';
            out += format_double(s.sigma[i]);
        }
        out += '\n';
    }
    write_text_file(path, out);
}

Spectrum read_spectrum(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open spectrum file: " + path);

    Spectrum s;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    bool with_sigma = false;

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t[0] == '#') {
            // `# key = value` populates meta; anything else is a plain comment
            const std::string body = trim(t.substr(1));
            const std::size_t eq = body.find('=');
            if (eq != std::string::npos) {
                const std::string key = trim(body.substr(0, eq));
                if (is_identifier(key)) s.meta[key] = trim(body.substr(eq + 1));
            }
            continue;
        }
        if (!header_seen) {
            std::string h = t;
            h.erase(std::remove_if(h.begin(), h.end(),
                                   [](unsigned char c) { return std::isspace(c); }),
                    h.end());
            if (h == "detuning_khz,value")
                with_sigma = false;
            else if (h == "detuning_khz,value,sigma")
                with_sigma = true;
            else
                fail_parse(path, lineno, "expected header 'detuning_khz,value[,sigma]', got '" + t + "'");
            header_seen = true;
            continue;
        }
        const auto fields = split(t, ',');
        const std::size_t expected = with_sigma ? 3 : 2;
        if (fields.size() != expected)
            fail_parse(path, lineno, "expected " + std::to_string(expected) + " fields, got " +
                                         std::to_string(fields.size()) +
                                         " (sigma must be present for all points or none)");
        const long double khz = parse_long_double_tok(fields[0], path, lineno);
        const double d = static_cast<double>(khz / 8.75L);
        if (!std::isfinite(d)) fail_parse(path, lineno, "non-finite detuning");
        if (!s.detuning.empty() && !(d > s.detuning.back()))
            fail_parse(path, lineno, "detunings must be strictly increasing");
        const double v = parse_double_tok(fields[1], path, lineno);
        if (!std::isfinite(v)) fail_parse(path, lineno, "non-finite value");
        s.detuning.push_back(d);
        s.value.push_back(v);
        if (with_sigma) {
            const double sg = parse_double_tok(fields[2], path, lineno);
            if (!(sg > 0.0) || !std::isfinite(sg))
                fail_parse(path, lineno, "sigma must be positive and finite");
            s.sigma.push_back(sg);
        }
    }
    if (!header_seen) throw parse_error(path + ": missing header line");
    if (s.detuning.empty()) throw parse_error(path + ": no data rows");
    return s;
}

// ---------- configuration ----------

RunConfig default_config() { return RunConfig{}; }

namespace {

struct ConfigSetter {
    RunConfig* cfg;
    std::string path;
    std::size_t line = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw config_error(path + ":" + std::to_string(line) + ": " + msg);
    }

    double num(const std::string& value, const std::string& key) const {
        char* end = nullptr;
        const std::string t = trim(value);
        const double v = std::strtod(t.c_str(), &end);
        if (t.empty() || end != t.c_str() + t.size())
            fail("key '" + key + "': malformed number '" + value + "'");
        return v;
    }

    bool boolean(const std::string& value, const std::string& key) const {
        const std::string t = trim(value);
        if (t == "true" || t == "1") return true;
        if (t == "false" || t == "0") return false;
        fail("key '" + key + "': expected true/false, got '" + value + "'");
    }

    std::uint64_t uinteger(const std::string& value, const std::string& key) const {
        const std::string t = trim(value);
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc{} || ptr != t.data() + t.size())
            fail("key '" + key + "': expected unsigned integer, got '" + value + "'");
        return v;
    }

    void apply(const std::string& section, const std::string& key, const std::string& value) {
        RunConfig& c = *cfg;
        if (section.empty()) {
            if (key == "units") {
                const std::string t = trim(value);
                if (t == "khz")
                    c.units = Units::khz;
                else if (t == "gamma_c" || t == "gamma_c_normalized")
                    c.units = Units::gamma_c;
                else
                    fail("key 'units': expected khz or gamma_c, got '" + value + "'");
            } else {
                fail("unknown key '" + key + "' (top level)");
            }
        } else if (section == "cavity") {
            if (key == "linewidth_khz") c.linewidth_khz = num(value, key);
            else if (key == "finesse") c.finesse = num(value, key);
            else if (key == "round_trip_mm") c.round_trip_mm = num(value, key);
            else if (key == "fsr_ghz") c.fsr_ghz = num(value, key);
            else if (key == "waist_um") c.waist_um = num(value, key);
            else fail("unknown key '" + key + "' in [cavity]");
        } else if (section == "atoms") {
            if (key == "g0_gamma_c") c.g0_gamma_c = num(value, key);
            else if (key == "gamma_atom_mhz") c.gamma_atom_mhz = num(value, key);
            else if (key == "detuning_nm") c.detuning_nm = num(value, key);
            else if (key == "lambda_nm") c.lambda_nm = num(value, key);
            else if (key == "n_atoms") c.n_atoms = num(value, key);
            else if (key == "xi_rad") c.xi_rad = num(value, key);
            else if (key == "xi_ax") c.xi_ax = num(value, key);
            else fail("unknown key '" + key + "' in [atoms]");
        } else if (section == "model") {
            if (key == "epsilon") c.epsilon = num(value, key);
            else if (key == "chi") c.chi = num(value, key);
            else if (key == "scale_s") c.scale_s = num(value, key);
            else if (key == "retro_per_million") c.retro_per_million = num(value, key);
            else if (key == "path_asymmetry_percent") c.path_asymmetry_percent = num(value, key);
            else fail("unknown key '" + key + "' in [model]");
        } else if (section == "fit") {
            if (key == "chi_starts") c.chi_starts = static_cast<int>(num(value, key));
            else if (key == "max_iter") c.max_iter = static_cast<int>(num(value, key));
            else if (key == "tol_step") c.tol_step = num(value, key);
            else if (key == "tol_grad") c.tol_grad = num(value, key);
            else if (key == "tol_cost") c.tol_cost = num(value, key);
            else if (key == "lock_r_below_threshold") c.lock_r_below_threshold = boolean(value, key);
            else fail("unknown key '" + key + "' in [fit]");
        } else if (section == "synth") {
            if (key == "noise") {
                const std::string t = trim(value);
                if (t == "none") c.noise = NoiseKind::none;
                else if (t == "gaussian") c.noise = NoiseKind::gaussian;
                else fail("key 'noise': expected none or gaussian, got '" + value + "'");
            } else if (key == "sigma_abs") c.sigma_abs = num(value, key);
            else if (key == "seed") c.seed = uinteger(value, key);
            else if (key == "grid_points") c.grid_points = static_cast<std::size_t>(uinteger(value, key));
            else if (key == "grid_pad") c.grid_pad = num(value, key);
            else if (key == "grid_lo") c.grid_lo = num(value, key);
            else if (key == "grid_hi") c.grid_hi = num(value, key);
            else fail("unknown key '" + key + "' in [synth]");
        } else {
            fail("unknown section [" + section + "]");
        }
    }
};

[[noreturn]] void fail_schema(const std::string& key, const std::string& msg) {
    throw config_error("schema violation: key '" + key + "' " + msg);
}

void validate_config(const RunConfig& c) {
    if (!(c.linewidth_khz > 0.0)) fail_schema("linewidth_khz", "must be > 0");
    if (!(c.finesse > 0.0)) fail_schema("finesse", "must be > 0");
    if (!(c.round_trip_mm > 0.0)) fail_schema("round_trip_mm", "must be > 0");
    if (!(c.fsr_ghz > 0.0)) fail_schema("fsr_ghz", "must be > 0");
    if (!(c.waist_um > 0.0)) fail_schema("waist_um", "must be > 0");
    if (!(c.gamma_atom_mhz > 0.0)) fail_schema("gamma_atom_mhz", "must be > 0");
    if (!(c.lambda_nm > 0.0)) fail_schema("lambda_nm", "must be > 0");
    if (!(c.n_atoms >= 0.0)) fail_schema("n_atoms", "must be >= 0");
    if (!(c.xi_rad >= 0.0 && c.xi_rad <= 1.0)) fail_schema("xi_rad", "must lie in [0, 1]");
    if (!(c.xi_ax >= 0.0 && c.xi_ax <= 1.0)) fail_schema("xi_ax", "must lie in [0, 1]");
    if (!(c.epsilon >= 0.0 && c.epsilon <= 1.0)) fail_schema("epsilon", "must lie in [0, 1]");
    if (!(c.scale_s > 0.0)) fail_schema("scale_s", "must be > 0");
    if (!(c.retro_per_million >= 0.0)) fail_schema("retro_per_million", "must be >= 0");
    if (!(c.path_asymmetry_percent >= 0.0)) fail_schema("path_asymmetry_percent", "must be >= 0");
    if (c.chi_starts < 1) fail_schema("chi_starts", "must be >= 1");
    if (c.max_iter < 1) fail_schema("max_iter", "must be >= 1");
    if (!(c.tol_step > 0.0)) fail_schema("tol_step", "must be > 0");
    if (!(c.tol_grad > 0.0)) fail_schema("tol_grad", "must be > 0");
    if (!(c.tol_cost > 0.0)) fail_schema("tol_cost", "must be > 0");
    if (!(c.sigma_abs >= 0.0)) fail_schema("sigma_abs", "must be >= 0");
    if (c.grid_points < 2) fail_schema("grid_points", "must be >= 2");
    if (!(c.grid_pad > 0.0)) fail_schema("grid_pad", "must be > 0");
    if (c.grid_lo.has_value() != c.grid_hi.has_value())
        fail_schema("grid_lo", "and grid_hi must be given together");
    if (c.grid_lo && !(*c.grid_lo < *c.grid_hi)) fail_schema("grid_lo", "must be below grid_hi");
}

}  // namespace

RunConfig read_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open config file: " + path);

    RunConfig cfg;
    ConfigSetter setter{&cfg, path};
    std::string section;
    std::string line;
    std::size_t lineno = 0;
    std::map<std::string, std::size_t> seen;

    while (std::getline(in, line)) {
        ++lineno;
        setter.line = lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string t = line;
        const std::size_t hash = t.find('#');
        if (hash != std::string::npos) t = t.substr(0, hash);
        t = trim(t);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']') setter.fail("malformed section header '" + t + "'");
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos) setter.fail("expected 'key = value', got '" + t + "'");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) setter.fail("empty key");
        const std::string qualified = section + "/" + key;
        if (auto it = seen.find(qualified); it != seen.end())
            setter.fail("duplicate key '" + key + "' (first set at line " +
                        std::to_string(it->second) + ")");
        seen[qualified] = lineno;
        setter.apply(section, key, value);
    }

    validate_config(cfg);
    if (auto warning = validate_cavity(cfg.cavity()))
        std::fprintf(stderr, "warning: %s: %s\n", path.c_str(), warning->c_str());
    return cfg;
}

void write_config(const RunConfig& c, const std::string& path) {
    validate_config(c);
    std::ostringstream out;
    out << "# ringspec run configuration\n";
    out << "# frequencies are ordinary (non-angular); the internal unit is the\n";
    out << "# cavity field decay rate gamma_c = pi * linewidth, i.e. 8.75 kHz\n";
    out << "# at the default 17.5 kHz empty-cavity linewidth.\n";
    out << "units = " << (c.units == Units::khz ? "khz" : "gamma_c") << "\n\n";

    out << "[cavity]\n";
    out << "linewidth_khz = " << format_double(c.linewidth_khz) << "\n";
    out << "finesse = " << format_double(c.finesse) << "\n";
    out << "round_trip_mm = " << format_double(c.round_trip_mm) << "\n";
    out << "fsr_ghz = " << format_double(c.fsr_ghz) << "\n";
    out << "waist_um = " << format_double(c.waist_um) << "\n\n";

    out << "[atoms]\n";
    out << "g0_gamma_c = " << format_double(c.g0_gamma_c) << "\n";
    out << "gamma_atom_mhz = " << format_double(c.gamma_atom_mhz) << "\n";
    out << "detuning_nm = " << format_double(c.detuning_nm) << "   # negative = red side\n";
    out << "lambda_nm = " << format_double(c.lambda_nm) << "\n";
    out << "n_atoms = " << format_double(c.n_atoms) << "\n";
    out << "xi_rad = " << format_double(c.xi_rad) << "\n";
    out << "xi_ax = " << format_double(c.xi_ax) << "\n\n";

    out << "[model]\n";
    out << "epsilon = " << format_double(c.epsilon) << "\n";
    out << "chi = " << format_double(c.chi) << "\n";
    out << "scale_s = " << format_double(c.scale_s) << "\n";
    out << "retro_per_million = " << format_double(c.retro_per_million) << "\n";
    out << "path_asymmetry_percent = " << format_double(c.path_asymmetry_percent) << "\n\n";

    out << "[fit]\n";
    out << "chi_starts = " << c.chi_starts << "\n";
    out << "max_iter = " << c.max_iter << "\n";
    out << "tol_step = " << format_double(c.tol_step) << "\n";
    out << "tol_grad = " << format_double(c.tol_grad) << "\n";
    out << "tol_cost = " << format_double(c.tol_cost) << "\n";
    out << "lock_r_below_threshold = " << (c.lock_r_below_threshold ? "true" : "false") << "\n\n";

    out << "[synth]\n";
    out << "noise = " << (c.noise == NoiseKind::gaussian ? "gaussian" : "none") << "\n";
    out << "sigma_abs = " << format_double(c.sigma_abs) << "\n";
    out << "seed = " << c.seed << "\n";
    out << "grid_points = " << c.grid_points << "\n";
    out << "grid_pad = " << format_double(c.grid_pad) << "\n";
    if (c.grid_lo) out << "grid_lo = " << format_double(*c.grid_lo) << "\n";
    if (c.grid_hi) out << "grid_hi = " << format_double(*c.grid_hi) << "\n";

    write_text_file(path, out.str());
}

// ---------- results ----------

void write_results(const std::vector<TraceFit>& table, const std::string& path) {
    json traces = json::array();
    for (const auto& t : table) {
        json rec;
        rec["n_atoms"] = json_double(t.n_atoms);
        if (!t.source.empty()) rec["source"] = t.source;
        if (!t.error.empty()) rec["error"] = t.error;
        if (t.result) {
            const FitResult& r = *t.result;
            rec["g_ef"] = json_double(r.params.g_ef);
            rec["chi"] = json_double(r.params.chi);
            rec["r"] = json_double(r.params.retro_r);
            rec["s"] = json_double(r.params.scale_s);
            rec["epsilon"] = json_double(r.params.epsilon);
            rec["gamma_c"] = json_double(r.params.gamma_c);
            rec["delta_offset"] = json_double(r.delta_offset);
            rec["sigma_g_ef"] = json_double(r.param_sigmas[0]);
            rec["sigma_chi"] = json_double(r.param_sigmas[1]);
            rec["sigma_r"] = json_double(r.param_sigmas[2]);
            rec["sigma_s"] = json_double(r.param_sigmas[3]);
            rec["sigma_delta_offset"] = json_double(r.param_sigmas[4]);
            rec["cost"] = json_double(r.cost);
            rec["n_iter"] = r.n_iter;
            rec["converged"] = r.converged;
            rec["termination"] = to_string(r.termination);
            rec["chi_start_used"] = json_double(r.chi_start_used);
            rec["chi_weak"] = r.chi_weak;
            rec["r_fixed"] = r.r_fixed;
        }
        traces.push_back(std::move(rec));
    }
    json doc;
    doc["format"] = "ringspec-results";
    doc["version"] = 1;
    doc["units"] = "gamma_c";
    doc["traces"] = std::move(traces);
    write_text_file(path, doc.dump(2) + "\n");
}

void write_results_csv(const std::vector<TraceFit>& table, const std::string& path) {
    std::string out =
        "n_atoms,g_ef,sigma_g_ef,chi,sigma_chi,r,sigma_r,s,sigma_s,delta_offset,"
        "sigma_delta_offset,cost,n_iter,converged,termination,chi_weak,r_fixed,source,error\n";
    for (const auto& t : table) {
        out += format_double(t.n_atoms);
        if (t.result) {
            const FitResult& r = *t.result;
            const auto& sg = r.param_sigmas;
            out += ',' + format_double(r.params.g_ef) + ',' + format_double(sg[0]);
            out += ',' + format_double(r.params.chi) + ',' + format_double(sg[1]);
            out += ',' + format_double(r.params.retro_r) + ',' + format_double(sg[2]);
            out += ',' + format_double(r.params.scale_s) + ',' + format_double(sg[3]);
            out += ',' + format_double(r.delta_offset) + ',' + format_double(sg[4]);
            out += ',' + format_double(r.cost);
            out += ',' + std::to_string(r.n_iter);
            out += r.converged ? ",true" : ",false";
            out += ',';
            out += to_string(r.termination);
            out += r.chi_weak ? ",true" : ",false";
            out += r.r_fixed ? ",true" : ",false";
        } else {
            out += ",,,,,,,,,,,,,,,,";
        }
        out += ',' + t.source + ',' + t.error + '\n';
    }
    write_text_file(path, out);
}

std::vector<TraceFit> read_results(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open results file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw parse_error(path + ": " + e.what());
    }
    try {
        if (doc.at("format") != "ringspec-results")
            throw parse_error(path + ": not a ringspec results document");
        std::vector<TraceFit> table;
        for (const auto& rec : doc.at("traces")) {
            TraceFit t;
            t.n_atoms = double_from_json(rec.at("n_atoms"), path);
            if (rec.contains("source")) t.source = rec.at("source").get<std::string>();
            if (rec.contains("error")) t.error = rec.at("error").get<std::string>();
            if (rec.contains("g_ef")) {
                FitResult r;
                r.params.g_ef = double_from_json(rec.at("g_ef"), path);
                r.params.chi = double_from_json(rec.at("chi"), path);
                r.params.retro_r = double_from_json(rec.at("r"), path);
                r.params.scale_s = double_from_json(rec.at("s"), path);
                r.params.epsilon = double_from_json(rec.at("epsilon"), path);
                r.params.gamma_c = double_from_json(rec.at("gamma_c"), path);
                r.delta_offset = double_from_json(rec.at("delta_offset"), path);
                r.param_sigmas[0] = double_from_json(rec.at("sigma_g_ef"), path);
                r.param_sigmas[1] = double_from_json(rec.at("sigma_chi"), path);
                r.param_sigmas[2] = double_from_json(rec.at("sigma_r"), path);
                r.param_sigmas[3] = double_from_json(rec.at("sigma_s"), path);
                r.param_sigmas[4] = double_from_json(rec.at("sigma_delta_offset"), path);
                r.cost = double_from_json(rec.at("cost"), path);
                r.n_iter = rec.at("n_iter").get<int>();
                r.converged = rec.at("converged").get<bool>();
                const auto term = termination_from_string(rec.at("termination").get<std::string>());
                if (!term) throw parse_error(path + ": unknown termination reason");
                r.termination = *term;
                r.chi_start_used = double_from_json(rec.at("chi_start_used"), path);
                r.chi_weak = rec.at("chi_weak").get<bool>();
                r.r_fixed = rec.at("r_fixed").get<bool>();
                t.result = std::move(r);
            }
            table.push_back(std::move(t));
        }
        return table;
    } catch (const json::exception& e) {
        throw parse_error(path + ": " + e.what());
    }
}

// ---------- derived views of the raw config ----------

double RunConfig::gamma_c_internal() const { return linewidth_khz / kLinewidthKhz; }

CavityParams RunConfig::cavity() const {
    CavityParams cav;
    cav.gamma_c = gamma_c_internal();
    cav.finesse = finesse;
    cav.round_trip_m = round_trip_mm * 1e-3;
    cav.fsr_hz = fsr_ghz * 1e9;
    cav.waist_m = waist_um * 1e-6;
    return cav;
}

AtomCouplingParams RunConfig::atoms() const {
    AtomCouplingParams a;
    a.g0 = g0_gamma_c * gamma_c_internal();
    a.gamma_atom = 2.0 * kPi * gamma_atom_mhz * 1e6 / kUnitRadPerSec;
    a.delta_atom = wavelength_offset_to_angular(detuning_nm, lambda_nm) / kUnitRadPerSec;
    a.n_atoms = n_atoms;
    a.xi_rad = xi_rad;
    a.xi_ax = xi_ax;
    return a;
}

SeriesModelSpec RunConfig::series() const {
    SeriesModelSpec m;
    m.epsilon = epsilon;
    m.gamma_c = gamma_c_internal();
    m.chi = chi;
    m.scale_s = scale_s;
    m.retro_per_million = retro_per_million;
    return m;
}

FitConfig RunConfig::fit() const {
    FitConfig f;
    f.epsilon_fixed = epsilon;
    f.gamma_c_fixed = gamma_c_internal();
    f.chi_starts = chi_starts;
    f.max_iter = max_iter;
    f.tol_step = tol_step;
    f.tol_grad = tol_grad;
    f.tol_cost = tol_cost;
    f.lock_r_zero_below_threshold = lock_r_below_threshold;
    return f;
}

NoiseSpec RunConfig::noise_spec() const {
    NoiseSpec n;
    n.kind = noise;
    n.sigma_abs = sigma_abs;
    n.seed = seed;
    return n;
}

double RunConfig::to_internal(double v) const {
    return units == Units::khz ? khz_to_internal(v) : v * gamma_c_internal();
}

double RunConfig::from_internal(double v) const {
    return units == Units::khz ? static_cast<double>(internal_to_khz(v)) : v / gamma_c_internal();
}

}  // namespace ringspec
