#include "llob/io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include "json.hpp"

namespace llob::io {
namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ValidationError("bad numeric value for " + key + ": '" + s + "'");
    return v;
}

int parse_int(const std::string& key, const std::string& s) {
    int v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ValidationError("bad integer value for " + key + ": '" + s + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& s) {
    std::uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ValidationError("bad integer value for " + key + ": '" + s + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& s) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw ValidationError("bad boolean for " + key + ": '" + s +
                          "' (use true/false)");
}

std::string bool_str(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v,
                             std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

KeyValues parse_config_text(const std::string& text) {
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config line " + std::to_string(lineno) +
                                  ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ValidationError("config line " + std::to_string(lineno) +
                                  ": empty key");
        kv[key] = value;
    }
    return kv;
}

KeyValues read_config_file(const std::string& path) {
    return parse_config_text(read_text_file(path));
}

std::string serialize_config(const KeyValues& kv) {
    std::string out;
    for (const auto& [k, v] : kv) {
        out += k;
        out += " = ";
        out += v;
        out += '\n';
    }
    return out;
}

PiecewiseRate parse_rate_spec(const std::string& spec) {
    if (spec.find('@') == std::string::npos)
        return PiecewiseRate(parse_double("rate spec", spec));
    std::vector<double> starts, values;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        std::size_t comma = spec.find(',', pos);
        std::size_t end = (comma == std::string::npos) ? spec.size() : comma;
        std::string piece = spec.substr(pos, end - pos);
        std::size_t at = piece.find('@');
        if (at == std::string::npos)
            throw ValidationError("rate spec piece '" + piece +
                                  "' must be value@start");
        values.push_back(parse_double("rate spec value", piece.substr(0, at)));
        starts.push_back(parse_double("rate spec start", piece.substr(at + 1)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return PiecewiseRate(std::move(starts), std::move(values));
}

std::string serialize_rate_spec(const PiecewiseRate& rate) {
    if (rate.is_constant()) return format_double(rate.values().front());
    std::string out;
    for (std::size_t i = 0; i < rate.values().size(); ++i) {
        if (i) out += ',';
        out += format_double(rate.values()[i]);
        out += '@';
        out += format_double(rate.starts()[i]);
    }
    return out;
}

KeyValues RunConfig::to_kv() const {
    KeyValues kv;
    kv["model.sigma"] = format_double(sigma);
    kv["model.kappa"] = format_double(kappa);
    kv["model.lam"] = format_double(lam);
    kv["model.nu"] = nu;
    kv["model.L"] = format_double(L);
    kv["solver.variant"] = variant;
    kv["solver.weighted_deposition"] = bool_str(weighted_deposition);
    kv["solver.n_steps"] = std::to_string(n_steps);
    kv["solver.picard_tol"] = format_double(picard_tol);
    kv["solver.picard_max_iter"] = std::to_string(picard_max_iter);
    kv["solver.damping"] = format_double(damping);
    kv["grid.M"] = format_double(M);
    kv["grid.P"] = std::to_string(P);
    kv["grid.dT"] = format_double(dT);
    kv["profile.kind"] = profile;
    kv["profile.m0"] = format_double(m0);
    kv["profile.t_switch"] = format_double(t_switch);
    kv["run.T"] = format_double(T);
    kv["run.seed"] = std::to_string(seed);
    kv["run.vol"] = format_double(vol);
    kv["run.snapshot_stride"] = std::to_string(snapshot_stride);
    kv["run.sources"] = bool_str(sources);
    kv["run.mollified"] = bool_str(mollified);
    kv["run.centered"] = bool_str(centered);
    kv["run.boundary_guard"] = format_double(boundary_guard);
    kv["run.out_dir"] = out_dir;
    kv["run.format"] = format;
    if (!scenario_id.empty()) kv["scenario.id"] = scenario_id;
    for (const auto& [k, v] : scenario_overrides) kv["scenario.set." + k] = v;
    return kv;
}

RunConfig RunConfig::from_kv(const KeyValues& kv) {
    RunConfig c;
    for (const auto& [key, value] : kv) {
        if (key == "model.sigma") c.sigma = parse_double(key, value);
        else if (key == "model.kappa") c.kappa = parse_double(key, value);
        else if (key == "model.lam") c.lam = parse_double(key, value);
        else if (key == "model.nu") c.nu = value;
        else if (key == "model.L") c.L = parse_double(key, value);
        else if (key == "solver.variant") c.variant = value;
        else if (key == "solver.weighted_deposition")
            c.weighted_deposition = parse_bool(key, value);
        else if (key == "solver.n_steps") c.n_steps = parse_int(key, value);
        else if (key == "solver.picard_tol") c.picard_tol = parse_double(key, value);
        else if (key == "solver.picard_max_iter")
            c.picard_max_iter = parse_int(key, value);
        else if (key == "solver.damping") c.damping = parse_double(key, value);
        else if (key == "grid.M") c.M = parse_double(key, value);
        else if (key == "grid.P") c.P = parse_int(key, value);
        else if (key == "grid.dT") c.dT = parse_double(key, value);
        else if (key == "profile.kind") c.profile = value;
        else if (key == "profile.m0") c.m0 = parse_double(key, value);
        else if (key == "profile.t_switch") c.t_switch = parse_double(key, value);
        else if (key == "run.T") c.T = parse_double(key, value);
        else if (key == "run.seed") c.seed = parse_u64(key, value);
        else if (key == "run.vol") c.vol = parse_double(key, value);
        else if (key == "run.snapshot_stride")
            c.snapshot_stride = parse_int(key, value);
        else if (key == "run.sources") c.sources = parse_bool(key, value);
        else if (key == "run.mollified") c.mollified = parse_bool(key, value);
        else if (key == "run.centered") c.centered = parse_bool(key, value);
        else if (key == "run.boundary_guard")
            c.boundary_guard = parse_double(key, value);
        else if (key == "run.out_dir") c.out_dir = value;
        else if (key == "run.format") c.format = value;
        else if (key == "scenario.id") c.scenario_id = value;
        else if (key.rfind("scenario.set.", 0) == 0)
            c.scenario_overrides[key.substr(13)] = value;
        else
            throw ValidationError("unknown config key: " + key);
    }
    if (c.format != "csv" && c.format != "json")
        throw ValidationError("run.format must be csv or json");
    if (c.variant != "llob" && c.variant != "depcan" && c.variant != "meanrev")
        throw ValidationError("solver.variant must be llob, depcan or meanrev");
    return c;
}

ModelParams RunConfig::params() const {
    return make_params(sigma, kappa, lam, parse_rate_spec(nu), L);
}

SolverConfig RunConfig::solver() const {
    SolverConfig s;
    s.n_steps = n_steps;
    s.picard_tol = picard_tol;
    s.picard_max_iter = picard_max_iter;
    s.damping = damping;
    return s;
}

pde::GridSpec RunConfig::grid() const {
    pde::GridSpec g{M, P, dT};
    pde::validate(g);
    return g;
}

KernelVariant RunConfig::kernel() const {
    auto p = params();
    if (variant == "llob") return KernelVariant::llob(p);
    if (variant == "depcan")
        return KernelVariant::dep_can(p, weighted_deposition);
    return KernelVariant::mean_rev(p);
}

std::string render_csv(const std::vector<std::string>& header,
                       const std::vector<std::vector<double>>& columns) {
    if (header.size() != columns.size())
        throw ValidationError("csv header and column counts differ");
    std::string out;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c) out += ',';
        out += header[c];
    }
    out += '\n';
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (const auto& col : columns)
        if (col.size() != rows)
            throw ValidationError("csv columns have unequal lengths");
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (c) out += ',';
            out += format_double(columns[c][r]);
        }
        out += '\n';
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open for writing: " + path);
    out.write(content.data(),
              static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string report_to_json(const scenarios::ScenarioReport& report) {
    nlohmann::ordered_json j;
    j["id"] = report.id;
    j["pass"] = report.pass;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (const auto& [k, v] : report.params) params[k] = v;
    j["params"] = std::move(params);
    nlohmann::ordered_json summary = nlohmann::ordered_json::object();
    for (const auto& [k, v] : report.summary) summary[k] = v;
    j["summary"] = std::move(summary);
    j["checks"] = report.notes;
    nlohmann::ordered_json tables = nlohmann::ordered_json::array();
    for (const auto& t : report.tables) {
        nlohmann::ordered_json jt;
        jt["name"] = t.name;
        jt["columns"] = t.columns;
        jt["rows"] = t.rows();
        tables.push_back(std::move(jt));
    }
    j["tables"] = std::move(tables);
    return j.dump(2) + "\n";
}

void write_report(const scenarios::ScenarioReport& report,
                  const std::string& dir) {
    std::filesystem::create_directories(dir);
    std::filesystem::path base(dir);
    write_text_file((base / "report.json").string(), report_to_json(report));
    for (const auto& t : report.tables)
        write_text_file((base / (t.name + ".csv")).string(),
                        render_csv(t.columns, t.data));
}

ExecutionProfile profile_from_csv(const std::string& path, double T,
                                  int n_steps) {
    std::istringstream in(read_text_file(path));
    std::string line;
    std::vector<double> ts, ms;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty()) continue;
        std::size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw ValidationError("profile csv line " + std::to_string(lineno) +
                                  ": expected 't,m'");
        std::string a = trim(line.substr(0, comma));
        std::string b = trim(line.substr(comma + 1));
        if (lineno == 1 && (a == "t" || a == "time")) continue;  // header
        ts.push_back(parse_double("profile t", a));
        ms.push_back(parse_double("profile m", b));
    }
    if (ts.empty()) throw ValidationError("profile csv has no samples");
    if (ts.front() != 0.0)
        throw ValidationError("profile csv must start at t = 0");
    for (std::size_t i = 1; i < ts.size(); ++i)
        if (ts[i] <= ts[i - 1])
            throw ValidationError("profile csv times must increase");

    // Step interpolation: each node takes the latest sample value at or
    // before its time.
    std::vector<double> m(n_steps + 1, 0.0);
    std::size_t j = 0;
    for (int k = 0; k <= n_steps; ++k) {
        const double t = T * k / n_steps;
        while (j + 1 < ts.size() && ts[j + 1] <= t) ++j;
        m[k] = ms[j];
    }
    return ExecutionProfile(T, std::move(m));
}

ExecutionProfile make_profile(const RunConfig& cfg) {
    const std::string& kind = cfg.profile;
    if (kind == "zero")
        return ExecutionProfile::constant(0.0, cfg.T, cfg.n_steps);
    if (kind == "constant")
        return ExecutionProfile::constant(cfg.m0, cfg.T, cfg.n_steps);
    if (kind == "const-large") {
        const auto p = cfg.params();
        return ExecutionProfile::constant(100.0 * p.J, cfg.T, cfg.n_steps);
    }
    if (kind == "roundtrip")
        return ExecutionProfile::round_trip(cfg.m0, cfg.t_switch, cfg.T,
                                            cfg.n_steps);
    if (kind == "ramp")
        return ExecutionProfile::ramp(cfg.m0, cfg.T, cfg.n_steps);
    return profile_from_csv(kind, cfg.T, cfg.n_steps);
}

}  // namespace llob::io
