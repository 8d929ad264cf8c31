#include "sizzle/config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace sizzle {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what)
{
    throw ValidationError("config " + (path.empty() ? std::string("/") : path) + ": " + what);
}

void check_keys(const Json& obj, const std::string& path, const std::set<std::string>& allowed)
{
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key)) fail(path + "/" + key, "unknown key");
}

const Json* find(const Json& obj, const std::string& key)
{
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double number(const Json& obj, const std::string& key, const std::string& path, std::optional<double> fallback = {})
{
    const Json* v = find(obj, key);
    if (!v) {
        if (fallback) return *fallback;
        fail(path + "/" + key, "missing required number");
    }
    if (!v->is_number()) fail(path + "/" + key, "expected a number");
    const double x = v->get<double>();
    if (!std::isfinite(x)) fail(path + "/" + key, "must be finite");
    return x;
}

int integer(const Json& obj, const std::string& key, const std::string& path, std::optional<int> fallback = {})
{
    const Json* v = find(obj, key);
    if (!v) {
        if (fallback) return *fallback;
        fail(path + "/" + key, "missing required integer");
    }
    if (!v->is_number_integer()) fail(path + "/" + key, "expected an integer");
    return v->get<int>();
}

std::string text(const Json& obj, const std::string& key, const std::string& path, const std::string& fallback)
{
    const Json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_string()) fail(path + "/" + key, "expected a string");
    return v->get<std::string>();
}

std::array<int, 2> index_pair(const Json& v, const std::string& path)
{
    if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer())
        fail(path, "expected two integer indices");
    return {v[0].get<int>(), v[1].get<int>()};
}

TransmonSpec parse_transmon(const Json& t, const std::string& path)
{
    check_keys(t, path, {"frequency", "anharmonicity", "levels"});
    TransmonSpec out;
    out.frequency = number(t, "frequency", path);
    out.anharmonicity = number(t, "anharmonicity", path);
    out.levels = integer(t, "levels", path, 5);
    return out;
}

CouplingSpec parse_coupling(const Json& c, const std::string& path)
{
    const std::string kind = text(c, "kind", path, "direct");
    if (kind == "direct") {
        check_keys(c, path, {"kind", "between", "strength"});
        const Json* between = find(c, "between");
        if (!between) fail(path + "/between", "missing");
        const auto e = index_pair(*between, path + "/between");
        return CouplingSpec::direct(e[0], e[1], number(c, "strength", path));
    }
    if (kind == "bus") {
        check_keys(c, path, {"kind", "between", "frequency", "couplings", "levels"});
        const Json* between = find(c, "between");
        if (!between) fail(path + "/between", "missing");
        const auto e = index_pair(*between, path + "/between");
        const Json* g = find(c, "couplings");
        if (!g || !g->is_array() || g->size() != 2 || !(*g)[0].is_number() || !(*g)[1].is_number())
            fail(path + "/couplings", "expected two numbers");
        return CouplingSpec::bus(e[0], e[1], number(c, "frequency", path), (*g)[0].get<double>(), (*g)[1].get<double>(),
                                 integer(c, "levels", path, 3));
    }
    fail(path + "/kind", "expected \"direct\" or \"bus\"");
}

DriveTone parse_drive(const Json& d, const std::string& path)
{
    check_keys(d, path, {"target", "amplitude", "frequency", "phase"});
    DriveTone out;
    out.target = integer(d, "target", path);
    out.amplitude = number(d, "amplitude", path);
    out.frequency = number(d, "frequency", path);
    out.phase = number(d, "phase", path, 0.0);
    return out;
}

template <typename F>
void with_section(const Json& root, const std::string& key, F&& f)
{
    if (const Json* s = find(root, key)) f(*s, "/" + key);
}

DeviceConfig parse_impl(const Json& doc, bool fit_bare)
{
    check_keys(doc, "", {"name", "description", "frequencies", "transmons", "couplings", "drives", "max_excitations",
                         "dimension_cap", "pair", "operating_points", "cancellation", "calibration", "cnot", "cz",
                         "chain", "cancel", "zx", "sweep"});
    DeviceConfig cfg;
    cfg.document = doc;
    cfg.name = text(doc, "name", "", "device");
    text(doc, "description", "", "");
    const std::string freq = text(doc, "frequencies", "", "bare");
    if (freq != "bare" && freq != "dressed") fail("/frequencies", "expected \"bare\" or \"dressed\"");
    cfg.dressed_input = freq == "dressed";

    SystemSpec s;
    const Json* transmons = find(doc, "transmons");
    if (!transmons || !transmons->is_array() || transmons->empty()) fail("/transmons", "expected a non-empty array");
    for (std::size_t i = 0; i < transmons->size(); ++i)
        s.transmons.push_back(parse_transmon((*transmons)[i], "/transmons/" + std::to_string(i)));
    if (const Json* c = find(doc, "couplings")) {
        if (!c->is_array()) fail("/couplings", "expected an array");
        for (std::size_t i = 0; i < c->size(); ++i)
            s.couplings.push_back(parse_coupling((*c)[i], "/couplings/" + std::to_string(i)));
    }
    if (const Json* d = find(doc, "drives")) {
        if (!d->is_array()) fail("/drives", "expected an array");
        for (std::size_t i = 0; i < d->size(); ++i)
            s.drives.push_back(parse_drive((*d)[i], "/drives/" + std::to_string(i)));
    }
    s.max_excitations = integer(doc, "max_excitations", "", -1);
    const int cap = integer(doc, "dimension_cap", "", 16384);
    if (cap <= 0) fail("/dimension_cap", "must be positive");
    s.dimension_cap = static_cast<std::size_t>(cap);
    validate(s);

    if (const Json* p = find(doc, "pair")) cfg.pair = index_pair(*p, "/pair");
    for (int q : cfg.pair)
        if (q < 0 || q >= static_cast<int>(s.transmons.size())) fail("/pair", "index out of range");
    if (cfg.pair[0] == cfg.pair[1]) fail("/pair", "indices must differ");

    if (const Json* ops = find(doc, "operating_points")) {
        if (!ops->is_object()) fail("/operating_points", "expected an object");
        for (const auto& [name, patch] : ops->items()) {
            if (!patch.is_object()) fail("/operating_points/" + name, "expected an object");
            if (patch.contains("operating_points")) fail("/operating_points/" + name, "points cannot nest");
        }
    }

    with_section(doc, "cancellation", [&](const Json& j, const std::string& path) {
        check_keys(j, path, {"null_tolerance", "amplitude_cap", "scan_points"});
        cfg.cancellation.null_tolerance = number(j, "null_tolerance", path, cfg.cancellation.null_tolerance);
        cfg.cancellation.amplitude_cap = number(j, "amplitude_cap", path, cfg.cancellation.amplitude_cap);
        cfg.cancellation.scan_points = integer(j, "scan_points", path, cfg.cancellation.scan_points);
        if (!(cfg.cancellation.null_tolerance > 0.0)) fail(path + "/null_tolerance", "must be positive");
        if (!(cfg.cancellation.amplitude_cap > 0.0)) fail(path + "/amplitude_cap", "must be positive");
        if (cfg.cancellation.scan_points < 2) fail(path + "/scan_points", "must be at least 2");
    });
    with_section(doc, "calibration", [&](const Json& j, const std::string& path) {
        check_keys(j, path, {"tolerance", "max_iterations", "repetitions", "stall_iterations"});
        auto& c = cfg.calibration;
        c.tolerance = number(j, "tolerance", path, c.tolerance);
        c.max_iterations = integer(j, "max_iterations", path, c.max_iterations);
        c.repetitions = integer(j, "repetitions", path, c.repetitions);
        c.stall_iterations = integer(j, "stall_iterations", path, c.stall_iterations);
        if (!(c.tolerance > 0.0)) fail(path + "/tolerance", "must be positive");
        if (c.max_iterations < 0) fail(path + "/max_iterations", "must be non-negative");
        if (c.repetitions < 2) fail(path + "/repetitions", "must be at least 2");
    });
    with_section(doc, "cnot", [&](const Json& j, const std::string& path) {
        check_keys(j, path, {"control", "target", "duration"});
        cfg.cnot.control = integer(j, "control", path, cfg.cnot.control);
        cfg.cnot.target = integer(j, "target", path, cfg.cnot.target);
        cfg.cnot.duration = number(j, "duration", path, cfg.cnot.duration);
        if (!(cfg.cnot.duration > 0.0)) fail(path + "/duration", "must be positive");
    });
    with_section(doc, "cz", [&](const Json& j, const std::string& path) {
        check_keys(j, path, {"control", "target", "duration", "gate_frequency", "control_amplitude", "target_amplitude",
                             "sigma", "rise_fall_sigmas"});
        auto& z = cfg.cz;
        z.control = integer(j, "control", path, z.control);
        z.target = integer(j, "target", path, z.target);
        z.start.duration = number(j, "duration", path, z.start.duration);
        z.start.gate_frequency = number(j, "gate_frequency", path, z.start.gate_frequency);
        z.start.control_amplitude = number(j, "control_amplitude", path, 0.026);
        z.start.target_amplitude = number(j, "target_amplitude", path, 0.026);
        z.start.sigma = number(j, "sigma", path, z.start.sigma);
        z.start.rise_fall_sigmas = number(j, "rise_fall_sigmas", path, z.start.rise_fall_sigmas);
    });
    if (!find(doc, "cz")) cfg.cz.start.control_amplitude = cfg.cz.start.target_amplitude = 0.026;
    with_section(doc, "chain", [&](const Json& j, const std::string& path) {
        check_keys(j, path, {"drive_frequency", "seed_stark_shift"});
        cfg.chain.drive_frequency = number(j, "drive_frequency", path, cfg.chain.drive_frequency);
        cfg.chain.seed_stark_shift = number(j, "seed_stark_shift", path, cfg.chain.seed_stark_shift);
    });
    with_section(doc, "cancel", [&](const Json& j, const std::string& path) {
        check_keys(j, path, {"mode", "single_path_comparison"});
        cfg.cancel.mode = text(j, "mode", path, cfg.cancel.mode);
        if (cfg.cancel.mode != "amplitude" && cfg.cancel.mode != "phase")
            fail(path + "/mode", "expected \"amplitude\" or \"phase\"");
        if (const Json* b = find(j, "single_path_comparison")) {
            if (!b->is_boolean()) fail(path + "/single_path_comparison", "expected a boolean");
            cfg.cancel.single_path_comparison = b->get<bool>();
        }
    });
    with_section(doc, "zx", [&](const Json& j, const std::string& path) {
        check_keys(j, path, {"start", "stop", "count", "control", "target", "cr_frequency"});
        auto& z = cfg.zx;
        z.start = number(j, "start", path, z.start);
        z.stop = number(j, "stop", path, z.stop);
        z.count = integer(j, "count", path, z.count);
        z.control = integer(j, "control", path, z.control);
        z.target = integer(j, "target", path, z.target);
        z.cr_frequency = number(j, "cr_frequency", path, z.cr_frequency);
        if (z.count < 1) fail(path + "/count", "must be at least 1");
    });
    if (const Json* sw = find(doc, "sweep")) cfg.sweep = *sw;

    if (cfg.dressed_input && fit_bare) {
        const BareFit fit = fit_bare_parameters(without_drives(s));
        for (std::size_t i = 0; i < s.transmons.size(); ++i) s.transmons[i] = fit.system.transmons[i];
        cfg.fit = fit;
    }
    cfg.system = s;
    return cfg;
}

}  // namespace

Json parse_document(const std::string& content, const std::string& origin)
{
    try {
        return Json::parse(content);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1, column = 1;
        const std::size_t limit = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, content.size());
        for (std::size_t i = 0; i < limit; ++i) {
            if (content[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        std::string detail = e.what();
        if (const auto pos = detail.find("syntax error"); pos != std::string::npos) detail = detail.substr(pos);
        throw ValidationError(origin + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + detail);
    }
}

Json read_document(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_document(buf.str(), path);
}

std::string resolve_config_path(const std::string& name_or_path)
{
    namespace fs = std::filesystem;
    if (fs::exists(name_or_path)) return name_or_path;
    const fs::path preset = fs::path(SIZZLE_PRESET_DIR) / (name_or_path + ".json");
    if (fs::exists(preset)) return preset.string();
    throw ValidationError("no config file or preset named '" + name_or_path + "'");
}

std::string to_pointer(const std::string& path)
{
    if (path.empty()) throw ValidationError("empty parameter path");
    if (path.front() == '/') return path;
    std::string out = "/";
    for (char c : path) out += c == '.' ? '/' : c;
    return out;
}

void apply_override(Json& document, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError("override '" + assignment + "' is not key=value");
    const std::string key = assignment.substr(0, eq), raw = assignment.substr(eq + 1);
    Json value;
    try {
        value = Json::parse(raw);
    } catch (const nlohmann::json::parse_error&) {
        value = raw;
    }
    try {
        const Json::json_pointer ptr(to_pointer(key));
        if (!ptr.empty() && !document.contains(ptr.parent_pointer()))
            throw ValidationError("override path " + ptr.to_string() + " has no parent in the config");
        document[ptr] = value;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("override '" + key + "': " + e.what());
    }
}

void select_operating_point(Json& document, const std::string& name)
{
    const auto ops = document.find("operating_points");
    if (ops == document.end() || !ops->contains(name))
        throw ValidationError("config has no operating point '" + name + "'");
    const Json patch = (*ops)[name];
    for (const auto& [key, value] : patch.items()) document[key] = value;
}

DeviceConfig parse_device(const Json& document)
{
    DeviceConfig cfg = parse_impl(document, true);
    // Every operating point must also produce a valid device.
    if (const auto ops = document.find("operating_points"); ops != document.end()) {
        for (const auto& [name, patch] : ops->items()) {
            Json merged = document;
            select_operating_point(merged, name);
            try {
                parse_impl(merged, false);
            } catch (const ValidationError& e) {
                throw ValidationError(std::string(e.what()) + " (operating point '" + name + "')");
            }
        }
    }
    return cfg;
}

std::string config_hash(const Json& document)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : document.dump()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace sizzle
