#include "sizzle/sweep.hpp"

#include <cmath>
#include <limits>

#include "sizzle/parallel.hpp"
#include "sizzle/perturbation.hpp"

namespace sizzle {

namespace {

const char* const kDerived[] = {"amplitude_scale", "drive_frequency", "phase_difference"};

bool is_derived(const std::string& p)
{
    for (const char* d : kDerived)
        if (p == d) return true;
    return false;
}

Json* drive_on(Json& doc, int q)
{
    if (!doc.contains("drives")) return nullptr;
    for (auto& d : doc["drives"])
        if (d.value("target", -1) == q) return &d;
    return nullptr;
}

void set_coordinate(Json& doc, const std::string& parameter, double value)
{
    if (parameter == "amplitude_scale") {
        if (doc.contains("drives"))
            for (auto& d : doc["drives"]) d["amplitude"] = d["amplitude"].get<double>() * value;
    } else if (parameter == "drive_frequency") {
        if (doc.contains("drives"))
            for (auto& d : doc["drives"]) d["frequency"] = value;
    } else if (parameter == "phase_difference") {
        std::array<int, 2> pair{0, 1};
        if (doc.contains("pair")) pair = {doc["pair"][0].get<int>(), doc["pair"][1].get<int>()};
        Json* d0 = drive_on(doc, pair[0]);
        Json* d1 = drive_on(doc, pair[1]);
        if (!d0 || !d1) throw ValidationError("phase_difference needs a drive on both pair transmons");
        (*d0)["phase"] = d1->value("phase", 0.0) + value;
    } else {
        doc[Json::json_pointer(to_pointer(parameter))] = value;
    }
}

}  // namespace

std::vector<double> SweepAxis::values() const
{
    std::vector<double> v(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = start + (stop - start) * i / (count - 1);
    return v;
}

SweepAxis parse_axis(const std::string& spec)
{
    const auto eq = spec.find('=');
    const auto c1 = spec.find(':', eq == std::string::npos ? 0 : eq);
    const auto c2 = c1 == std::string::npos ? c1 : spec.find(':', c1 + 1);
    if (eq == std::string::npos || c1 == std::string::npos || c2 == std::string::npos)
        throw ValidationError("axis '" + spec + "' is not path=start:stop:count");
    SweepAxis a;
    a.parameter = spec.substr(0, eq);
    try {
        std::size_t used = 0;
        const std::string s0 = spec.substr(eq + 1, c1 - eq - 1), s1 = spec.substr(c1 + 1, c2 - c1 - 1),
                          s2 = spec.substr(c2 + 1);
        a.start = std::stod(s0, &used);
        if (used != s0.size()) throw std::invalid_argument(s0);
        a.stop = std::stod(s1, &used);
        if (used != s1.size()) throw std::invalid_argument(s1);
        a.count = std::stoi(s2, &used);
        if (used != s2.size()) throw std::invalid_argument(s2);
    } catch (const std::logic_error&) {
        throw ValidationError("axis '" + spec + "' has a malformed number");
    }
    return a;
}

SweepConfig parse_sweep(const Json& sweep, const Json& device_document)
{
    if (!sweep.is_object()) throw ValidationError("config /sweep: expected an object");
    for (const auto& [key, v] : sweep.items())
        if (key != "axes" && key != "overrides") throw ValidationError("config /sweep/" + key + ": unknown key");
    SweepConfig out;
    if (sweep.contains("overrides")) {
        if (!sweep["overrides"].is_object()) throw ValidationError("config /sweep/overrides: expected an object");
        out.overrides = sweep["overrides"];
    }
    const auto axes = sweep.find("axes");
    if (axes == sweep.end() || !axes->is_array()) throw ValidationError("config /sweep/axes: expected an array");
    for (std::size_t i = 0; i < axes->size(); ++i) {
        const Json& a = (*axes)[i];
        const std::string path = "config /sweep/axes/" + std::to_string(i);
        if (!a.is_object()) throw ValidationError(path + ": expected an object");
        for (const auto& [key, v] : a.items())
            if (key != "parameter" && key != "start" && key != "stop" && key != "count")
                throw ValidationError(path + "/" + key + ": unknown key");
        if (!a.contains("parameter") || !a["parameter"].is_string() || !a.contains("start") || !a["start"].is_number() ||
            !a.contains("stop") || !a["stop"].is_number() || !a.contains("count") || !a["count"].is_number_integer())
            throw ValidationError(path + ": needs parameter (string), start, stop (numbers) and count (integer)");
        out.axes.push_back({a["parameter"].get<std::string>(), a["start"].get<double>(), a["stop"].get<double>(),
                            a["count"].get<int>()});
    }

    if (out.axes.empty() || out.axes.size() > 2) throw ValidationError("sweep needs one or two axes");
    Json probe = device_document;
    for (const auto& [key, value] : out.overrides.items()) {
        const Json::json_pointer ptr(to_pointer(key));
        if (!probe.contains(ptr)) throw ValidationError("sweep override path " + key + " does not exist");
        probe[ptr] = value;
    }
    for (const auto& a : out.axes) {
        if (a.count < 2) throw ValidationError("sweep axis " + a.parameter + ": count must be at least 2");
        if (!std::isfinite(a.start) || !std::isfinite(a.stop) || a.start == a.stop)
            throw ValidationError("sweep axis " + a.parameter + ": start and stop must be finite and distinct");
        if (is_derived(a.parameter)) continue;
        try {
            const Json& target = probe.at(Json::json_pointer(to_pointer(a.parameter)));
            if (!target.is_number()) throw ValidationError("sweep axis " + a.parameter + " does not name a number");
        } catch (const nlohmann::json::exception&) {
            throw ValidationError("sweep axis " + a.parameter + " does not exist in the config");
        }
    }
    return out;
}

double perturbative_pair_zz(const SystemSpec& bare, int q0, int q1)
{
    const double nan = std::numeric_limits<double>::quiet_NaN();
    double j = 0.0;
    int direct = 0;
    for (const auto& c : bare.couplings) {
        const bool joins = (c.endpoints[0] == q0 && c.endpoints[1] == q1) || (c.endpoints[0] == q1 && c.endpoints[1] == q0);
        if (c.kind == CouplingKind::Bus && joins) return nan;
        if (c.kind == CouplingKind::Direct && joins) {
            j = c.strength;
            ++direct;
        }
    }
    if (direct != 1) return nan;
    PerturbativeInputs<double> in;
    in.nu0 = bare.transmons[static_cast<std::size_t>(q0)].frequency;
    in.nu1 = bare.transmons[static_cast<std::size_t>(q1)].frequency;
    in.alpha0 = bare.transmons[static_cast<std::size_t>(q0)].anharmonicity;
    in.alpha1 = bare.transmons[static_cast<std::size_t>(q1)].anharmonicity;
    in.j = j;
    const DriveTone* d0 = nullptr;
    const DriveTone* d1 = nullptr;
    for (const auto& d : bare.drives) {
        if (d.target == q0) d0 = &d;
        if (d.target == q1) d1 = &d;
    }
    if (!d0 || !d1 || d0->amplitude == 0.0 || d1->amplitude == 0.0) return static_zz(in);
    if (d0->frequency != d1->frequency) return nan;
    in.omega0 = d0->amplitude;
    in.omega1 = d1->amplitude;
    in.phi = d0->phase - d1->phase;
    in.nu_d = d0->frequency;
    return sizzle_zz(in);
}

std::vector<SweepRow> run_sweep(const Json& device_document, const SweepConfig& sweep, int threads)
{
    std::vector<std::vector<double>> grid;
    const auto v0 = sweep.axes.at(0).values();
    if (sweep.axes.size() == 1) {
        for (double a : v0) grid.push_back({a});
    } else {
        const auto v1 = sweep.axes[1].values();
        for (double a : v0)
            for (double b : v1) grid.push_back({a, b});
    }
    Json base = device_document;
    for (const auto& [key, value] : sweep.overrides.items()) base[Json::json_pointer(to_pointer(key))] = value;

    std::vector<SweepRow> rows(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        SweepRow& row = rows[i];
        row.coordinates = grid[i];
        row.perturbative_zz = std::numeric_limits<double>::quiet_NaN();
        row.rates.zz = row.rates.zi = row.rates.iz = std::numeric_limits<double>::quiet_NaN();
        row.rates.stark_shift_q0 = row.rates.stark_shift_q1 = std::numeric_limits<double>::quiet_NaN();
        try {
            Json doc = base;
            for (std::size_t k = 0; k < sweep.axes.size(); ++k) set_coordinate(doc, sweep.axes[k].parameter, grid[i][k]);
            const DeviceConfig cfg = parse_device(doc);
            row.rates = evaluate_pair(cfg.system, cfg.pair[0], cfg.pair[1]);
            try {
                row.perturbative_zz = perturbative_pair_zz(cfg.system, cfg.pair[0], cfg.pair[1]);
            } catch (const NumericalError&) {
                // Closed form sits on a pole here; the numerical value still stands.
            }
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    });
    return rows;
}

CsvTable sweep_table(const SweepConfig& sweep, const std::vector<SweepRow>& rows)
{
    CsvTable t;
    for (const auto& a : sweep.axes) {
        t.columns.push_back(a.parameter);
        t.units.push_back(a.parameter == "amplitude_scale" ? "1"
                          : (a.parameter.find("phase") != std::string::npos) ? "rad"
                                                                              : "GHz");
    }
    for (const char* c : {"zz_numeric", "zz_perturbative", "zi", "iz", "stark_shift_q0", "stark_shift_q1"}) {
        t.columns.push_back(c);
        t.units.push_back("GHz");
    }
    t.columns.push_back("label_warning");
    t.units.push_back("flag");
    t.columns.push_back("error");
    t.units.push_back("text");
    for (const auto& r : rows) {
        std::vector<CsvCell> cells;
        for (double x : r.coordinates) cells.emplace_back(x);
        for (double x : {r.rates.zz, r.perturbative_zz, r.rates.zi, r.rates.iz, r.rates.stark_shift_q0,
                         r.rates.stark_shift_q1})
            cells.emplace_back(x);
        cells.emplace_back(static_cast<long>(r.rates.label_warning));
        cells.emplace_back(r.error);
        t.rows.push_back(std::move(cells));
    }
    return t;
}

}  // namespace sizzle
