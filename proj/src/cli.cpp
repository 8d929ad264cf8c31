#include "sizzle/cli.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <optional>

#include <CLI11.hpp>

#include "sizzle/calibrate.hpp"
#include "sizzle/config.hpp"
#include "sizzle/csv.hpp"
#include "sizzle/perturbation.hpp"
#include "sizzle/sweep.hpp"

namespace sizzle {

namespace {

struct GlobalOptions {
    std::string config;
    std::vector<std::string> overrides;
    std::string point;
    std::string out;
    int levels = 0;
    double dt = 0.05;
    int threads = 1;
    long seed = 0;
};

struct Context {
    GlobalOptions g;
    std::ostream& out;
    std::ostream& err;
};

DeviceConfig load(const GlobalOptions& g)
{
    if (g.config.empty()) throw ValidationError("--config is required");
    Json doc = read_document(resolve_config_path(g.config));
    if (!g.point.empty()) select_operating_point(doc, g.point);
    for (const auto& o : g.overrides) apply_override(doc, o);
    if (g.levels > 0) {
        if (g.levels < 2) throw ValidationError("--levels must be at least 2");
        for (auto& t : doc["transmons"]) t["levels"] = g.levels;
    }
    return parse_device(doc);
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot write " + path);
    return f;
}

void emit_json(const Context& ctx, const Json& doc)
{
    const std::string text = doc.dump(2) + "\n";
    if (ctx.g.out.empty()) {
        ctx.out << text;
    } else {
        auto f = open_out(ctx.g.out);
        f << text;
        ctx.out << "wrote " << ctx.g.out << "\n";
    }
}

void emit_csv(const Context& ctx, const CsvTable& table)
{
    if (ctx.g.out.empty()) {
        write_csv(ctx.out, table);
    } else {
        auto f = open_out(ctx.g.out);
        write_csv(f, table);
        ctx.out << "wrote " << ctx.g.out << " (" << table.rows.size() << " rows)\n";
    }
}

Json drives_json(const SystemSpec& s)
{
    Json arr = Json::array();
    for (const auto& d : s.drives)
        arr.push_back({{"target", d.target}, {"amplitude", d.amplitude}, {"frequency", d.frequency}, {"phase", d.phase}});
    return arr;
}

Json header_json(const DeviceConfig& cfg, const GlobalOptions& g, const std::string& command)
{
    Json h = {{"tool", "sizzle"},       {"version", kToolVersion},          {"command", command},
              {"device", cfg.name},     {"config_hash", config_hash(cfg.document)}, {"seed", g.seed},
              {"units", {{"frequency", "GHz"}, {"amplitude", "GHz"}, {"time", "ns"}, {"phase", "rad"}}}};
    if (cfg.fit) {
        Json t = Json::array();
        for (const auto& tr : cfg.system.transmons)
            t.push_back({{"frequency", tr.frequency}, {"anharmonicity", tr.anharmonicity}});
        h["bare_fit"] = {{"transmons", t}, {"iterations", cfg.fit->iterations}, {"max_error", cfg.fit->max_error}};
    }
    return h;
}

double relative(double a, double b)
{
    return b == 0.0 ? (a == 0.0 ? 0.0 : std::numeric_limits<double>::infinity()) : (a - b) / std::abs(b);
}

Json nan_safe(double x)
{
    return std::isfinite(x) ? Json(x) : Json(nullptr);
}

// --- zz ---

int cmd_zz(const Context& ctx)
{
    const DeviceConfig cfg = load(ctx.g);
    const int q0 = cfg.pair[0], q1 = cfg.pair[1];
    const PairRates driven = evaluate_pair(cfg.system, q0, q1);
    const PairRates idle = evaluate_pair(without_drives(cfg.system), q0, q1);
    const double pert = perturbative_pair_zz(cfg.system, q0, q1);
    const double pert_static = perturbative_pair_zz(without_drives(cfg.system), q0, q1);

    Json r = header_json(cfg, ctx.g, "zz");
    r["pair"] = {q0, q1};
    r["zz_numeric"] = driven.zz;
    r["zz_perturbative"] = nan_safe(pert);
    r["zz_static_numeric"] = idle.zz;
    r["zz_static_perturbative"] = nan_safe(pert_static);
    r["zi"] = driven.zi;
    r["iz"] = driven.iz;
    r["stark_shift_q0"] = driven.stark_shift_q0;
    r["stark_shift_q1"] = driven.stark_shift_q1;
    r["discrepancy_relative"] = nan_safe(relative(pert, driven.zz));
    r["static_discrepancy_relative"] = nan_safe(relative(pert_static, idle.zz));
    r["label_warning"] = driven.label_warning || idle.label_warning;
    r["drives"] = drives_json(cfg.system);
    emit_json(ctx, r);
    return 0;
}

// --- sweep ---

int cmd_sweep(const Context& ctx, const std::string& sweep_path, const std::vector<std::string>& axis_specs)
{
    const DeviceConfig cfg = load(ctx.g);
    Json spec;
    if (!sweep_path.empty()) {
        spec = read_document(sweep_path);
    } else if (cfg.sweep) {
        spec = *cfg.sweep;
    } else {
        spec = {{"axes", Json::array()}};
    }
    if (!axis_specs.empty()) {
        spec["axes"] = Json::array();
        for (const auto& a : axis_specs) {
            const SweepAxis axis = parse_axis(a);
            spec["axes"].push_back(
                {{"parameter", axis.parameter}, {"start", axis.start}, {"stop", axis.stop}, {"count", axis.count}});
        }
    }
    Json device_doc = cfg.document;
    device_doc.erase("sweep");
    const SweepConfig sweep = parse_sweep(spec, device_doc);
    const auto rows = run_sweep(device_doc, sweep, ctx.g.threads);
    CsvTable table = sweep_table(sweep, rows);
    table.comments = provenance_comments("sweep", config_hash(cfg.document), ctx.g.seed);
    table.comments.push_back("pair: " + std::to_string(cfg.pair[0]) + "," + std::to_string(cfg.pair[1]));
    table.comments.push_back("sweep: " + spec.dump());
    emit_csv(ctx, table);
    return 0;
}

// --- zx ---

int cmd_zx(const Context& ctx, std::optional<double> start, std::optional<double> stop, std::optional<int> count)
{
    const DeviceConfig cfg = load(ctx.g);
    ZxSettings z = cfg.zx;
    if (start) z.start = *start;
    if (stop) z.stop = *stop;
    if (count) z.count = *count;
    if (z.count < 1) throw ValidationError("zx: count must be at least 1");
    if (cfg.system.transmons.size() != 2) throw ValidationError("zx needs a two-transmon config");

    const SystemSpec on = cfg.system;
    const SystemSpec off = without_drives(cfg.system);
    TomographyOptions topts;
    topts.dt = ctx.g.dt;

    PerturbativeInputs<double> in;
    in.nu0 = on.transmons[0].frequency;
    in.nu1 = on.transmons[1].frequency;
    in.alpha0 = on.transmons[0].anharmonicity;
    in.alpha1 = on.transmons[1].anharmonicity;
    bool direct = false;
    for (const auto& c : on.couplings)
        if (c.kind == CouplingKind::Direct) {
            in.j = c.strength;
            direct = true;
        }
    for (const auto& d : on.drives) {
        (d.target == 0 ? in.omega0 : in.omega1) = d.amplitude;
        in.nu_d = d.frequency;
    }

    CsvTable t;
    t.comments = provenance_comments("zx", config_hash(cfg.document), ctx.g.seed);
    t.comments.push_back("control " + std::to_string(z.control) + ", target " + std::to_string(z.target) +
                         "; all rates are coefficients of P/2 (Hamiltonian sum nu_P P / 2)");
    t.columns = {"cr_amplitude",          "zx_tomography_tones_off", "zx_tomography_tones_on",
                 "zx_perturbative_tones_off", "zx_perturbative_tones_on", "ix_tomography_tones_off",
                 "ix_tomography_tones_on", "fit_residual_tones_off",  "fit_residual_tones_on",
                 "error"};
    t.units = {"GHz", "GHz", "GHz", "GHz", "GHz", "GHz", "GHz", "1", "1", "text"};
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int i = 0; i < z.count; ++i) {
        const double amp = z.count == 1 ? z.start : z.start + (z.stop - z.start) * i / (z.count - 1);
        std::vector<CsvCell> row{amp};
        std::string error;
        double v[8] = {nan, nan, nan, nan, nan, nan, nan, nan};
        try {
            const PauliRates r_off = extract_pauli_rates(off, amp, z.cr_frequency, z.control, z.target, topts);
            v[0] = r_off["ZX"] / 2.0;
            v[4] = r_off["IX"] / 2.0;
            v[6] = r_off.fit_residual;
            if (!on.drives.empty()) {
                const PauliRates r_on = extract_pauli_rates(on, amp, z.cr_frequency, z.control, z.target, topts);
                v[1] = r_on["ZX"] / 2.0;
                v[5] = r_on["IX"] / 2.0;
                v[7] = r_on.fit_residual;
            }
            if (direct) {
                PerturbativeInputs<double> p = in;
                p.omega_cr = amp;
                PerturbativeInputs<double> p_off = p;
                p_off.omega0 = p_off.omega1 = 0.0;
                v[2] = zx_with_cancellation(p_off, z.control).value;
                if (!on.drives.empty()) v[3] = zx_with_cancellation(p, z.control).value;
            }
        } catch (const Error& e) {
            error = e.what();
        }
        for (double x : {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]}) row.emplace_back(x);
        row.emplace_back(error);
        t.rows.push_back(std::move(row));
    }
    emit_csv(ctx, t);
    return 0;
}

// --- calibrate ---

void write_transcript(const Context& ctx, const DeviceConfig& cfg, const std::string& path, const std::string& what,
                      const Transcript& tr)
{
    if (path.empty()) return;
    CsvTable t;
    t.comments = provenance_comments("calibrate " + what, config_hash(cfg.document), ctx.g.seed);
    t.columns = tr.columns;
    for (const auto& c : tr.columns) {
        const auto us = c.rfind('_');
        t.units.push_back(us == std::string::npos ? "1" : c.substr(us + 1));
    }
    for (const auto& r : tr.rows) {
        std::vector<CsvCell> cells;
        for (double x : r) cells.emplace_back(x);
        t.rows.push_back(std::move(cells));
    }
    auto f = open_out(path);
    write_csv(f, t);
}

CalibrationOptions calibration_options(const DeviceConfig& cfg, const GlobalOptions& g, int control, int target)
{
    CalibrationOptions o = cfg.calibration;
    o.dt = g.dt;
    o.control = control;
    o.target = target;
    return o;
}

Json cancel_result(const DeviceConfig& cfg, const Context& ctx, Transcript& tr)
{
    const int q0 = cfg.pair[0], q1 = cfg.pair[1];
    Json r = header_json(cfg, ctx.g, "calibrate cancel");
    r["pair"] = {q0, q1};
    SystemSpec solved = cfg.system;
    if (cfg.cancel.mode == "phase") {
        const double phi = find_cancellation_phase(cfg.system, q0, q1, cfg.cancellation, &tr);
        double base = 0.0;
        for (const auto& d : solved.drives)
            if (d.target == q1) base = d.phase;
        for (auto& d : solved.drives)
            if (d.target == q0) d.phase = wrap_phase(base + phi);
        r["phase_difference"] = phi;
    } else {
        const double s = find_cancellation_amplitude(cfg.system, q0, q1, cfg.cancellation, &tr);
        double base = 0.0;
        for (const auto& d : solved.drives)
            if (d.target == q1) base = d.phase;
        for (auto& d : solved.drives) {
            if (d.target == q0 || d.target == q1) d.amplitude *= s;
            if (d.target == q0) d.phase = wrap_phase(base + kPi);
        }
        r["amplitude_scale"] = s;
    }
    const PairRates rates = evaluate_pair(solved, q0, q1);
    r["drives"] = drives_json(solved);
    r["residual_zz"] = rates.zz;
    r["stark_shift_q0"] = rates.stark_shift_q0;
    r["stark_shift_q1"] = rates.stark_shift_q1;

    bool has_bus = false;
    for (const auto& c : cfg.system.couplings) has_bus = has_bus || c.kind == CouplingKind::Bus;
    if (cfg.cancel.single_path_comparison && has_bus) {
        const DriveTone* p0 = nullptr;
        const DriveTone* p1 = nullptr;
        for (const auto& d : cfg.system.drives) {
            if (d.target == q0) p0 = &d;
            if (d.target == q1) p1 = &d;
        }
        if (!p0 || !p1) throw ValidationError("single-path comparison needs drives on both pair transmons");
        const EffectiveJ ej = effective_j(without_drives(cfg.system), *p0, *p1, q0, q1);
        SystemSpec spc = cfg.system;
        spc.couplings = {CouplingSpec::direct(q0, q1, std::abs(ej.j))};
        const double s = find_cancellation_amplitude(spc, q0, q1, cfg.cancellation);
        r["single_path"] = {{"effective_j", ej.j},
                            {"effective_j_relative_residual", ej.relative_residual},
                            {"amplitude_scale", s},
                            {"amplitude_q0", p0->amplitude * s},
                            {"amplitude_q1", p1->amplitude * s}};
    }
    return r;
}

Json chain_result(const DeviceConfig& cfg, const Context& ctx, Transcript& tr)
{
    const CancellationSolution sol = chain_cancellation(without_drives(cfg.system), cfg.chain.drive_frequency,
                                                        cfg.chain.seed_stark_shift, cfg.cancellation, &tr);
    Json r = header_json(cfg, ctx.g, "calibrate chain");
    r["drives"] = drives_json(sol.system);
    r["residual_zz"] = sol.residual_zz;
    r["stark_shifts"] = sol.stark_shifts;
    double worst = 0.0, max_res = 0.0;
    for (double s : sol.stark_shifts) worst = std::max(worst, std::abs(s));
    for (double z : sol.residual_zz) max_res = std::max(max_res, std::abs(z));
    r["max_abs_stark_shift"] = worst;
    r["max_abs_residual_zz"] = max_res;
    return r;
}

Json cnot_result(const DeviceConfig& cfg, const Context& ctx, Transcript& tr)
{
    const auto opts = calibration_options(cfg, ctx.g, cfg.cnot.control, cfg.cnot.target);
    const CnotCalibration c = calibrate_cnot(cfg.system, cfg.cnot.duration, opts, &tr);
    Json r = header_json(cfg, ctx.g, "calibrate cnot");
    r["cnot"] = {{"control", c.control},
                 {"target", c.target},
                 {"duration", c.duration},
                 {"sigma", c.sigma},
                 {"rise_fall_sigmas", c.rise_fall_sigmas},
                 {"carrier_frequency", c.carrier_frequency},
                 {"control_amplitude", c.control_amplitude},
                 {"target_amplitude", c.target_amplitude},
                 {"control_phase", c.control_phase},
                 {"target_phase", c.target_phase},
                 {"target_drag_beta", c.target_drag_beta},
                 {"target_skew_gamma", c.target_skew_gamma},
                 {"target_frame_change", c.target_frame_change},
                 {"control_frame_change", c.control_frame_change}};
    r["converged"] = c.converged;
    r["iterations"] = c.iterations;
    r["angles"] = c.angles;
    r["fidelity"] = c.fidelity;
    r["leakage"] = c.leakage;
    return r;
}

Json cz_result(const DeviceConfig& cfg, const Context& ctx, Transcript& tr)
{
    const auto opts = calibration_options(cfg, ctx.g, cfg.cz.control, cfg.cz.target);
    const CzCalibration c = calibrate_cz(cfg.system, cfg.cz.start, opts, &tr);
    Json r = header_json(cfg, ctx.g, "calibrate cz");
    r["cz"] = {{"control", c.control},
               {"target", c.target},
               {"duration", c.duration},
               {"sigma", c.sigma},
               {"rise_fall_sigmas", c.rise_fall_sigmas},
               {"gate_frequency", c.gate_frequency},
               {"control_amplitude", c.control_amplitude},
               {"target_amplitude", c.target_amplitude},
               {"relative_phase", c.relative_phase},
               {"target_frame_change", c.target_frame_change},
               {"control_frame_change", c.control_frame_change}};
    r["converged"] = c.converged;
    r["iterations"] = c.iterations;
    r["angles"] = c.angles;
    r["fidelity"] = c.fidelity;
    r["leakage"] = c.leakage;
    return r;
}

int cmd_calibrate(const Context& ctx, const std::string& gate, std::string transcript_path)
{
    const DeviceConfig cfg = load(ctx.g);
    if (transcript_path.empty() && !ctx.g.out.empty()) transcript_path = ctx.g.out + ".transcript.csv";
    Transcript tr;
    try {
        Json r;
        if (gate == "cancel") {
            r = cancel_result(cfg, ctx, tr);
        } else if (gate == "chain") {
            r = chain_result(cfg, ctx, tr);
        } else if (gate == "cnot") {
            r = cnot_result(cfg, ctx, tr);
        } else if (gate == "cz") {
            r = cz_result(cfg, ctx, tr);
        } else {
            throw ValidationError("unknown calibration '" + gate + "' (expected cnot, cz, cancel or chain)");
        }
        write_transcript(ctx, cfg, transcript_path, gate, tr);
        emit_json(ctx, r);
    } catch (const Error&) {
        write_transcript(ctx, cfg, transcript_path, gate, tr);
        throw;
    }
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Stark-induced ZZ simulator and calibration tool", "sizzle"};
    app.require_subcommand(1);
    GlobalOptions g;
    app.add_option("--config", g.config, "device config file or preset name");
    app.add_option("--set", g.overrides, "override key=value (JSON pointer or dotted path)")->take_all();
    app.add_option("--point", g.point, "named operating point to apply");
    app.add_option("--out", g.out, "output path (stdout when absent)");
    app.add_option("--levels", g.levels, "levels per transmon")->check(CLI::Range(2, 20));
    app.add_option("--dt", g.dt, "propagation step in ns")->check(CLI::PositiveNumber);
    app.add_option("--threads", g.threads, "worker threads for sweeps")->check(CLI::Range(1, 256));
    app.add_option("--seed", g.seed, "recorded in output headers; all solvers are deterministic");

    auto* zz = app.add_subcommand("zz", "ZZ, Stark shifts and closed-form comparison at one operating point");
    auto* sweep = app.add_subcommand("sweep", "grid sweep of ZZ over one or two parameters");
    std::string sweep_path;
    std::vector<std::string> axes;
    sweep->add_option("--sweep", sweep_path, "sweep definition file");
    sweep->add_option("--axis", axes, "path=start:stop:count (repeatable, at most two)");
    auto* zx = app.add_subcommand("zx", "cross-resonance ZX rate vs drive amplitude, with and without tones");
    std::optional<double> zx_start, zx_stop;
    std::optional<int> zx_count;
    zx->add_option("--start", zx_start, "first CR amplitude, GHz");
    zx->add_option("--stop", zx_stop, "last CR amplitude, GHz");
    zx->add_option("--count", zx_count, "number of amplitudes");
    auto* cal = app.add_subcommand("calibrate", "run a calibration routine");
    std::string gate, transcript;
    cal->add_option("routine", gate, "cnot, cz, cancel or chain")->required();
    cal->add_option("--transcript", transcript, "per-iteration CSV (default: <out>.transcript.csv)");
    for (auto* sub : {zz, sweep, zx, cal}) sub->fallthrough();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    Context ctx{g, out, err};
    try {
        if (zz->parsed()) return cmd_zz(ctx);
        if (sweep->parsed()) return cmd_sweep(ctx, sweep_path, axes);
        if (zx->parsed()) return cmd_zx(ctx, zx_start, zx_stop, zx_count);
        if (cal->parsed()) return cmd_calibrate(ctx, gate, transcript);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const nlohmann::json::exception& e) {
        err << "error: config: " << e.what() << "\n";
        return exit_code(ErrorKind::Validation);
    }
    return 2;
}

}  // namespace sizzle
