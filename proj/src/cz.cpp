#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "fine_loop.hpp"
#include "sizzle/calibrate.hpp"
#include "sizzle/errors.hpp"

namespace sizzle {

namespace {

enum Param { kControlAmp, kTargetFc, kControlFc };

std::vector<double> pack(const CzCalibration& c)
{
    return {c.control_amplitude, c.target_frame_change, c.control_frame_change};
}

CzCalibration unpack(const CzCalibration& base, const std::vector<double>& p)
{
    CzCalibration c = base;
    c.control_amplitude = p[kControlAmp];
    c.target_frame_change = p[kTargetFc];
    c.control_frame_change = p[kControlFc];
    return c;
}

// A, B: target z rotation of K = CZ^dag M with the control in |0>, |1>. C: control z rotation with
// the target in |0>. All desired at 0.
std::vector<double> cz_angles(const Eigen::Matrix4cd& block, const CzCalibration& c, int reps)
{
    const Eigen::Matrix4cd k = cz_gate().adjoint() * block;
    return {sequence_angle(k, c.target, 'z', 0, reps), sequence_angle(k, c.target, 'z', 1, reps),
            sequence_angle(k, c.control, 'z', 0, reps)};
}

// arg(u00 u11 / (u01 u10)) over the diagonal of the block.
double conditional_phase(const Eigen::Matrix4cd& b)
{
    return std::arg(b(0, 0) * b(3, 3) * std::conj(b(1, 1)) * std::conj(b(2, 2)));
}

}  // namespace

PulseSchedule cz_schedule(const CzCalibration& cal)
{
    Envelope e;
    e.kind = EnvelopeKind::FlatTopGaussian;
    e.duration = cal.duration;
    e.sigma = cal.sigma;
    e.rise_fall_sigmas = cal.rise_fall_sigmas;
    Envelope ec = e, et = e;
    ec.amplitude = cal.control_amplitude;
    et.amplitude = cal.target_amplitude;

    PulseSchedule s;
    s.play(ec, cal.gate_frequency, wrap_phase(cal.relative_phase), cal.control)
        .play(et, cal.gate_frequency, 0.0, cal.target)
        .barrier()
        .frame_change(cal.target_frame_change, cal.target)
        .frame_change(cal.control_frame_change, cal.control);
    s.total_duration = cal.duration;
    return s;
}

CzCalibration refine_cz(CzCalibration start, const CzEvaluator& evaluate, const CalibrationOptions& options,
                        Transcript* transcript)
{
    if (transcript && transcript->columns.empty())
        transcript->columns = {"iteration",   "control_amplitude_GHz", "target_frame_change_rad",
                               "control_frame_change_rad", "angle_A_rad", "angle_B_rad", "angle_C_rad",
                               "max_abs_angle_rad"};
    detail::FineLoop loop;
    loop.newton_steps = {1e-4, 1e-3, 1e-3};
    loop.angles = [&](const std::vector<double>& p) {
        const CzCalibration c = unpack(start, p);
        return cz_angles(evaluate(c), c, options.repetitions);
    };
    const auto result = detail::run_fine_loop(pack(start), loop, options, transcript);
    CzCalibration out = unpack(start, result.params);
    out.converged = true;
    out.iterations = result.iterations;
    out.angles = result.angles;
    return out;
}

CzCalibration calibrate_cz(const SystemSpec& system, CzCalibration start, const CalibrationOptions& options,
                           Transcript* transcript)
{
    SystemSpec s = system;
    validate(s);
    if (s.transmons.size() != 2) throw ValidationError("CZ calibration needs exactly two transmons");
    if (options.control == options.target || options.control < 0 || options.control > 1 || options.target < 0 ||
        options.target > 1)
        throw ValidationError("control and target must be distinct transmons 0 and 1");
    if (!(start.duration > 2.0 * start.rise_fall_sigmas * start.sigma))
        throw ValidationError("gate duration shorter than its rise and fall");
    if (start.control_amplitude < 0.0 || start.target_amplitude < 0.0)
        throw ValidationError("gate amplitudes must be non-negative");
    start.control = options.control;
    start.target = options.target;

    PropagationOptions popts;
    popts.dt = options.dt;
    const Propagator prop(s, popts);

    std::map<std::array<double, 3>, Eigen::Matrix4cd> cache;
    CzEvaluator evaluate = [&](const CzCalibration& c) -> Eigen::Matrix4cd {
        const std::array<double, 3> key{c.control_amplitude, c.target_amplitude, c.relative_phase};
        auto it = cache.find(key);
        if (it == cache.end()) {
            CzCalibration bare = c;
            bare.target_frame_change = bare.control_frame_change = 0.0;
            const GateResult g = prop.run(cz_schedule(bare));
            it = cache.emplace(key, Eigen::Matrix4cd(g.computational_block)).first;
        }
        const double a0 = c.target == 0 ? c.target_frame_change : c.control_frame_change;
        const double a1 = c.target == 1 ? c.target_frame_change : c.control_frame_change;
        return apply_frame_changes(it->second, a0, a1);
    };

    // Relative phase for the largest conditional phase: fit a + b cos(phi) + c sin(phi).
    {
        constexpr int n = 8;
        Eigen::MatrixXd x(n, 3);
        Eigen::VectorXd y(n);
        for (int k = 0; k < n; ++k) {
            CzCalibration c = start;
            c.relative_phase = kTwoPi * k / n;
            const double phi = c.relative_phase;
            x.row(k) << 1.0, std::cos(phi), std::sin(phi);
            y(k) = conditional_phase(evaluate(c));
        }
        const Eigen::Vector3d coef = x.colPivHouseholderQr().solve(y);
        const double peak = std::atan2(coef(2), coef(1));
        const double r = std::hypot(coef(1), coef(2));
        start.relative_phase = wrap_phase(std::abs(coef(0) + r) >= std::abs(coef(0) - r) ? peak : peak + kPi);
    }

    // Rough control amplitude: first point on a scan up to twice the start where the
    // unwrapped conditional phase reaches pi. The fine loop cannot do this part: a missing pi
    // conditional phase returns every repeated sequence to its start and reads as zero error.
    {
        constexpr int n = 16;
        const double top = 2.0 * start.control_amplitude;
        double prev_amp = 0.0, prev_phase = 0.0, unwrapped = 0.0, raw_prev = 0.0;
        bool reached = false;
        std::vector<std::vector<double>> scan;
        for (int k = 0; k <= n && (k == 0 || top > 0.0); ++k) {
            CzCalibration c = start;
            c.control_amplitude = top * k / n;
            const double raw = conditional_phase(evaluate(c));
            unwrapped = k == 0 ? raw : unwrapped + std::remainder(raw - raw_prev, kTwoPi);
            raw_prev = raw;
            scan.push_back({static_cast<double>(k), c.control_amplitude, unwrapped});
            if (k > 0 && std::abs(unwrapped) >= kPi) {
                const double w = (kPi - std::abs(prev_phase)) / (std::abs(unwrapped) - std::abs(prev_phase));
                start.control_amplitude = prev_amp + w * (c.control_amplitude - prev_amp);
                reached = true;
                break;
            }
            prev_amp = c.control_amplitude;
            prev_phase = unwrapped;
        }
        if (!reached) {
            if (transcript && transcript->columns.empty()) {
                transcript->columns = {"scan_step", "control_amplitude_GHz", "conditional_phase_rad"};
                transcript->rows = scan;
            }
            throw NonConvergenceError("conditional phase never reaches pi below twice the starting control amplitude "
                                      "(largest " + std::to_string(std::abs(unwrapped)) + " rad)");
        }
    }

    {
        const Eigen::Matrix4cd k = cz_gate().adjoint() * evaluate(start);
        start.target_frame_change = wrap_phase(sequence_angle(k, start.target, 'z', 0, options.repetitions));
        start.control_frame_change = wrap_phase(sequence_angle(k, start.control, 'z', 0, options.repetitions));
    }

    CzCalibration out = refine_cz(start, evaluate, options, transcript);
    const GateResult final_run = prop.run(cz_schedule(out));
    out.fidelity = gate_fidelity(final_run.computational_block, cz_gate());
    out.leakage = final_run.leakage;
    return out;
}

}  // namespace sizzle
