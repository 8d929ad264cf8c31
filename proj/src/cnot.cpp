#include <array>
#include <cmath>
#include <map>

#include "fine_loop.hpp"
#include "sizzle/calibrate.hpp"
#include "sizzle/errors.hpp"

namespace sizzle {

namespace {

enum Param { kControlAmp, kTargetAmp, kTargetFc, kDrag, kSkew, kJointPhase, kControlFc, kParamCount };

std::vector<double> pack(const CnotCalibration& c)
{
    return {c.control_amplitude, c.target_amplitude, c.target_frame_change, c.target_drag_beta,
            c.target_skew_gamma, 0.0, c.control_frame_change};
}

CnotCalibration unpack(const CnotCalibration& base, const std::vector<double>& p)
{
    CnotCalibration c = base;
    c.control_amplitude = p[kControlAmp];
    c.target_amplitude = p[kTargetAmp];
    c.target_frame_change = p[kTargetFc];
    c.target_drag_beta = p[kDrag];
    c.target_skew_gamma = p[kSkew];
    c.control_phase = wrap_phase(base.control_phase + p[kJointPhase]);
    c.target_phase = wrap_phase(base.target_phase + p[kJointPhase]);
    c.control_frame_change = p[kControlFc];
    return c;
}

// Monitored angles A..G of K = CNOT^dag M, all with desired value 0.
std::vector<double> cnot_angles(const Eigen::Matrix4cd& block, const CnotCalibration& c, int reps)
{
    const Eigen::Matrix4cd k = cnot_gate(c.control, c.target).adjoint() * block;
    const int t = c.target, ctl = c.control;
    return {sequence_angle(k, t, 'x', 0, reps), sequence_angle(k, t, 'x', 1, reps), sequence_angle(k, t, 'z', 0, reps),
            sequence_angle(k, t, 'y', 1, reps), sequence_angle(k, t, 'y', 0, reps), sequence_angle(k, t, 'z', 1, reps),
            sequence_angle(k, ctl, 'z', 0, reps)};
}

std::vector<std::string> cnot_columns()
{
    return {"iteration", "control_amplitude_GHz", "target_amplitude_GHz", "target_frame_change_rad",
            "target_drag_beta_ns", "target_skew_gamma_ns", "joint_phase_offset_rad", "control_frame_change_rad",
            "angle_A_rad", "angle_B_rad", "angle_C_rad", "angle_D_rad", "angle_E_rad", "angle_F_rad", "angle_G_rad",
            "max_abs_angle_rad"};
}

double effective_duration(const Envelope& shape)
{
    Envelope unit = shape;
    unit.amplitude = 1.0;
    unit.drag_beta = unit.skew_gamma = 0.0;
    constexpr int n = 4000;
    const double h = unit.duration / n;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += sample_envelope(unit, (i + 0.5) * h).in_phase * h;
    return sum;
}

}  // namespace

PulseSchedule cnot_schedule(const CnotCalibration& cal)
{
    Envelope control;
    control.kind = EnvelopeKind::FlatTopGaussian;
    control.amplitude = cal.control_amplitude;
    control.duration = cal.duration;
    control.sigma = cal.sigma;
    control.rise_fall_sigmas = cal.rise_fall_sigmas;

    Envelope target = control;
    target.kind = EnvelopeKind::GaussianDerivativeQuadrature;
    target.amplitude = cal.target_amplitude;
    target.drag_beta = cal.target_drag_beta;
    target.skew_gamma = cal.target_skew_gamma;

    PulseSchedule s;
    s.play(control, cal.carrier_frequency, cal.control_phase, cal.control)
        .play(target, cal.carrier_frequency, cal.target_phase, cal.target)
        .barrier()
        .frame_change(cal.target_frame_change, cal.target)
        .frame_change(cal.control_frame_change, cal.control);
    s.total_duration = cal.duration;
    return s;
}

CnotCalibration refine_cnot(CnotCalibration start, const CnotEvaluator& evaluate, const CalibrationOptions& options,
                            Transcript* transcript)
{
    if (transcript && transcript->columns.empty()) transcript->columns = cnot_columns();
    detail::FineLoop loop;
    loop.newton_steps = {1e-4, 1e-4, 1e-3, 1e-2, 1e-2, 1e-3, 1e-3};
    loop.angles = [&](const std::vector<double>& p) {
        const CnotCalibration c = unpack(start, p);
        return cnot_angles(evaluate(c), c, options.repetitions);
    };
    const auto result = detail::run_fine_loop(pack(start), loop, options, transcript);
    CnotCalibration out = unpack(start, result.params);
    out.converged = true;
    out.iterations = result.iterations;
    out.angles = result.angles;
    return out;
}

CnotCalibration calibrate_cnot(const SystemSpec& system, double duration, const CalibrationOptions& options,
                               Transcript* transcript)
{
    SystemSpec s = system;
    validate(s);
    if (s.transmons.size() != 2) throw ValidationError("CNOT calibration needs exactly two transmons");
    if (options.control == options.target || options.control < 0 || options.control > 1 || options.target < 0 ||
        options.target > 1)
        throw ValidationError("control and target must be distinct transmons 0 and 1");
    if (!(duration > 0.0)) throw ValidationError("gate duration must be positive");

    PropagationOptions popts;
    popts.dt = options.dt;
    const Propagator prop(s, popts);

    CnotCalibration cal;
    cal.duration = duration;
    cal.control = options.control;
    cal.target = options.target;
    cal.carrier_frequency = prop.dressed_frequency(options.target);
    if (cal.duration < 2.0 * cal.rise_fall_sigmas * cal.sigma)
        throw ValidationError("gate duration shorter than its rise and fall");

    // Pulses are cached by their shape; frame changes are applied to the block analytically.
    std::map<std::array<double, 6>, Eigen::Matrix4cd> cache;
    CnotEvaluator evaluate = [&](const CnotCalibration& c) -> Eigen::Matrix4cd {
        const std::array<double, 6> key{c.control_amplitude, c.target_amplitude, c.control_phase,
                                        c.target_phase,      c.target_drag_beta, c.target_skew_gamma};
        auto it = cache.find(key);
        if (it == cache.end()) {
            CnotCalibration bare = c;
            bare.target_frame_change = bare.control_frame_change = 0.0;
            const GateResult g = prop.run(cnot_schedule(bare));
            it = cache.emplace(key, Eigen::Matrix4cd(g.computational_block)).first;
        }
        const double fc0 = c.target == 0 ? c.target_frame_change : c.control_frame_change;
        const double fc1 = c.target == 1 ? c.target_frame_change : c.control_frame_change;
        return apply_frame_changes(it->second, fc0, fc1);
    };

    // Rough stage 1: control amplitude for a conditional rotation difference of pi.
    auto half_difference = [&](double amp, double phase, Eigen::Vector3d* mean = nullptr) {
        CnotCalibration c = cal;
        c.control_amplitude = amp;
        c.control_phase = phase;
        c.target_amplitude = 0.0;
        const Eigen::Matrix4cd b = evaluate(c);
        const Eigen::Vector3d r0 = rotation_vector(conditional_block(b, c.control, 0));
        const Eigen::Vector3d r1 = rotation_vector(conditional_block(b, c.control, 1));
        if (mean) *mean = 0.5 * (r0 + r1);
        return Eigen::Vector3d(0.5 * (r0 - r1));
    };
    auto excess = [&](double amp) { return half_difference(amp, 0.0).head<2>().norm() - kPi / 2.0; };

    constexpr double amp_step = 0.005, amp_cap = 0.15;
    double lo = 0.0, flo = excess(0.0), hi = -1.0, fhi = 0.0;
    for (double a = amp_step; a <= amp_cap + 1e-12; a += amp_step) {
        const double f = excess(a);
        if (f >= 0.0) {
            hi = a;
            fhi = f;
            break;
        }
        lo = a;
        flo = f;
    }
    if (hi < 0.0) throw NonConvergenceError("cross-resonance amplitude cap reached before a pi/2 conditional rotation");
    for (int i = 0; i < 40 && hi - lo > 1e-6; ++i) {
        const double mid = lo + (hi - lo) * (-flo) / (fhi - flo);
        const double m = std::clamp(mid, lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo));
        const double fm = excess(m);
        if (fm >= 0.0) {
            hi = m;
            fhi = fm;
        } else {
            lo = m;
            flo = fm;
        }
    }
    cal.control_amplitude = std::abs(flo) < std::abs(fhi) ? lo : hi;

    // Rough stage 2: control phase that points the conditional part along -x.
    const Eigen::Vector3d d0 = half_difference(cal.control_amplitude, 0.0);
    const Eigen::Vector3d d1 = half_difference(cal.control_amplitude, kPi / 2.0);
    const double psi0 = std::atan2(d0.y(), d0.x());
    const double sense = std::remainder(std::atan2(d1.y(), d1.x()) - psi0, 2.0 * kPi) > 0.0 ? 1.0 : -1.0;
    cal.control_phase = wrap_phase(sense * (kPi - psi0));

    // Rough stage 3: target amplitude completing the pi/2 unconditional rotation.
    Eigen::Vector3d mean;
    half_difference(cal.control_amplitude, cal.control_phase, &mean);
    Envelope shape;
    shape.duration = cal.duration;
    shape.sigma = cal.sigma;
    shape.rise_fall_sigmas = cal.rise_fall_sigmas;
    cal.target_amplitude = (kPi / 2.0 - mean.x()) / (kTwoPi * effective_duration(shape));
    cal.target_phase = 0.0;

    // Start the virtual Z angles from their measured values.
    {
        const Eigen::Matrix4cd k = cnot_gate(cal.control, cal.target).adjoint() * evaluate(cal);
        cal.target_frame_change = wrap_phase(sequence_angle(k, cal.target, 'z', 0, options.repetitions));
        const Eigen::Matrix4cd k2 = cnot_gate(cal.control, cal.target).adjoint() * evaluate(cal);
        cal.control_frame_change = wrap_phase(sequence_angle(k2, cal.control, 'z', 0, options.repetitions));
    }

    CnotCalibration out = refine_cnot(cal, evaluate, options, transcript);
    const GateResult final_run = prop.run(cnot_schedule(out));
    out.fidelity = gate_fidelity(final_run.computational_block, cnot_gate(out.control, out.target));
    out.leakage = final_run.leakage;
    return out;
}

}  // namespace sizzle
