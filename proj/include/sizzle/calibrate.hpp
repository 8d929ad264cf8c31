#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sizzle/pulse.hpp"
#include "sizzle/spectrum.hpp"
#include "sizzle/system.hpp"

namespace sizzle {

/// Per-iteration table written next to calibration results.
struct Transcript {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    void add(std::vector<double> row) { rows.push_back(std::move(row)); }
};

struct CancellationOptions {
    double null_tolerance = 5e-6;  // GHz
    double amplitude_cap = 0.15;   // GHz, largest amplitude any tone may reach
    int scan_points = 30;          // coarse bracketing grid before the root solve
};

/// Phase difference phi = phase(q0 tone) - phase(q1 tone) in [0, pi] nulling the pair ZZ.
double find_cancellation_phase(const SystemSpec& system, int q0 = 0, int q1 = 1, const CancellationOptions& options = {},
                               Transcript* transcript = nullptr);

/// Smallest scale s >= 0 with zz(s W0, s W1, phi = pi) = 0. Amplitudes come from the system's tones.
double find_cancellation_amplitude(const SystemSpec& system, int q0 = 0, int q1 = 1,
                                   const CancellationOptions& options = {}, Transcript* transcript = nullptr);

struct CancellationSolution {
    std::vector<double> amplitudes;  // per transmon, GHz
    std::vector<double> phases;
    double drive_frequency = 0.0;
    std::vector<double> residual_zz;   // pair (i, i+1)
    std::vector<double> stark_shifts;  // per transmon
    SystemSpec system;                 // chain with the solved tones
};

/// Sequential nulling along a line: qubit 0 is set to the seed Stark shift magnitude, then each
/// next amplitude is the smallest root of its pair's ZZ on the full chain (phases alternate by pi).
CancellationSolution chain_cancellation(const SystemSpec& chain, double drive_frequency, double seed_stark_shift,
                                        const CancellationOptions& options = {}, Transcript* transcript = nullptr);

/// Re-evaluates the pair ZZ of a solved chain from scratch.
std::vector<double> chain_residuals(const SystemSpec& chain);

// --- repeated-sequence angle fits ---

/// exp(-i angle sigma_axis / 2) on one qubit of the two-qubit register (qubit 0 most significant).
Eigen::Matrix4cd qubit_rotation(int qubit, char axis, double angle);

/// Excited-state population of `measured` after prep, k^n, post for n = 0..reps. The other qubit
/// starts in |other_state>. The prep/post pair makes P1 = (1 - sin(n theta)) / 2 for a rotation
/// theta about `axis`.
std::vector<double> repetition_populations(const Eigen::Matrix4cd& k, int measured, char axis, int other_state,
                                           int reps);

/// Least-squares fit of P1(n) = a - b sin(n theta), b > 0, theta in (-pi, pi].
double fit_repetition_angle(const std::vector<double>& populations);

double sequence_angle(const Eigen::Matrix4cd& k, int measured, char axis, int other_state, int reps);

struct CalibrationOptions {
    double tolerance = 0.01;  // rad
    int max_iterations = 50;
    int repetitions = 17;
    double dt = 0.05;
    int control = 1;
    int target = 0;
    int stall_iterations = 8;  // give up early when the residual stops improving
};

struct CnotCalibration {
    double control_amplitude = 0.0;
    double target_amplitude = 0.0;
    double control_phase = 0.0;
    double target_phase = 0.0;
    double target_drag_beta = 0.0;
    double target_skew_gamma = 0.0;
    double target_frame_change = 0.0;
    double control_frame_change = 0.0;
    double duration = 90.0;
    double sigma = 10.0;
    double rise_fall_sigmas = 2.0;
    double carrier_frequency = 0.0;  // dressed target frequency, lab
    int control = 1;
    int target = 0;

    bool converged = false;
    int iterations = 0;
    std::vector<double> angles;  // A..G, desired values subtracted
    double fidelity = 0.0;
    double leakage = 0.0;
};

PulseSchedule cnot_schedule(const CnotCalibration& cal);

using CnotEvaluator = std::function<Eigen::Matrix4cd(const CnotCalibration&)>;

/// Fine loop only, from a given starting point. The evaluator returns the computational block.
CnotCalibration refine_cnot(CnotCalibration start, const CnotEvaluator& evaluate, const CalibrationOptions& options,
                            Transcript* transcript = nullptr);

/// Rough scans followed by the fine loop, then a final propagation of the calibrated schedule.
CnotCalibration calibrate_cnot(const SystemSpec& system, double duration, const CalibrationOptions& options = {},
                               Transcript* transcript = nullptr);

struct CzCalibration {
    double control_amplitude = 0.0;
    double target_amplitude = 0.0;
    double relative_phase = 0.0;  // phase(control tone) - phase(target tone)
    double target_frame_change = 0.0;
    double control_frame_change = 0.0;
    double gate_frequency = 4.9;
    double duration = 200.0;
    double sigma = 10.0;
    double rise_fall_sigmas = 3.0;
    int control = 1;
    int target = 0;

    bool converged = false;
    int iterations = 0;
    std::vector<double> angles;  // A..C, desired values subtracted
    double fidelity = 0.0;
    double leakage = 0.0;
};

PulseSchedule cz_schedule(const CzCalibration& cal);

using CzEvaluator = std::function<Eigen::Matrix4cd(const CzCalibration&)>;

CzCalibration refine_cz(CzCalibration start, const CzEvaluator& evaluate, const CalibrationOptions& options,
                        Transcript* transcript = nullptr);

/// Picks the relative phase for maximum |ZZ| at the given amplitudes, then runs the fine loop on the
/// control amplitude and frame changes. `start` supplies amplitudes, gate frequency and timing.
CzCalibration calibrate_cz(const SystemSpec& system, CzCalibration start, const CalibrationOptions& options = {},
                           Transcript* transcript = nullptr);

/// Computational block of a schedule with its trailing frame changes applied analytically.
/// Used by the loops to avoid re-propagating when only virtual Z angles change.
Eigen::Matrix4cd apply_frame_changes(const Eigen::Matrix4cd& block, double angle_q0, double angle_q1);

}  // namespace sizzle
