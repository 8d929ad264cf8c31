#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "sizzle/operators.hpp"
#include "sizzle/spectrum.hpp"
#include "sizzle/system.hpp"

namespace sizzle {

enum class EnvelopeKind { FlatTopGaussian, GaussianDerivativeQuadrature };

/// Flat-top pulse with Gaussian edges of rise_fall_sigmas * sigma, truncated (not baseline shifted).
/// rise_fall_sigmas = 0 gives a square pulse. Only the derivative kind carries a quadrature
/// beta * dOmega/dt + gamma * |dOmega/dt|.
struct Envelope {
    EnvelopeKind kind = EnvelopeKind::FlatTopGaussian;
    double amplitude = 0.0;  // GHz
    double duration = 0.0;   // ns
    double sigma = 10.0;     // ns
    double rise_fall_sigmas = 2.0;
    double drag_beta = 0.0;   // ns
    double skew_gamma = 0.0;  // ns
    bool time_reversed = false;  // sample the original at duration - t
};

struct EnvelopeSample {
    double in_phase = 0.0;
    double quadrature = 0.0;
};

void validate(const Envelope& e);
EnvelopeSample sample_envelope(const Envelope& e, double t);
/// Analytic dOmega_x/dt of the unreversed envelope.
double envelope_slope(const Envelope& e, double t);

struct Play {
    Envelope envelope;
    double carrier_frequency = 5.0;  // GHz, lab
    double carrier_phase = 0.0;
    int target = 0;
    std::optional<double> start;  // ns; unset = after the previous item on this target
};

struct FrameChange {
    double angle = 0.0;
    int target = 0;
    std::optional<double> time;
};

struct Barrier {};

using ScheduleItem = std::variant<Play, FrameChange, Barrier>;

struct PulseSchedule {
    std::vector<ScheduleItem> items;
    double total_duration = 0.0;  // lower bound; the schedule may run longer

    PulseSchedule& play(const Envelope& e, double carrier, double phase, int target);
    PulseSchedule& frame_change(double angle, int target);
    PulseSchedule& barrier();
};

struct TimedPlay {
    Play play;
    double start = 0.0;
};

struct TimedFrameChange {
    FrameChange change;
    double time = 0.0;
};

/// Per-target clocks, synchronized at barriers.
struct Timeline {
    std::vector<TimedPlay> plays;
    std::vector<TimedFrameChange> frame_changes;
    double duration = 0.0;
};

Timeline resolve(const PulseSchedule& schedule);

/// Reverses time order, mirrors envelopes, shifts carrier phases by pi and negates frame changes.
/// Run from time zero, its unitary undoes the original whenever the frame Hamiltonian vanishes and
/// every carrier sits at the frame frequency.
PulseSchedule inverse(const PulseSchedule& schedule);

struct GateResult {
    OperatorMatrix full_unitary;        // in the propagation frame
    OperatorMatrix dressed_unitary;     // dressed basis, rotating at the dressed operating frequencies
    Eigen::MatrixXcd computational_block;
    double leakage = 0.0;
    double fidelity = 1.0;
    double unitarity_drift = 0.0;
};

struct PropagationOptions {
    double dt = 0.05;  // ns
    /// Frame used while stepping. Defaults to the cancellation-tone frequency, else the mean transmon frequency.
    std::optional<double> frame_frequency;
};

/// Steps a fixed system (cancellation tones only) through pulse schedules. Reusable across schedules.
class Propagator {
public:
    Propagator(const SystemSpec& system, PropagationOptions options = {});

    GateResult run(const PulseSchedule& schedule) const;

    /// Computational blocks at the requested times (rounded to the step grid), same frame as run().
    std::vector<Eigen::MatrixXcd> snapshots(const PulseSchedule& schedule, const std::vector<double>& times) const;

    /// Dressed 0->1 frequency of transmon q with the cancellation tones on, lab frame.
    double dressed_frequency(int q) const;
    double frame_frequency() const { return frame_; }
    const LabeledSpectrum& spectrum() const { return spectrum_; }
    std::size_t qubits() const { return system_.transmons.size(); }
    double dt() const { return options_.dt; }

private:
    template <typename Visitor>
    void step_through(const Timeline& timeline, const std::vector<double>& stops, Visitor&& at_stop) const;
    OperatorMatrix to_dressed_frame(const OperatorMatrix& u, double t) const;
    Eigen::MatrixXcd block_of(const OperatorMatrix& dressed) const;
    OperatorMatrix frame_change_operator(int target, double angle) const;

    SystemSpec system_;
    PropagationOptions options_;
    FockBasis basis_;
    double frame_ = 0.0;
    OperatorMatrix h_frame_;
    LabeledSpectrum spectrum_;
    Eigen::VectorXd reference_energy_;  // per eigenstate
    std::vector<Eigen::Index> computational_;
    std::vector<OperatorMatrix> lowering_;
};

/// Convenience wrapper around Propagator.
GateResult propagate(const SystemSpec& system, const PulseSchedule& schedule, double dt = 0.05);

/// (Tr(u^dag u) + |Tr(target^dag u)|^2) / (d (d + 1)).
double gate_fidelity(const Eigen::MatrixXcd& u, const Eigen::MatrixXcd& target);

/// Two-qubit gates in the computational ordering |n0 n1>, index 2 n0 + n1.
Eigen::Matrix4cd cnot_gate(int control, int target);
Eigen::Matrix4cd cz_gate();

/// Rates in the H = sum nu_P P / 4 convention, P = (control Pauli)(target Pauli). GHz.
struct PauliRates {
    std::map<std::string, double> rates;
    double fit_residual = 0.0;
    double duration = 0.0;

    double operator[](const std::string& key) const { return rates.at(key); }
};

/// Fits conditional target rotations from computational blocks at known times (control = qubit
/// `control` in the 2-qubit ordering). Used by extract_pauli_rates and testable on synthetic data.
PauliRates fit_pauli_rates(const std::vector<double>& times, const std::vector<Eigen::MatrixXcd>& blocks, int control,
                           const Eigen::Vector3d* guess0 = nullptr, const Eigen::Vector3d* guess1 = nullptr);

/// Rotation vector (Bloch rotation angle times axis) of a 2x2 block after removing its determinant phase.
Eigen::Vector3d rotation_vector(const Eigen::Matrix2cd& block);

/// Conditional 2x2 target block for control state c.
Eigen::Matrix2cd conditional_block(const Eigen::MatrixXcd& block4, int control, int c);

struct TomographyOptions {
    double dt = 0.05;
    double pilot_duration = 10.0;
    int points = 21;
    double min_duration = 100.0;
    double max_duration = 2000.0;
    double residual_limit = 0.05;
};

/// Constant-amplitude CR tone on `control` at cr_frequency (defaults to the dressed target frequency
/// when <= 0). Cancellation tones in `system` stay on.
PauliRates extract_pauli_rates(const SystemSpec& system, double cr_amplitude, double cr_frequency, int control,
                               int target, const TomographyOptions& options = {});

}  // namespace sizzle
