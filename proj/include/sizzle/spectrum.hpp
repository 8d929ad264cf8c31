#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sizzle/basis.hpp"
#include "sizzle/operators.hpp"
#include "sizzle/system.hpp"

namespace sizzle {

/// Eigenstates of a dressed Hamiltonian tagged with the bare states they came from.
/// Eigenstate k (ascending energy) carries labels[k]; eigenvector phases are fixed so that
/// <label|eigenvector> is real and positive.
struct LabeledSpectrum {
    FockBasis basis;
    std::vector<std::vector<int>> labels;
    Eigen::VectorXd energies;
    Eigen::VectorXd overlaps;
    std::vector<long> basis_index;     // bare basis index of eigenstate k
    std::vector<long> eigen_of_basis;  // inverse map
    double frame_frequency = 0.0;
    std::vector<std::string> warnings;
    OperatorMatrix vectors;  // empty unless requested

    bool has_label(const std::vector<int>& label) const;
    /// Energy in the frame the Hamiltonian was written in.
    double energy(const std::vector<int>& label) const;
    /// Energy with the frame rotation undone: E + frame_frequency * total excitations.
    double lab_energy(const std::vector<int>& label) const;
    bool ambiguous() const { return !warnings.empty(); }
};

LabeledSpectrum labeled_spectrum(const OperatorMatrix& h, const FockBasis& basis, double frame_frequency = 0.0,
                                 bool keep_vectors = false);
LabeledSpectrum labeled_spectrum(const OperatorMatrix& h, const std::vector<int>& dims, double frame_frequency = 0.0,
                                 bool keep_vectors = false);

/// Occupation tuple with one excitation on each listed mode.
std::vector<int> excitation_label(std::size_t modes, std::initializer_list<int> excited);

struct PairRates {
    double zz = 0.0;
    double zi = 0.0;
    double iz = 0.0;
    double stark_shift_q0 = 0.0;
    double stark_shift_q1 = 0.0;
    bool label_warning = false;
};

/// zz = (E11 - E10) - (E01 - E00). zi/iz follow H = (zi ZI + iz IZ + zz ZZ)/4 with lab-frame energies,
/// so zi ~ -2 nu_q0. Stark shifts are dressed-frequency excursions from `reference`.
PairRates pair_rates(const LabeledSpectrum& spec, int q0, int q1, const LabeledSpectrum* reference = nullptr);

/// Dressed 0->1 frequency of transmon q in the lab frame.
double dressed_frequency(const LabeledSpectrum& spec, int q);

/// Spectrum at an operating point: drive-frame RWA Hamiltonian when drives are present
/// (all at one frequency), otherwise the lab-frame static Hamiltonian.
LabeledSpectrum system_spectrum(const SystemSpec& system, bool keep_vectors = false);

/// Rates at an operating point, Stark shifts against the same frame with drives switched off.
PairRates evaluate_pair(const SystemSpec& system, int q0 = 0, int q1 = 1);

enum class SweepKind { AmplitudeScale, DriveFrequency, PhaseDifference };

/// System with one sweep coordinate applied. AmplitudeScale multiplies every drive amplitude,
/// DriveFrequency moves every drive, PhaseDifference sets phase(q0 drive) = phase(q1 drive) + value.
SystemSpec apply_sweep(SystemSpec system, SweepKind kind, double value, int q0 = 0, int q1 = 1);

struct SweepSample {
    double value = 0.0;
    PairRates rates;
    std::string error;  // empty on success
};

std::vector<SweepSample> zz_vs_parameter(const SystemSpec& system, SweepKind kind, const std::vector<double>& values,
                                         int q0 = 0, int q1 = 1, int threads = 1);

struct BareFit {
    SystemSpec system;
    int iterations = 0;
    double max_error = 0.0;  // GHz, largest dressed mismatch at exit
};

/// Reads each transmon's frequency and anharmonicity as measured (dressed) values and solves for the
/// bare Duffing parameters that reproduce them through the lab-frame spectrum.
BareFit fit_bare_parameters(const SystemSpec& dressed, double tolerance = 1e-11, int max_iterations = 30);

struct EffectiveJ {
    double j = 0.0;  // signed, GHz
    double relative_residual = 0.0;
    double static_zz = 0.0;
    double amplitude_scale = 1.0;  // probe scale used for the largest fit point
};

/// Fits the low-amplitude response zz(s, phi) = c0 + c1 s^2 + J K(s) cos(phi), K the two-drive kernel
/// at J = 1 on bare parameters. probe0/probe1 are the drives on q0/q1 (frequency, amplitudes, phases).
EffectiveJ effective_j(const SystemSpec& system, const DriveTone& probe0, const DriveTone& probe1, int q0 = 0,
                       int q1 = 1, double residual_limit = 0.01);

}  // namespace sizzle
