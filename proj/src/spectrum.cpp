#include "sizzle/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sizzle/assignment.hpp"
#include "sizzle/parallel.hpp"

namespace sizzle {

namespace {

// Eigen-decomposition with a real fast path: drive phases of 0 or pi leave H real.
void hermitian_eigensystem(const OperatorMatrix& h, Eigen::VectorXd& values, OperatorMatrix& vectors)
{
    if (h.imag().cwiseAbs().maxCoeff() == 0.0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.real());
        if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed");
        values = es.eigenvalues();
        vectors = es.eigenvectors().cast<std::complex<double>>();
        return;
    }
    Eigen::SelfAdjointEigenSolver<OperatorMatrix> es(h);
    if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed");
    values = es.eigenvalues();
    vectors = es.eigenvectors();
}

std::string label_string(const std::vector<int>& label)
{
    std::ostringstream os;
    os << '|';
    for (int n : label) os << n;
    os << '>';
    return os.str();
}

}  // namespace

bool LabeledSpectrum::has_label(const std::vector<int>& label) const
{
    return basis.index_of(label) >= 0;
}

double LabeledSpectrum::energy(const std::vector<int>& label) const
{
    long b = basis.index_of(label);
    if (b < 0) throw ValidationError("label " + label_string(label) + " is not in the basis");
    return energies(eigen_of_basis[static_cast<std::size_t>(b)]);
}

double LabeledSpectrum::lab_energy(const std::vector<int>& label) const
{
    const int total = std::accumulate(label.begin(), label.end(), 0);
    return energy(label) + frame_frequency * total;
}

LabeledSpectrum labeled_spectrum(const OperatorMatrix& h, const FockBasis& basis, double frame_frequency,
                                 bool keep_vectors)
{
    const auto n = static_cast<Eigen::Index>(basis.size());
    if (h.rows() != n || h.cols() != n) throw ValidationError("Hamiltonian does not match basis dimension");
    if (hermiticity_defect(h) > 1e-12) throw ValidationError("Hamiltonian is not Hermitian");

    LabeledSpectrum out;
    out.basis = basis;
    out.frame_frequency = frame_frequency;
    OperatorMatrix v;
    hermitian_eigensystem(h, out.energies, v);
    const Eigen::MatrixXd weight = v.cwiseAbs2();  // (bare, eigen)

    // Greedy first: each eigenvector to its dominant bare state. Any double booking falls back
    // to the optimal bijective matching.
    std::vector<long> bare_of(static_cast<std::size_t>(n));
    std::vector<char> taken(static_cast<std::size_t>(n), 0);
    bool conflict = false;
    for (Eigen::Index k = 0; k < n; ++k) {
        Eigen::Index b;
        weight.col(k).maxCoeff(&b);
        bare_of[k] = b;
        if (taken[b]) conflict = true;
        taken[b] = 1;
    }
    if (conflict) {
        auto match = max_weight_assignment(weight.transpose());
        for (Eigen::Index k = 0; k < n; ++k) bare_of[k] = match[k];
    }

    out.basis_index = bare_of;
    out.eigen_of_basis.assign(static_cast<std::size_t>(n), -1);
    out.labels.resize(static_cast<std::size_t>(n));
    out.overlaps.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const long b = bare_of[k];
        out.eigen_of_basis[b] = k;
        out.labels[k] = basis.state(b);
        out.overlaps(k) = weight(b, k);
        if (out.overlaps(k) < 0.5)
            out.warnings.push_back("ambiguous label " + label_string(out.labels[k]) + " overlap " +
                                   std::to_string(out.overlaps(k)));
        if (keep_vectors) {
            const auto c = v(b, k);
            v.col(k) *= std::conj(c) / std::abs(c);
        }
    }
    if (keep_vectors) out.vectors = std::move(v);
    return out;
}

LabeledSpectrum labeled_spectrum(const OperatorMatrix& h, const std::vector<int>& dims, double frame_frequency,
                                 bool keep_vectors)
{
    return labeled_spectrum(h, FockBasis(dims), frame_frequency, keep_vectors);
}

std::vector<int> excitation_label(std::size_t modes, std::initializer_list<int> excited)
{
    std::vector<int> label(modes, 0);
    for (int m : excited) label.at(static_cast<std::size_t>(m)) += 1;
    return label;
}

double dressed_frequency(const LabeledSpectrum& spec, int q)
{
    const auto m = spec.basis.modes();
    return spec.lab_energy(excitation_label(m, {q})) - spec.lab_energy(excitation_label(m, {}));
}

PairRates pair_rates(const LabeledSpectrum& spec, int q0, int q1, const LabeledSpectrum* reference)
{
    const auto m = spec.basis.modes();
    if (q0 == q1 || q0 < 0 || q1 < 0 || static_cast<std::size_t>(std::max(q0, q1)) >= m)
        throw ValidationError("pair_rates: invalid transmon pair");
    const auto l00 = excitation_label(m, {});
    const auto l10 = excitation_label(m, {q0});
    const auto l01 = excitation_label(m, {q1});
    const auto l11 = excitation_label(m, {q0, q1});
    for (const auto* l : {&l00, &l10, &l01, &l11})
        if (!spec.has_label(*l)) throw ValidationError("pair_rates: missing computational label " + label_string(*l));

    const double e00 = spec.lab_energy(l00), e10 = spec.lab_energy(l10);
    const double e01 = spec.lab_energy(l01), e11 = spec.lab_energy(l11);

    PairRates r;
    r.zz = (spec.energy(l11) - spec.energy(l10)) - (spec.energy(l01) - spec.energy(l00));
    r.zi = -((e10 - e00) + (e11 - e01));
    r.iz = -((e01 - e00) + (e11 - e10));
    r.label_warning = spec.ambiguous();
    if (reference) {
        r.stark_shift_q0 = dressed_frequency(spec, q0) - dressed_frequency(*reference, q0);
        r.stark_shift_q1 = dressed_frequency(spec, q1) - dressed_frequency(*reference, q1);
    }
    return r;
}

LabeledSpectrum system_spectrum(const SystemSpec& system, bool keep_vectors)
{
    SystemSpec s = system;
    validate(s);
    const FockBasis basis = system_basis(s);
    if (s.drives.empty()) return labeled_spectrum(build_static_hamiltonian(s, basis), basis, 0.0, keep_vectors);
    const double f = common_drive_frequency(s);
    return labeled_spectrum(build_rwa_hamiltonian(s, basis, f), basis, f, keep_vectors);
}

PairRates evaluate_pair(const SystemSpec& system, int q0, int q1)
{
    SystemSpec s = system;
    validate(s);
    const FockBasis basis = system_basis(s);
    if (s.drives.empty()) {
        auto spec = labeled_spectrum(build_static_hamiltonian(s, basis), basis);
        return pair_rates(spec, q0, q1, &spec);
    }
    const double f = common_drive_frequency(s);
    auto driven = labeled_spectrum(build_rwa_hamiltonian(s, basis, f), basis, f);
    auto idle = labeled_spectrum(build_rwa_hamiltonian(without_drives(s), basis, f), basis, f);
    return pair_rates(driven, q0, q1, &idle);
}

SystemSpec apply_sweep(SystemSpec system, SweepKind kind, double value, int q0, int q1)
{
    switch (kind) {
    case SweepKind::AmplitudeScale:
        if (value < 0.0) throw ValidationError("amplitude scale must be >= 0");
        for (auto& d : system.drives) d.amplitude *= value;
        break;
    case SweepKind::DriveFrequency:
        for (auto& d : system.drives) d.frequency = value;
        break;
    case SweepKind::PhaseDifference: {
        const DriveTone* ref = nullptr;
        for (const auto& d : system.drives)
            if (d.target == q1) ref = &d;
        const double base = ref ? ref->phase : 0.0;
        for (auto& d : system.drives)
            if (d.target == q0) d.phase = wrap_phase(base + value);
        break;
    }
    }
    return system;
}

std::vector<SweepSample> zz_vs_parameter(const SystemSpec& system, SweepKind kind, const std::vector<double>& values,
                                         int q0, int q1, int threads)
{
    // A multi-frequency drive set cannot be put in one frame at any point; fail the whole sweep.
    if (!system.drives.empty() && !values.empty()) common_drive_frequency(apply_sweep(system, kind, values.front(), q0, q1));
    std::vector<SweepSample> out(values.size());
    parallel_for(values.size(), threads, [&](std::size_t i) {
        out[i].value = values[i];
        try {
            out[i].rates = evaluate_pair(apply_sweep(system, kind, values[i], q0, q1), q0, q1);
        } catch (const Error& e) {
            out[i].error = e.what();
        }
    });
    return out;
}

}  // namespace sizzle
