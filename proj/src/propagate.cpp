#include <algorithm>
#include <cmath>

#include "sizzle/pulse.hpp"

namespace sizzle {

namespace {

using cd = std::complex<double>;

OperatorMatrix hermitian_exp(const OperatorMatrix& h, double tau)
{
    // exp(-i 2 pi H tau)
    Eigen::SelfAdjointEigenSolver<OperatorMatrix> es(h);
    if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed during propagation");
    const Eigen::VectorXcd phases =
        (es.eigenvalues().array() * (-kTwoPi * tau)).unaryExpr([](double x) { return std::polar(1.0, x); });
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

Propagator::Propagator(const SystemSpec& system, PropagationOptions options) : system_(system), options_(options)
{
    validate(system_);
    if (!(options_.dt > 0.0)) throw ValidationError("dt must be > 0");
    for (const auto& d : system_.drives)
        if (d.role == DriveRole::Gate)
            throw ValidationError("gate-role drives belong in the pulse schedule, not the system");
    basis_ = system_basis(system_);

    if (!system_.drives.empty()) {
        frame_ = common_drive_frequency(system_);
    } else if (options_.frame_frequency) {
        frame_ = *options_.frame_frequency;
    } else {
        frame_ = 0.0;
        for (const auto& t : system_.transmons) frame_ += t.frequency;
        frame_ /= static_cast<double>(system_.transmons.size());
    }
    h_frame_ = build_rwa_hamiltonian(system_, basis_, frame_);
    spectrum_ = labeled_spectrum(h_frame_, basis_, frame_, true);

    const auto modes = basis_.modes();
    const double e0 = spectrum_.energy(excitation_label(modes, {}));
    std::vector<double> mode_freq(modes);
    for (std::size_t m = 0; m < modes; ++m) {
        const auto l = excitation_label(modes, {static_cast<int>(m)});
        mode_freq[m] = spectrum_.has_label(l) ? spectrum_.energy(l) - e0 : 0.0;
    }
    reference_energy_.resize(static_cast<Eigen::Index>(basis_.size()));
    for (std::size_t k = 0; k < basis_.size(); ++k) {
        double e = e0;
        for (std::size_t m = 0; m < modes; ++m) e += spectrum_.labels[k][m] * mode_freq[m];
        reference_energy_(static_cast<Eigen::Index>(k)) = e;
    }

    const std::size_t nq = system_.transmons.size();
    if (nq > 12) throw ValidationError("computational block limited to 12 transmons");
    for (std::size_t code = 0; code < (std::size_t{1} << nq); ++code) {
        std::vector<int> label(modes, 0);
        for (std::size_t q = 0; q < nq; ++q) label[q] = static_cast<int>((code >> (nq - 1 - q)) & 1u);
        const long b = basis_.index_of(label);
        if (b < 0) throw ValidationError("computational state missing from the truncated basis");
        computational_.push_back(spectrum_.eigen_of_basis[static_cast<std::size_t>(b)]);
    }
    for (std::size_t q = 0; q < nq; ++q) lowering_.push_back(basis_.lowering(q));
}

double Propagator::dressed_frequency(int q) const
{
    return sizzle::dressed_frequency(spectrum_, q);
}

OperatorMatrix Propagator::frame_change_operator(int target, double angle) const
{
    // Phase per excitation of the dressed target mode.
    const auto n = static_cast<Eigen::Index>(basis_.size());
    Eigen::VectorXcd phases(n);
    for (Eigen::Index k = 0; k < n; ++k)
        phases(k) = std::polar(1.0, -angle * spectrum_.labels[static_cast<std::size_t>(k)][static_cast<std::size_t>(target)]);
    return spectrum_.vectors * phases.asDiagonal() * spectrum_.vectors.adjoint();
}

OperatorMatrix Propagator::to_dressed_frame(const OperatorMatrix& u, double t) const
{
    const Eigen::VectorXcd phases =
        (reference_energy_.array() * (kTwoPi * t)).unaryExpr([](double x) { return std::polar(1.0, x); });
    return phases.asDiagonal() * (spectrum_.vectors.adjoint() * u * spectrum_.vectors);
}

Eigen::MatrixXcd Propagator::block_of(const OperatorMatrix& dressed) const
{
    const auto d = static_cast<Eigen::Index>(computational_.size());
    Eigen::MatrixXcd block(d, d);
    for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c < d; ++c) block(r, c) = dressed(computational_[r], computational_[c]);
    return block;
}

template <typename Visitor>
void Propagator::step_through(const Timeline& timeline, const std::vector<double>& stops, Visitor&& at_stop) const
{
    for (const auto& p : timeline.plays)
        if (p.play.target < 0 || p.play.target >= static_cast<int>(qubits()))
            throw ValidationError("play target out of range");
    for (const auto& f : timeline.frame_changes)
        if (f.change.target < 0 || f.change.target >= static_cast<int>(qubits()))
            throw ValidationError("frame change target out of range");

    const double T = timeline.duration;
    const long steps = T > 0.0 ? std::max(1L, static_cast<long>(std::ceil(T / options_.dt - 1e-9))) : 0;
    const double h = steps > 0 ? T / static_cast<double>(steps) : 0.0;
    auto to_step = [&](double t) {
        if (steps == 0) return 0L;
        return std::clamp(std::lround(t / h), 0L, steps);
    };

    std::vector<std::pair<long, const TimedFrameChange*>> fcs;
    for (const auto& f : timeline.frame_changes) fcs.emplace_back(to_step(f.time), &f);
    std::stable_sort(fcs.begin(), fcs.end(), [](auto& a, auto& b) { return a.first < b.first; });
    std::vector<std::pair<long, std::size_t>> marks;
    for (std::size_t i = 0; i < stops.size(); ++i) marks.emplace_back(to_step(stops[i]), i);
    std::stable_sort(marks.begin(), marks.end());

    const auto n = static_cast<Eigen::Index>(basis_.size());
    OperatorMatrix u = OperatorMatrix::Identity(n, n);
    const OperatorMatrix idle = steps > 0 ? hermitian_exp(h_frame_, h) : OperatorMatrix::Identity(n, n);
    std::size_t ifc = 0, imark = 0;

    // Adds the drive terms at time t to hk; false when nothing plays.
    auto add_drives = [&](double t, OperatorMatrix& hk) {
        bool active = false;
        for (const auto& p : timeline.plays) {
            const double local = t - p.start;
            if (local < 0.0 || local >= p.play.envelope.duration) continue;
            const auto s = sample_envelope(p.play.envelope, local);
            if (s.in_phase == 0.0 && s.quadrature == 0.0) continue;
            const cd c = 0.5 * cd(s.in_phase, s.quadrature) * std::polar(1.0, p.play.carrier_phase) *
                         std::polar(1.0, -kTwoPi * (p.play.carrier_frequency - frame_) * t);
            const auto& a = lowering_[static_cast<std::size_t>(p.play.target)];
            hk.noalias() += c * a.adjoint();
            hk.noalias() += std::conj(c) * a;
            active = true;
        }
        return active;
    };

    // Fourth-order Magnus step from two Gauss-Legendre samples:
    // exp(-i 2 pi h K), K = (H1 + H2)/2 - i (2 pi sqrt(3) h / 12) [H2, H1].
    const double offset = h * std::sqrt(3.0) / 6.0;
    const cd commutator_weight(0.0, -kTwoPi * std::sqrt(3.0) * h / 12.0);
    OperatorMatrix h1(n, n), h2(n, n), k_eff(n, n);
    for (long k = 0; k <= steps; ++k) {
        for (; ifc < fcs.size() && fcs[ifc].first == k; ++ifc)
            u = frame_change_operator(fcs[ifc].second->change.target, fcs[ifc].second->change.angle) * u;
        for (; imark < marks.size() && marks[imark].first == k; ++imark) at_stop(marks[imark].second, k * h, u);
        if (k == steps) break;

        const double tm = (static_cast<double>(k) + 0.5) * h;
        h1 = h_frame_;
        h2 = h_frame_;
        const bool active1 = add_drives(tm - offset, h1);
        const bool active2 = add_drives(tm + offset, h2);
        if (!active1 && !active2) {
            u = idle * u;
            continue;
        }
        k_eff = 0.5 * (h1 + h2);
        k_eff.noalias() += commutator_weight * (h2 * h1);
        k_eff.noalias() -= commutator_weight * (h1 * h2);
        u = hermitian_exp(k_eff, h) * u;
    }
}

GateResult Propagator::run(const PulseSchedule& schedule) const
{
    const Timeline tl = resolve(schedule);
    GateResult out;
    step_through(tl, {tl.duration}, [&](std::size_t, double t, const OperatorMatrix& u) {
        out.full_unitary = u;
        out.dressed_unitary = to_dressed_frame(u, t);
    });
    const auto n = out.full_unitary.rows();
    out.unitarity_drift = (out.full_unitary.adjoint() * out.full_unitary - OperatorMatrix::Identity(n, n)).norm();
    if (out.unitarity_drift > 1e-6)
        throw NumericalError("unitarity drift " + std::to_string(out.unitarity_drift) + "; step too large");
    out.computational_block = block_of(out.dressed_unitary);
    const double d = static_cast<double>(out.computational_block.rows());
    out.leakage = std::clamp(1.0 - out.computational_block.squaredNorm() / d, 0.0, 1.0);
    out.fidelity = gate_fidelity(out.computational_block,
                                 Eigen::MatrixXcd::Identity(out.computational_block.rows(), out.computational_block.cols()));
    return out;
}

std::vector<Eigen::MatrixXcd> Propagator::snapshots(const PulseSchedule& schedule, const std::vector<double>& times) const
{
    Timeline tl = resolve(schedule);
    for (double t : times) tl.duration = std::max(tl.duration, t);
    std::vector<Eigen::MatrixXcd> out(times.size());
    step_through(tl, times, [&](std::size_t i, double t, const OperatorMatrix& u) { out[i] = block_of(to_dressed_frame(u, t)); });
    return out;
}

GateResult propagate(const SystemSpec& system, const PulseSchedule& schedule, double dt)
{
    PropagationOptions opt;
    opt.dt = dt;
    return Propagator(system, opt).run(schedule);
}

double gate_fidelity(const Eigen::MatrixXcd& u, const Eigen::MatrixXcd& target)
{
    if (u.rows() != target.rows() || u.cols() != target.cols() || u.rows() != u.cols())
        throw ValidationError("gate_fidelity: shape mismatch");
    const double d = static_cast<double>(u.rows());
    const double tr_uu = (u.adjoint() * u).trace().real();
    const double overlap = std::norm((target.adjoint() * u).trace());
    return (tr_uu + overlap) / (d * (d + 1.0));
}

Eigen::Matrix4cd cnot_gate(int control, int target)
{
    if (control == target || control < 0 || control > 1 || target < 0 || target > 1)
        throw ValidationError("cnot_gate: qubits must be 0 and 1");
    Eigen::Matrix4cd g = Eigen::Matrix4cd::Zero();
    for (int n0 = 0; n0 < 2; ++n0)
        for (int n1 = 0; n1 < 2; ++n1) {
            int bits[2] = {n0, n1};
            const int in = 2 * n0 + n1;
            if (bits[control] == 1) bits[target] ^= 1;
            g(2 * bits[0] + bits[1], in) = 1.0;
        }
    return g;
}

Eigen::Matrix4cd cz_gate()
{
    Eigen::Matrix4cd g = Eigen::Matrix4cd::Identity();
    g(3, 3) = -1.0;
    return g;
}

}  // namespace sizzle
