#include "sizzle/operators.hpp"

#include <string>

namespace sizzle {

namespace {

using cd = std::complex<double>;

// Adds x * (op_p)(op_q) to h where op is a raising (+1) or lowering (-1) ladder on a mode.
// Only the terms with sp = +1 are generated; the Hermitian partner is written at the same time,
// so callers pass each term once together with its conjugate partner implicitly.
void add_pair_term(OperatorMatrix& h, const FockBasis& basis, std::size_t p, int sp, std::size_t q, int sq, cd x)
{
    const auto& dims = basis.dims();
    std::vector<int> occ;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        occ = basis.state(i);
        double amp = 1.0;
        // apply op_q first, then op_p
        for (auto [mode, s] : {std::pair{q, sq}, std::pair{p, sp}}) {
            if (s > 0) {
                if (occ[mode] + 1 >= dims[mode]) { amp = 0.0; break; }
                amp *= std::sqrt(static_cast<double>(occ[mode] + 1));
                occ[mode] += 1;
            } else {
                if (occ[mode] == 0) { amp = 0.0; break; }
                amp *= std::sqrt(static_cast<double>(occ[mode]));
                occ[mode] -= 1;
            }
        }
        if (amp == 0.0) continue;
        long j = basis.index_of(occ);
        if (j < 0) continue;
        const auto r = static_cast<Eigen::Index>(j);
        const auto c = static_cast<Eigen::Index>(i);
        h(r, c) += x * amp;
        h(c, r) += std::conj(x) * amp;
    }
}

void add_exchange(OperatorMatrix& h, const FockBasis& basis, std::size_t p, std::size_t q, double g, CouplingForm form)
{
    // a_p^dag a_q + h.c.
    add_pair_term(h, basis, p, +1, q, -1, cd(g, 0.0));
    if (form == CouplingForm::Full) {
        // a_p^dag a_q^dag + h.c.
        add_pair_term(h, basis, p, +1, q, +1, cd(g, 0.0));
    }
}

void add_diagonal(OperatorMatrix& h, const FockBasis& basis, const SystemSpec& system, double frame)
{
    const std::size_t nt = system.transmons.size();
    for (std::size_t i = 0; i < basis.size(); ++i) {
        double e = 0.0;
        for (std::size_t m = 0; m < nt; ++m) {
            const double n = basis.occupation(i, m);
            const auto& t = system.transmons[m];
            e += (t.frequency - frame) * n + 0.5 * t.anharmonicity * n * (n - 1.0);
        }
        for (std::size_t k = 0; k < system.couplings.size(); ++k) {
            int b = bus_mode_index(system, k);
            if (b < 0) continue;
            e += (system.couplings[k].bus_frequency - frame) * basis.occupation(i, b);
        }
        h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += e;
    }
}

void add_couplings(OperatorMatrix& h, const FockBasis& basis, const SystemSpec& system, CouplingForm form)
{
    for (std::size_t k = 0; k < system.couplings.size(); ++k) {
        const auto& c = system.couplings[k];
        const auto p = static_cast<std::size_t>(c.endpoints[0]);
        const auto q = static_cast<std::size_t>(c.endpoints[1]);
        if (c.kind == CouplingKind::Direct) {
            if (c.strength != 0.0) add_exchange(h, basis, p, q, c.strength, form);
        } else {
            const auto b = static_cast<std::size_t>(bus_mode_index(system, k));
            if (c.bus_couplings[0] != 0.0) add_exchange(h, basis, p, b, c.bus_couplings[0], form);
            if (c.bus_couplings[1] != 0.0) add_exchange(h, basis, q, b, c.bus_couplings[1], form);
        }
    }
}

void check_basis(const SystemSpec& system, const FockBasis& basis)
{
    if (basis.dims() != mode_dims(system)) throw ValidationError("basis does not match system modes");
}

}  // namespace

FockBasis system_basis(const SystemSpec& system)
{
    auto dims = mode_dims(system);
    if (system.max_excitations < 0) {
        double full = 1.0;
        for (int d : dims) full *= d;
        if (full > static_cast<double>(system.dimension_cap))
            throw ValidationError("Hilbert dimension " + std::to_string(static_cast<long long>(full)) +
                                  " exceeds cap " + std::to_string(system.dimension_cap));
    }
    FockBasis basis(std::move(dims), system.max_excitations);
    if (basis.size() > system.dimension_cap)
        throw ValidationError("Hilbert dimension " + std::to_string(basis.size()) + " exceeds cap " +
                              std::to_string(system.dimension_cap));
    return basis;
}

OperatorMatrix build_static_hamiltonian(const SystemSpec& system, CouplingForm form)
{
    return build_static_hamiltonian(system, system_basis(system), form);
}

OperatorMatrix build_static_hamiltonian(const SystemSpec& system, const FockBasis& basis, CouplingForm form)
{
    check_basis(system, basis);
    const auto n = static_cast<Eigen::Index>(basis.size());
    OperatorMatrix h = OperatorMatrix::Zero(n, n);
    add_diagonal(h, basis, system, 0.0);
    add_couplings(h, basis, system, form);
    return h;
}

OperatorMatrix build_rwa_hamiltonian(const SystemSpec& system, double frame_frequency)
{
    return build_rwa_hamiltonian(system, system_basis(system), frame_frequency);
}

OperatorMatrix build_rwa_hamiltonian(const SystemSpec& system, const FockBasis& basis, double frame_frequency)
{
    check_basis(system, basis);
    for (const auto& d : system.drives)
        if (d.frequency != frame_frequency)
            throw ValidationError("drive at " + std::to_string(d.frequency) + " GHz is not in the " +
                                  std::to_string(frame_frequency) +
                                  " GHz frame; use time-domain propagation for multi-frequency drives");
    const auto n = static_cast<Eigen::Index>(basis.size());
    OperatorMatrix h = OperatorMatrix::Zero(n, n);
    add_diagonal(h, basis, system, frame_frequency);
    add_couplings(h, basis, system, CouplingForm::RotatingWave);
    for (const auto& d : system.drives) {
        if (d.amplitude == 0.0) continue;
        const cd x = 0.5 * d.amplitude * std::polar(1.0, d.phase);
        const auto m = static_cast<std::size_t>(d.target);
        for (std::size_t i = 0; i < basis.size(); ++i) {
            long j = basis.raised(i, m);
            if (j < 0) continue;
            const double amp = std::sqrt(static_cast<double>(basis.occupation(i, m) + 1));
            h(j, static_cast<Eigen::Index>(i)) += x * amp;
            h(static_cast<Eigen::Index>(i), j) += std::conj(x) * amp;
        }
    }
    return h;
}

double common_drive_frequency(const SystemSpec& system)
{
    if (system.drives.empty()) throw ValidationError("system has no drives");
    const double f = system.drives.front().frequency;
    for (const auto& d : system.drives)
        if (d.frequency != f) throw ValidationError("drives do not share a single frequency");
    return f;
}

double hermiticity_defect(const OperatorMatrix& h)
{
    const double norm = h.norm();
    if (norm == 0.0) return 0.0;
    return (h - h.adjoint()).norm() / norm;
}

}  // namespace sizzle
