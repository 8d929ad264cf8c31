#include <cmath>

#include "sizzle/spectrum.hpp"

namespace sizzle {

namespace {

// Dressed (frequency, anharmonicity) of every transmon from the lab-frame spectrum.
Eigen::VectorXd dressed_parameters(const SystemSpec& system, const FockBasis& basis)
{
    const auto spec = labeled_spectrum(build_static_hamiltonian(system, basis), basis);
    const auto nt = system.transmons.size();
    const auto m = basis.modes();
    const double e0 = spec.energy(excitation_label(m, {}));
    Eigen::VectorXd out(2 * nt);
    for (std::size_t q = 0; q < nt; ++q) {
        const int qi = static_cast<int>(q);
        const double e1 = spec.energy(excitation_label(m, {qi}));
        const double e2 = spec.energy(excitation_label(m, {qi, qi}));
        out(2 * q) = e1 - e0;
        out(2 * q + 1) = (e2 - e1) - (e1 - e0);
    }
    return out;
}

void set_parameters(SystemSpec& system, const Eigen::VectorXd& x)
{
    for (std::size_t q = 0; q < system.transmons.size(); ++q) {
        system.transmons[q].frequency = x(2 * q);
        system.transmons[q].anharmonicity = x(2 * q + 1);
    }
}

}  // namespace

BareFit fit_bare_parameters(const SystemSpec& dressed, double tolerance, int max_iterations)
{
    SystemSpec system = without_drives(dressed);
    validate(system);
    for (const auto& t : system.transmons)
        if (t.levels < 3) throw ValidationError("bare fit needs >= 3 levels per transmon");
    const FockBasis basis = system_basis(system);

    const auto nt = system.transmons.size();
    Eigen::VectorXd target(2 * nt);
    for (std::size_t q = 0; q < nt; ++q) {
        target(2 * q) = dressed.transmons[q].frequency;
        target(2 * q + 1) = dressed.transmons[q].anharmonicity;
    }

    Eigen::VectorXd x = target;
    BareFit fit;
    const double h = 1e-6;
    for (int it = 0; it < max_iterations; ++it) {
        set_parameters(system, x);
        const Eigen::VectorXd r = dressed_parameters(system, basis) - target;
        fit.iterations = it;
        fit.max_error = r.cwiseAbs().maxCoeff();
        if (fit.max_error < tolerance) break;
        Eigen::MatrixXd jac(2 * nt, 2 * nt);
        for (Eigen::Index k = 0; k < x.size(); ++k) {
            Eigen::VectorXd xp = x;
            xp(k) += h;
            set_parameters(system, xp);
            jac.col(k) = (dressed_parameters(system, basis) - target - r) / h;
        }
        x -= jac.partialPivLu().solve(r);
    }
    set_parameters(system, x);
    fit.max_error = (dressed_parameters(system, basis) - target).cwiseAbs().maxCoeff();
    if (!(fit.max_error < 1e3 * tolerance)) throw NonConvergenceError("bare-parameter fit did not converge");
    system.drives = dressed.drives;
    fit.system = system;
    return fit;
}

}  // namespace sizzle
