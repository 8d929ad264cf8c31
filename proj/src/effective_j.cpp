#include <cmath>

#include "sizzle/perturbation.hpp"
#include "sizzle/spectrum.hpp"

namespace sizzle {

EffectiveJ effective_j(const SystemSpec& system, const DriveTone& probe0, const DriveTone& probe1, int q0, int q1,
                       double residual_limit)
{
    if (probe0.frequency != probe1.frequency) throw ValidationError("effective_j: probes must share a frequency");
    if (!(probe0.amplitude > 0.0 && probe1.amplitude > 0.0))
        throw ValidationError("effective_j: probe amplitudes must be positive");
    SystemSpec base = without_drives(system);
    validate(base);

    auto zz_at = [&](double s, double phi) {
        SystemSpec sys = base;
        DriveTone d0 = probe0, d1 = probe1;
        d0.target = q0;
        d1.target = q1;
        d0.amplitude *= s;
        d1.amplitude *= s;
        d1.phase = 0.0;
        d0.phase = wrap_phase(phi);
        sys.drives = {d0, d1};
        return evaluate_pair(sys, q0, q1).zz;
    };

    // Shrink the probe until the phase-dependent part stays below 50 kHz.
    double s = 1.0;
    for (int i = 0; i < 20; ++i) {
        const double swing = 0.5 * std::abs(zz_at(s, 0.0) - zz_at(s, kPi));
        if (swing < 50e-6) break;
        s *= 0.5;
    }

    const auto& t0 = base.transmons[q0];
    const auto& t1 = base.transmons[q1];
    auto kernel = [&](double scale) {
        PerturbativeInputs<double> in;
        in.nu0 = t0.frequency;
        in.nu1 = t1.frequency;
        in.alpha0 = t0.anharmonicity;
        in.alpha1 = t1.anharmonicity;
        in.j = 1.0;
        in.omega0 = probe0.amplitude * scale;
        in.omega1 = probe1.amplitude * scale;
        in.phi = 0.0;
        in.nu_d = probe0.frequency;
        return sizzle_induced_zz(in);
    };

    const double scales[] = {0.5 * s, 0.75 * s, s};
    const double phases[] = {0.0, 0.5 * kPi, kPi, 1.5 * kPi};
    Eigen::MatrixXd a(13, 3);
    Eigen::VectorXd y(13);
    int row = 0;
    const double z0 = zz_at(0.0, 0.0);  // same drive frame, amplitudes off
    a.row(row) << 1.0, 0.0, 0.0;
    y(row++) = z0;
    for (double sc : scales)
        for (double phi : phases) {
            a.row(row) << 1.0, sc * sc, kernel(sc) * std::cos(phi);
            y(row++) = zz_at(sc, phi);
        }
    const Eigen::Vector3d c = a.colPivHouseholderQr().solve(y);
    const Eigen::VectorXd resid = y - a * c;
    const double spread = std::sqrt((y.array() - y.mean()).square().mean());

    EffectiveJ out;
    out.j = c(2);
    out.static_zz = z0;
    out.amplitude_scale = s;
    out.relative_residual = spread > 0.0 ? std::sqrt(resid.array().square().mean()) / spread : 0.0;
    if (out.relative_residual > residual_limit)
        throw NumericalError("effective_j: response is not in the perturbative regime (relative residual " +
                             std::to_string(out.relative_residual) + ")");
    return out;
}

}  // namespace sizzle
