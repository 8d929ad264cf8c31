#include <algorithm>
#include <cmath>

#include "sizzle/pulse.hpp"

namespace sizzle {

namespace {

using cd = std::complex<double>;

Eigen::Vector3d bloch(const Eigen::Vector2cd& psi)
{
    const double n = psi.squaredNorm();
    if (n <= 0.0) return Eigen::Vector3d::Zero();
    const cd c = std::conj(psi(0)) * psi(1);
    return Eigen::Vector3d(2.0 * c.real(), 2.0 * c.imag(), std::norm(psi(0)) - std::norm(psi(1))) / n;
}

// Rotate r by angle about the unit axis.
Eigen::Vector3d rotate(const Eigen::Vector3d& r, const Eigen::Vector3d& axis, double angle)
{
    return r * std::cos(angle) + axis.cross(r) * std::sin(angle) + axis * axis.dot(r) * (1.0 - std::cos(angle));
}

struct Trajectory {
    std::vector<double> t;
    std::vector<Eigen::Vector3d> from_z, from_x;
};

Eigen::VectorXd residuals(const Trajectory& tr, const Eigen::Vector3d& w)
{
    const double rate = w.norm();
    const Eigen::Vector3d axis = rate > 0.0 ? Eigen::Vector3d(w / rate) : Eigen::Vector3d::UnitZ();
    Eigen::VectorXd r(6 * tr.t.size());
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
        const double angle = kTwoPi * rate * tr.t[k];
        r.segment<3>(6 * k) = rotate(Eigen::Vector3d::UnitZ(), axis, angle) - tr.from_z[k];
        r.segment<3>(6 * k + 3) = rotate(Eigen::Vector3d::UnitX(), axis, angle) - tr.from_x[k];
    }
    return r;
}

// Levenberg-Marquardt on the three rotation-rate components.
Eigen::Vector3d fit_rotation(const Trajectory& tr, Eigen::Vector3d w, double& rms)
{
    double lambda = 1e-3;
    Eigen::VectorXd r = residuals(tr, w);
    double cost = r.squaredNorm();
    for (int it = 0; it < 200; ++it) {
        Eigen::MatrixXd jac(r.size(), 3);
        for (int p = 0; p < 3; ++p) {
            const double h = 1e-7 + 1e-6 * std::abs(w(p));
            Eigen::Vector3d wp = w, wm = w;
            wp(p) += h;
            wm(p) -= h;
            jac.col(p) = (residuals(tr, wp) - residuals(tr, wm)) / (2.0 * h);
        }
        const Eigen::Matrix3d jtj = jac.transpose() * jac;
        const Eigen::Vector3d g = jac.transpose() * r;
        bool improved = false;
        for (int tries = 0; tries < 20 && !improved; ++tries) {
            Eigen::Matrix3d a = jtj;
            a.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
            const Eigen::Vector3d step = -a.ldlt().solve(g);
            const Eigen::VectorXd rn = residuals(tr, w + step);
            const double cn = rn.squaredNorm();
            if (cn < cost) {
                w += step;
                r = rn;
                const double gain = cost - cn;
                cost = cn;
                lambda = std::max(lambda / 3.0, 1e-12);
                improved = true;
                if (step.norm() < 1e-13 || gain < 1e-20) it = 1000;
            } else {
                lambda *= 4.0;
            }
        }
        if (!improved) break;
    }
    rms = std::sqrt(cost / static_cast<double>(r.size()));
    return w;
}

}  // namespace

Eigen::Matrix2cd conditional_block(const Eigen::MatrixXcd& block4, int control, int c)
{
    if (block4.rows() != 4 || block4.cols() != 4) throw ValidationError("conditional_block needs a 4x4 block");
    auto idx = [&](int t) { return control == 0 ? 2 * c + t : 2 * t + c; };
    Eigen::Matrix2cd b;
    for (int r = 0; r < 2; ++r)
        for (int k = 0; k < 2; ++k) b(r, k) = block4(idx(r), idx(k));
    return b;
}

Eigen::Vector3d rotation_vector(const Eigen::Matrix2cd& block)
{
    const cd det = block.determinant();
    if (std::abs(det) == 0.0) throw NumericalError("rotation_vector: singular block");
    const Eigen::Matrix2cd u = block / std::sqrt(det);
    // u = c0 I - i (cx X + cy Y + cz Z)
    const cd c0 = 0.5 * (u(0, 0) + u(1, 1));
    const cd cz = 0.5 * cd(0, 1) * (u(0, 0) - u(1, 1));
    const cd cx = 0.5 * cd(0, 1) * (u(0, 1) + u(1, 0));
    const cd cy = 0.5 * (u(1, 0) - u(0, 1));
    Eigen::Vector4d q(c0.real(), cx.real(), cy.real(), cz.real());
    if (q(0) < 0.0) q = -q;
    const Eigen::Vector3d v = q.tail<3>();
    const double s = v.norm();
    if (s == 0.0) return Eigen::Vector3d::Zero();
    return v / s * (2.0 * std::atan2(s, q(0)));
}

PauliRates fit_pauli_rates(const std::vector<double>& times, const std::vector<Eigen::MatrixXcd>& blocks, int control,
                           const Eigen::Vector3d* guess0, const Eigen::Vector3d* guess1)
{
    if (times.size() != blocks.size() || times.size() < 3) throw ValidationError("fit_pauli_rates: need >= 3 samples");
    Eigen::Vector3d w[2];
    double worst = 0.0;
    const Eigen::Vector2cd z0(1.0, 0.0);
    const Eigen::Vector2cd x0 = Eigen::Vector2cd(1.0, 1.0) / std::sqrt(2.0);
    std::vector<double> det_phase;
    for (int c = 0; c < 2; ++c) {
        Trajectory tr;
        tr.t = times;
        for (const auto& m : blocks) {
            const Eigen::Matrix2cd b = conditional_block(m, control, c);
            tr.from_z.push_back(bloch(b * z0));
            tr.from_x.push_back(bloch(b * x0));
        }
        Eigen::Vector3d start = Eigen::Vector3d::Zero();
        if (c == 0 && guess0) start = *guess0;
        else if (c == 1 && guess1) start = *guess1;
        else {
            // earliest nonzero sample
            for (std::size_t k = 0; k < times.size(); ++k)
                if (times[k] > 0.0) {
                    start = rotation_vector(conditional_block(blocks[k], control, c)) / (kTwoPi * times[k]);
                    break;
                }
        }
        double rms = 0.0;
        w[c] = fit_rotation(tr, start, rms);
        worst = std::max(worst, rms);
    }

    // Control Z from the determinant phases of the two conditional blocks.
    std::vector<double> phase;
    double prev = 0.0, offset = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        const cd ratio = conditional_block(blocks[k], control, 0).determinant() /
                         conditional_block(blocks[k], control, 1).determinant();
        double p = std::arg(ratio);
        if (k > 0) {
            while (p + offset - prev > kPi) offset -= kTwoPi;
            while (p + offset - prev < -kPi) offset += kTwoPi;
        }
        prev = p + offset;
        phase.push_back(prev);
    }
    const Eigen::Map<const Eigen::VectorXd> tv(times.data(), static_cast<Eigen::Index>(times.size()));
    const Eigen::Map<const Eigen::VectorXd> pv(phase.data(), static_cast<Eigen::Index>(phase.size()));
    const double tm = tv.mean();
    const double slope = ((tv.array() - tm) * (pv.array() - pv.mean())).sum() / (tv.array() - tm).square().sum();

    PauliRates out;
    out.fit_residual = worst;
    out.duration = times.back();
    out.rates["IX"] = w[0](0) + w[1](0);
    out.rates["IY"] = w[0](1) + w[1](1);
    out.rates["IZ"] = w[0](2) + w[1](2);
    out.rates["ZX"] = w[0](0) - w[1](0);
    out.rates["ZY"] = w[0](1) - w[1](1);
    out.rates["ZZ"] = w[0](2) - w[1](2);
    out.rates["ZI"] = -slope / kTwoPi;
    return out;
}

PauliRates extract_pauli_rates(const SystemSpec& system, double cr_amplitude, double cr_frequency, int control,
                               int target, const TomographyOptions& options)
{
    if (system.transmons.size() != 2) throw ValidationError("tomography needs a two-transmon system");
    if (control == target || control < 0 || control > 1 || target < 0 || target > 1)
        throw ValidationError("tomography: control and target must be 0 and 1");
    if (cr_amplitude < 0.0) throw ValidationError("CR amplitude must be >= 0");
    PropagationOptions po;
    po.dt = options.dt;
    const Propagator prop(system, po);
    const double carrier = cr_frequency > 0.0 ? cr_frequency : prop.dressed_frequency(target);

    auto schedule_for = [&](double duration) {
        Envelope e;
        e.kind = EnvelopeKind::FlatTopGaussian;
        e.amplitude = cr_amplitude;
        e.duration = duration;
        e.rise_fall_sigmas = 0.0;
        PulseSchedule s;
        s.play(e, carrier, 0.0, control);
        return s;
    };

    const auto pilot = prop.snapshots(schedule_for(options.pilot_duration), {options.pilot_duration});
    Eigen::Vector3d g[2];
    double dominant = 0.0;
    for (int c = 0; c < 2; ++c) {
        g[c] = rotation_vector(conditional_block(pilot[0], control, c)) / (kTwoPi * options.pilot_duration);
        dominant = std::max(dominant, g[c].norm());
    }
    const double T = dominant > 0.0 ? std::clamp(2.0 / dominant, options.min_duration, options.max_duration)
                                    : options.max_duration;
    std::vector<double> times(static_cast<std::size_t>(options.points));
    for (int k = 0; k < options.points; ++k) times[static_cast<std::size_t>(k)] = T * k / (options.points - 1);
    const auto blocks = prop.snapshots(schedule_for(T), times);
    PauliRates rates = fit_pauli_rates(times, blocks, control, &g[0], &g[1]);
    if (!(rates.fit_residual <= options.residual_limit))
        throw NumericalError("tomography fit did not converge: residual " + std::to_string(rates.fit_residual));
    return rates;
}

}  // namespace sizzle
