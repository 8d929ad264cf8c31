#pragma once

#include <cmath>
#include <string>

#include "sizzle/errors.hpp"

namespace sizzle {

/// Bare parameters of one transmon pair plus drive settings. Frequencies and amplitudes in GHz,
/// phi is the phase difference phi0 - phi1.
template <typename Scalar = double>
struct PerturbativeInputs {
    Scalar nu0{}, nu1{};
    Scalar alpha0{}, alpha1{};
    Scalar j{};
    Scalar omega0{}, omega1{};
    Scalar phi{};
    Scalar nu_d{};
    Scalar omega_cr{};
};

namespace detail {

// Perturbation theory is meaningless within 1 kHz of a resonance.
inline constexpr double kPoleGuard = 1e-6;

template <typename Scalar>
Scalar guarded(Scalar denominator, const char* what)
{
    using std::abs;
    if (!(abs(denominator) >= Scalar(kPoleGuard)))
        throw NumericalError(std::string("singular detuning: ") + what);
    return denominator;
}

}  // namespace detail

/// Static ZZ from exchange J between two Duffing oscillators.
template <typename Scalar>
Scalar static_zz(const PerturbativeInputs<Scalar>& in)
{
    const Scalar d01 = in.nu0 - in.nu1;
    const Scalar den = detail::guarded(in.alpha1 - d01, "alpha1 - D01") * detail::guarded(in.alpha0 + d01, "alpha0 + D01");
    return Scalar(-2) * in.j * in.j * (in.alpha0 + in.alpha1) / den;
}

/// Drive-induced part only: 2 J a0 a1 W0 W1 cos(phi) / (D0d D1d (D0d + a0)(D1d + a1)).
template <typename Scalar>
Scalar sizzle_induced_zz(const PerturbativeInputs<Scalar>& in)
{
    using std::cos;
    const Scalar d0 = in.nu0 - in.nu_d;
    const Scalar d1 = in.nu1 - in.nu_d;
    const Scalar den = detail::guarded(d0, "D0d") * detail::guarded(d1, "D1d") *
                       detail::guarded(d0 + in.alpha0, "D0d + alpha0") * detail::guarded(d1 + in.alpha1, "D1d + alpha1");
    return Scalar(2) * in.j * in.alpha0 * in.alpha1 * in.omega0 * in.omega1 * cos(in.phi) / den;
}

template <typename Scalar>
Scalar sizzle_zz(const PerturbativeInputs<Scalar>& in)
{
    return static_zz(in) + sizzle_induced_zz(in);
}

/// ZI (which = 0) or IZ (which = 1) coefficient from one isolated drive. The qubit frequency
/// moves by minus half of this.
template <typename Scalar>
Scalar single_drive_stark(const PerturbativeInputs<Scalar>& in, int which)
{
    const Scalar nu = which == 0 ? in.nu0 : in.nu1;
    const Scalar alpha = which == 0 ? in.alpha0 : in.alpha1;
    const Scalar omega = which == 0 ? in.omega0 : in.omega1;
    const Scalar d = nu - in.nu_d;
    const Scalar den = detail::guarded(d, "Did") * detail::guarded(d + alpha, "Did + alpha");
    return -omega * omega * alpha / den;
}

template <typename Scalar>
struct SingleQubitTerms {
    Scalar nu_iz{};
    Scalar nu_zi{};
};

/// Dressed IZ/ZI coefficients: Lamb-shifted bare terms, single-drive Stark terms and the
/// J-drive cross term.
template <typename Scalar>
SingleQubitTerms<Scalar> dressed_single_qubit_terms(const PerturbativeInputs<Scalar>& in)
{
    using std::cos;
    const Scalar d01 = in.nu0 - in.nu1;
    const Scalar d0 = in.nu0 - in.nu_d;
    const Scalar d1 = in.nu1 - in.nu_d;
    const Scalar asum = in.alpha0 + in.alpha1;
    const Scalar j2 = in.j * in.j;
    Scalar lamb_iz{}, lamb_zi{};
    if (in.j != Scalar(0)) {
        const Scalar shared = asum / (detail::guarded(d01 + in.alpha0, "D01 + alpha0") *
                                      detail::guarded(d01 - in.alpha1, "D01 - alpha1"));
        const Scalar inv = Scalar(1) / detail::guarded(d01, "D01");
        lamb_iz = j2 * (inv + shared);
        lamb_zi = j2 * (-inv + shared);
    }
    SingleQubitTerms<Scalar> out;
    out.nu_iz = Scalar(2) * (-in.nu1 + lamb_iz);
    out.nu_zi = Scalar(2) * (-in.nu0 + lamb_zi);

    const Scalar w01 = in.omega0 * in.omega1;
    if (in.omega0 != Scalar(0)) out.nu_zi += single_drive_stark(in, 0);
    if (in.omega1 != Scalar(0)) out.nu_iz += single_drive_stark(in, 1);
    if (in.j != Scalar(0) && w01 != Scalar(0)) {
        const Scalar shared = detail::guarded(in.alpha0 + d0, "alpha0 + D0d") * detail::guarded(in.alpha1 + d1, "alpha1 + D1d");
        const Scalar cross = in.j * asum * w01 * cos(in.phi);
        out.nu_iz += cross / (detail::guarded(d1, "D1d") * shared);
        out.nu_zi += cross / (detail::guarded(d0, "D0d") * shared);
    }
    return out;
}

/// Two-level limit: 2 J W0 W1 cos(phi) / (D0 D1), D_i = nu_i - nu_d.
template <typename Scalar>
Scalar two_level_zz(const PerturbativeInputs<Scalar>& in)
{
    using std::cos;
    const Scalar den = detail::guarded(in.nu0 - in.nu_d, "D0") * detail::guarded(in.nu1 - in.nu_d, "D1");
    return Scalar(2) * in.j * in.omega0 * in.omega1 * cos(in.phi) / den;
}

template <typename Scalar>
struct ZxEstimate {
    Scalar value{};  // J W_cr (A + B W_c^2 + C W_t^2), coefficient of ZX/2
    Scalar a{}, b{}, c{};
    bool mean_alpha = false;  // true when alpha0 != alpha1 and their mean was used
};

/// CR rate with cancellation tones. The closed form is written for the CR tone on transmon 0;
/// control = 1 swaps the labels. The anharmonicity written as delta in the first-order term is alpha.
template <typename Scalar>
ZxEstimate<Scalar> zx_with_cancellation(const PerturbativeInputs<Scalar>& in, int control = 0)
{
    using detail::guarded;
    const bool swap = control == 1;
    const Scalar nc = swap ? in.nu1 : in.nu0;
    const Scalar nt = swap ? in.nu0 : in.nu1;
    const Scalar wc = swap ? in.omega1 : in.omega0;
    const Scalar wt = swap ? in.omega0 : in.omega1;

    ZxEstimate<Scalar> out;
    out.mean_alpha = in.alpha0 != in.alpha1;
    const Scalar a = (in.alpha0 + in.alpha1) / Scalar(2);
    const Scalar D = nc - nt;
    const Scalar D0d = nc - in.nu_d;
    const Scalar D1d = nt - in.nu_d;

    const Scalar aD = guarded(a + D, "alpha + D01");
    const Scalar Dg = guarded(D, "D01");
    const Scalar D2 = D * D;
    out.a = -a / (Dg * aD);

    if (wc != Scalar(0) || wt != Scalar(0)) {
        const Scalar g0 = guarded(D0d, "D0d");
        const Scalar g1 = guarded(D1d, "D1d");
        const Scalar a0d = guarded(a + D0d, "alpha + D0d");
        const Scalar a2D = guarded(Scalar(2) * a + D, "2 alpha + D01");
        const Scalar aDD0 = guarded(a + D + D0d, "alpha + D01 + D0d");
        const Scalar a20 = guarded(Scalar(2) * a + D0d, "2 alpha + D0d");
        const Scalar a3 = guarded(Scalar(3) * a + D + D0d, "3 alpha + D01 + D0d");
        out.b = -a / (Scalar(4) * Dg * aD * aD * g0) + (Scalar(2) * a + D) / (Scalar(8) * aD * g0 * D2) -
                a / (Scalar(4) * a0d * aD * D2) - a / (Scalar(4) * aDD0 * aD * D2) +
                (Scalar(2) * a + D) / (Scalar(8) * g1 * aD * D2) +
                D * (a + D0d + D1d) / (Scalar(8) * aD * aD * a2D * a0d * g1) +
                Scalar(1) / (Scalar(16) * aD * aD) *
                    (Scalar(-2) / g0 - Scalar(2) / a0d - Scalar(2) * a / (a2D * a0d) + Scalar(6) * a / (a2D * a20) +
                     Scalar(2) * a / (a0d * aDD0) + Scalar(6) * a / (a2D * a3) -
                     (Scalar(10) * a + Scalar(4) * D) / (g1 * a2D));

        const Scalar Dma = guarded(D - a, "D01 - alpha");
        const Scalar a1d = guarded(a + D1d, "alpha + D1d");
        const Scalar d1mD = guarded(D1d - D, "D1d - D01");
        const Scalar amD = guarded(a - D, "alpha - D01");
        const Scalar amDd = guarded(a - D + D1d, "alpha - D01 + D1d");
        out.c = a / (Scalar(4) * D2) *
                (Scalar(1) / (Dma * g0) - D / (aD * aD * a0d) + a * (a + Scalar(3) * D) / (Dma * aD * aD * g1) -
                 a * (a + Scalar(3) * D) / (Dma * aD * aD * a1d) + D / (aD * aD * d1mD) + Scalar(1) / (amD * amDd));
    }
    out.value = in.j * in.omega_cr * (out.a + out.b * wc * wc + out.c * wt * wt);
    return out;
}

}  // namespace sizzle
