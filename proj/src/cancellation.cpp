#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/roots.hpp>

#include "sizzle/calibrate.hpp"

namespace sizzle {

namespace {

DriveTone& tone_on(SystemSpec& s, int q)
{
    for (auto& d : s.drives)
        if (d.target == q) return d;
    throw ValidationError("no cancellation tone on transmon " + std::to_string(q));
}

double pair_zz(const SystemSpec& s, const FockBasis& basis, int q0, int q1)
{
    const double f = common_drive_frequency(s);
    const auto spec = labeled_spectrum(build_rwa_hamiltonian(s, basis, f), basis, f);
    return pair_rates(spec, q0, q1).zz;
}

// Root of f on [lo, hi] given f(lo), f(hi) of opposite sign; stops once |f| < tol and the
// bracket is tight.
template <typename F>
double bracketed_root(F&& f, double lo, double hi, double flo, double fhi, double tol)
{
    boost::uintmax_t iters = 100;
    auto stop = [&](double a, double b) { return std::abs(b - a) < 1e-10 * std::max(1.0, std::abs(a)); };
    double best = std::abs(flo) < std::abs(fhi) ? lo : hi;
    double best_f = std::min(std::abs(flo), std::abs(fhi));
    auto tracked = [&](double x) {
        const double v = f(x);
        if (std::abs(v) < best_f) {
            best_f = std::abs(v);
            best = x;
        }
        return v;
    };
    boost::math::tools::toms748_solve(tracked, lo, hi, flo, fhi, stop, iters);
    if (!(best_f < tol)) throw NonConvergenceError("root solve stalled above the null tolerance");
    return best;
}

// Logs every evaluation with the best |zz| so far.
struct Recorder {
    Transcript* transcript;
    double best = std::numeric_limits<double>::infinity();
    Recorder(Transcript* t, const char* coordinate) : transcript(t)
    {
        if (t && t->columns.empty()) t->columns = {coordinate, "zz_GHz", "best_abs_zz_GHz"};
    }
    double operator()(double x, double zz)
    {
        best = std::min(best, std::abs(zz));
        if (transcript) transcript->add({x, zz, best});
        return zz;
    }
};

}  // namespace

double find_cancellation_phase(const SystemSpec& system, int q0, int q1, const CancellationOptions& options,
                               Transcript* transcript)
{
    Recorder record(transcript, "phase_difference_rad");
    SystemSpec s = system;
    validate(s);
    const FockBasis basis = system_basis(s);
    const double base = tone_on(s, q1).phase;
    auto zz = [&](double phi) {
        SystemSpec t = s;
        tone_on(t, q0).phase = wrap_phase(base + phi);
        return record(phi, pair_zz(t, basis, q0, q1));
    };
    const double z0 = zz(0.0), zpi = zz(kPi);
    if (std::abs(z0) < options.null_tolerance && std::abs(z0) <= std::abs(zpi)) return 0.0;
    if (std::abs(zpi) < options.null_tolerance) return kPi;
    if ((z0 > 0.0) == (zpi > 0.0))
        throw NonConvergenceError("insufficient amplitude: zz does not change sign on [0, pi]");
    return bracketed_root(zz, 0.0, kPi, z0, zpi, options.null_tolerance);
}

double find_cancellation_amplitude(const SystemSpec& system, int q0, int q1, const CancellationOptions& options,
                                   Transcript* transcript)
{
    Recorder record(transcript, "amplitude_scale");
    SystemSpec s = system;
    validate(s);
    const FockBasis basis = system_basis(s);
    const double w0 = tone_on(s, q0).amplitude, w1 = tone_on(s, q1).amplitude;
    const double wmax = std::max(w0, w1);
    if (!(wmax > 0.0)) throw ValidationError("cancellation template needs a nonzero amplitude");
    tone_on(s, q0).phase = wrap_phase(tone_on(s, q1).phase + kPi);
    auto zz = [&](double scale) {
        SystemSpec t = s;
        tone_on(t, q0).amplitude = w0 * scale;
        tone_on(t, q1).amplitude = w1 * scale;
        return record(scale, pair_zz(t, basis, q0, q1));
    };
    double prev = zz(0.0);
    if (std::abs(prev) < options.null_tolerance) return 0.0;
    const double smax = options.amplitude_cap / wmax;
    double lo = 0.0;
    for (int k = 1; k <= options.scan_points; ++k) {
        const double hi = smax * k / options.scan_points;
        const double cur = zz(hi);
        if ((cur > 0.0) != (prev > 0.0)) return bracketed_root(zz, lo, hi, prev, cur, options.null_tolerance);
        lo = hi;
        prev = cur;
    }
    throw NonConvergenceError("cancellation unreachable below the amplitude cap");
}

std::vector<double> chain_residuals(const SystemSpec& chain)
{
    SystemSpec s = chain;
    validate(s);
    const FockBasis basis = system_basis(s);
    const double f = common_drive_frequency(s);
    const auto spec = labeled_spectrum(build_rwa_hamiltonian(s, basis, f), basis, f);
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < s.transmons.size(); ++i)
        out.push_back(pair_rates(spec, static_cast<int>(i), static_cast<int>(i + 1)).zz);
    return out;
}

CancellationSolution chain_cancellation(const SystemSpec& chain, double drive_frequency, double seed_stark_shift,
                                        const CancellationOptions& options, Transcript* transcript)
{
    SystemSpec s = without_drives(chain);
    validate(s);
    const int n = static_cast<int>(s.transmons.size());
    if (n < 2) throw ValidationError("chain needs at least two transmons");
    for (const auto& c : s.couplings)
        if (std::abs(c.endpoints[0] - c.endpoints[1]) != 1) throw ValidationError("chain couplings must form a line");
    for (const auto& t : s.transmons)
        if (!(drive_frequency > t.frequency)) throw ValidationError("drive frequency must sit above every qubit");

    const FockBasis basis = system_basis(s);
    for (int q = 0; q < n; ++q) {
        DriveTone d;
        d.target = q;
        d.frequency = drive_frequency;
        d.amplitude = 0.0;
        d.phase = (q % 2 == 0) ? 0.0 : kPi;
        s.drives.push_back(d);
    }
    auto spectrum_of = [&](const SystemSpec& t) {
        return labeled_spectrum(build_rwa_hamiltonian(t, basis, drive_frequency), basis, drive_frequency);
    };
    const auto idle = spectrum_of(s);
    if (transcript && transcript->columns.empty())
        transcript->columns = {"stage", "amplitude_GHz", "objective_GHz", "best_abs_objective_GHz"};

    // Seed: qubit 0 shifted by |seed|.
    const double target = std::abs(seed_stark_shift);
    double best = std::numeric_limits<double>::infinity();
    auto stark0 = [&](double w) {
        SystemSpec t = s;
        t.drives[0].amplitude = w;
        const auto spec = spectrum_of(t);
        const double v = std::abs(dressed_frequency(spec, 0) - dressed_frequency(idle, 0)) - target;
        best = std::min(best, std::abs(v));
        if (transcript) transcript->add({0.0, w, v, best});
        return v;
    };
    {
        double lo = 0.0, flo = -target, found = -1.0;
        for (int k = 1; k <= options.scan_points; ++k) {
            const double hi = options.amplitude_cap * k / options.scan_points;
            const double fhi = stark0(hi);
            if (fhi >= 0.0) {
                found = bracketed_root(stark0, lo, hi, flo, fhi, 1e-3 * std::max(target, 1e-6));
                break;
            }
            lo = hi;
            flo = fhi;
        }
        if (found < 0.0) throw NonConvergenceError("seed Stark shift unreachable below the amplitude cap");
        s.drives[0].amplitude = found;
    }

    for (int i = 0; i + 1 < n; ++i) {
        best = std::numeric_limits<double>::infinity();
        auto zz = [&](double w) {
            SystemSpec t = s;
            t.drives[static_cast<std::size_t>(i + 1)].amplitude = w;
            const double v = pair_rates(spectrum_of(t), i, i + 1).zz;
            best = std::min(best, std::abs(v));
            if (transcript) transcript->add({static_cast<double>(i + 1), w, v, best});
            return v;
        };
        double lo = 0.0, flo = zz(0.0), found = -1.0;
        if (std::abs(flo) < options.null_tolerance) found = 0.0;
        for (int k = 1; found < 0.0 && k <= options.scan_points; ++k) {
            const double hi = options.amplitude_cap * k / options.scan_points;
            const double fhi = zz(hi);
            if ((fhi > 0.0) != (flo > 0.0)) {
                try {
                    found = bracketed_root(zz, lo, hi, flo, fhi, options.null_tolerance);
                } catch (const NonConvergenceError&) {
                    break;
                }
            }
            lo = hi;
            flo = fhi;
        }
        if (found < 0.0)
            throw NonConvergenceError("pair (" + std::to_string(i) + ", " + std::to_string(i + 1) +
                                      ") cannot be nulled below the amplitude cap");
        s.drives[static_cast<std::size_t>(i + 1)].amplitude = found;
    }

    CancellationSolution out;
    out.drive_frequency = drive_frequency;
    const auto final_spec = spectrum_of(s);
    for (int q = 0; q < n; ++q) {
        out.amplitudes.push_back(s.drives[static_cast<std::size_t>(q)].amplitude);
        out.phases.push_back(s.drives[static_cast<std::size_t>(q)].phase);
        out.stark_shifts.push_back(dressed_frequency(final_spec, q) - dressed_frequency(idle, q));
    }
    for (int i = 0; i + 1 < n; ++i) out.residual_zz.push_back(pair_rates(final_spec, i, i + 1).zz);
    out.system = s;
    for (std::size_t i = 0; i < out.residual_zz.size(); ++i)
        if (!(std::abs(out.residual_zz[i]) < options.null_tolerance))
            throw NonConvergenceError("pair (" + std::to_string(i) + ", " + std::to_string(i + 1) +
                                      ") residual above tolerance after later tones were added");
    return out;
}

}  // namespace sizzle
