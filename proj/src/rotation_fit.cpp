#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>

#include "sizzle/calibrate.hpp"
#include "sizzle/errors.hpp"

namespace sizzle {

namespace {

Eigen::Matrix2cd single_rotation(char axis, double angle)
{
    using C = std::complex<double>;
    const double c = std::cos(angle / 2.0), s = std::sin(angle / 2.0);
    Eigen::Matrix2cd r;
    switch (axis) {
    case 'x': r << c, C(0, -s), C(0, -s), c; break;
    case 'y': r << c, -s, s, c; break;
    case 'z': r << std::polar(1.0, -angle / 2.0), 0.0, 0.0, std::polar(1.0, angle / 2.0); break;
    default: throw ValidationError(std::string("unknown rotation axis '") + axis + "'");
    }
    return r;
}

// Offset-only least squares with the contrast pinned at its ideal value of 1/2. With a free
// contrast the angle and contrast are degenerate for the small angles the loops drive toward.
double misfit(const std::vector<double>& p, double theta, double* offset = nullptr)
{
    double mean = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n) mean += p[n] + 0.5 * std::sin(static_cast<double>(n) * theta);
    mean /= static_cast<double>(p.size());
    double r = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n) {
        const double e = p[n] - (mean - 0.5 * std::sin(static_cast<double>(n) * theta));
        r += e * e;
    }
    if (offset) *offset = mean;
    return r;
}

}  // namespace

Eigen::Matrix4cd qubit_rotation(int qubit, char axis, double angle)
{
    if (qubit != 0 && qubit != 1) throw ValidationError("qubit index must be 0 or 1");
    const Eigen::Matrix2cd r = single_rotation(axis, angle);
    Eigen::Matrix4cd out = Eigen::Matrix4cd::Zero();
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int o = 0; o < 2; ++o) {
                const int row = qubit == 0 ? 2 * a + o : 2 * o + a;
                const int col = qubit == 0 ? 2 * b + o : 2 * o + b;
                out(row, col) = r(a, b);
            }
    return out;
}

std::vector<double> repetition_populations(const Eigen::Matrix4cd& k, int measured, char axis, int other_state,
                                           int reps)
{
    if (measured != 0 && measured != 1) throw ValidationError("measured qubit must be 0 or 1");
    if (other_state != 0 && other_state != 1) throw ValidationError("spectator state must be 0 or 1");
    if (reps < 2) throw ValidationError("need at least two repetitions");

    Eigen::Matrix4cd prep = Eigen::Matrix4cd::Identity(), post;
    switch (axis) {
    case 'x': post = qubit_rotation(measured, 'x', -kPi / 2); break;
    case 'y': post = qubit_rotation(measured, 'y', -kPi / 2); break;
    case 'z':
        prep = qubit_rotation(measured, 'y', kPi / 2);
        post = qubit_rotation(measured, 'x', kPi / 2);
        break;
    default: throw ValidationError(std::string("unknown rotation axis '") + axis + "'");
    }
    const int other = 1 - measured;
    Eigen::Vector4cd psi = Eigen::Vector4cd::Zero();
    psi(other == 0 ? 2 * other_state : other_state) = 1.0;
    psi = prep * psi;

    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(reps) + 1);
    for (int n = 0; n <= reps; ++n) {
        const Eigen::Vector4cd final_state = post * psi;
        double p1 = 0.0;
        for (int i = 0; i < 4; ++i) {
            const int bit = measured == 0 ? i / 2 : i % 2;
            if (bit == 1) p1 += std::norm(final_state(i));
        }
        out.push_back(p1);
        psi = k * psi;
    }
    return out;
}

double fit_repetition_angle(const std::vector<double>& populations)
{
    if (populations.size() < 3) throw ValidationError("need at least three repetition points");
    for (double p : populations)
        if (!std::isfinite(p)) throw NumericalError("non-finite population in repetition data");

    constexpr int grid = 2048;
    double best_theta = 0.0, best = misfit(populations, 0.0);
    const double step = 2.0 * kPi / grid;
    for (int i = 1; i < grid; ++i) {
        const double theta = -kPi + i * step;
        const double r = misfit(populations, theta);
        if (r < best) {
            best = r;
            best_theta = theta;
        }
    }
    auto f = [&](double t) { return misfit(populations, t); };
    const auto refined =
        boost::math::tools::brent_find_minima(f, best_theta - step, best_theta + step, std::numeric_limits<double>::digits / 2);
    return refined.second <= best ? refined.first : best_theta;
}

double sequence_angle(const Eigen::Matrix4cd& k, int measured, char axis, int other_state, int reps)
{
    return fit_repetition_angle(repetition_populations(k, measured, axis, other_state, reps));
}

Eigen::Matrix4cd apply_frame_changes(const Eigen::Matrix4cd& block, double angle_q0, double angle_q1)
{
    Eigen::Matrix4cd out = block;
    for (int i = 0; i < 4; ++i) out.row(i) *= std::polar(1.0, -(angle_q0 * (i / 2) + angle_q1 * (i % 2)));
    return out;
}

}  // namespace sizzle
