#pragma once

// Shared driver for the repeated-sequence calibration loops.

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "sizzle/calibrate.hpp"
#include "sizzle/errors.hpp"

namespace sizzle::detail {

struct FineLoop {
    // One parameter per monitored angle, each with its finite-difference step. Virtual Z angles
    // sit in the same Newton step: their Jacobian columns are exact unit-gain updates, and the
    // Stark phases the amplitude steps drag along get corrected in the same iteration.
    std::vector<double> newton_steps;
    std::function<std::vector<double>(const std::vector<double>&)> angles;
};

struct FineLoopResult {
    std::vector<double> params;
    std::vector<double> angles;
    int iterations = 0;
};

inline double max_abs(const std::vector<double>& v)
{
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double norm2(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline void log_row(Transcript* t, int iteration, const std::vector<double>& p, const std::vector<double>& a)
{
    if (!t) return;
    std::vector<double> row{static_cast<double>(iteration)};
    row.insert(row.end(), p.begin(), p.end());
    row.insert(row.end(), a.begin(), a.end());
    row.push_back(max_abs(a));
    t->add(std::move(row));
}

inline FineLoopResult run_fine_loop(std::vector<double> p, const FineLoop& loop, const CalibrationOptions& options,
                                    Transcript* transcript)
{
    const std::size_t m = loop.newton_steps.size();
    std::vector<double> a = loop.angles(p);
    int iteration = 0;
    log_row(transcript, iteration, p, a);

    std::vector<double> prev_p = p, last_step(m, 0.0);
    double prev_norm = std::numeric_limits<double>::infinity(), best = prev_norm;
    int since_best = 0;

    while (max_abs(a) >= options.tolerance) {
        if (iteration >= options.max_iterations) {
            std::ostringstream msg;
            msg << "calibration did not converge in " << options.max_iterations << " iterations; last angles:";
            for (double x : a) msg << ' ' << x;
            throw NonConvergenceError(msg.str());
        }
        const double norm = norm2(a);
        if (norm < best * (1.0 - 1e-3)) {
            best = norm;
            since_best = 0;
        } else if (++since_best >= options.stall_iterations) {
            std::ostringstream msg;
            msg << "calibration stalled after " << iteration << " iterations; last angles:";
            for (double x : a) msg << ' ' << x;
            throw NonConvergenceError(msg.str());
        }
        ++iteration;

        if (norm > prev_norm && iteration > 1) {
            // Residual grew: retreat to half of the previous Newton step.
            for (std::size_t i = 0; i < m; ++i) last_step[i] *= 0.5;
            for (std::size_t i = 0; i < m; ++i) p[i] = prev_p[i] + last_step[i];
        } else {
            Eigen::MatrixXd jac(m, m);
            Eigen::VectorXd r(m);
            for (std::size_t i = 0; i < m; ++i) r(i) = a[i];
            for (std::size_t j = 0; j < m; ++j) {
                std::vector<double> q = p;
                q[j] += loop.newton_steps[j];
                const std::vector<double> aq = loop.angles(q);
                for (std::size_t i = 0; i < m; ++i) {
                    // Angles live on a circle; take the short way round.
                    const double d = std::remainder(aq[i] - a[i], 2.0 * kPi);
                    jac(i, j) = d;  // per unit of the scaled step
                }
            }
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac, Eigen::ComputeFullU | Eigen::ComputeFullV);
            const Eigen::VectorXd sv = svd.singularValues();
            Eigen::VectorXd coeff = svd.matrixU().transpose() * r;
            for (Eigen::Index k = 0; k < sv.size(); ++k) coeff(k) = sv(k) > 1e-9 * sv(0) ? coeff(k) / sv(k) : 0.0;
            const Eigen::VectorXd dx = -(svd.matrixV() * coeff);

            prev_p = p;
            prev_norm = norm;
            for (std::size_t i = 0; i < m; ++i) {
                last_step[i] = dx(static_cast<Eigen::Index>(i)) * loop.newton_steps[i];
                p[i] += last_step[i];
            }
        }
        a = loop.angles(p);
        for (double x : a)
            if (!std::isfinite(x)) throw NumericalError("non-finite angle in calibration loop");
        log_row(transcript, iteration, p, a);
    }
    return {p, a, iteration};
}

}  // namespace sizzle::detail
