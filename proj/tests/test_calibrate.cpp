#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "sizzle/calibrate.hpp"
#include "sizzle/perturbation.hpp"
#include "sizzle/spectrum.hpp"
#include "support.hpp"

using namespace sizzle;
using testing_support::kron;
using testing_support::load_preset;

namespace {

Eigen::Matrix2cd pauli(char axis)
{
    using C = std::complex<double>;
    Eigen::Matrix2cd p;
    switch (axis) {
    case 'x': p << 0, 1, 1, 0; break;
    case 'y': p << 0, C(0, -1), C(0, 1), 0; break;
    default: p << 1, 0, 0, -1; break;
    }
    return p;
}

Eigen::Matrix2cd projector(int state)
{
    Eigen::Matrix2cd p = Eigen::Matrix2cd::Zero();
    p(state, state) = 1.0;
    return p;
}

// Target is qubit 0 (most significant), control is qubit 1. Each rotation below is conditioned on
// the control state, so the seven generators map one to one onto the monitored CNOT angles.
struct ErrorGenerators {
    double x[2] = {0, 0}, y[2] = {0, 0}, z[2] = {0, 0}, control_z = 0;
};

Eigen::Matrix4cd error_unitary(const ErrorGenerators& g)
{
    Eigen::MatrixXcd gen = Eigen::MatrixXcd::Zero(4, 4);
    for (int c = 0; c < 2; ++c) {
        const Eigen::Matrix2cd local = g.x[c] * pauli('x') + g.y[c] * pauli('y') + g.z[c] * pauli('z');
        gen += kron(local, projector(c));
    }
    gen += g.control_z * kron(Eigen::Matrix2cd::Identity(), pauli('z'));
    const Eigen::MatrixXcd u = (std::complex<double>(0, -0.5) * gen).exp();
    return u;
}

// Linear plant with a known root. Each parameter moves a pair of generators.
Eigen::Matrix4cd synthetic_cnot(const CnotCalibration& c)
{
    const double dc = c.control_amplitude - 0.03, dt = c.target_amplitude - 0.021;
    const double db = c.target_drag_beta - 0.2, dg = c.target_skew_gamma - 0.05;
    const double dp = std::remainder(c.control_phase - 0.1, kTwoPi);
    const double df = std::remainder(c.target_frame_change - 0.25, kTwoPi);
    ErrorGenerators g;
    g.x[0] = 30 * dc + 40 * dt + 5 * dt * dt;
    g.x[1] = -30 * dc + 40 * dt;
    g.y[0] = 0.5 * db + 0.8 * dp;
    g.y[1] = 0.5 * db - 0.8 * dp;
    g.z[0] = df + 0.3 * dg;
    g.z[1] = df - 0.3 * dg;
    g.control_z = std::remainder(c.control_frame_change + 0.15, kTwoPi);
    return cnot_gate(1, 0) * error_unitary(g);
}

Eigen::Matrix4cd synthetic_cz(const CzCalibration& c)
{
    // Conditional phase grows with the control amplitude; frame changes add single-qubit z.
    const double conditional = kPi * c.control_amplitude / 0.026;
    ErrorGenerators g;
    g.z[0] = std::remainder(c.target_frame_change - 0.4, kTwoPi);
    g.z[1] = g.z[0] - (conditional - kPi);
    g.control_z = std::remainder(c.control_frame_change + 0.2, kTwoPi);
    return cz_gate() * error_unitary(g);
}

SystemSpec with_pair_drives(SystemSpec s, double w0, double w1, double nu_d, double phi0, double phi1 = 0.0)
{
    s.drives = {{0, w0, nu_d, phi0}, {1, w1, nu_d, phi1}};
    return s;
}

double numeric_zz(SystemSpec s) { return evaluate_pair(s, 0, 1).zz; }

SystemSpec chain_prefix(const SystemSpec& chain, int n)
{
    SystemSpec s;
    s.transmons.assign(chain.transmons.begin(), chain.transmons.begin() + n);
    for (const auto& c : chain.couplings)
        if (c.endpoints[0] < n && c.endpoints[1] < n) s.couplings.push_back(c);
    s.max_excitations = chain.max_excitations;
    return s;
}

}  // namespace

// --- angle extraction ---

TEST(RepetitionFit, RecoversSyntheticAngles)
{
    for (double theta : {-0.7, -0.02, 0.004, 0.15, 0.9}) {
        for (double offset : {0.5, 0.47}) {
            std::vector<double> p;
            for (int n = 0; n <= 17; ++n) p.push_back(offset - 0.5 * std::sin(n * theta));
            EXPECT_NEAR(fit_repetition_angle(p), theta, 1e-7) << "theta " << theta << " offset " << offset;
        }
    }
}

TEST(RepetitionFit, PopulationsFollowTheSineLawForEveryAxis)
{
    for (int measured : {0, 1})
        for (char axis : {'x', 'y', 'z'})
            for (int other : {0, 1})
                for (double theta : {-0.4, 0.013, 0.3}) {
                    const auto p = repetition_populations(qubit_rotation(measured, axis, theta), measured, axis, other, 17);
                    ASSERT_EQ(p.size(), 18u);
                    for (std::size_t n = 0; n < p.size(); ++n)
                        EXPECT_NEAR(p[n], 0.5 * (1.0 - std::sin(n * theta)), 1e-12)
                            << "qubit " << measured << " axis " << axis << " n " << n;
                    EXPECT_NEAR(sequence_angle(qubit_rotation(measured, axis, theta), measured, axis, other, 17), theta,
                                1e-7);
                }
}

TEST(RepetitionFit, RotationOfTheOtherQubitIsInvisible)
{
    for (char axis : {'x', 'y', 'z'})
        EXPECT_NEAR(sequence_angle(qubit_rotation(1, axis, 0.3), 0, axis, 0, 17), 0.0, 1e-7);
}

TEST(RepetitionFit, ConditionalAnglesSeparateByControlState)
{
    ErrorGenerators g;
    g.x[0] = 0.02;
    g.x[1] = -0.05;
    const Eigen::Matrix4cd k = error_unitary(g);
    EXPECT_NEAR(sequence_angle(k, 0, 'x', 0, 17), 0.02, 1e-7);
    EXPECT_NEAR(sequence_angle(k, 0, 'x', 1, 17), -0.05, 1e-7);
}

TEST(RepetitionFit, RejectsBadArguments)
{
    const Eigen::Matrix4cd id = Eigen::Matrix4cd::Identity();
    EXPECT_THROW(repetition_populations(id, 2, 'x', 0, 17), ValidationError);
    EXPECT_THROW(repetition_populations(id, 0, 'q', 0, 17), ValidationError);
    EXPECT_THROW(repetition_populations(id, 0, 'x', 3, 17), ValidationError);
    EXPECT_THROW(repetition_populations(id, 0, 'x', 0, 1), ValidationError);
    EXPECT_THROW(qubit_rotation(2, 'x', 0.1), ValidationError);
}

// --- frame changes ---

TEST(FrameChanges, AnalyticMatchesPropagatedVirtualZ)
{
    const SystemSpec system = load_preset("device-a").system;
    CnotCalibration cal;
    cal.control_amplitude = 0.03;
    cal.target_amplitude = 0.01;
    cal.target_drag_beta = 0.5;
    cal.carrier_frequency = Propagator(system).dressed_frequency(cal.target);
    const Propagator prop(system);
    const Eigen::MatrixXcd bare = prop.run(cnot_schedule(cal)).computational_block;
    cal.target_frame_change = 0.7;
    cal.control_frame_change = -0.4;
    const Eigen::MatrixXcd with_fc = prop.run(cnot_schedule(cal)).computational_block;
    const Eigen::Matrix4cd analytic = apply_frame_changes(bare, 0.7, -0.4);
    EXPECT_LT((analytic - with_fc).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(FrameChanges, ComposeAdditively)
{
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-3, 3);
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Random();
    const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
    const Eigen::Matrix4cd twice = apply_frame_changes(apply_frame_changes(m, a, b), c, d);
    EXPECT_LT((twice - apply_frame_changes(m, a + c, b + d)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((apply_frame_changes(m, 0, 0) - m).cwiseAbs().maxCoeff(), 1e-15);
}

// --- fine loops on synthetic plants ---

TEST(CnotLoop, ConvergesOnSyntheticPlant)
{
    // Start within a few hundredths of a radian per angle, as the rough scans leave it. Seventeen
    // repetitions of a larger error wind past a radian and the sine fits stop being local.
    CnotCalibration start;
    start.control_amplitude = 0.0305;
    start.target_amplitude = 0.0208;
    start.target_drag_beta = 0.23;
    start.target_skew_gamma = 0.05;
    start.control_phase = 0.08;
    start.target_phase = 0.08;
    start.target_frame_change = 0.23;
    start.control_frame_change = -0.13;
    Transcript transcript;
    const CnotCalibration out = refine_cnot(start, synthetic_cnot, CalibrationOptions{}, &transcript);
    EXPECT_TRUE(out.converged);
    EXPECT_GT(out.iterations, 0);
    ASSERT_EQ(out.angles.size(), 7u);
    for (double a : out.angles) EXPECT_LT(std::abs(a), 0.01);
    EXPECT_GT(gate_fidelity(synthetic_cnot(out), cnot_gate(1, 0)), 0.9999);
    EXPECT_NEAR(out.control_amplitude, 0.03, 1e-3);
    EXPECT_NEAR(out.target_amplitude, 0.021, 1e-3);
    EXPECT_NEAR(std::remainder(out.control_phase - 0.1, kTwoPi), 0.0, 0.02);
    EXPECT_NEAR(std::remainder(out.target_phase - 0.1, kTwoPi), 0.0, 0.02);
    EXPECT_FALSE(transcript.rows.empty());
}

TEST(CnotLoop, CalibratedPointIsAFixedPoint)
{
    CnotCalibration start;
    start.control_amplitude = 0.03;
    start.target_amplitude = 0.021;
    start.target_drag_beta = 0.2;
    start.target_skew_gamma = 0.05;
    start.control_phase = 0.1;
    start.target_phase = 0.1;
    start.target_frame_change = 0.25;
    start.control_frame_change = -0.15;
    const CnotCalibration out = refine_cnot(start, synthetic_cnot, CalibrationOptions{});
    EXPECT_TRUE(out.converged);
    EXPECT_EQ(out.iterations, 0);
    EXPECT_DOUBLE_EQ(out.control_amplitude, start.control_amplitude);
    EXPECT_DOUBLE_EQ(out.target_amplitude, start.target_amplitude);
    EXPECT_DOUBLE_EQ(out.target_frame_change, start.target_frame_change);
    EXPECT_DOUBLE_EQ(out.control_frame_change, start.control_frame_change);
}

TEST(CnotLoop, UnresponsivePlantRaisesNonConvergence)
{
    // A plant stuck with a visible conditional error cannot converge; the stall guard must fire.
    ErrorGenerators g;
    g.x[0] = 0.05;
    const Eigen::Matrix4cd stuck = cnot_gate(1, 0) * error_unitary(g);
    const auto frozen = [&](const CnotCalibration&) { return stuck; };
    EXPECT_THROW(refine_cnot(CnotCalibration{}, frozen, CalibrationOptions{}), NonConvergenceError);
}

TEST(CnotLoop, IdentityIsAliasedWithCnot)
{
    // Every repetition of a pi rotation returns to a sin(n pi) = 0 population, so the sequences
    // cannot tell CNOT from the identity. Guarding against that is the rough scans' job.
    const auto identity = [](const CnotCalibration&) { return Eigen::Matrix4cd(Eigen::Matrix4cd::Identity()); };
    const CnotCalibration out = refine_cnot(CnotCalibration{}, identity, CalibrationOptions{});
    EXPECT_EQ(out.iterations, 0);
}

TEST(CzLoop, IdealPlantIsAFixedPoint)
{
    CzCalibration start;
    start.control_amplitude = 0.026;
    start.target_frame_change = 0.4;
    start.control_frame_change = -0.2;
    const CzCalibration out = refine_cz(start, synthetic_cz, CalibrationOptions{});
    EXPECT_TRUE(out.converged);
    EXPECT_EQ(out.iterations, 0);
    EXPECT_GT(gate_fidelity(synthetic_cz(out), cz_gate()), 1.0 - 1e-12);
}

TEST(CzLoop, ConvergesOnSyntheticPlant)
{
    CzCalibration start;
    start.control_amplitude = 0.024;
    start.target_frame_change = 0.1;
    start.control_frame_change = 0.3;
    const CzCalibration out = refine_cz(start, synthetic_cz, CalibrationOptions{});
    EXPECT_TRUE(out.converged);
    for (double a : out.angles) EXPECT_LT(std::abs(a), 0.01);
    EXPECT_NEAR(out.control_amplitude, 0.026, 1e-4);
    EXPECT_GT(gate_fidelity(synthetic_cz(out), cz_gate()), 0.9999);
}

TEST(CzLoop, ZeroAmplitudeCannotConverge)
{
    const auto cfg = load_preset("device-a", "cancellation");
    CzCalibration start = cfg.cz.start;
    start.control_amplitude = 0.0;
    start.target_amplitude = 0.0;
    Transcript transcript;
    EXPECT_THROW(calibrate_cz(cfg.system, start, cfg.calibration, &transcript), NonConvergenceError);
    EXPECT_FALSE(transcript.columns.empty());
}

TEST(CzCalibrationRun, DoubledDurationAtHalfRateGivesTheSameGate)
{
    const auto cfg = load_preset("device-a", "cancellation");
    const CzCalibration short_gate = calibrate_cz(cfg.system, cfg.cz.start, cfg.calibration);
    CzCalibration slow = cfg.cz.start;
    slow.duration *= 2.0;
    slow.control_amplitude /= std::sqrt(2.0);
    slow.target_amplitude /= std::sqrt(2.0);
    const CzCalibration long_gate = calibrate_cz(cfg.system, slow, cfg.calibration);
    EXPECT_TRUE(short_gate.converged);
    EXPECT_TRUE(long_gate.converged);
    EXPECT_GE(short_gate.fidelity, 0.999);
    // Both land on CZ with matching fidelity. Their residual off-diagonal errors differ, which the
    // z-angle loop does not control, so the two blocks are not closer to each other than to CZ.
    EXPECT_LT(std::abs(long_gate.fidelity - short_gate.fidelity), 1e-3);
}

// --- cancellation solvers ---

TEST(CancellationPhase, NearPiJustAboveTheNullAmplitudes)
{
    const auto cfg = load_preset("device-a", "cancellation");
    SystemSpec s = cfg.system;
    for (auto& d : s.drives) d.amplitude *= 1.02;
    const double phi = find_cancellation_phase(s);
    EXPECT_GT(phi, kPi - 0.35);
    EXPECT_LT(phi, kPi);
    SystemSpec check = s;
    check.drives[0].phase = wrap_phase(check.drives[1].phase + phi);
    EXPECT_LT(std::abs(numeric_zz(check)), 5e-6);
}

TEST(CancellationPhase, MatchesSinusoidalInversion)
{
    // zz(phi) = S + I cos(phi) in the weak-drive regime, so the null is arccos(-S / I) with S and I
    // measured from the phi = 0 and phi = pi endpoints.
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> nu0(4.8, 5.0), det(0.06, 0.12), alpha(-0.33, -0.27), jj(0.002, 0.006),
        drive(0.15, 0.25), ratio(0.4, 0.7);
    int tested = 0;
    for (int trial = 0; trial < 12 && tested < 4; ++trial) {
        SystemSpec s;
        const double f0 = nu0(rng);
        s.transmons = {{f0, alpha(rng), 5}, {f0 + det(rng), alpha(rng), 5}};
        s.couplings = {CouplingSpec::direct(0, 1, jj(rng))};
        const double nd = s.transmons[1].frequency + drive(rng), r = ratio(rng);
        // Scale the tones so the drive-induced amplitude is about 1.6 times the static ZZ.
        PerturbativeInputs<double> in{s.transmons[0].frequency, s.transmons[1].frequency, s.transmons[0].anharmonicity,
                                      s.transmons[1].anharmonicity, s.couplings[0].strength, 1.0, r, 0.0, nd};
        const double unit = std::abs(sizzle_induced_zz(in)), stat = std::abs(static_zz(in));
        const double w0 = std::sqrt(1.6 * stat / unit);
        const SystemSpec base = with_pair_drives(s, w0, r * w0, nd, 0.0);
        const double z0 = numeric_zz(base);
        const double zpi = numeric_zz(with_pair_drives(s, w0, r * w0, nd, kPi));
        if ((z0 > 0) == (zpi > 0)) continue;
        const double mean = 0.5 * (z0 + zpi), amp = 0.5 * (z0 - zpi);
        const double oracle = std::acos(-mean / amp);
        EXPECT_NEAR(find_cancellation_phase(base), oracle, 2.0 * kPi / 180.0) << "trial " << trial;
        ++tested;
    }
    EXPECT_GE(tested, 3);
}

TEST(CancellationPhase, InvariantUnderGlobalPhase)
{
    const auto cfg = load_preset("device-a", "phase-sweep");
    const double ref = find_cancellation_phase(cfg.system);
    SystemSpec shifted = cfg.system;
    for (auto& d : shifted.drives) d.phase = wrap_phase(d.phase + 1.1);
    EXPECT_NEAR(find_cancellation_phase(shifted), ref, 1e-6);
}

TEST(CancellationPhase, WeakTonesRaiseNonConvergence)
{
    const auto cfg = load_preset("device-a", "phase-sweep");
    SystemSpec s = cfg.system;
    for (auto& d : s.drives) d.amplitude *= 0.1;
    EXPECT_THROW(find_cancellation_phase(s), NonConvergenceError);
}

TEST(CancellationAmplitude, ScaleOneAtTheCancellationPoint)
{
    const auto cfg = load_preset("device-a", "cancellation");
    Transcript transcript;
    const double s = find_cancellation_amplitude(cfg.system, 0, 1, {}, &transcript);
    EXPECT_NEAR(s, 1.0, 0.02);
    ASSERT_FALSE(transcript.rows.empty());
    for (std::size_t i = 1; i < transcript.rows.size(); ++i)
        EXPECT_LE(transcript.rows[i][2], transcript.rows[i - 1][2]);
    EXPECT_LT(transcript.rows.back()[2], 5e-6);
}

TEST(CancellationAmplitude, UncoupledPairNeedsNoTone)
{
    auto cfg = load_preset("device-a", "cancellation");
    cfg.system.couplings.clear();
    EXPECT_DOUBLE_EQ(find_cancellation_amplitude(cfg.system), 0.0);
}

TEST(CancellationAmplitude, InvariantUnderGlobalPhase)
{
    const auto cfg = load_preset("device-a", "estimated");
    const double ref = find_cancellation_amplitude(cfg.system);
    SystemSpec shifted = cfg.system;
    for (auto& d : shifted.drives) d.phase = wrap_phase(d.phase + 2.3);
    EXPECT_NEAR(find_cancellation_amplitude(shifted), ref, 1e-6);
}

TEST(CancellationAmplitude, CapBelowTheNullRaisesNonConvergence)
{
    const auto cfg = load_preset("device-a", "estimated");
    CancellationOptions options;
    options.amplitude_cap = 0.03;
    EXPECT_THROW(find_cancellation_amplitude(cfg.system, 0, 1, options), NonConvergenceError);
}

TEST(ChainCancellation, TwoQubitChainAgreesWithPairSolver)
{
    const SystemSpec pair = chain_prefix(load_preset("device-b-chain").system, 2);
    const CancellationSolution sol = chain_cancellation(pair, 5.1, -0.001);
    ASSERT_EQ(sol.amplitudes.size(), 2u);
    EXPECT_GT(sol.amplitudes[1], 0.0);
    // Same tones as a cancellation template: the pair solver must land on scale one.
    const double s = find_cancellation_amplitude(sol.system);
    EXPECT_NEAR(s, 1.0, 1e-6);
    // The seed is defined with only the first tone on; the second tone nudges it afterwards.
    SystemSpec seed_only = sol.system;
    seed_only.drives[1].amplitude = 0.0;
    const auto idle = system_spectrum(without_drives(seed_only));
    const auto driven = system_spectrum(seed_only);
    const double shift = dressed_frequency(driven, 0) - dressed_frequency(idle, 0);
    EXPECT_NEAR(std::abs(shift), 0.001, 1e-6);
    EXPECT_NEAR(std::abs(sol.stark_shifts[0]), 0.001, 5e-5);
}

TEST(ChainCancellation, MirroredChainMirrorsTheSolution)
{
    SystemSpec chain;
    chain.transmons = {{4.9, -0.29, 3}, {4.97, -0.288, 3}, {4.9, -0.29, 3}};
    chain.couplings = {CouplingSpec::direct(0, 1, 0.001), CouplingSpec::direct(1, 2, 0.001)};
    const CancellationSolution sol = chain_cancellation(chain, 5.1, -0.001);
    ASSERT_EQ(sol.residual_zz.size(), 2u);
    for (double r : sol.residual_zz) EXPECT_LT(std::abs(r), 5e-6);
    // Outer qubits see identical environments, so the pair ZZ values agree by symmetry.
    const auto again = chain_residuals(sol.system);
    EXPECT_NEAR(again[0], sol.residual_zz[0], 1e-12);
    EXPECT_NEAR(again[1], sol.residual_zz[1], 1e-12);
    SystemSpec mirrored = sol.system;
    std::swap(mirrored.drives[0].amplitude, mirrored.drives[2].amplitude);
    const auto flipped = chain_residuals(mirrored);
    EXPECT_NEAR(flipped[0], again[1], 1e-12);
    EXPECT_NEAR(flipped[1], again[0], 1e-12);
}

TEST(ChainCancellation, ResidualsMatchFreshEvaluation)
{
    const SystemSpec chain = chain_prefix(load_preset("device-b-chain").system, 4);
    Transcript transcript;
    const CancellationSolution sol = chain_cancellation(chain, 5.1, -0.001, {}, &transcript);
    const auto fresh = chain_residuals(sol.system);
    ASSERT_EQ(fresh.size(), 3u);
    for (std::size_t i = 0; i < fresh.size(); ++i) EXPECT_NEAR(fresh[i], sol.residual_zz[i], 1e-9);
    EXPECT_EQ(transcript.columns.size(), 4u);
    for (std::size_t i = 1; i < transcript.rows.size(); ++i)
        if (transcript.rows[i][0] == transcript.rows[i - 1][0])
            EXPECT_LE(transcript.rows[i][3], transcript.rows[i - 1][3]);
}

TEST(ChainCancellation, RejectsBadLayouts)
{
    SystemSpec chain;
    chain.transmons = {{4.9, -0.29, 3}, {4.97, -0.288, 3}, {4.9, -0.29, 3}};
    chain.couplings = {CouplingSpec::direct(0, 2, 0.001)};
    EXPECT_THROW(chain_cancellation(chain, 5.1, -0.001), ValidationError);
    chain.couplings = {CouplingSpec::direct(0, 1, 0.001)};
    EXPECT_THROW(chain_cancellation(chain, 4.95, -0.001), ValidationError);
}
