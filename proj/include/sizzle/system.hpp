#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "sizzle/errors.hpp"

namespace sizzle {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Duffing oscillator. Frequencies in GHz.
struct TransmonSpec {
    double frequency = 5.0;
    double anharmonicity = -0.3;
    int levels = 5;
};

enum class CouplingKind { Direct, Bus };

/// Direct exchange J between two transmons, or a shared bus mode coupled to both.
struct CouplingSpec {
    CouplingKind kind = CouplingKind::Direct;
    std::array<int, 2> endpoints{0, 1};
    double strength = 0.0;
    double bus_frequency = 0.0;
    std::array<double, 2> bus_couplings{0.0, 0.0};
    int bus_levels = 3;

    static CouplingSpec direct(int p, int q, double j);
    static CouplingSpec bus(int p, int q, double nu_bus, double g_p, double g_q, int levels = 3);
};

enum class DriveRole { Cancellation, Gate };

struct DriveTone {
    int target = 0;
    double amplitude = 0.0;  // Rabi amplitude, GHz
    double frequency = 5.0;
    double phase = 0.0;      // kept in [0, 2pi)
    DriveRole role = DriveRole::Cancellation;
};

struct SystemSpec {
    std::vector<TransmonSpec> transmons;
    std::vector<CouplingSpec> couplings;
    std::vector<DriveTone> drives;
    /// Optional cap on total excitation number across all modes; < 0 keeps the full product space.
    int max_excitations = -1;
    std::size_t dimension_cap = 16384;
};

/// Wraps into [0, 2pi).
double wrap_phase(double phi);

/// Throws ValidationError on any broken invariant. Phases are wrapped in place.
void validate(SystemSpec& system);

/// Mode dimensions: transmons first, then one bus mode per Bus coupling in coupling order.
std::vector<int> mode_dims(const SystemSpec& system);

/// Index of the bus mode belonging to couplings[k], or -1 for a direct coupling.
int bus_mode_index(const SystemSpec& system, std::size_t k);

SystemSpec without_drives(SystemSpec system);

}  // namespace sizzle
