#include "sizzle/system.hpp"

#include <cmath>
#include <set>
#include <string>
#include <utility>

namespace sizzle {

CouplingSpec CouplingSpec::direct(int p, int q, double j)
{
    CouplingSpec c;
    c.kind = CouplingKind::Direct;
    c.endpoints = {p, q};
    c.strength = j;
    return c;
}

CouplingSpec CouplingSpec::bus(int p, int q, double nu_bus, double g_p, double g_q, int levels)
{
    CouplingSpec c;
    c.kind = CouplingKind::Bus;
    c.endpoints = {p, q};
    c.bus_frequency = nu_bus;
    c.bus_couplings = {g_p, g_q};
    c.bus_levels = levels;
    return c;
}

double wrap_phase(double phi)
{
    double w = std::fmod(phi, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    if (w >= kTwoPi) w = 0.0;
    return w;
}

void validate(SystemSpec& system)
{
    const int n = static_cast<int>(system.transmons.size());
    if (n == 0) throw ValidationError("system has no transmons");
    for (int i = 0; i < n; ++i) {
        const auto& t = system.transmons[i];
        const std::string where = "transmon " + std::to_string(i);
        if (t.levels < 2) throw ValidationError(where + ": levels must be >= 2");
        if (!(t.frequency > 0.0)) throw ValidationError(where + ": frequency must be > 0");
        if (t.anharmonicity == 0.0 || !std::isfinite(t.anharmonicity))
            throw ValidationError(where + ": anharmonicity must be nonzero");
    }

    std::set<std::pair<int, std::pair<int, int>>> seen;
    for (std::size_t k = 0; k < system.couplings.size(); ++k) {
        const auto& c = system.couplings[k];
        const std::string where = "coupling " + std::to_string(k);
        auto [p, q] = c.endpoints;
        if (p < 0 || q < 0 || p >= n || q >= n) throw ValidationError(where + ": endpoint out of range");
        if (p == q) throw ValidationError(where + ": endpoints must differ");
        auto key = std::make_pair(static_cast<int>(c.kind), std::minmax(p, q));
        if (!seen.insert(key).second) throw ValidationError(where + ": duplicate coupling pair");
        if (c.kind == CouplingKind::Direct) {
            if (!std::isfinite(c.strength)) throw ValidationError(where + ": strength must be finite");
        } else {
            if (!(c.bus_frequency > 0.0)) throw ValidationError(where + ": bus_frequency must be > 0");
            if (c.bus_levels < 2) throw ValidationError(where + ": bus_levels must be >= 2");
        }
    }

    for (std::size_t k = 0; k < system.drives.size(); ++k) {
        auto& d = system.drives[k];
        const std::string where = "drive " + std::to_string(k);
        if (d.target < 0 || d.target >= n) throw ValidationError(where + ": target out of range");
        if (!(d.amplitude >= 0.0)) throw ValidationError(where + ": amplitude must be >= 0");
        if (!(d.frequency > 0.0)) throw ValidationError(where + ": frequency must be > 0");
        if (!std::isfinite(d.phase)) throw ValidationError(where + ": phase must be finite");
        d.phase = wrap_phase(d.phase);
    }
}

std::vector<int> mode_dims(const SystemSpec& system)
{
    std::vector<int> dims;
    for (const auto& t : system.transmons) dims.push_back(t.levels);
    for (const auto& c : system.couplings)
        if (c.kind == CouplingKind::Bus) dims.push_back(c.bus_levels);
    return dims;
}

int bus_mode_index(const SystemSpec& system, std::size_t k)
{
    if (system.couplings[k].kind != CouplingKind::Bus) return -1;
    int idx = static_cast<int>(system.transmons.size());
    for (std::size_t i = 0; i < k; ++i)
        if (system.couplings[i].kind == CouplingKind::Bus) ++idx;
    return idx;
}

SystemSpec without_drives(SystemSpec system)
{
    system.drives.clear();
    return system;
}

}  // namespace sizzle
