#pragma once

#include <string>
#include <vector>

#include "sizzle/config.hpp"
#include "sizzle/csv.hpp"

namespace sizzle {

/// One grid axis. `parameter` is a JSON pointer or dotted path into the device document, or one of
/// the derived coordinates amplitude_scale, drive_frequency, phase_difference.
struct SweepAxis {
    std::string parameter;
    double start = 0.0;
    double stop = 0.0;
    int count = 2;
    std::vector<double> values() const;
};

struct SweepConfig {
    std::vector<SweepAxis> axes;  // one or two
    Json overrides = Json::object();  // pointer -> value, applied before every point
};

/// Strict parse of {"axes": [...], "overrides": {...}}; checks counts, bounds and that every path
/// exists in `device_document`.
SweepConfig parse_sweep(const Json& sweep, const Json& device_document);

/// Parses "path=start:stop:count".
SweepAxis parse_axis(const std::string& spec);

struct SweepRow {
    std::vector<double> coordinates;
    PairRates rates;
    double perturbative_zz = 0.0;  // NaN when the closed form does not apply
    std::string error;
};

/// Row-major over the axes (last axis fastest). Failed points carry the message in `error`.
std::vector<SweepRow> run_sweep(const Json& device_document, const SweepConfig& sweep, int threads = 1);

CsvTable sweep_table(const SweepConfig& sweep, const std::vector<SweepRow>& rows);

/// Closed-form ZZ for a two-transmon, direct-coupled pair on bare parameters; NaN otherwise.
double perturbative_pair_zz(const SystemSpec& bare, int q0, int q1);

}  // namespace sizzle
