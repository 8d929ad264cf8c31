#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sizzle/calibrate.hpp"
#include "sizzle/spectrum.hpp"
#include "sizzle/system.hpp"

namespace sizzle {

inline constexpr const char* kToolVersion = "0.1.0";

using Json = nlohmann::ordered_json;

/// Reads a JSON document. Parse errors become ValidationError with line and column.
Json read_document(const std::string& path);
Json parse_document(const std::string& text, const std::string& origin = "<config>");

/// Resolves a preset name (device-a, device-b-pair, device-b-chain) or a file path.
std::string resolve_config_path(const std::string& name_or_path);

/// Applies "key=value". The key is a JSON pointer ("/drives/0/phase") or a dotted path
/// ("drives.0.phase"); the value is parsed as JSON and falls back to a plain string.
void apply_override(Json& document, const std::string& assignment);

/// Converts a dotted path to a JSON pointer; pointers pass through.
std::string to_pointer(const std::string& path);

/// Merges operating_points[name] onto the document root.
void select_operating_point(Json& document, const std::string& name);

struct CnotSettings {
    int control = 1;
    int target = 0;
    double duration = 90.0;
};

struct CzSettings {
    CzCalibration start;
    int control = 1;
    int target = 0;
};

struct ChainSettings {
    double drive_frequency = 5.1;
    double seed_stark_shift = -0.001;
};

struct CancelSettings {
    std::string mode = "amplitude";  // or "phase"
    bool single_path_comparison = false;
};

struct ZxSettings {
    double start = 0.0;
    double stop = 0.01;
    int count = 5;
    int control = 1;
    int target = 0;
    double cr_frequency = 0.0;  // <= 0: dressed target frequency
};

/// A validated device description.
struct DeviceConfig {
    Json document;  // after overrides and operating-point selection
    std::string name;
    bool dressed_input = false;  // listed frequencies are measured values
    SystemSpec system;           // bare parameters used by every solver
    std::optional<BareFit> fit;
    std::array<int, 2> pair{0, 1};
    CancellationOptions cancellation;
    CalibrationOptions calibration;
    CnotSettings cnot;
    CzSettings cz;
    ChainSettings chain;
    CancelSettings cancel;
    ZxSettings zx;
    std::optional<Json> sweep;
};

/// Strict schema check and conversion. Unknown keys fail with their path.
DeviceConfig parse_device(const Json& document);

/// FNV-1a 64 of the compact dump, as 16 hex digits.
std::string config_hash(const Json& document);

}  // namespace sizzle
