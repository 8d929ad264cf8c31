#pragma once

#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace sizzle {

using CsvCell = std::variant<double, long, std::string>;

struct CsvTable {
    std::vector<std::string> comments;  // written as "# ..." lines before the units line
    std::vector<std::string> columns;
    std::vector<std::string> units;     // one per column
    std::vector<std::vector<CsvCell>> rows;
};

/// Fixed 12-significant-digit formatting; NaN prints as "nan".
std::string format_number(double x);

/// Header comments, "# units: ...", the column line, then the rows. Strings are quoted when needed.
void write_csv(std::ostream& out, const CsvTable& table);

/// Standard provenance comment lines: tool version, config hash, seed.
std::vector<std::string> provenance_comments(const std::string& command, const std::string& config_hash, long seed);

}  // namespace sizzle
