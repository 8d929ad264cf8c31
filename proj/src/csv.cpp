#include "sizzle/csv.hpp"

#include <cmath>
#include <cstdio>

#include "sizzle/config.hpp"

namespace sizzle {

namespace {

std::string quoted(const std::string& s)
{
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string cell_text(const CsvCell& c)
{
    if (const double* d = std::get_if<double>(&c)) return format_number(*d);
    if (const long* l = std::get_if<long>(&c)) return std::to_string(*l);
    return quoted(std::get<std::string>(c));
}

void join(std::ostream& out, const std::vector<std::string>& cells)
{
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
}

}  // namespace

std::string format_number(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (x == 0.0) x = 0.0;  // no negative zero
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

void write_csv(std::ostream& out, const CsvTable& table)
{
    for (const auto& c : table.comments) out << "# " << c << '\n';
    if (!table.units.empty()) {
        out << "# units: ";
        for (std::size_t i = 0; i < table.columns.size(); ++i)
            out << (i ? ", " : "") << table.columns[i] << " [" << (i < table.units.size() ? table.units[i] : "") << "]";
        out << '\n';
    }
    std::vector<std::string> header;
    for (const auto& c : table.columns) header.push_back(quoted(c));
    join(out, header);
    for (const auto& row : table.rows) {
        std::vector<std::string> cells;
        for (const auto& c : row) cells.push_back(cell_text(c));
        join(out, cells);
    }
}

std::vector<std::string> provenance_comments(const std::string& command, const std::string& hash, long seed)
{
    return {"sizzle " + std::string(kToolVersion) + " " + command, "config_hash: " + hash,
            "seed: " + std::to_string(seed)};
}

}  // namespace sizzle
