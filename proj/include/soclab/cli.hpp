#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

// Command-line front end. `run` is the whole program minus process setup so
// that tests can drive it in-process.

namespace soclab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitWarning = 1;
inline constexpr int kExitUsage = 2;

/// One output cell: numbers are printed with 12 significant digits.
using Cell = std::variant<double, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    bool warning = false;
};

struct RunManifest {
    std::string command;
    std::vector<std::pair<std::string, std::string>> params;  // resolved, in a fixed order
    std::uint64_t seed = 0;
    std::string version;
    std::string checksum;  // FNV-1a 64 of the CSV data section
};

/// 12-significant-digit decimal used in both CSV and JSON output.
std::string format_number(double value);

std::string render_csv(const RunManifest& manifest, const Table& table);
std::string render_json(const RunManifest& manifest, const Table& table);

/// FNV-1a 64-bit hash as 16 lowercase hex digits.
std::string fnv1a64(const std::string& data);

/// Parses a grid: "x", "a,b,c", "a:b:n" (n linear points) or "log:a:b:n".
std::vector<double> parse_grid(const std::string& spec);

/// args excludes the program name. Returns the process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace soclab::cli
