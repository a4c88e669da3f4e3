#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace roq::csv {

// Strict locale-free number formatting: decimal point, no separators,
// round-trip precision.
std::string format_double(double v);

/// Single-column sequence file; an optional non-numeric first line is
/// treated as a header and skipped.
std::vector<double> read_sequence(const std::string& path);
void write_sequence(const std::string& path, const std::vector<double>& seq);

/// Tandem path file: header "u,v1,...,vJ", one row per job.
struct TscPathCsv {
    std::vector<double> u;                   // n interarrival times
    std::vector<std::vector<double>> v;      // J rows of n service times
};
TscPathCsv read_tsc_path(const std::string& path);
void write_tsc_path(const std::string& path, const std::vector<double>& u,
                    const std::vector<std::vector<double>>& v);

/// Busy-period log file: header "start,B,I,peakW".
struct BusyRow {
    double start, busy, idle, peak;
};
void write_busy_log(const std::string& path, const std::vector<BusyRow>& rows);

void write_text(const std::string& path, const std::string& content);

} // namespace roq::csv
