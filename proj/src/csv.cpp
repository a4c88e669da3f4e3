#include "roq/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "roq/errors.hpp"

namespace roq::csv {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, sep)) out.push_back(cur);
    return out;
}

bool parse_double(const std::string& tok, double& out) {
    const char* b = tok.data();
    const char* e = tok.data() + tok.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    while (e > b && (e[-1] == ' ' || e[-1] == '\t' || e[-1] == '\r')) --e;
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && p == e;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw RuntimeError("FileError", "cannot open " + path);
    return f;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw RuntimeError("FileError", "cannot write " + path);
    return f;
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<double> read_sequence(const std::string& path) {
    auto f = open_in(path);
    std::vector<double> out;
    std::string line;
    bool first = true;
    while (std::getline(f, line)) {
        if (line.empty() || line == "\r") continue;
        double v;
        if (!parse_double(line, v)) {
            if (first) { first = false; continue; } // header line
            throw RuntimeError("CsvFormat", "bad number in " + path + ": " + line);
        }
        first = false;
        out.push_back(v);
    }
    return out;
}

void write_sequence(const std::string& path, const std::vector<double>& seq) {
    auto f = open_out(path);
    f << "value\n";
    for (double v : seq) f << format_double(v) << "\n";
}

TscPathCsv read_tsc_path(const std::string& path) {
    auto f = open_in(path);
    std::string line;
    if (!std::getline(f, line)) throw RuntimeError("CsvFormat", "empty file " + path);
    auto hdr = split(line, ',');
    if (!hdr.empty() && !hdr.back().empty() && hdr.back().back() == '\r') hdr.back().pop_back();
    if (hdr.size() < 2 || hdr[0] != "u") {
        throw RuntimeError("CsvFormat", "expected header u,v1,...,vJ in " + path);
    }
    const std::size_t servers = hdr.size() - 1;
    for (std::size_t j = 1; j < hdr.size(); ++j) {
        if (hdr[j] != "v" + std::to_string(j)) {
            throw RuntimeError("CsvFormat", "expected header u,v1,...,vJ in " + path);
        }
    }
    TscPathCsv out;
    out.v.resize(servers);
    while (std::getline(f, line)) {
        if (line.empty() || line == "\r") continue;
        auto cells = split(line, ',');
        if (cells.size() != servers + 1) {
            throw RuntimeError("CsvFormat", "row width mismatch in " + path);
        }
        double val;
        if (!parse_double(cells[0], val)) throw RuntimeError("CsvFormat", "bad number: " + cells[0]);
        out.u.push_back(val);
        for (std::size_t j = 0; j < servers; ++j) {
            if (!parse_double(cells[j + 1], val)) throw RuntimeError("CsvFormat", "bad number: " + cells[j + 1]);
            out.v[j].push_back(val);
        }
    }
    if (out.u.empty()) throw RuntimeError("CsvFormat", "no data rows in " + path);
    return out;
}

void write_tsc_path(const std::string& path, const std::vector<double>& u,
                    const std::vector<std::vector<double>>& v) {
    auto f = open_out(path);
    f << "u";
    for (std::size_t j = 1; j <= v.size(); ++j) f << ",v" << j;
    f << "\n";
    for (std::size_t i = 0; i < u.size(); ++i) {
        f << format_double(u[i]);
        for (const auto& row : v) f << "," << format_double(row[i]);
        f << "\n";
    }
}

void write_busy_log(const std::string& path, const std::vector<BusyRow>& rows) {
    auto f = open_out(path);
    f << "start,B,I,peakW\n";
    for (const auto& r : rows) {
        f << format_double(r.start) << "," << format_double(r.busy) << ","
          << format_double(r.idle) << "," << format_double(r.peak) << "\n";
    }
}

void write_text(const std::string& path, const std::string& content) {
    auto f = open_out(path);
    f << content;
}

} // namespace roq::csv
