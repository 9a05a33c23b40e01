#pragma once

// Results of one run: tables (written as CSV), key/value reports, and
// verdicts, each tied to the invariant it checks and the tolerance used.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "substatic/cli/config.hpp"
#include "substatic/error.hpp"

#ifndef SUBSTATIC_VERSION
#define SUBSTATIC_VERSION "0.1.0"
#endif

namespace substatic::cli {

enum class VerdictKind { theorem, numerical, informational };

inline const char* to_string(VerdictKind k)
{
    switch (k) {
    case VerdictKind::theorem: return "theorem";
    case VerdictKind::numerical: return "numerical";
    case VerdictKind::informational: return "informational";
    }
    return "?";
}

struct Verdict {
    std::string name;
    std::string invariant;
    VerdictKind kind = VerdictKind::numerical;
    double value = 0;
    double tol = 0;
    bool pass = false;
};

using Cell = std::variant<double, long long, std::string>;

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row)
    {
        require(row.size() == columns.size(), ErrorKind::invalid_parameter, "row width mismatch in " + name);
        rows.push_back(std::move(row));
    }
};

struct Report {
    std::string name;
    std::vector<std::pair<std::string, Cell>> fields;

    void set(std::string key, Cell v) { fields.emplace_back(std::move(key), std::move(v)); }
};

struct ResultBundle {
    std::string command;
    std::vector<std::pair<std::string, std::string>> provenance;
    std::vector<Table> tables;
    std::vector<Report> reports;
    std::vector<Verdict> verdicts;

    Table& table(std::string name, std::vector<std::string> columns)
    {
        tables.push_back({std::move(name), std::move(columns), {}});
        return tables.back();
    }
    Report& report(std::string name)
    {
        reports.push_back({std::move(name), {}});
        return reports.back();
    }
    // Records a check of value against tol; pass says which side is good.
    Verdict& verdict(std::string name, std::string invariant, VerdictKind kind, double value, double tol, bool pass)
    {
        verdicts.push_back({std::move(name), std::move(invariant), kind, value, tol, pass});
        return verdicts.back();
    }

    // 0 when every non-informational verdict passes, 2 otherwise.
    int exit_code() const
    {
        for (const auto& v : verdicts)
            if (v.kind != VerdictKind::informational && !v.pass)
                return 2;
        return 0;
    }
};

inline std::string format_cell(const Cell& c)
{
    if (const double* d = std::get_if<double>(&c)) {
        std::ostringstream s;
        s << std::setprecision(17) << *d;
        return s.str();
    }
    if (const long long* i = std::get_if<long long>(&c))
        return std::to_string(*i);
    return std::get<std::string>(c);
}

inline std::string utc_timestamp()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream s;
    s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return s.str();
}

inline void stamp_provenance(ResultBundle& b, const ExperimentConfig& c)
{
    b.command = c.command;
    b.provenance = {{"config_sha256", sha256_hex(c.canonical())},
                    {"code_version", SUBSTATIC_VERSION},
                    {"timestamp", utc_timestamp()},
                    {"command", c.command},
                    {"seed", std::to_string(c.seed)}};
}

inline std::string csv_text(const Table& t)
{
    std::ostringstream s;
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        s << (i ? "," : "") << t.columns[i];
    s << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            s << (i ? "," : "") << format_cell(row[i]);
        s << '\n';
    }
    return s.str();
}

inline std::string summary_text(const ResultBundle& b)
{
    std::ostringstream s;
    s << "[provenance]\n";
    for (const auto& [k, v] : b.provenance)
        s << k << " = " << v << '\n';
    for (const auto& r : b.reports) {
        s << "\n[" << r.name << "]\n";
        for (const auto& [k, v] : r.fields)
            s << k << " = " << format_cell(v) << '\n';
    }
    s << "\n[verdicts]\n";
    for (const auto& v : b.verdicts)
        s << v.name << " = " << (v.pass ? "PASS" : "FAIL") << " ; kind=" << to_string(v.kind)
          << " invariant=\"" << v.invariant << "\" value=" << format_cell(v.value) << " tol=" << format_cell(v.tol)
          << '\n';
    s << "\n[summary]\nverdicts = " << b.verdicts.size() << "\nexit_code = " << b.exit_code() << '\n';
    return s.str();
}

// Writes <dir>/<table>.csv for every table and <dir>/summary.txt.
inline std::vector<std::filesystem::path> emit(const ResultBundle& b, const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    require(!ec, ErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());
    std::vector<std::filesystem::path> written;
    auto put = [&](const std::filesystem::path& p, const std::string& text) {
        std::ofstream out(p, std::ios::binary);
        require(bool(out), ErrorKind::io, "cannot write " + p.string());
        out << text;
        require(bool(out), ErrorKind::io, "write failed for " + p.string());
        written.push_back(p);
    };
    for (const auto& t : b.tables)
        put(dir / (t.name + ".csv"), csv_text(t));
    put(dir / "summary.txt", summary_text(b));
    return written;
}

} // namespace substatic::cli
