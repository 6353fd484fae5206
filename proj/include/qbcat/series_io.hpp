#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "qbcat/thermo.hpp"

namespace qbcat {

/// Fixed CSV column order of a time series file.
const std::vector<std::string>& series_columns();

/// Shortest-exact-ish rendering used everywhere in output: 17 significant
/// digits, locale independent.
std::string format_double(double v);

/// Writes header plus one row per record. Each record is re-validated
/// first; an invalid record throws before anything is written.
void write_series(std::ostream& out, const std::vector<ThermoRecord>& records);
void emit_series(const std::vector<ThermoRecord>& records, const std::filesystem::path& path);

std::vector<ThermoRecord> read_series(std::istream& in);
std::vector<ThermoRecord> read_series(const std::filesystem::path& path);

}  // namespace qbcat
