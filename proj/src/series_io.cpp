#include "qbcat/series_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace qbcat {

namespace {

using Field = double ThermoRecord::*;

const std::vector<Field>& series_fields() {
  static const std::vector<Field> fields{
      &ThermoRecord::t,
      &ThermoRecord::ergotropy,
      &ThermoRecord::e_qb_bare,
      &ThermoRecord::e_internal,
      &ThermoRecord::e_cat,
      &ThermoRecord::flux_J_exact,
      &ThermoRecord::flux_J_fd,
      &ThermoRecord::flux_J_qb_local,
      &ThermoRecord::power_P,
      &ThermoRecord::flux_unitary_cat,
      &ThermoRecord::flux_dephasing,
      &ThermoRecord::flux_kappa,
      &ThermoRecord::first_law_residual,
      &ThermoRecord::trace_dev,
      &ThermoRecord::min_eig,
  };
  return fields;
}

double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::runtime_error("series line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

const std::vector<std::string>& series_columns() {
  static const std::vector<std::string> cols{
      "t_fs",           "ergotropy",       "e_qb_bare",        "e_internal",     "e_cat",
      "flux_J_exact",   "flux_J_fd",       "flux_J_qb_local",  "power_P",        "flux_unitary_cat",
      "flux_dephasing", "flux_kappa",      "first_law_residual", "trace_dev",    "min_eig"};
  return cols;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return {buf, ptr};
}

void write_series(std::ostream& out, const std::vector<ThermoRecord>& records) {
  for (const auto& r : records) validate_record(r);

  const auto& cols = series_columns();
  for (std::size_t k = 0; k < cols.size(); ++k) out << (k ? "," : "") << cols[k];
  out << '\n';
  for (const auto& r : records) {
    bool first = true;
    for (const Field f : series_fields()) {
      if (!first) out << ',';
      out << format_double(r.*f);
      first = false;
    }
    out << '\n';
  }
}

void emit_series(const std::vector<ThermoRecord>& records, const std::filesystem::path& path) {
  std::ostringstream buf;
  write_series(buf, records);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << buf.str();
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

std::vector<ThermoRecord> read_series(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("series: missing header");
  std::string expected;
  for (std::size_t k = 0; k < series_columns().size(); ++k) expected += (k ? "," : "") + series_columns()[k];
  if (line != expected) throw std::runtime_error("series: unexpected header");

  std::vector<ThermoRecord> out;
  std::size_t lineno = 1;
  const auto& fields = series_fields();
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    ThermoRecord r;
    std::size_t start = 0;
    for (std::size_t k = 0; k < fields.size(); ++k) {
      const std::size_t end = line.find(',', start);
      const bool last = k + 1 == fields.size();
      if (last != (end == std::string::npos)) {
        throw std::runtime_error("series line " + std::to_string(lineno) + ": wrong column count");
      }
      const std::string_view cell(line.data() + start, (last ? line.size() : end) - start);
      r.*fields[k] = parse_double(cell, lineno);
      start = end + 1;
    }
    out.push_back(r);
  }
  return out;
}

std::vector<ThermoRecord> read_series(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  return read_series(in);
}

}  // namespace qbcat
