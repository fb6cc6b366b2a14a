#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "addkit/check.hpp"
#include "addkit/density_engine.hpp"
#include "json.hpp"

namespace addkit {

/// Bumped whenever a report field is added, removed or renamed.
inline constexpr int report_schema_version = 1;

std::string_view library_version() noexcept;

/// "%.17g"; non-finite values print as nan, inf, -inf.
std::string format_double(double v);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// Result of one harness command.
struct Report {
  std::string command;
  /// Normalized run configuration; the config hash covers exactly this.
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::vector<CheckItem> checks;
  /// Auxiliary results (peak values, artifact paths, witnesses, ...).
  nlohmann::ordered_json data = nlohmann::ordered_json::object();
  /// Set when a computation raised instead of producing a verdict.
  std::string error;
  double wall_time = 0.0;

  /// All checks pass, at least one check ran and no error was raised.
  bool pass() const;
  /// 16 lowercase hex digits of fnv1a64(config.dump()).
  std::string config_hash() const;

  void add(const CheckReport& rep, const std::string& prefix = {});
  void add(CheckItem item) { checks.push_back(std::move(item)); }

  /// Stable field order; wall_time comes last.
  nlohmann::ordered_json to_json() const;
};

enum class ReportFormat { json, csv, text };

/// Throws Error(config) for anything other than json, csv or text.
ReportFormat report_format_from_string(const std::string& s);

/// json: the document plus a newline. csv: one row per check. text: one
/// PASS/FAIL line per check and a final overall line.
std::string render_report(const Report& report, ReportFormat format);

/// Writes the rendered report to `path` ("-" is stdout) and returns the
/// number of bytes written.
std::size_t emit_report(const Report& report, ReportFormat format, const std::string& path);

/// Writes to a temporary file in the target directory and renames it over
/// the target. Throws Error(io) naming the path.
void write_file_atomic(const std::string& path, std::string_view content);
std::string read_file(const std::string& path);

/// Numeric CSV with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a named column; throws Error(config) when absent.
  std::size_t column(std::string_view name) const;
};

/// Comma-separated, LF line endings, values in format_double.
std::string to_csv(const CsvTable& table);
/// Throws Error(config) on a ragged row or a non-numeric field.
CsvTable parse_csv(std::string_view text);

/// Columns x[, y], value in row-major grid order.
CsvTable density_csv(const DensityTable& table);

}  // namespace addkit
