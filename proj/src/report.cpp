#include "addkit/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unistd.h>

#include "addkit/error.hpp"

namespace addkit {

std::string_view library_version() noexcept { return "0.1.0"; }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool Report::pass() const {
  if (!error.empty() || checks.empty()) return false;
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string Report::config_hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(config.dump())));
  return buf;
}

void Report::add(const CheckReport& rep, const std::string& prefix) {
  std::string p = prefix.empty() ? rep.name : prefix;
  if (!p.empty()) p += ".";
  for (const auto& i : rep.items) checks.push_back({p + i.name, i.value, i.threshold, i.pass, i.note});
}

nlohmann::ordered_json Report::to_json() const {
  nlohmann::ordered_json j;
  j["schema_version"] = report_schema_version;
  j["library_version"] = std::string(library_version());
  j["command"] = command;
  j["config"] = config;
  j["config_hash"] = config_hash();
  auto arr = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    nlohmann::ordered_json item;
    item["name"] = c.name;
    item["value"] = c.value;
    item["threshold"] = c.threshold;
    item["pass"] = c.pass;
    if (!c.note.empty()) item["note"] = c.note;
    arr.push_back(std::move(item));
  }
  j["checks"] = std::move(arr);
  j["data"] = data;
  if (!error.empty()) j["error"] = error;
  j["pass"] = pass();
  j["wall_time_s"] = wall_time;
  return j;
}

ReportFormat report_format_from_string(const std::string& s) {
  if (s == "json") return ReportFormat::json;
  if (s == "csv") return ReportFormat::csv;
  if (s == "text") return ReportFormat::text;
  throw Error(ErrorCode::config, "unknown report format '" + s + "' (json, csv, text)");
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string render_report(const Report& report, ReportFormat format) {
  std::ostringstream os;
  switch (format) {
    case ReportFormat::json:
      os << report.to_json().dump(2) << "\n";
      break;
    case ReportFormat::csv:
      os << "name,value,threshold,pass,note\n";
      for (const auto& c : report.checks)
        os << csv_field(c.name) << "," << format_double(c.value) << "," << format_double(c.threshold) << ","
           << (c.pass ? "true" : "false") << "," << csv_field(c.note) << "\n";
      break;
    case ReportFormat::text:
      os << report.command << " (config " << report.config_hash() << ")\n";
      for (const auto& c : report.checks) {
        os << (c.pass ? "PASS " : "FAIL ") << c.name << " value=" << format_double(c.value)
           << " threshold=" << format_double(c.threshold);
        if (!c.note.empty()) os << " (" << c.note << ")";
        os << "\n";
      }
      if (!report.error.empty()) os << "ERROR " << report.error << "\n";
      os << (report.pass() ? "PASS" : "FAIL") << " overall\n";
      break;
  }
  return os.str();
}

std::size_t emit_report(const Report& report, ReportFormat format, const std::string& path) {
  const std::string text = render_report(report, format);
  if (path.empty() || path == "-") {
    std::cout << text << std::flush;
    if (!std::cout) throw Error(ErrorCode::io, "cannot write report to stdout");
  } else {
    write_file_atomic(path, text);
  }
  return text.size();
}

void write_file_atomic(const std::string& path, std::string_view content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorCode::io, "write failed for '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::io, "cannot rename onto '" + path + "': " + ec.message());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw Error(ErrorCode::config, "CSV has no column '" + std::string(name) + "'");
}

std::string to_csv(const CsvTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out += ',';
    out += table.header[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_double(row[i]);
    }
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_number(std::string_view s, std::size_t line_no) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  if (s == "nan") return std::nan("");
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error(ErrorCode::config, "CSV line " + std::to_string(line_no) + ": '" + std::string(s) + "' is not a number");
  return v;
}

}  // namespace

CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() : end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto fields = split_line(line);
    if (table.header.empty()) {
      for (auto f : fields) table.header.emplace_back(f);
      continue;
    }
    if (fields.size() != table.header.size())
      throw Error(ErrorCode::config, "CSV line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                                         " fields, expected " + std::to_string(table.header.size()));
    std::vector<double> row;
    row.reserve(fields.size());
    for (auto f : fields) row.push_back(parse_number(f, line_no));
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw Error(ErrorCode::config, "CSV has no header row");
  return table;
}

CsvTable density_csv(const DensityTable& table) {
  CsvTable out;
  const auto& g = table.grid;
  const std::size_t n = g.points;
  if (g.dimension == 1) {
    out.header = {"x", "value"};
    for (std::size_t j = 0; j < n; ++j) out.rows.push_back({g.coordinate(j), table.values[j]});
  } else {
    out.header = {"x", "y", "value"};
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out.rows.push_back({g.coordinate(i), g.coordinate(j), table.values[i * n + j]});
  }
  return out;
}

}  // namespace addkit
