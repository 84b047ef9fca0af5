#include "gridsens/report_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

#include "gridsens/errors.hpp"

namespace gridsens {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";  // also folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

double parse_number_field(std::string_view text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw InputError("invalid number '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      break;
    }
    fields.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

std::string screening_csv_header(bool with_oracle) {
  return with_oracle ? "rank,branch,from,to,severity,islanding,oracle_severity"
                     : "rank,branch,from,to,severity,islanding";
}

void write_screening_csv(std::ostream& out, const ScreeningReport& report, bool with_oracle) {
  out << screening_csv_header(with_oracle) << '\n';
  for (const ScreeningEntry& e : report.entries) {
    out << e.rank << ',' << e.branch + 1 << ',' << e.from_bus << ',' << e.to_bus << ',' << format_number(e.severity)
        << ',' << (e.islanding ? 1 : 0);
    if (with_oracle) {
      out << ',' << (e.oracle_severity ? format_number(*e.oracle_severity) : std::string("nan"));
    }
    out << '\n';
  }
}

std::vector<ScreeningCsvRow> read_screening_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty screening CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool with_oracle = false;
  if (line == screening_csv_header(true)) {
    with_oracle = true;
  } else if (line != screening_csv_header(false)) {
    throw InputError("unexpected screening CSV header '" + line + "'");
  }

  auto to_int = [](const std::string& field, int line_no) {
    long long value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
      throw InputError("line " + std::to_string(line_no) + ": invalid integer '" + field + "'");
    }
    return value;
  };

  std::vector<ScreeningCsvRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != (with_oracle ? 7u : 6u)) {
      throw InputError("line " + std::to_string(line_no) + ": expected " + (with_oracle ? "7" : "6") + " fields");
    }
    ScreeningCsvRow row;
    row.rank = static_cast<std::size_t>(to_int(fields[0], line_no));
    row.branch = static_cast<std::size_t>(to_int(fields[1], line_no));
    row.from = static_cast<int>(to_int(fields[2], line_no));
    row.to = static_cast<int>(to_int(fields[3], line_no));
    row.severity = parse_number_field(fields[4]);
    const auto flag = to_int(fields[5], line_no);
    if (flag != 0 && flag != 1) throw InputError("line " + std::to_string(line_no) + ": islanding must be 0 or 1");
    row.islanding = flag == 1;
    if (with_oracle) row.oracle_severity = parse_number_field(fields[6]);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace gridsens
