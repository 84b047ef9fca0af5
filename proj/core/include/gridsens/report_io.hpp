#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "gridsens/screening.hpp"

namespace gridsens {

/// 12 significant digits; "inf", "-inf" and "nan" for non-finite values.
std::string format_number(double value);
/// Inverse of format_number; throws InputError on malformed text.
double parse_number_field(std::string_view text);

/// Splits one CSV line on commas (no quoting; the schemas here never need it).
std::vector<std::string> split_csv_line(std::string_view line);

/// Header of the ranked screening CSV:
/// rank,branch,from,to,severity,islanding[,oracle_severity]
std::string screening_csv_header(bool with_oracle);

/// Branch numbers are 1-based positions in the case file; bus columns are file ids.
void write_screening_csv(std::ostream& out, const ScreeningReport& report, bool with_oracle);

struct ScreeningCsvRow {
  std::size_t rank = 0;
  std::size_t branch = 0;  ///< 1-based as written
  int from = 0;
  int to = 0;
  double severity = 0.0;
  bool islanding = false;
  std::optional<double> oracle_severity;
};

/// Reads a file produced by write_screening_csv, validating the header.
std::vector<ScreeningCsvRow> read_screening_csv(std::istream& in);

}  // namespace gridsens
