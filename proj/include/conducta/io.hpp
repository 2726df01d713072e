#pragma once

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace conducta {

/// Shortest decimal text that parses back to the same double ("%.17g" worst
/// case). Infinities are written as "inf" / "-inf".
std::string format_real(double value);

std::optional<double> parse_real(std::string_view token);
std::optional<long long> parse_integer(std::string_view token);

/// Splits on `delim`, trimming ASCII whitespace around each field.
std::vector<std::string> split_fields(std::string_view line, char delim);
/// Splits on runs of whitespace.
std::vector<std::string> split_whitespace(std::string_view line);

std::ifstream open_input(const std::filesystem::path& path);
std::ofstream open_output(const std::filesystem::path& path);

/// Numeric CSV with an optional header row. A header is recognised by a
/// non-numeric first token. All data rows must have the same width.
struct NumericTable {
  std::vector<std::string> header;
  Eigen::MatrixXd values;
};

NumericTable parse_numeric_csv(std::istream& in, const std::string& source);
NumericTable load_numeric_csv(const std::filesystem::path& path);

}  // namespace conducta
