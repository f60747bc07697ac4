#ifndef TMEST_CSV_HPP
#define TMEST_CSV_HPP

#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace tmest::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// 1-based source line of each row, for error messages.
  std::vector<std::size_t> lines;
};

/// Reads a comma-separated file with a header row. Blank lines are skipped,
/// fields are whitespace-trimmed, a UTF-8 BOM is tolerated. Throws
/// Error(Io) when the file cannot be opened and Error(InvalidInput) when a
/// row's field count disagrees with the header.
Table read(const std::filesystem::path& path);
Table parse(std::string_view text, const std::string& source_name);

/// Checks that the header starts with `required` (in order) and has at most
/// `optional` extra trailing columns.
void expect_header(const Table& table, const std::vector<std::string>& required,
                   const std::vector<std::string>& optional,
                   const std::string& source_name);

double parse_double(const std::string& field, const std::string& source_name,
                    std::size_t line);

/// Shortest round-trip decimal representation.
std::string format_double(double value);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace tmest::csv

#endif  // TMEST_CSV_HPP
