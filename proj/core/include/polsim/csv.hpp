#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace polsim {

/// Formats a double so the text round-trips to the same bits. Integral values
/// print without a decimal point.
std::string format_double(double v);

/// RFC 4180 quoting: fields containing commas, quotes, or newlines are quoted.
std::string csv_escape(std::string_view field);

std::string csv_join(const std::vector<std::string>& fields);

/// Splits one CSV record (already stripped of the trailing newline).
std::vector<std::string> csv_split(std::string_view line);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a header column; throws ParseError if absent.
    std::size_t col(std::string_view name) const;
};

CsvTable read_csv_file(const std::string& path);

/// Streaming read: calls fn(row) per data row after the header.
void for_each_csv_row(const std::string& path,
                      const std::function<void(const std::vector<std::string>&)>& fn,
                      std::vector<std::string>* header_out = nullptr);

double parse_double_field(const std::string& s);
long long parse_int_field(const std::string& s);

} // namespace polsim
