#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace thermolab {

/// Comma-separated cells with surrounding blanks trimmed. No quoting.
std::vector<std::string_view> split_csv_line(std::string_view line);

/// Calls `row` for every non-empty, non-comment line after an optional header
/// whose first cell equals `header_first`. `where` is "origin:line". Errors
/// thrown from `row` are prefixed with `where`.
void for_each_csv_row(std::string_view text, std::string_view origin, std::string_view header_first,
                      const std::function<void(const std::vector<std::string_view>& cells, const std::string& where)>& row);

double parse_double_cell(std::string_view cell);
long long parse_int_cell(std::string_view cell);

} // namespace thermolab
