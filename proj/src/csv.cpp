#include "thermolab/csv.hpp"

#include "thermolab/error.hpp"

#include <charconv>

namespace thermolab {

std::vector<std::string_view> split_csv_line(std::string_view line)
{
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        std::string_view cell = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t'))
            cell.remove_prefix(1);
        while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r'))
            cell.remove_suffix(1);
        cells.push_back(cell);
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return cells;
}

void for_each_csv_row(std::string_view text, std::string_view origin, std::string_view header_first,
                      const std::function<void(const std::vector<std::string_view>&, const std::string&)>& row)
{
    std::size_t pos = 0;
    std::size_t line_no = 0;
    bool first = true;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        ++line_no;
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        if (line.empty() || line.front() == '#')
            continue;
        const auto cells = split_csv_line(line);
        if (first) {
            first = false;
            if (!header_first.empty() && cells.front() == header_first)
                continue;
        }
        const std::string where = std::string(origin) + ":" + std::to_string(line_no);
        try {
            row(cells, where);
        } catch (const InputError& e) {
            const std::string msg = e.what();
            throw InputError(msg.rfind(where, 0) == 0 ? msg : where + ": " + msg);
        }
    }
}

double parse_double_cell(std::string_view cell)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size())
        throw InputError("not a number '" + std::string(cell) + "'");
    return v;
}

long long parse_int_cell(std::string_view cell)
{
    long long v = 0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size())
        throw InputError("not an integer '" + std::string(cell) + "'");
    return v;
}

} // namespace thermolab
