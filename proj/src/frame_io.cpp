#include "thermolab/frame_io.hpp"

#include "thermolab/error.hpp"
#include "thermolab/serialization.hpp"

#include <charconv>
#include <cstdio>

namespace thermolab {

namespace fs = std::filesystem;

fs::path meta_path_for(const fs::path& raw_path)
{
    fs::path meta = raw_path;
    meta.replace_extension(".meta");
    return meta;
}

std::string encode_raw(const RadiometricFrame& frame)
{
    std::string bytes;
    bytes.resize(frame.counts.size() * 2);
    for (std::size_t i = 0; i < frame.counts.size(); ++i) {
        bytes[2 * i] = static_cast<char>(frame.counts[i] & 0xFF);
        bytes[2 * i + 1] = static_cast<char>((frame.counts[i] >> 8) & 0xFF);
    }
    return bytes;
}

std::string encode_meta(const RadiometricFrame& frame)
{
    const Json j{{"width", frame.width},
                 {"height", frame.height},
                 {"timestamp", format_iso8601(frame.timestamp)},
                 {"sequence_index", frame.sequence_index},
                 {"calibration", frame.calibration}};
    return j.dump(2) + "\n";
}

void write_frame(const fs::path& raw_path, const RadiometricFrame& frame)
{
    frame.validate();
    write_text_file(raw_path, encode_raw(frame));
    write_text_file(meta_path_for(raw_path), encode_meta(frame));
}

RadiometricFrame read_frame(const fs::path& raw_path)
{
    const fs::path meta_path = meta_path_for(raw_path);
    RadiometricFrame frame;
    try {
        const Json meta = Json::parse(read_text_file(meta_path));
        frame.width = meta.at("width").get<int>();
        frame.height = meta.at("height").get<int>();
        frame.timestamp = parse_iso8601(meta.at("timestamp").get<std::string>());
        frame.sequence_index = meta.at("sequence_index").get<std::int64_t>();
        frame.calibration = meta.at("calibration").get<RadiometricCalibration>();
    } catch (const nlohmann::json::exception& e) {
        throw InputError(meta_path.string() + ": " + e.what());
    } catch (const InputError& e) {
        throw InputError(meta_path.string() + ": " + e.what());
    }
    const std::string bytes = read_text_file(raw_path);
    if (frame.width < 1 || frame.height < 1)
        throw InputError(meta_path.string() + ": frame dimensions must be >= 1x1");
    if (bytes.size() != frame.pixel_count() * 2)
        throw InputError(raw_path.string() + ": " + std::to_string(bytes.size()) + " bytes, expected "
                         + std::to_string(frame.pixel_count() * 2) + " for " + std::to_string(frame.width) + "x"
                         + std::to_string(frame.height));
    frame.counts.resize(frame.pixel_count());
    for (std::size_t i = 0; i < frame.counts.size(); ++i) {
        const auto lo = static_cast<unsigned char>(bytes[2 * i]);
        const auto hi = static_cast<unsigned char>(bytes[2 * i + 1]);
        frame.counts[i] = static_cast<std::uint16_t>(lo | (hi << 8));
    }
    try {
        frame.validate();
    } catch (const InputError& e) {
        throw InputError(meta_path.string() + ": " + e.what());
    }
    return frame;
}

std::string encode_celsius_grid(const TemperatureMap& map)
{
    std::string out;
    char buf[40];
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            if (x)
                out += ',';
            const double t = map.at(x, y);
            if (std::isfinite(t)) {
                std::snprintf(buf, sizeof buf, "%.17g", t);
                out += buf;
            } else {
                out += "nan";
            }
        }
        out += '\n';
    }
    return out;
}

void write_celsius_grid(const fs::path& path, const TemperatureMap& map)
{
    map.validate();
    write_text_file(path, encode_celsius_grid(map));
}

TemperatureMap parse_celsius_grid(std::string_view text, std::string_view origin, Instant timestamp)
{
    TemperatureMap map;
    map.source_timestamp = timestamp;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        ++line_no;
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        if (line.empty())
            continue;
        const std::string where = std::string(origin) + ":" + std::to_string(line_no);
        int cols = 0;
        std::size_t cell_start = 0;
        while (cell_start <= line.size()) {
            std::size_t comma = line.find(',', cell_start);
            if (comma == std::string_view::npos)
                comma = line.size();
            std::string_view cell = line.substr(cell_start, comma - cell_start);
            while (!cell.empty() && cell.front() == ' ')
                cell.remove_prefix(1);
            while (!cell.empty() && cell.back() == ' ')
                cell.remove_suffix(1);
            double value = 0.0;
            if (cell == "nan" || cell == "NaN") {
                value = std::numeric_limits<double>::quiet_NaN();
            } else {
                auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
                if (ec != std::errc{} || ptr != cell.data() + cell.size() || cell.empty())
                    throw InputError(where + ": not a number '" + std::string(cell) + "'");
            }
            map.temps.push_back(value);
            ++cols;
            cell_start = comma + 1;
        }
        if (map.height == 0)
            map.width = cols;
        else if (cols != map.width)
            throw InputError(where + ": row has " + std::to_string(cols) + " values, expected "
                             + std::to_string(map.width));
        ++map.height;
    }
    if (map.height == 0)
        throw InputError(std::string(origin) + ": empty temperature grid");
    try {
        map.validate();
    } catch (const InputError& e) {
        throw InputError(std::string(origin) + ": " + e.what());
    }
    return map;
}

TemperatureMap read_celsius_grid(const fs::path& path, Instant timestamp)
{
    return parse_celsius_grid(read_text_file(path), path.string(), timestamp);
}

bool is_celsius_grid_path(const fs::path& path)
{
    return path.extension() == ".csv";
}

CapturedFrame load_captured_frame(const fs::path& path)
{
    if (is_celsius_grid_path(path))
        return read_celsius_grid(path);
    return read_frame(path);
}

FrameTemperatures to_temperatures(const CapturedFrame& frame, Instant timestamp)
{
    FrameTemperatures out;
    if (const auto* raw = std::get_if<RadiometricFrame>(&frame)) {
        DecodedFrame decoded = raw_to_temperature(*raw);
        out.map = std::move(decoded.map);
        out.invalid_pixels = decoded.invalid_pixels;
    } else {
        out.map = std::get<TemperatureMap>(frame);
        for (std::size_t i = 0; i < out.map.temps.size(); ++i)
            if (!out.map.valid(i))
                ++out.invalid_pixels;
        if (out.invalid_pixels == out.map.temps.size())
            throw InputError("temperature grid has no valid pixel");
    }
    out.map.source_timestamp = timestamp;
    return out;
}

} // namespace thermolab
