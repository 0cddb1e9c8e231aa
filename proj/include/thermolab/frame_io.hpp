#pragma once

#include "thermolab/radiometry.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <variant>

namespace thermolab {

// Neutral radiometric frame format:
//   NNNN.raw   width*height little-endian uint16 counts, row-major
//   NNNN.meta  JSON: width, height, timestamp, sequence_index, calibration
// Pre-calibrated cameras export a degC grid instead:
//   NNNN.csv   comma-separated degC values, one row per line ("nan" = invalid)

std::filesystem::path meta_path_for(const std::filesystem::path& raw_path);

void write_frame(const std::filesystem::path& raw_path, const RadiometricFrame& frame);
RadiometricFrame read_frame(const std::filesystem::path& raw_path);

std::string encode_raw(const RadiometricFrame& frame);
std::string encode_meta(const RadiometricFrame& frame);

/// Values print with 17 significant digits so they read back bit-exact.
std::string encode_celsius_grid(const TemperatureMap& map);
void write_celsius_grid(const std::filesystem::path& path, const TemperatureMap& map);
/// Throws InputError carrying "file:line" on malformed rows.
TemperatureMap read_celsius_grid(const std::filesystem::path& path, Instant timestamp = {});
TemperatureMap parse_celsius_grid(std::string_view text, std::string_view origin, Instant timestamp = {});

/// A frame as captured: radiometric counts or an already-converted degC grid.
using CapturedFrame = std::variant<RadiometricFrame, TemperatureMap>;

bool is_celsius_grid_path(const std::filesystem::path& path);
CapturedFrame load_captured_frame(const std::filesystem::path& path);

struct FrameTemperatures {
    TemperatureMap map;
    std::size_t invalid_pixels = 0;
};

/// Temperature view of a captured frame, stamped with `timestamp`.
FrameTemperatures to_temperatures(const CapturedFrame& frame, Instant timestamp);

} // namespace thermolab
