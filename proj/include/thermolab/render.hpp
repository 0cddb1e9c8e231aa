#pragma once

#include "thermolab/protocol.hpp"
#include "thermolab/radiometry.hpp"
#include "thermolab/serialization.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace thermolab {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    bool operator==(const Rgb&) const = default;
};

inline constexpr std::string_view kPaletteName = "purple-yellow";

/// 256-entry ramp from purple (cold) to yellow (hot).
const std::array<Rgb, 256>& palette();

/// Position of a colour in the ramp, if it is one of its entries.
std::optional<int> palette_index(Rgb colour);

struct RenderSpec {
    std::string palette{kPaletteName};
    double scale_min = 0.0; ///< degC
    double scale_max = 1.0; ///< degC
    bool fixed_for_session = true;

    void validate() const;

    bool operator==(const RenderSpec&) const = default;
};

void to_json(Json& j, const RenderSpec& s);
void from_json(const Json& j, RenderSpec& s);

/// Session-wide min - 0.5 degC to max + 0.5 degC over all valid pixels.
/// Throws InputError with no maps or no valid pixel.
RenderSpec default_render_spec(std::span<const TemperatureMap> maps);

/// Ramp index for a temperature; values outside the scale clamp to the ends.
int colour_index(double temp_c, const RenderSpec& spec);
/// Colour of a temperature; invalid (NaN) pixels are black.
Rgb colour_for(double temp_c, const RenderSpec& spec);

/// Binary PPM (P6). The header comment carries the render spec as JSON.
std::string render_ppm(const TemperatureMap& map, const RenderSpec& spec);

struct PpmImage {
    int width = 0;
    int height = 0;
    std::vector<Rgb> pixels;
    std::optional<RenderSpec> spec; ///< from the header comment, when present
};

PpmImage parse_ppm(std::string_view bytes);

/// One render per map, all under the same spec. Throws InputError when empty.
std::vector<std::string> render_sequence(std::span<const TemperatureMap> maps, const RenderSpec& spec);

struct PanelPick {
    std::string caption;
    std::size_t capture = 0; ///< index into the session's ordered captures
};

/// Six-panel sequence: stimulus start, 4 min into the stimulus, stimulus end,
/// and 1, 6 and 10 min into the response. Each panel takes the capture
/// nearest its target instant within that phase.
std::vector<PanelPick> sequence_panels(const Session& session);

/// Panels side by side with a 4 px gap and a scale legend strip underneath.
std::string render_filmstrip(std::span<const TemperatureMap> panels, const RenderSpec& spec);

} // namespace thermolab
