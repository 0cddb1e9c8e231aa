#include "thermolab/render.hpp"

#include "thermolab/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace thermolab {

namespace {

struct Anchor {
    std::size_t at; ///< palette index
    Rgb colour;
};

// Perceptual purple-blue-teal-green-yellow ramp; anchors spaced by luminance.
constexpr std::array<Anchor, 5> kAnchors{{{0, {68, 1, 84}},
                                           {76, {59, 82, 139}},
                                           {128, {33, 145, 140}},
                                           {192, {94, 201, 98}},
                                           {255, {253, 231, 37}}}};

std::array<Rgb, 256> build_palette()
{
    std::array<Rgb, 256> lut{};
    for (std::size_t i = 0; i < lut.size(); ++i) {
        std::size_t k = 0;
        while (k + 2 < kAnchors.size() && i > kAnchors[k + 1].at)
            ++k;
        const Anchor& a = kAnchors[k];
        const Anchor& b = kAnchors[k + 1];
        const double u = static_cast<double>(i - a.at) / static_cast<double>(b.at - a.at);
        auto mix = [u](std::uint8_t p, std::uint8_t q) {
            return static_cast<std::uint8_t>(std::lround(p + (static_cast<double>(q) - p) * u));
        };
        lut[i] = {mix(a.colour.r, b.colour.r), mix(a.colour.g, b.colour.g), mix(a.colour.b, b.colour.b)};
    }
    return lut;
}

void append_rgb(std::string& out, Rgb c)
{
    out.push_back(static_cast<char>(c.r));
    out.push_back(static_cast<char>(c.g));
    out.push_back(static_cast<char>(c.b));
}

std::string ppm_header(int width, int height, const RenderSpec& spec)
{
    return "P6\n# thermolab " + Json(spec).dump() + "\n" + std::to_string(width) + " " + std::to_string(height)
           + "\n255\n";
}

} // namespace

const std::array<Rgb, 256>& palette()
{
    static const std::array<Rgb, 256> lut = build_palette();
    return lut;
}

std::optional<int> palette_index(Rgb colour)
{
    const auto& lut = palette();
    const auto it = std::find(lut.begin(), lut.end(), colour);
    if (it == lut.end())
        return std::nullopt;
    return static_cast<int>(it - lut.begin());
}

void RenderSpec::validate() const
{
    if (palette != kPaletteName)
        throw InputError("unknown palette '" + palette + "'");
    if (!std::isfinite(scale_min) || !std::isfinite(scale_max) || !(scale_min < scale_max))
        throw InputError("render scale needs scale_min < scale_max");
    if (!fixed_for_session)
        throw InputError("render scale must be fixed for the whole session");
}

void to_json(Json& j, const RenderSpec& s)
{
    j = Json{{"palette", s.palette},
             {"scale_min", s.scale_min},
             {"scale_max", s.scale_max},
             {"fixed_for_session", s.fixed_for_session}};
}

void from_json(const Json& j, RenderSpec& s)
{
    try {
        s.palette = j.at("palette").get<std::string>();
        s.scale_min = j.at("scale_min").get<double>();
        s.scale_max = j.at("scale_max").get<double>();
        s.fixed_for_session = j.at("fixed_for_session").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("render spec: ") + e.what());
    }
}

RenderSpec default_render_spec(std::span<const TemperatureMap> maps)
{
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const TemperatureMap& m : maps)
        for (double t : m.temps)
            if (std::isfinite(t)) {
                lo = std::min(lo, t);
                hi = std::max(hi, t);
            }
    if (!std::isfinite(lo))
        throw InputError("cannot derive a render scale: no valid temperatures");
    RenderSpec spec;
    spec.scale_min = lo - 0.5;
    spec.scale_max = hi + 0.5;
    return spec;
}

int colour_index(double temp_c, const RenderSpec& spec)
{
    const double u = (temp_c - spec.scale_min) / (spec.scale_max - spec.scale_min);
    return static_cast<int>(std::lround(std::clamp(u, 0.0, 1.0) * 255.0));
}

Rgb colour_for(double temp_c, const RenderSpec& spec)
{
    if (!std::isfinite(temp_c))
        return {0, 0, 0};
    return palette()[static_cast<std::size_t>(colour_index(temp_c, spec))];
}

std::string render_ppm(const TemperatureMap& map, const RenderSpec& spec)
{
    spec.validate();
    map.validate();
    std::string out = ppm_header(map.width, map.height, spec);
    out.reserve(out.size() + map.pixel_count() * 3);
    for (double t : map.temps)
        append_rgb(out, colour_for(t, spec));
    return out;
}

PpmImage parse_ppm(std::string_view bytes)
{
    PpmImage img;
    std::size_t pos = 0;
    auto next_token = [&]() {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                const std::size_t eol = bytes.find('\n', pos);
                const std::string_view comment = bytes.substr(pos, eol - pos);
                constexpr std::string_view tag = "# thermolab ";
                if (comment.substr(0, tag.size()) == tag) {
                    RenderSpec spec;
                    from_json(Json::parse(comment.substr(tag.size())), spec);
                    img.spec = spec;
                }
                if (eol == std::string_view::npos)
                    throw InputError("ppm: truncated header");
                pos = eol + 1;
            } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
                ++pos;
            } else {
                break;
            }
        }
        const std::size_t start = pos;
        while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos])))
            ++pos;
        return std::string(bytes.substr(start, pos - start));
    };
    if (next_token() != "P6")
        throw InputError("ppm: not a binary P6 image");
    try {
        img.width = std::stoi(next_token());
        img.height = std::stoi(next_token());
        if (std::stoi(next_token()) != 255)
            throw InputError("ppm: only 8-bit images are supported");
    } catch (const std::logic_error&) {
        throw InputError("ppm: malformed header");
    }
    ++pos; // single whitespace before the raster
    const std::size_t n = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
    if (img.width <= 0 || img.height <= 0 || bytes.size() - std::min(pos, bytes.size()) != n * 3)
        throw InputError("ppm: raster size does not match the header");
    img.pixels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        img.pixels[i] = {static_cast<std::uint8_t>(bytes[pos + 3 * i]), static_cast<std::uint8_t>(bytes[pos + 3 * i + 1]),
                         static_cast<std::uint8_t>(bytes[pos + 3 * i + 2])};
    }
    return img;
}

std::vector<std::string> render_sequence(std::span<const TemperatureMap> maps, const RenderSpec& spec)
{
    if (maps.empty())
        throw InputError("nothing to render: the session has no temperature maps");
    std::vector<std::string> out;
    out.reserve(maps.size());
    for (const TemperatureMap& m : maps)
        out.push_back(render_ppm(m, spec));
    return out;
}

std::vector<PanelPick> sequence_panels(const Session& session)
{
    struct Target {
        PhaseKind phase;
        Millis offset;
        bool from_end;
        const char* caption;
    };
    const std::array<Target, 6> targets{{{PhaseKind::Stimulus, Millis{0}, false, "beginning of stimulus"},
                                         {PhaseKind::Stimulus, Millis{240'000}, false, "4 min of stimulus"},
                                         {PhaseKind::Stimulus, Millis{0}, true, "end of stimulus"},
                                         {PhaseKind::Response, Millis{60'000}, false, "1 min after the stimulus"},
                                         {PhaseKind::Response, Millis{360'000}, false, "6 min after the stimulus"},
                                         {PhaseKind::Response, Millis{600'000}, false, "10 min after the stimulus"}}};

    std::vector<PanelPick> out;
    for (const Target& t : targets) {
        std::size_t base = 0;
        const PhaseRecord* phase = nullptr;
        for (const PhaseRecord& p : session.phases) {
            if (p.kind == t.phase) {
                phase = &p;
                break;
            }
            base += p.captures.size();
        }
        if (!phase || phase->captures.empty())
            throw InputError("sequence panels need captures in the " + std::string(to_string(t.phase)) + " phase");
        Instant target = phase->started + t.offset;
        if (t.from_end)
            target = phase->captures.back().at;
        std::size_t best = 0;
        Millis best_gap = Millis::max();
        for (std::size_t i = 0; i < phase->captures.size(); ++i) {
            const Millis gap = phase->captures[i].at > target ? phase->captures[i].at - target : target - phase->captures[i].at;
            if (gap < best_gap) {
                best_gap = gap;
                best = i;
            }
        }
        out.push_back({t.caption, base + best});
    }
    return out;
}

std::string render_filmstrip(std::span<const TemperatureMap> panels, const RenderSpec& spec)
{
    if (panels.empty())
        throw InputError("filmstrip needs at least one panel");
    spec.validate();
    constexpr int kGap = 4;
    constexpr int kLegend = 8;
    const int h = panels.front().height;
    int width = 0;
    for (const TemperatureMap& m : panels) {
        m.validate();
        if (m.height != h)
            throw InputError("filmstrip panels must share one height");
        width += m.width;
    }
    width += kGap * static_cast<int>(panels.size() - 1);
    const int height = h + kGap + kLegend;

    std::string out = ppm_header(width, height, spec);
    for (int y = 0; y < h; ++y) {
        for (std::size_t p = 0; p < panels.size(); ++p) {
            if (p > 0)
                for (int g = 0; g < kGap; ++g)
                    append_rgb(out, {255, 255, 255});
            for (int x = 0; x < panels[p].width; ++x)
                append_rgb(out, colour_for(panels[p].at(x, y), spec));
        }
    }
    for (int y = 0; y < kGap; ++y)
        for (int x = 0; x < width; ++x)
            append_rgb(out, {255, 255, 255});
    for (int y = 0; y < kLegend; ++y)
        for (int x = 0; x < width; ++x) {
            const double u = width > 1 ? static_cast<double>(x) / (width - 1) : 0.0;
            append_rgb(out, palette()[static_cast<std::size_t>(std::lround(u * 255.0))]);
        }
    return out;
}

} // namespace thermolab
