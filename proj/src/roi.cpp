#include "thermolab/roi.hpp"

#include "thermolab/error.hpp"

#include <algorithm>
#include <limits>

namespace thermolab {

std::string_view to_string(RoiLabel label)
{
    switch (label) {
    case RoiLabel::Forehead: return "forehead";
    case RoiLabel::Nose: return "nose";
    case RoiLabel::RightCheek: return "right_cheek";
    case RoiLabel::LeftCheek: return "left_cheek";
    }
    return "?";
}

std::string_view display_name(RoiLabel label)
{
    switch (label) {
    case RoiLabel::Forehead: return "Forehead";
    case RoiLabel::Nose: return "Nose";
    case RoiLabel::RightCheek: return "Right skin on cheek";
    case RoiLabel::LeftCheek: return "Left skin on cheek";
    }
    return "?";
}

RoiLabel parse_roi_label(std::string_view text)
{
    for (RoiLabel label : kRoiLabels)
        if (text == to_string(label))
            return label;
    throw InputError("unknown ROI label '" + std::string(text) + "'");
}

std::string_view to_string(PhaseKind phase)
{
    switch (phase) {
    case PhaseKind::Acclimatization: return "acclimatization";
    case PhaseKind::Stimulus: return "stimulus";
    case PhaseKind::Response: return "response";
    }
    return "?";
}

PhaseKind parse_phase_kind(std::string_view text)
{
    for (PhaseKind phase : kPhases)
        if (text == to_string(phase))
            return phase;
    throw InputError("unknown phase '" + std::string(text) + "'");
}

bool RoiBox::overlaps(const RoiBox& other) const
{
    return x < other.x + other.w && other.x < x + w && y < other.y + other.h && other.y < y + h;
}

RoiSet::RoiSet(std::vector<RoiBox> boxes)
{
    for (const RoiBox& box : boxes) {
        if (box.w < 2 || box.h < 2)
            throw InputError("ROI " + std::string(to_string(box.label)) + " must be at least 2x2 pixels");
        if (box.x < 0 || box.y < 0)
            throw InputError("ROI " + std::string(to_string(box.label)) + " has a negative origin");
    }
    std::sort(boxes.begin(), boxes.end(), [](const RoiBox& a, const RoiBox& b) { return a.label < b.label; });
    for (std::size_t i = 1; i < boxes.size(); ++i)
        if (boxes[i].label == boxes[i - 1].label)
            throw InputError("ROI " + std::string(to_string(boxes[i].label)) + " appears more than once");
    boxes_ = std::move(boxes);
}

const RoiBox* RoiSet::find(RoiLabel label) const
{
    for (const RoiBox& box : boxes_)
        if (box.label == label)
            return &box;
    return nullptr;
}

std::vector<RoiStats> extract_stats(const TemperatureMap& map, const RoiSet& rois)
{
    std::vector<RoiStats> out;
    out.reserve(rois.size());
    for (const RoiBox& box : rois.boxes()) {
        const std::string name(to_string(box.label));
        if (!box.fits(map.width, map.height))
            throw InputError("ROI " + name + " lies outside the " + std::to_string(map.width) + "x"
                             + std::to_string(map.height) + " map");
        double sum = 0.0;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        std::size_t valid = 0;
        for (int y = box.y; y < box.y + box.h; ++y) {
            for (int x = box.x; x < box.x + box.w; ++x) {
                const double t = map.at(x, y);
                if (!std::isfinite(t))
                    continue;
                sum += t;
                lo = std::min(lo, t);
                hi = std::max(hi, t);
                ++valid;
            }
        }
        if (valid == 0)
            throw InputError("ROI " + name + " contains no valid pixel");
        RoiStats stats;
        stats.label = box.label;
        stats.min = lo;
        stats.max = hi;
        // Rounding can push the mean a hair outside [min, max] on near-constant boxes.
        stats.mean = std::clamp(sum / static_cast<double>(valid), lo, hi);
        stats.valid_pixel_fraction = static_cast<double>(valid) / static_cast<double>(box.w * box.h);
        stats.timestamp = map.source_timestamp;
        out.push_back(stats);
    }
    return out;
}

RoiSet default_roi_layout(int width, int height)
{
    if (width < 32 || height < 32)
        throw InputError("frame " + std::to_string(width) + "x" + std::to_string(height)
                         + " too small for the default ROI layout (need >= 32x32)");
    const int cx = width / 16;
    const int cy = height / 12;
    const int ox = (width - 16 * cx) / 2;
    const int oy = (height - 12 * cy) / 2;
    auto cell_box = [&](RoiLabel label, int col, int row, int cols, int rows) {
        return RoiBox{label, ox + col * cx, oy + row * cy, cols * cx, rows * cy};
    };
    // Image left is the subject's right side.
    return RoiSet({
        cell_box(RoiLabel::Forehead, 6, 1, 4, 2),
        cell_box(RoiLabel::Nose, 7, 5, 2, 2),
        cell_box(RoiLabel::RightCheek, 4, 6, 2, 2),
        cell_box(RoiLabel::LeftCheek, 10, 6, 2, 2),
    });
}

std::vector<RoiSeries> build_series(std::vector<std::vector<RoiStats>> stats_stream, PhaseKind phase)
{
    std::vector<RoiSeries> out;
    for (RoiLabel label : kRoiLabels) {
        RoiSeries series;
        series.label = label;
        series.phase = phase;
        for (const auto& frame : stats_stream)
            for (const RoiStats& s : frame)
                if (s.label == label)
                    series.samples.push_back({s.timestamp, s.mean});
        if (series.samples.empty())
            continue;
        std::stable_sort(series.samples.begin(), series.samples.end(),
                         [](const RoiSample& a, const RoiSample& b) { return a.timestamp < b.timestamp; });
        for (std::size_t i = 1; i < series.samples.size(); ++i)
            if (series.samples[i].timestamp == series.samples[i - 1].timestamp)
                throw InputError("duplicate timestamp " + format_iso8601(series.samples[i].timestamp) + " in "
                                 + std::string(to_string(label)) + " series");
        out.push_back(std::move(series));
    }
    return out;
}

} // namespace thermolab
