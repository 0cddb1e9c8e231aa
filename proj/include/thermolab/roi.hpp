#pragma once

#include "thermolab/radiometry.hpp"
#include "thermolab/time.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace thermolab {

enum class RoiLabel { Forehead, Nose, RightCheek, LeftCheek };

inline constexpr std::array<RoiLabel, 4> kRoiLabels{RoiLabel::Forehead, RoiLabel::Nose, RoiLabel::RightCheek,
                                                    RoiLabel::LeftCheek};

std::string_view to_string(RoiLabel label);
/// Accepts the canonical names ("forehead", "nose", "right_cheek", "left_cheek").
RoiLabel parse_roi_label(std::string_view text);
/// Row caption used in the wide tables ("Right skin on cheek").
std::string_view display_name(RoiLabel label);

enum class PhaseKind { Acclimatization, Stimulus, Response };

inline constexpr std::array<PhaseKind, 3> kPhases{PhaseKind::Acclimatization, PhaseKind::Stimulus,
                                                  PhaseKind::Response};

std::string_view to_string(PhaseKind phase);
PhaseKind parse_phase_kind(std::string_view text);

struct RoiBox {
    RoiLabel label = RoiLabel::Forehead;
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    bool contains(int px, int py) const { return px >= x && px < x + w && py >= y && py < y + h; }
    bool overlaps(const RoiBox& other) const;
    bool fits(int width, int height) const { return x >= 0 && y >= 0 && x + w <= width && y + h <= height; }

    bool operator==(const RoiBox&) const = default;
};

/// Up to one box per label, kept in label order. Immutable once a session starts.
class RoiSet {
public:
    RoiSet() = default;
    /// Throws InputError on a duplicate label or a box smaller than 2x2.
    explicit RoiSet(std::vector<RoiBox> boxes);

    const std::vector<RoiBox>& boxes() const { return boxes_; }
    const RoiBox* find(RoiLabel label) const;
    bool empty() const { return boxes_.empty(); }
    std::size_t size() const { return boxes_.size(); }

    bool operator==(const RoiSet&) const = default;

private:
    std::vector<RoiBox> boxes_;
};

struct RoiStats {
    RoiLabel label = RoiLabel::Forehead;
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double valid_pixel_fraction = 0.0;
    Instant timestamp{};
};

struct RoiSample {
    Instant timestamp{};
    double mean = 0.0;

    bool operator==(const RoiSample&) const = default;
};

struct RoiSeries {
    RoiLabel label = RoiLabel::Forehead;
    PhaseKind phase = PhaseKind::Acclimatization;
    std::vector<RoiSample> samples; ///< strictly increasing timestamps

    /// Trend classification needs at least two samples.
    bool trend_ready() const { return samples.size() >= 2; }

    bool operator==(const RoiSeries&) const = default;
};

/// Min/max/mean over the valid pixels of each box.
/// Throws InputError naming the label when a box leaves the map or holds no valid pixel.
std::vector<RoiStats> extract_stats(const TemperatureMap& map, const RoiSet& rois);

/// Starting layout on a 16x12 cell grid, centred in the frame: forehead
/// upper-centre, nose centre, cheeks lateral below the eye line. Frames whose
/// sides are multiples of 16 and 12 scale exactly.
RoiSet default_roi_layout(int width, int height);

/// Splits per-frame stats into one series per label, ordered by timestamp.
/// Throws InputError on duplicate timestamps for the same label.
std::vector<RoiSeries> build_series(std::vector<std::vector<RoiStats>> stats_stream, PhaseKind phase);

} // namespace thermolab
