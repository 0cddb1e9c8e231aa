#pragma once

#include "thermolab/protocol.hpp"
#include "thermolab/roi.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace thermolab {

enum class TrendLabel { Increase, Decrease, IncreaseThenDecrease, DecreaseThenIncrease, Stable };

inline constexpr std::array<TrendLabel, 5> kTrendLabels{TrendLabel::Increase, TrendLabel::Decrease,
                                                        TrendLabel::IncreaseThenDecrease,
                                                        TrendLabel::DecreaseThenIncrease, TrendLabel::Stable};

std::string_view to_string(TrendLabel label);
TrendLabel parse_trend_label(std::string_view text);
/// Human-readable wording ("Increase and decrease").
std::string_view display_name(TrendLabel label);

struct TrendConfig {
    double tau = 0.2;             ///< degC, significance threshold for one series
    double consensus_floor = 0.1; ///< degC, per-ROI vote threshold for the phase consensus

    /// Both thresholds must exceed the camera NETD.
    void validate(const CameraSpec& camera = kReferenceCamera) const;
};

struct TrendDetail {
    TrendLabel label = TrendLabel::Stable;
    double net = 0.0;  ///< last - first
    double peak = 0.0; ///< largest interior rise above both endpoints
    double dip = 0.0;  ///< largest interior fall below both endpoints
    bool excursion = false; ///< a significant interior extremum was absorbed into a monotone label
};

/// Classifies a trajectory against its endpoint envelope. Throws InputError
/// with fewer than two values.
TrendDetail classify_values(std::span<const double> values, double tau);
TrendLabel classify_trend(const RoiSeries& series, const TrendConfig& cfg);

// -- start/final tables -------------------------------------------------------

struct PhaseDeltaRow {
    EmotionLabel emotion = EmotionLabel::Joy;
    StimulusKind stimulus = StimulusKind::Video;
    RoiLabel roi = RoiLabel::Forehead;
    PhaseKind phase = PhaseKind::Acclimatization;
    double start_mean = 0.0;
    double final_mean = 0.0;

    bool operator==(const PhaseDeltaRow&) const = default;
};

/// 4 ROIs x 3 phases, ROI-major. Start/final are the first/last sample of
/// each phase series. Throws ProtocolError for an incomplete session and
/// InputError when a phase series is missing.
std::vector<PhaseDeltaRow> phase_delta_table(const Session& session, const std::vector<RoiSeries>& roi_series);

/// Presentation rounding of the start/final tables.
double round_tenth(double value);

/// Long form: emotion,stimulus,roi,phase,start,final (values at 0.1 degC).
std::string format_delta_csv(const std::vector<PhaseDeltaRow>& rows);
/// Wide layout: one row per ROI with Start/Final per phase.
std::string format_delta_table_wide(const std::vector<PhaseDeltaRow>& rows);
/// Reads the long form back; "file:line" diagnostics on malformed rows.
std::vector<PhaseDeltaRow> parse_delta_csv(std::string_view text, std::string_view origin);

// -- per-session trends ---------------------------------------------------------

enum class TrendBasis { Series, Endpoints };

std::string_view to_string(TrendBasis basis);

struct RoiTrend {
    RoiLabel roi = RoiLabel::Forehead;
    TrendDetail detail; ///< at tau
    TrendLabel vote = TrendLabel::Stable; ///< at the consensus floor
};

struct PhaseTrend {
    PhaseKind phase = PhaseKind::Acclimatization;
    TrendBasis basis = TrendBasis::Series;
    std::vector<RoiTrend> rois;
    TrendLabel consensus = TrendLabel::Stable;     ///< majority of per-ROI votes
    TrendLabel mean_of_rois = TrendLabel::Stable; ///< label of the mean-of-four-ROIs series
};

struct SessionTrends {
    EmotionLabel emotion = EmotionLabel::Joy;
    StimulusKind stimulus = StimulusKind::Video;
    TrendBasis basis = TrendBasis::Series;
    std::vector<PhaseTrend> phases;
    TrendLabel mean_of_rois_session = TrendLabel::Stable; ///< whole-session mean-of-four series
};

/// Phase label from four ROI series: the most frequent non-stable per-ROI
/// vote; ties go to the direction of the mean net change.
PhaseTrend phase_trend(PhaseKind phase, const std::vector<RoiSeries>& series, TrendBasis basis,
                       const TrendConfig& cfg);

SessionTrends session_trends(EmotionLabel emotion, StimulusKind stimulus, const std::vector<RoiSeries>& all_series,
                             const TrendConfig& cfg, TrendBasis basis = TrendBasis::Series);

/// Trends from start/final rows of one session; flagged as endpoint basis.
SessionTrends endpoint_trends(const std::vector<PhaseDeltaRow>& rows, const TrendConfig& cfg);

/// Groups endpoint rows by (emotion, stimulus) and derives trends per group.
std::vector<SessionTrends> endpoint_trends_by_session(const std::vector<PhaseDeltaRow>& rows, const TrendConfig& cfg);

/// emotion,stimulus,phase,roi,trend,basis rows for one session, with "consensus"
/// and "mean_of_rois" pseudo-ROIs.
std::string format_trend_csv(const SessionTrends& trends);

// -- cross-stimulus comparison -------------------------------------------------

inline constexpr std::string_view kAverageAspect = "mean_of_rois";

struct ComparisonRow {
    EmotionLabel emotion = EmotionLabel::Joy;
    std::string aspect; ///< phase name, or kAverageAspect for the whole-session average series
    TrendLabel video = TrendLabel::Stable;
    TrendLabel music = TrendLabel::Stable;
    TrendBasis video_basis = TrendBasis::Series;
    TrendBasis music_basis = TrendBasis::Series;
    std::string note;
};

struct StimulusComparison {
    std::vector<ComparisonRow> rows;
    std::vector<std::string> assumptions;
};

/// Per emotion x phase, the video and music labels side by side. Throws
/// InputError when an emotion appears on one side only or twice on a side.
StimulusComparison compare_stimuli(const std::vector<SessionTrends>& video, const std::vector<SessionTrends>& music);

std::string format_comparison_csv(const StimulusComparison& comparison);

// -- reference comparison tables ------------------------------------------------

struct ReferenceCell {
    EmotionLabel emotion = EmotionLabel::Joy;
    std::string aspect;
    StimulusKind stimulus = StimulusKind::Video;
    TrendLabel label = TrendLabel::Stable;
};

struct ReferenceTable {
    std::vector<ReferenceCell> cells;
    std::vector<std::string> assumptions;
};

/// Reads emotion,aspect,video,music rows. Labels accept either spelling; the
/// emotion alias "inv" is read as joy and recorded as an assumption.
ReferenceTable parse_reference_table(std::string_view text, std::string_view origin);

enum class CellStatus { Match, Mismatch, Exempt };

std::string_view to_string(CellStatus status);

struct ReferenceCheck {
    ReferenceCell expected;
    TrendLabel computed = TrendLabel::Stable;
    TrendBasis basis = TrendBasis::Series;
    CellStatus status = CellStatus::Match;
    std::string note;
};

/// Cell-by-cell check. Compound reference labels on endpoint-basis sessions
/// are exempt, since endpoints cannot show interior extrema.
std::vector<ReferenceCheck> check_against_reference(const StimulusComparison& comparison, const ReferenceTable& reference);

// -- nose divergence -------------------------------------------------------------

struct NoseDivergence {
    PhaseKind phase = PhaseKind::Acclimatization;
    TrendLabel nose = TrendLabel::Stable;
    std::vector<TrendLabel> others_modal; ///< most frequent label(s) among forehead and cheeks
    bool diverges = false;
};

/// Per phase, whether the nose label differs from the modal label of the other three ROIs.
std::vector<NoseDivergence> nose_divergence(const SessionTrends& trends);

} // namespace thermolab
