#pragma once

#include "thermolab/frame_io.hpp"
#include "thermolab/protocol.hpp"
#include "thermolab/serialization.hpp"
#include "thermolab/trend.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

namespace thermolab {

struct AnalysisOptions {
    std::optional<RoiSet> roi_override; ///< wins over the session's own layout
    TrendConfig trend;
    CameraSpec camera = kReferenceCamera;
};

/// Layout used for a session: the override, else the session's, else the
/// default layout for the frame size.
RoiSet resolve_rois(const Session& session, const std::optional<RoiSet>& roi_override, int width, int height);

struct CaptureAnalysis {
    std::size_t sequence = 0; ///< 1-based position across the whole session
    PhaseKind phase = PhaseKind::Acclimatization;
    Capture capture;
    TemperatureMap map;
    std::size_t invalid_pixels = 0;
    std::vector<RoiStats> stats;
};

struct SessionAnalysis {
    Session session;
    RoiSet rois;
    TrendConfig trend_config;
    std::vector<CaptureAnalysis> captures;
    std::vector<RoiSeries> series; ///< label x phase
    std::vector<PhaseDeltaRow> deltas;
    SessionTrends trends;
    std::vector<NoseDivergence> nose;
};

/// Loads the frame of one capture.
using FrameLoader = std::function<CapturedFrame(const Capture& capture, std::size_t sequence)>;

/// Loader resolving frame_ref against a directory.
FrameLoader directory_loader(std::filesystem::path base_dir);

/// Every capture of the session, in order, with its phase and 1-based sequence.
std::vector<std::pair<PhaseKind, Capture>> ordered_captures(const Session& session);

/// Decodes every capture, extracts ROI stats stamped with the capture instant,
/// builds the per-phase series and derives the delta table and trends.
/// Throws ProtocolError for an incomplete session and InputError naming the
/// capture when a frame fails to load or decode.
SessionAnalysis analyze_session(const Session& session, const FrameLoader& loader, const AnalysisOptions& opts = {});

/// Full-precision structured form of an analysis (the UI and bundle document).
Json analysis_json(const SessionAnalysis& analysis);

void to_json(Json& j, const TrendConfig& c);
void from_json(const Json& j, TrendConfig& c);

Json to_json_value(const SessionTrends& trends);
Json to_json_value(const StimulusComparison& comparison);

} // namespace thermolab
