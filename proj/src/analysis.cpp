#include "thermolab/analysis.hpp"

#include "thermolab/error.hpp"

#include <algorithm>

namespace thermolab {

namespace fs = std::filesystem;

RoiSet resolve_rois(const Session& session, const std::optional<RoiSet>& roi_override, int width, int height)
{
    if (roi_override && !roi_override->empty())
        return *roi_override;
    if (session.rois && !session.rois->empty())
        return *session.rois;
    return default_roi_layout(width, height);
}

FrameLoader directory_loader(fs::path base_dir)
{
    return [base = std::move(base_dir)](const Capture& capture, std::size_t) {
        const fs::path ref(capture.frame_ref);
        return load_captured_frame(ref.is_absolute() ? ref : base / ref);
    };
}

std::vector<std::pair<PhaseKind, Capture>> ordered_captures(const Session& session)
{
    std::vector<std::pair<PhaseKind, Capture>> out;
    for (const PhaseRecord& p : session.phases)
        for (const Capture& c : p.captures)
            out.emplace_back(p.kind, c);
    return out;
}

SessionAnalysis analyze_session(const Session& session, const FrameLoader& loader, const AnalysisOptions& opts)
{
    if (session.status != SessionStatus::Completed)
        throw ProtocolError("analysis needs a completed session (status is " + std::string(to_string(session.status))
                            + ")");
    opts.trend.validate(opts.camera);

    SessionAnalysis out;
    out.session = session;
    out.trend_config = opts.trend;

    const auto captures = ordered_captures(session);
    if (captures.empty())
        throw InputError("no frames found in session " + session.id);

    std::array<std::vector<std::vector<RoiStats>>, 3> per_phase;
    bool rois_resolved = false;
    std::size_t sequence = 0;
    for (const auto& [phase, capture] : captures) {
        ++sequence;
        const std::string where = "capture " + std::to_string(sequence) + " (" + capture.frame_ref + ")";
        CaptureAnalysis ca;
        ca.sequence = sequence;
        ca.phase = phase;
        ca.capture = capture;
        try {
            FrameTemperatures ft = to_temperatures(loader(capture, sequence), capture.at);
            if (!rois_resolved) {
                out.rois = resolve_rois(session, opts.roi_override, ft.map.width, ft.map.height);
                rois_resolved = true;
            }
            ca.stats = extract_stats(ft.map, out.rois);
            for (RoiStats& s : ca.stats)
                s.timestamp = capture.at;
            ca.invalid_pixels = ft.invalid_pixels;
            ca.map = std::move(ft.map);
        } catch (const IntegrityError&) {
            throw;
        } catch (const Error& e) {
            throw InputError(where + ": " + e.what());
        }
        per_phase[static_cast<std::size_t>(phase)].push_back(ca.stats);
        out.captures.push_back(std::move(ca));
    }

    for (PhaseKind phase : kPhases) {
        auto series = build_series(std::move(per_phase[static_cast<std::size_t>(phase)]), phase);
        for (RoiSeries& s : series)
            out.series.push_back(std::move(s));
    }
    out.deltas = phase_delta_table(session, out.series);
    out.trends = session_trends(session.emotion, session.stimulus.kind, out.series, opts.trend);
    out.nose = nose_divergence(out.trends);
    return out;
}

void to_json(Json& j, const TrendConfig& c)
{
    j = Json{{"tau", c.tau}, {"consensus_floor", c.consensus_floor}};
}

void from_json(const Json& j, TrendConfig& c)
{
    c = TrendConfig{};
    if (j.contains("tau"))
        c.tau = j.at("tau").get<double>();
    if (j.contains("consensus_floor"))
        c.consensus_floor = j.at("consensus_floor").get<double>();
}

namespace {

Json detail_json(const TrendDetail& d)
{
    return Json{{"label", to_string(d.label)}, {"net", d.net}, {"peak", d.peak}, {"dip", d.dip}, {"excursion", d.excursion}};
}

} // namespace

Json to_json_value(const SessionTrends& trends)
{
    Json phases = Json::array();
    for (const PhaseTrend& p : trends.phases) {
        Json rois = Json::array();
        for (const RoiTrend& r : p.rois)
            rois.push_back({{"roi", to_string(r.roi)}, {"trend", detail_json(r.detail)}, {"vote", to_string(r.vote)}});
        phases.push_back({{"phase", to_string(p.phase)},
                          {"rois", rois},
                          {"consensus", to_string(p.consensus)},
                          {"mean_of_rois", to_string(p.mean_of_rois)}});
    }
    return Json{{"emotion", to_string(trends.emotion)},
                {"stimulus", to_string(trends.stimulus)},
                {"basis", to_string(trends.basis)},
                {"phases", phases},
                {"mean_of_rois_session", to_string(trends.mean_of_rois_session)}};
}

Json to_json_value(const StimulusComparison& comparison)
{
    Json rows = Json::array();
    for (const ComparisonRow& r : comparison.rows)
        rows.push_back({{"emotion", to_string(r.emotion)},
                        {"aspect", r.aspect},
                        {"video", to_string(r.video)},
                        {"music", to_string(r.music)},
                        {"video_basis", to_string(r.video_basis)},
                        {"music_basis", to_string(r.music_basis)},
                        {"note", r.note}});
    return Json{{"rows", rows}, {"assumptions", comparison.assumptions}};
}

Json analysis_json(const SessionAnalysis& a)
{
    Json captures = Json::array();
    for (const CaptureAnalysis& c : a.captures)
        captures.push_back({{"sequence", c.sequence},
                            {"phase", to_string(c.phase)},
                            {"at", format_iso8601(c.capture.at)},
                            {"frame_ref", c.capture.frame_ref},
                            {"invalid_pixels", c.invalid_pixels},
                            {"stats", c.stats}});
    Json series = Json::array();
    for (const RoiSeries& s : a.series) {
        Json samples = Json::array();
        for (const RoiSample& sample : s.samples)
            samples.push_back({{"at", format_iso8601(sample.timestamp)}, {"mean", sample.mean}});
        series.push_back({{"roi", to_string(s.label)}, {"phase", to_string(s.phase)}, {"samples", samples}});
    }
    Json deltas = Json::array();
    for (const PhaseDeltaRow& r : a.deltas)
        deltas.push_back({{"roi", to_string(r.roi)},
                          {"phase", to_string(r.phase)},
                          {"start", r.start_mean},
                          {"final", r.final_mean}});
    Json nose = Json::array();
    for (const NoseDivergence& n : a.nose) {
        Json modal = Json::array();
        for (TrendLabel l : n.others_modal)
            modal.push_back(to_string(l));
        nose.push_back({{"phase", to_string(n.phase)}, {"nose", to_string(n.nose)}, {"others_modal", modal},
                        {"diverges", n.diverges}});
    }
    return Json{{"session_id", a.session.id},
                {"emotion", to_string(a.session.emotion)},
                {"stimulus", to_string(a.session.stimulus.kind)},
                {"rois", a.rois},
                {"trend_config", a.trend_config},
                {"captures", captures},
                {"series", series},
                {"deltas", deltas},
                {"trends", to_json_value(a.trends)},
                {"nose_divergence", nose},
                {"summary", session_summary(a.session)}};
}

} // namespace thermolab
