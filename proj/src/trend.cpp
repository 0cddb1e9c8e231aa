#include "thermolab/trend.hpp"

#include "thermolab/csv.hpp"
#include "thermolab/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <tuple>

namespace thermolab {

namespace {

// Slack on threshold comparisons so 0.1 degC-grid values land on the intended side.
constexpr double kEps = 1e-9;

bool at_least(double value, double threshold)
{
    return value >= threshold - kEps;
}

std::string fmt_tenth(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", round_tenth(v));
    return buf;
}

/// Mean over whichever series carry a sample at each timestamp.
std::vector<double> mean_series(const std::vector<const RoiSeries*>& series)
{
    std::map<Instant, std::pair<double, int>> acc;
    for (const RoiSeries* s : series)
        for (const RoiSample& sample : s->samples) {
            auto& slot = acc[sample.timestamp];
            slot.first += sample.mean;
            slot.second += 1;
        }
    std::vector<double> out;
    out.reserve(acc.size());
    for (const auto& [t, slot] : acc)
        out.push_back(slot.first / slot.second);
    return out;
}

std::vector<double> values_of(const RoiSeries& s)
{
    std::vector<double> v;
    v.reserve(s.samples.size());
    for (const RoiSample& sample : s.samples)
        v.push_back(sample.mean);
    return v;
}

TrendLabel consensus_of(const std::vector<RoiTrend>& rois)
{
    std::array<int, kTrendLabels.size()> counts{};
    double mean_net = 0.0;
    for (const RoiTrend& r : rois) {
        if (r.vote != TrendLabel::Stable)
            ++counts[static_cast<std::size_t>(r.vote)];
        mean_net += r.detail.net;
    }
    if (!rois.empty())
        mean_net /= static_cast<double>(rois.size());

    const int best = *std::max_element(counts.begin(), counts.end());
    if (best == 0)
        return TrendLabel::Stable;
    std::vector<TrendLabel> winners;
    for (TrendLabel l : kTrendLabels)
        if (counts[static_cast<std::size_t>(l)] == best)
            winners.push_back(l);
    if (winners.size() == 1)
        return winners.front();

    auto has = [&](TrendLabel l) { return std::find(winners.begin(), winners.end(), l) != winners.end(); };
    if (mean_net > kEps && has(TrendLabel::Increase))
        return TrendLabel::Increase;
    if (mean_net < -kEps && has(TrendLabel::Decrease))
        return TrendLabel::Decrease;
    if (std::abs(mean_net) <= kEps)
        return TrendLabel::Stable;
    return winners.front();
}

} // namespace

std::string_view to_string(TrendLabel label)
{
    switch (label) {
    case TrendLabel::Increase: return "increase";
    case TrendLabel::Decrease: return "decrease";
    case TrendLabel::IncreaseThenDecrease: return "increase_then_decrease";
    case TrendLabel::DecreaseThenIncrease: return "decrease_then_increase";
    case TrendLabel::Stable: return "stable";
    }
    return "?";
}

TrendLabel parse_trend_label(std::string_view text)
{
    for (TrendLabel l : kTrendLabels)
        if (text == to_string(l) || text == display_name(l))
            return l;
    throw InputError("unknown trend label '" + std::string(text) + "'");
}

std::string_view display_name(TrendLabel label)
{
    switch (label) {
    case TrendLabel::Increase: return "Increase";
    case TrendLabel::Decrease: return "Decrease";
    case TrendLabel::IncreaseThenDecrease: return "Increase and decrease";
    case TrendLabel::DecreaseThenIncrease: return "Decrease and increase";
    case TrendLabel::Stable: return "Stable";
    }
    return "?";
}

std::string_view to_string(TrendBasis basis)
{
    return basis == TrendBasis::Series ? "series" : "endpoints";
}

void TrendConfig::validate(const CameraSpec& camera) const
{
    if (!(tau > camera.netd))
        throw InputError("trend threshold tau must exceed the camera NETD (" + std::to_string(camera.netd) + " degC)");
    if (!(consensus_floor > camera.netd))
        throw InputError("consensus floor must exceed the camera NETD (" + std::to_string(camera.netd) + " degC)");
}

TrendDetail classify_values(std::span<const double> values, double tau)
{
    if (values.size() < 2)
        throw InputError("trend classification needs at least 2 samples, got " + std::to_string(values.size()));
    for (double v : values)
        if (!std::isfinite(v))
            throw InputError("trend series contains a non-finite value");

    TrendDetail d;
    const double first = values.front();
    const double last = values.back();
    d.net = last - first;
    const double upper = std::max(first, last);
    const double lower = std::min(first, last);
    std::size_t peak_at = 0;
    std::size_t dip_at = 0;
    for (std::size_t i = 1; i + 1 < values.size(); ++i) {
        if (values[i] - upper > d.peak) {
            d.peak = values[i] - upper;
            peak_at = i;
        }
        if (lower - values[i] > d.dip) {
            d.dip = lower - values[i];
            dip_at = i;
        }
    }
    const bool peak = d.peak > 0.0 && at_least(d.peak, tau);
    const bool dip = d.dip > 0.0 && at_least(d.dip, tau);

    if (peak && dip) {
        d.label = peak_at < dip_at ? TrendLabel::IncreaseThenDecrease : TrendLabel::DecreaseThenIncrease;
    } else if (peak) {
        if (at_least(d.net, tau)) {
            d.label = TrendLabel::Increase;
            d.excursion = true;
        } else {
            d.label = TrendLabel::IncreaseThenDecrease;
        }
    } else if (dip) {
        if (at_least(-d.net, tau)) {
            d.label = TrendLabel::Decrease;
            d.excursion = true;
        } else {
            d.label = TrendLabel::DecreaseThenIncrease;
        }
    } else if (at_least(d.net, tau)) {
        d.label = TrendLabel::Increase;
    } else if (at_least(-d.net, tau)) {
        d.label = TrendLabel::Decrease;
    } else {
        d.label = TrendLabel::Stable;
    }
    return d;
}

TrendLabel classify_trend(const RoiSeries& series, const TrendConfig& cfg)
{
    if (!series.trend_ready())
        throw InputError(std::string(to_string(series.label)) + " " + std::string(to_string(series.phase))
                         + " series has fewer than 2 samples");
    const std::vector<double> v = values_of(series);
    return classify_values(v, cfg.tau).label;
}

// -- tables ---------------------------------------------------------------------

std::vector<PhaseDeltaRow> phase_delta_table(const Session& session, const std::vector<RoiSeries>& roi_series)
{
    if (session.status != SessionStatus::Completed)
        throw ProtocolError("delta table needs a completed session (status is "
                            + std::string(to_string(session.status)) + ")");
    std::vector<PhaseDeltaRow> rows;
    for (RoiLabel roi : kRoiLabels) {
        for (PhaseKind phase : kPhases) {
            const auto it = std::find_if(roi_series.begin(), roi_series.end(), [&](const RoiSeries& s) {
                return s.label == roi && s.phase == phase;
            });
            if (it == roi_series.end() || it->samples.empty())
                throw InputError("missing " + std::string(to_string(roi)) + " series for the "
                                 + std::string(to_string(phase)) + " phase");
            rows.push_back({session.emotion, session.stimulus.kind, roi, phase, it->samples.front().mean,
                            it->samples.back().mean});
        }
    }
    return rows;
}

double round_tenth(double value)
{
    return std::round(value * 10.0) / 10.0;
}

std::string format_delta_csv(const std::vector<PhaseDeltaRow>& rows)
{
    std::string out = "emotion,stimulus,roi,phase,start,final\n";
    for (const PhaseDeltaRow& r : rows) {
        out += std::string(to_string(r.emotion)) + "," + std::string(to_string(r.stimulus)) + ","
               + std::string(to_string(r.roi)) + "," + std::string(to_string(r.phase)) + "," + fmt_tenth(r.start_mean)
               + "," + fmt_tenth(r.final_mean) + "\n";
    }
    return out;
}

std::string format_delta_table_wide(const std::vector<PhaseDeltaRow>& rows)
{
    std::string out;
    std::vector<std::pair<EmotionLabel, StimulusKind>> sessions;
    for (const PhaseDeltaRow& r : rows)
        if (std::find(sessions.begin(), sessions.end(), std::pair{r.emotion, r.stimulus}) == sessions.end())
            sessions.emplace_back(r.emotion, r.stimulus);

    for (const auto& [emotion, stimulus] : sessions) {
        const std::string stim_col = stimulus == StimulusKind::Video ? "Video" : "Music";
        out += std::string(to_string(emotion)) + ",Acclimatization,," + stim_col + ",,Response,\n";
        out += ",Start,Final,Start,Final,Start,Final\n";
        for (RoiLabel roi : kRoiLabels) {
            out += std::string(display_name(roi));
            for (PhaseKind phase : kPhases) {
                const auto it = std::find_if(rows.begin(), rows.end(), [&](const PhaseDeltaRow& r) {
                    return r.emotion == emotion && r.stimulus == stimulus && r.roi == roi && r.phase == phase;
                });
                out += it == rows.end() ? ",," : "," + fmt_tenth(it->start_mean) + "," + fmt_tenth(it->final_mean);
            }
            out += "\n";
        }
    }
    return out;
}

std::vector<PhaseDeltaRow> parse_delta_csv(std::string_view text, std::string_view origin)
{
    std::vector<PhaseDeltaRow> rows;
    for_each_csv_row(text, origin, "emotion", [&](const std::vector<std::string_view>& cells, const std::string&) {
        if (cells.size() != 6)
            throw InputError("expected 6 columns (emotion,stimulus,roi,phase,start,final), got "
                             + std::to_string(cells.size()));
        PhaseDeltaRow r;
        r.emotion = parse_emotion(cells[0]);
        r.stimulus = parse_stimulus_kind(cells[1]);
        r.roi = parse_roi_label(cells[2]);
        r.phase = parse_phase_kind(cells[3]);
        r.start_mean = parse_double_cell(cells[4]);
        r.final_mean = parse_double_cell(cells[5]);
        rows.push_back(r);
    });
    return rows;
}

// -- trends ---------------------------------------------------------------------

PhaseTrend phase_trend(PhaseKind phase, const std::vector<RoiSeries>& series, TrendBasis basis, const TrendConfig& cfg)
{
    PhaseTrend out;
    out.phase = phase;
    out.basis = basis;
    std::vector<const RoiSeries*> members;
    for (const RoiSeries& s : series) {
        if (s.phase != phase)
            continue;
        const std::vector<double> v = values_of(s);
        if (v.size() < 2)
            throw InputError(std::string(to_string(s.label)) + " " + std::string(to_string(phase))
                             + " series has fewer than 2 samples");
        RoiTrend t;
        t.roi = s.label;
        t.detail = classify_values(v, cfg.tau);
        t.vote = classify_values(v, cfg.consensus_floor).label;
        out.rois.push_back(t);
        members.push_back(&s);
    }
    if (members.empty())
        throw InputError("no ROI series for the " + std::string(to_string(phase)) + " phase");
    out.consensus = consensus_of(out.rois);
    out.mean_of_rois = classify_values(mean_series(members), cfg.tau).label;
    return out;
}

SessionTrends session_trends(EmotionLabel emotion, StimulusKind stimulus, const std::vector<RoiSeries>& all_series,
                             const TrendConfig& cfg, TrendBasis basis)
{
    cfg.validate();
    SessionTrends out;
    out.emotion = emotion;
    out.stimulus = stimulus;
    out.basis = basis;
    std::vector<const RoiSeries*> everything;
    for (PhaseKind phase : kPhases)
        out.phases.push_back(phase_trend(phase, all_series, basis, cfg));
    for (const RoiSeries& s : all_series)
        everything.push_back(&s);
    out.mean_of_rois_session = classify_values(mean_series(everything), cfg.tau).label;
    return out;
}

SessionTrends endpoint_trends(const std::vector<PhaseDeltaRow>& rows, const TrendConfig& cfg)
{
    if (rows.empty())
        throw InputError("no start/final rows");
    const EmotionLabel emotion = rows.front().emotion;
    const StimulusKind stimulus = rows.front().stimulus;
    std::vector<RoiSeries> series;
    for (const PhaseDeltaRow& r : rows) {
        if (r.emotion != emotion || r.stimulus != stimulus)
            throw InputError("endpoint rows mix sessions");
        // Synthetic instants keep phases in order for the whole-session average.
        const auto base = Instant{} + Seconds{static_cast<long long>(r.phase) * 2};
        RoiSeries s;
        s.label = r.roi;
        s.phase = r.phase;
        s.samples = {{base, r.start_mean}, {base + Seconds{1}, r.final_mean}};
        series.push_back(std::move(s));
    }
    return session_trends(emotion, stimulus, series, cfg, TrendBasis::Endpoints);
}

std::vector<SessionTrends> endpoint_trends_by_session(const std::vector<PhaseDeltaRow>& rows, const TrendConfig& cfg)
{
    std::vector<std::pair<EmotionLabel, StimulusKind>> keys;
    for (const PhaseDeltaRow& r : rows)
        if (std::find(keys.begin(), keys.end(), std::pair{r.emotion, r.stimulus}) == keys.end())
            keys.emplace_back(r.emotion, r.stimulus);
    std::vector<SessionTrends> out;
    for (const auto& key : keys) {
        std::vector<PhaseDeltaRow> group;
        for (const PhaseDeltaRow& r : rows)
            if (std::pair{r.emotion, r.stimulus} == key)
                group.push_back(r);
        out.push_back(endpoint_trends(group, cfg));
    }
    return out;
}

std::string format_trend_csv(const SessionTrends& trends)
{
    std::string out = "emotion,stimulus,phase,roi,trend,basis\n";
    const std::string head = std::string(to_string(trends.emotion)) + "," + std::string(to_string(trends.stimulus)) + ",";
    const std::string basis(to_string(trends.basis));
    for (const PhaseTrend& p : trends.phases) {
        const std::string phase(to_string(p.phase));
        for (const RoiTrend& r : p.rois)
            out += head + phase + "," + std::string(to_string(r.roi)) + "," + std::string(to_string(r.detail.label)) + ","
                   + basis + "\n";
        out += head + phase + ",consensus," + std::string(to_string(p.consensus)) + "," + basis + "\n";
        out += head + phase + ",mean_of_rois," + std::string(to_string(p.mean_of_rois)) + "," + basis + "\n";
    }
    out += head + "session,mean_of_rois," + std::string(to_string(trends.mean_of_rois_session)) + "," + basis + "\n";
    return out;
}

// -- comparison -----------------------------------------------------------------

StimulusComparison compare_stimuli(const std::vector<SessionTrends>& video, const std::vector<SessionTrends>& music)
{
    auto index = [](const std::vector<SessionTrends>& side, StimulusKind kind) {
        std::map<EmotionLabel, const SessionTrends*> by_emotion;
        for (const SessionTrends& t : side) {
            if (t.stimulus != kind)
                throw InputError("a " + std::string(to_string(t.stimulus)) + " session was passed as "
                                 + std::string(to_string(kind)) + " input");
            if (!by_emotion.emplace(t.emotion, &t).second)
                throw InputError("emotion " + std::string(to_string(t.emotion)) + " appears twice in the "
                                 + std::string(to_string(kind)) + " input");
        }
        return by_emotion;
    };
    const auto v = index(video, StimulusKind::Video);
    const auto m = index(music, StimulusKind::Music);
    for (const auto& [emotion, _] : v)
        if (!m.count(emotion))
            throw InputError("emotion " + std::string(to_string(emotion)) + " present in the video input only");
    for (const auto& [emotion, _] : m)
        if (!v.count(emotion))
            throw InputError("emotion " + std::string(to_string(emotion)) + " present in the music input only");

    StimulusComparison out;
    bool any_endpoint = false;
    for (EmotionLabel emotion : kEmotions) {
        const auto vi = v.find(emotion);
        if (vi == v.end())
            continue;
        const SessionTrends& vt = *vi->second;
        const SessionTrends& mt = *m.at(emotion);
        const bool endpoint = vt.basis == TrendBasis::Endpoints || mt.basis == TrendBasis::Endpoints;
        any_endpoint = any_endpoint || endpoint;
        const std::string note = endpoint ? "endpoint-only: compound labels not derivable" : std::string();
        for (std::size_t i = 0; i < kPhases.size(); ++i)
            out.rows.push_back({emotion, std::string(to_string(kPhases[i])), vt.phases.at(i).consensus,
                                mt.phases.at(i).consensus, vt.basis, mt.basis, note});
        out.rows.push_back({emotion, std::string(kAverageAspect), vt.mean_of_rois_session, mt.mean_of_rois_session,
                            vt.basis, mt.basis, note});
    }
    out.assumptions.push_back("phase labels are the majority vote of the four ROI trends");
    out.assumptions.push_back("mean_of_rois rows label the whole-session mean of the four ROI series");
    if (any_endpoint)
        out.assumptions.push_back("endpoint-basis rows classify start/final values only; interior extrema are unknown");
    return out;
}

std::string format_comparison_csv(const StimulusComparison& comparison)
{
    std::string out;
    for (const std::string& a : comparison.assumptions)
        out += "# assumption: " + a + "\n";
    out += "emotion,aspect,video,music,video_basis,music_basis,note\n";
    for (const ComparisonRow& r : comparison.rows)
        out += std::string(to_string(r.emotion)) + "," + r.aspect + "," + std::string(to_string(r.video)) + ","
               + std::string(to_string(r.music)) + "," + std::string(to_string(r.video_basis)) + ","
               + std::string(to_string(r.music_basis)) + "," + r.note + "\n";
    return out;
}

// -- reference comparison tables ------------------------------------------------

std::string_view to_string(CellStatus status)
{
    switch (status) {
    case CellStatus::Match: return "match";
    case CellStatus::Mismatch: return "mismatch";
    case CellStatus::Exempt: return "exempt";
    }
    return "?";
}

ReferenceTable parse_reference_table(std::string_view text, std::string_view origin)
{
    ReferenceTable out;
    bool alias_used = false;
    for_each_csv_row(text, origin, "emotion", [&](const std::vector<std::string_view>& cells, const std::string&) {
        if (cells.size() != 4)
            throw InputError("expected 4 columns (emotion,aspect,video,music), got " + std::to_string(cells.size()));
        std::string emotion_text(cells[0]);
        for (char& c : emotion_text)
            c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        EmotionLabel emotion = EmotionLabel::Joy;
        if (emotion_text == "inv")
            alias_used = true;
        else
            emotion = parse_emotion(emotion_text);
        std::string aspect(cells[1]);
        if (aspect != kAverageAspect)
            aspect = std::string(to_string(parse_phase_kind(aspect)));
        out.cells.push_back({emotion, aspect, StimulusKind::Video, parse_trend_label(cells[2])});
        out.cells.push_back({emotion, aspect, StimulusKind::Music, parse_trend_label(cells[3])});
    });
    if (alias_used)
        out.assumptions.push_back("reference row 'inv' read as joy, the only emotion otherwise missing");
    return out;
}

std::vector<ReferenceCheck> check_against_reference(const StimulusComparison& comparison, const ReferenceTable& reference)
{
    std::vector<ReferenceCheck> out;
    for (const ReferenceCell& cell : reference.cells) {
        const auto row = std::find_if(comparison.rows.begin(), comparison.rows.end(), [&](const ComparisonRow& r) {
            return r.emotion == cell.emotion && r.aspect == cell.aspect;
        });
        if (row == comparison.rows.end())
            throw InputError("no computed row for " + std::string(to_string(cell.emotion)) + " " + cell.aspect);
        ReferenceCheck c;
        c.expected = cell;
        const bool video = cell.stimulus == StimulusKind::Video;
        c.computed = video ? row->video : row->music;
        c.basis = video ? row->video_basis : row->music_basis;
        const bool compound =
            cell.label == TrendLabel::IncreaseThenDecrease || cell.label == TrendLabel::DecreaseThenIncrease;
        if (c.computed == cell.label) {
            c.status = CellStatus::Match;
        } else if (compound && c.basis == TrendBasis::Endpoints) {
            c.status = CellStatus::Exempt;
            c.note = "compound label not derivable from start/final values";
        } else {
            c.status = CellStatus::Mismatch;
        }
        out.push_back(std::move(c));
    }
    return out;
}

// -- nose divergence ------------------------------------------------------------

std::vector<NoseDivergence> nose_divergence(const SessionTrends& trends)
{
    std::vector<NoseDivergence> out;
    for (const PhaseTrend& p : trends.phases) {
        const auto nose = std::find_if(p.rois.begin(), p.rois.end(), [](const RoiTrend& r) { return r.roi == RoiLabel::Nose; });
        if (nose == p.rois.end() || p.rois.size() != 4)
            continue;
        std::array<int, kTrendLabels.size()> counts{};
        for (const RoiTrend& r : p.rois)
            if (r.roi != RoiLabel::Nose)
                ++counts[static_cast<std::size_t>(r.detail.label)];
        const int best = *std::max_element(counts.begin(), counts.end());
        NoseDivergence d;
        d.phase = p.phase;
        d.nose = nose->detail.label;
        for (TrendLabel l : kTrendLabels)
            if (counts[static_cast<std::size_t>(l)] == best)
                d.others_modal.push_back(l);
        d.diverges = std::find(d.others_modal.begin(), d.others_modal.end(), d.nose) == d.others_modal.end();
        out.push_back(d);
    }
    return out;
}

} // namespace thermolab
