#include "thermolab/synthetic.hpp"

#include "thermolab/csv.hpp"
#include "thermolab/error.hpp"
#include "thermolab/frame_io.hpp"
#include "thermolab/serialization.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace thermolab {

namespace fs = std::filesystem;

std::vector<EnvRow> parse_env_csv(std::string_view text, std::string_view origin)
{
    std::vector<EnvRow> rows;
    for_each_csv_row(text, origin, "emotion", [&](const std::vector<std::string_view>& cells, const std::string&) {
        if (cells.size() != 5)
            throw InputError("expected 5 columns (emotion,stimulus,checkpoint,temp_c,humidity_pct), got "
                             + std::to_string(cells.size()));
        rows.push_back({parse_emotion(cells[0]), parse_stimulus_kind(cells[1]), parse_checkpoint(cells[2]),
                        parse_double_cell(cells[3]), parse_double_cell(cells[4])});
    });
    return rows;
}

Millis parse_minutes_seconds(std::string_view text)
{
    const std::size_t tick = text.find('\'');
    if (tick == std::string_view::npos || text.substr(tick + 1).size() < 3 || text.substr(text.size() - 2) != "''")
        throw InputError("duration '" + std::string(text) + "' is not in the 8'32'' form");
    const long long minutes = parse_int_cell(text.substr(0, tick));
    const long long seconds = parse_int_cell(text.substr(tick + 1, text.size() - tick - 3));
    if (minutes < 0 || seconds < 0 || seconds >= 60)
        throw InputError("duration '" + std::string(text) + "' is out of range");
    return Millis{(minutes * 60 + seconds) * 1000};
}

std::vector<SessionLogRow> parse_session_log_csv(std::string_view text, std::string_view origin)
{
    std::vector<SessionLogRow> rows;
    for_each_csv_row(text, origin, "date", [&](const std::vector<std::string_view>& cells, const std::string&) {
        if (cells.size() != 6)
            throw InputError("expected 6 columns (date,emotion,stimulus,stimulus_images,total_images,"
                             "stimulus_duration), got "
                             + std::to_string(cells.size()));
        SessionLogRow r;
        r.date = std::string(cells[0]);
        parse_iso8601(r.date + "T00:00:00Z");
        r.emotion = parse_emotion(cells[1]);
        r.stimulus = parse_stimulus_kind(cells[2]);
        const long long stim = parse_int_cell(cells[3]);
        const long long total = parse_int_cell(cells[4]);
        if (stim < 2 || total < stim)
            throw InputError("image counts must satisfy 2 <= stimulus_images <= total_images");
        r.stimulus_images = static_cast<std::size_t>(stim);
        r.total_images = static_cast<std::size_t>(total);
        r.stimulus_duration = parse_minutes_seconds(cells[5]);
        rows.push_back(std::move(r));
    });
    return rows;
}

FixtureTimeline timeline_from_log(const SessionLogRow& row)
{
    FixtureTimeline t;
    const std::size_t others = row.total_images - row.stimulus_images;
    t.acclim_captures = (others + 1) / 2;
    t.response_captures = others - t.acclim_captures;
    t.stimulus_captures = row.stimulus_images;
    t.stimulus_duration = row.stimulus_duration;
    return t;
}

namespace {

constexpr Millis kMinute{60'000};

// Scheduled stimulus captures sit on the minute grid when they fit before the
// end capture, otherwise they are spread evenly over the stimulus.
std::vector<Millis> stimulus_offsets(const FixtureTimeline& t)
{
    std::vector<Millis> out{Millis{0}};
    const std::size_t scheduled = t.stimulus_captures - 2;
    const bool on_grid = static_cast<long long>(scheduled) * kMinute.count() < t.stimulus_duration.count();
    for (std::size_t k = 1; k <= scheduled; ++k) {
        if (on_grid)
            out.push_back(kMinute * static_cast<long long>(k));
        else
            out.push_back(Millis{t.stimulus_duration.count() * static_cast<long long>(k)
                                 / static_cast<long long>(scheduled + 1)});
    }
    out.push_back(t.stimulus_duration);
    return out;
}

Millis span_of(std::size_t captures)
{
    return kMinute * static_cast<long long>(captures - 1);
}

const PhaseDeltaRow& endpoint(const FixtureSpec& spec, RoiLabel roi, PhaseKind phase)
{
    const auto it = std::find_if(spec.endpoints.begin(), spec.endpoints.end(),
                                 [&](const PhaseDeltaRow& r) { return r.roi == roi && r.phase == phase; });
    if (it == spec.endpoints.end())
        throw InputError("fixture has no " + std::string(to_string(roi)) + " " + std::string(to_string(phase))
                         + " endpoints");
    return *it;
}

void check_timeline(const FixtureTimeline& t)
{
    if (t.acclim_captures < 2 || t.response_captures < 2 || t.stimulus_captures < 2)
        throw InputError("fixture needs at least 2 captures in every phase");
    if (span_of(t.acclim_captures) > Millis{900'000})
        throw InputError("fixture acclimatization captures do not fit in 15 min");
    if (t.stimulus_duration < Millis{120'000} || t.stimulus_duration > Millis{600'000})
        throw InputError("fixture stimulus duration outside 2..10 min");
}

} // namespace

std::array<std::vector<Instant>, 3> fixture_capture_times(const FixtureSpec& spec)
{
    const FixtureTimeline& t = spec.timeline;
    check_timeline(t);
    std::array<std::vector<Instant>, 3> out;
    for (std::size_t i = 0; i < t.acclim_captures; ++i)
        out[0].push_back(spec.start + kMinute * static_cast<long long>(i));
    const Instant stim_start = spec.start + std::max(span_of(t.acclim_captures), Millis{600'000});
    for (Millis off : stimulus_offsets(t))
        out[1].push_back(stim_start + off);
    const Instant resp_start = stim_start + t.stimulus_duration;
    for (std::size_t i = 0; i < t.response_captures; ++i)
        out[2].push_back(resp_start + kMinute * static_cast<long long>(i));
    return out;
}

TemperatureMap fixture_field(const FixtureSpec& spec, PhaseKind phase, double fraction)
{
    TemperatureMap field = TemperatureMap::uniform(spec.width, spec.height, spec.background_c);
    const double cx = spec.width / 2.0;
    const double cy = spec.height * 0.45;
    const double rx = spec.width * 0.3;
    const double ry = spec.height * 0.45;
    for (int y = 0; y < spec.height; ++y)
        for (int x = 0; x < spec.width; ++x) {
            const double dx = (x + 0.5 - cx) / rx;
            const double dy = (y + 0.5 - cy) / ry;
            if (dx * dx + dy * dy <= 1.0)
                field.at(x, y) = spec.face_c;
        }
    const RoiSet rois = default_roi_layout(spec.width, spec.height);
    for (const RoiBox& box : rois.boxes()) {
        if ((box.w * box.h) % 2 != 0)
            throw InputError("fixture ROI boxes need an even pixel count");
        const PhaseDeltaRow& e = endpoint(spec, box.label, phase);
        const double value = e.start_mean + (e.final_mean - e.start_mean) * fraction;
        for (int y = box.y; y < box.y + box.h; ++y)
            for (int x = box.x; x < box.x + box.w; ++x)
                field.at(x, y) = value + ((x + y) % 2 == 0 ? spec.texture_c : -spec.texture_c);
    }
    return snap_to_counts(field, spec.calibration);
}

FixtureSession write_fixture_session(const FixtureSpec& spec, const fs::path& dir)
{
    const auto times = fixture_capture_times(spec);

    SessionStarted started;
    started.emotion = spec.emotion;
    started.stimulus = spec.stimulus;
    started.checklist = SubjectChecklist::all_clear();

    SessionRecord rec = SessionRecord::start(started, spec.start);
    std::size_t sequence = 0;
    auto capture = [&](PhaseKind phase, std::size_t i, CaptureRole role) {
        ++sequence;
        const auto& phase_times = times[static_cast<std::size_t>(phase)];
        const double fraction = static_cast<double>((phase_times[i] - phase_times.front()).count())
                                / static_cast<double>((phase_times.back() - phase_times.front()).count());
        TemperatureMap field = fixture_field(spec, phase, fraction);
        field.source_timestamp = phase_times[i];
        char name[32];
        std::snprintf(name, sizeof name, "frames/%04zu", sequence);
        std::string ref;
        if (spec.celsius_grid) {
            ref = std::string(name) + ".csv";
            write_celsius_grid(dir / ref, field);
        } else {
            ref = std::string(name) + ".raw";
            RadiometricFrame frame = synth_frame(field, spec.calibration, spec.noise_netd, spec.seed + sequence,
                                                 static_cast<std::int64_t>(sequence));
            frame.timestamp = phase_times[i];
            write_frame(dir / ref, frame);
        }
        rec.record_capture(ref, phase_times[i], role);
    };
    auto env = [&](std::size_t k, Instant at) {
        const EnvRecorded& e = spec.env[k];
        rec.record_env(kCheckpoints[k], e.temp_c, e.humidity_pct, at);
    };

    rec.record_env(EnvCheckpoint::StartAcclimatization, spec.env[0].temp_c, spec.env[0].humidity_pct, spec.start);
    for (std::size_t i = 0; i < times[0].size(); ++i)
        capture(PhaseKind::Acclimatization, i, CaptureRole::Scheduled);

    const Instant stim_start = times[1].front();
    rec.advance_phase(stim_start);
    env(1, stim_start);
    for (std::size_t i = 0; i < times[1].size(); ++i) {
        const CaptureRole role = i == 0                      ? CaptureRole::PhaseStart
                                 : i + 1 == times[1].size() ? CaptureRole::PhaseEnd
                                                            : CaptureRole::Scheduled;
        capture(PhaseKind::Stimulus, i, role);
    }
    const Instant stim_end = times[1].back();
    env(2, stim_end);
    rec.advance_phase(stim_end);

    for (std::size_t i = 0; i < times[2].size(); ++i)
        capture(PhaseKind::Response, i, i == 0 ? CaptureRole::PhaseStart : CaptureRole::Scheduled);
    const Instant end = times[2].front() + std::max(span_of(spec.timeline.response_captures), Millis{600'000});
    env(3, end);
    rec.advance_phase(end);

    write_event_log(dir / "log/events.log", rec.events());
    return {dir, rec.events(), rec.session()};
}

FixtureSpec fixture_spec(const FixtureTables& tables, EmotionLabel emotion, StimulusKind stimulus)
{
    FixtureSpec spec;
    spec.emotion = emotion;
    spec.stimulus = {stimulus, std::string(to_string(emotion)) + " " + std::string(to_string(stimulus)) + " stimulus"};
    for (const PhaseDeltaRow& r : tables.endpoints)
        if (r.emotion == emotion && r.stimulus == stimulus)
            spec.endpoints.push_back(r);
    if (spec.endpoints.size() != 12)
        throw InputError("expected 12 start/final rows for " + std::string(to_string(emotion)) + " "
                         + std::string(to_string(stimulus)) + ", found " + std::to_string(spec.endpoints.size()));

    std::array<bool, 4> seen{};
    for (const EnvRow& e : tables.env)
        if (e.emotion == emotion && e.stimulus == stimulus) {
            const auto k = static_cast<std::size_t>(e.checkpoint);
            spec.env[k] = {e.checkpoint, e.temp_c, e.humidity_pct};
            seen[k] = true;
        }
    if (std::count(seen.begin(), seen.end(), true) != 4)
        throw InputError("missing environmental readings for " + std::string(to_string(emotion)) + " "
                         + std::string(to_string(stimulus)));

    const auto row = std::find_if(tables.sessions.begin(), tables.sessions.end(), [&](const SessionLogRow& r) {
        return r.emotion == emotion && r.stimulus == stimulus;
    });
    if (row == tables.sessions.end())
        throw InputError("no session log row for " + std::string(to_string(emotion)) + " "
                         + std::string(to_string(stimulus)));
    spec.timeline = timeline_from_log(*row);
    long long same_day_before = 0;
    for (auto it = tables.sessions.begin(); it != row; ++it)
        if (it->date == row->date)
            ++same_day_before;
    spec.start = parse_iso8601(row->date + "T10:00:00Z") + std::chrono::hours{3 * same_day_before};
    spec.seed = 1 + static_cast<std::uint64_t>(emotion) * 2 + static_cast<std::uint64_t>(stimulus);
    return spec;
}

} // namespace thermolab
