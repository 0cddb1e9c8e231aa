#pragma once

#include "thermolab/analysis.hpp"
#include "thermolab/controller.hpp"
#include "thermolab/error.hpp"
#include "thermolab/serialization.hpp"
#include "thermolab/synthetic.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>

namespace testsupport {

namespace fs = std::filesystem;
using namespace thermolab;

inline fs::path fixtures_dir()
{
    return THERMOLAB_FIXTURES_DIR;
}

inline fs::path cli_path()
{
    return THERMOLAB_CLI_PATH;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "t")
    {
        static std::atomic<unsigned> counter{0};
        std::random_device rd;
        path_ = fs::temp_directory_path()
                / ("thermolab-" + tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        fs::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    fs::path path_;
};

inline const FixtureTables& fixture_tables()
{
    static const FixtureTables tables = [] {
        const fs::path d = fixtures_dir();
        FixtureTables t;
        for (const char* name : {"video_endpoints.csv", "music_endpoints.csv"}) {
            const auto rows = parse_delta_csv(read_text_file(d / name), name);
            t.endpoints.insert(t.endpoints.end(), rows.begin(), rows.end());
        }
        t.env = parse_env_csv(read_text_file(d / "env_readings.csv"), "env_readings.csv");
        t.sessions = parse_session_log_csv(read_text_file(d / "session_log.csv"), "session_log.csv");
        return t;
    }();
    return tables;
}

inline std::vector<PhaseDeltaRow> endpoint_rows(EmotionLabel emotion, StimulusKind stimulus)
{
    std::vector<PhaseDeltaRow> out;
    for (const PhaseDeltaRow& r : fixture_tables().endpoints)
        if (r.emotion == emotion && r.stimulus == stimulus)
            out.push_back(r);
    return out;
}

inline FixtureSession synth_session(EmotionLabel emotion, StimulusKind stimulus, const fs::path& dir,
                                    bool celsius = false)
{
    FixtureSpec spec = fixture_spec(fixture_tables(), emotion, stimulus);
    spec.celsius_grid = celsius;
    return write_fixture_session(spec, dir);
}

inline const PhaseDeltaRow& find_row(const std::vector<PhaseDeltaRow>& rows, RoiLabel roi, PhaseKind phase)
{
    for (const PhaseDeltaRow& r : rows)
        if (r.roi == roi && r.phase == phase)
            return r;
    throw InputError("row not found");
}

inline SessionStarted start_params(EmotionLabel emotion = EmotionLabel::Joy, StimulusKind kind = StimulusKind::Video)
{
    SessionStarted s;
    s.emotion = emotion;
    s.stimulus = Stimulus{kind, "clip"};
    s.checklist = SubjectChecklist::all_clear();
    return s;
}

inline Instant t0()
{
    return parse_iso8601("2019-02-21T10:00:00Z");
}

inline std::string frame_ref(std::size_t n)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "frames/%04zu.raw", n);
    return buf;
}

/// Completed session with the given capture counts; stimulus captures are a
/// phase start, one per minute, then the phase end at `stimulus`.
inline SessionRecord scripted_session(std::size_t acclim_caps, Millis stimulus, std::size_t stimulus_caps,
                                      std::size_t response_caps, SessionStarted params = start_params())
{
    Instant now = t0();
    std::size_t n = 0;
    SessionRecord rec = SessionRecord::start(std::move(params), now);
    rec.record_env(EnvCheckpoint::StartAcclimatization, 20.4, 36.8, now);
    for (std::size_t i = 0; i < acclim_caps; ++i)
        rec.record_capture(frame_ref(++n), now + Seconds{60 * i}, CaptureRole::Scheduled);
    now += std::max<Seconds>(Seconds{60 * (acclim_caps - 1)}, Seconds{600});
    rec.advance_phase(now);
    const Instant stim = now;
    rec.record_env(EnvCheckpoint::StartStimulus, 20.6, 36.8, now);
    rec.record_capture(frame_ref(++n), stim, CaptureRole::PhaseStart);
    for (std::size_t i = 1; i + 1 < stimulus_caps; ++i)
        rec.record_capture(frame_ref(++n), stim + Seconds{60 * i}, CaptureRole::Scheduled);
    now = stim + stimulus;
    rec.record_capture(frame_ref(++n), now, CaptureRole::PhaseEnd);
    rec.record_env(EnvCheckpoint::FinalStimulus, 20.7, 37.0, now);
    rec.advance_phase(now);
    const Instant resp = now;
    rec.record_capture(frame_ref(++n), resp, CaptureRole::PhaseStart);
    for (std::size_t i = 1; i < response_caps; ++i)
        rec.record_capture(frame_ref(++n), resp + Seconds{60 * i}, CaptureRole::Scheduled);
    now = resp + std::max<Seconds>(Seconds{60 * (response_caps - 1)}, Seconds{600});
    rec.record_env(EnvCheckpoint::FinalResponse, 20.9, 37.1, now);
    rec.advance_phase(now);
    return rec;
}

struct DriveStats {
    std::size_t sessions = 0;
    std::size_t completed = 0;
    std::size_t aborted = 0;
    std::size_t rejected = 0;
    std::size_t events = 0;
};

/// One session driven by a mix of protocol-following and arbitrary commands
/// on a simulated timeline. Rejected commands are counted and skipped.
inline SessionRecord random_session(std::mt19937_64& rng, DriveStats& stats, int steps = 160)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> jitter(-4, 4);
    Instant now = t0();
    SessionRecord rec = SessionRecord::start(start_params(), now);
    std::size_t n = 0;
    auto pick = [&](int k) { return std::uniform_int_distribution<int>(0, k - 1)(rng); };
    for (int i = 0; i < steps && rec.session().status == SessionStatus::Running; ++i) {
        try {
            if (u(rng) < 0.8) {
                const NextAction a = next_action(rec.session(), now);
                switch (a.kind) {
                case ActionKind::RecordEnv: rec.record_env(*a.checkpoint, 21.0, 40.0, now); break;
                case ActionKind::Capture:
                    if (a.due && *a.due > now)
                        now = *a.due + Seconds{jitter(rng)};
                    else
                        now += Seconds{1};
                    rec.record_capture(frame_ref(++n), now, *a.role);
                    break;
                case ActionKind::AdvancePhase:
                    now += Seconds{pick(40)};
                    rec.advance_phase(now);
                    break;
                case ActionKind::None: break;
                }
            } else {
                switch (pick(7)) {
                case 0:
                    rec.record_env(kCheckpoints[static_cast<std::size_t>(pick(4))], 5.0 + pick(35), 5.0 + pick(95), now);
                    break;
                case 1:
                    now += Seconds{pick(90)};
                    rec.record_capture(frame_ref(++n), now, static_cast<CaptureRole>(pick(3)));
                    break;
                case 2: rec.advance_phase(now); break;
                case 3: now += Seconds{pick(700)}; break;
                case 4: rec.add_note(now, "note " + std::to_string(i)); break;
                case 5:
                    if (u(rng) < 0.05)
                        rec.abort(now, "random abort");
                    break;
                default: now += Seconds{pick(30)}; break;
                }
            }
        } catch (const Error&) {
            ++stats.rejected;
        }
    }
    ++stats.sessions;
    stats.events += rec.events().size();
    stats.completed += rec.session().status == SessionStatus::Completed ? 1 : 0;
    stats.aborted += rec.session().status == SessionStatus::Aborted ? 1 : 0;
    return rec;
}

/// First violated protocol invariant of a session state, if any.
inline std::optional<std::string> protocol_violation(const Session& s)
{
    static constexpr PhaseKind order[] = {PhaseKind::Acclimatization, PhaseKind::Stimulus, PhaseKind::Response};
    if (s.phases.size() > 3)
        return "more than three phases";
    for (std::size_t i = 0; i < s.phases.size(); ++i) {
        if (s.phases[i].kind != order[i])
            return "phase out of order";
        if (i + 1 < s.phases.size() && (!s.phases[i].ended || *s.phases[i].ended != s.phases[i + 1].started))
            return "phase boundary gap";
    }
    const bool stimulus_reached = s.phases.size() >= 2;
    const bool response_reached = s.phases.size() == 3;
    const Millis acclim = stimulus_reached ? *s.phases[0].ended - s.phases[0].started : Millis{0};
    if ((stimulus_reached || s.status == SessionStatus::Completed) && acclim < Seconds{600})
        return "acclimatization shorter than 600 s";
    if (response_reached) {
        const Millis stim = *s.phases[1].ended - s.phases[1].started;
        if (stim < Seconds{120} || stim > Seconds{600})
            return "stimulus outside [120, 600] s";
    }
    if (s.status == SessionStatus::Completed && !response_reached)
        return "completed without a response phase";
    return std::nullopt;
}

struct TimedCommand {
    Instant at{};
    CommandRequest request;
};

/// The commands an operator would issue to reproduce `events`, each with the
/// instant it must be submitted at.
inline std::vector<TimedCommand> commands_from_events(const std::vector<Event>& events, const std::string& id,
                                                      const std::string& tag = "ui")
{
    std::vector<TimedCommand> out;
    for (const Event& e : events) {
        CommandRequest r;
        r.session_id = id;
        r.request_id = tag + "-" + std::to_string(e.seq);
        std::visit(
            [&](const auto& p) {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, SessionStarted>) {
                    r.verb = CommandVerb::StartSession;
                    r.payload = Json(p);
                } else if constexpr (std::is_same_v<T, EnvRecorded>) {
                    r.verb = CommandVerb::RecordEnv;
                    r.payload = {{"checkpoint", to_string(p.checkpoint)}, {"temp_c", p.temp_c}, {"humidity_pct", p.humidity_pct}};
                } else if constexpr (std::is_same_v<T, CaptureRecorded>) {
                    r.verb = CommandVerb::ConfirmCapture;
                    r.payload = {{"frame_ref", p.frame_ref}, {"role", to_string(p.role)}};
                } else if constexpr (std::is_same_v<T, PhaseAdvanced>) {
                    r.verb = CommandVerb::AdvancePhase;
                } else if constexpr (std::is_same_v<T, SessionAborted>) {
                    r.verb = CommandVerb::Abort;
                    r.payload = {{"reason", p.reason}};
                } else {
                    r.verb = CommandVerb::Note;
                    r.payload = {{"text", p.text}};
                }
            },
            e.payload);
        out.push_back({e.at, std::move(r)});
    }
    return out;
}

/// Terminal transcript for everything after the session start.
inline std::string transcript_from_events(const std::vector<Event>& events)
{
    std::string out;
    for (const Event& e : events) {
        if (std::holds_alternative<SessionStarted>(e.payload))
            continue;
        out += "at " + format_iso8601(e.at) + "\n";
        if (const auto* env = std::get_if<EnvRecorded>(&e.payload)) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "env %s %.17g %.17g\n", std::string(to_string(env->checkpoint)).c_str(),
                          env->temp_c, env->humidity_pct);
            out += buf;
        } else if (const auto* cap = std::get_if<CaptureRecorded>(&e.payload)) {
            out += "capture " + cap->frame_ref + " " + std::string(to_string(cap->role)) + "\n";
        } else if (std::holds_alternative<PhaseAdvanced>(e.payload)) {
            out += "advance\n";
        } else if (const auto* n = std::get_if<NoteAdded>(&e.payload)) {
            out += "note " + n->text + "\n";
        } else if (const auto* a = std::get_if<SessionAborted>(&e.payload)) {
            out += "abort " + a->reason + "\n";
        }
    }
    return out;
}

inline void copy_frames(const fs::path& from_session, const fs::path& to_session)
{
    fs::create_directories(to_session);
    fs::copy(from_session / "frames", to_session / "frames", fs::copy_options::recursive);
}

} // namespace testsupport
