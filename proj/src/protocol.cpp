#include "thermolab/protocol.hpp"

#include "thermolab/error.hpp"

#include <algorithm>
#include <cstdio>

namespace thermolab {

namespace {

template <typename T, std::size_t N>
T parse_enum(std::string_view text, const std::array<T, N>& values, const char* what)
{
    for (T v : values)
        if (text == to_string(v))
            return v;
    throw InputError(std::string("unknown ") + what + " '" + std::string(text) + "'");
}

std::string fmt_duration(Millis d)
{
    const long total = static_cast<long>(std::chrono::duration_cast<Seconds>(d).count());
    char buf[48];
    std::snprintf(buf, sizeof buf, "%ld min %ld s", total / 60, total % 60);
    return buf;
}

std::string fmt_number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

PhaseRecord& open_phase_mut(Session& s)
{
    for (PhaseRecord& p : s.phases)
        if (!p.ended)
            return p;
    throw ProtocolError("session " + s.id + " has no open phase");
}

void require_running(const Session& s, std::string_view what)
{
    if (s.status != SessionStatus::Running)
        throw ProtocolError(std::string(what) + " requires a running session (status is "
                            + std::string(to_string(s.status)) + ")");
}

EnvCheckpoint start_checkpoint_of(PhaseKind kind)
{
    return kind == PhaseKind::Acclimatization ? EnvCheckpoint::StartAcclimatization : EnvCheckpoint::StartStimulus;
}

void add_deviation(Session& s, Instant at, std::string text)
{
    s.notes.push_back({at, NoteKind::Deviation, std::move(text)});
}

void apply_started(Session& s, const SessionStarted& e, Instant at)
{
    if (s.status != SessionStatus::Draft || s.version != 0)
        throw ProtocolError("session already started");
    e.config.validate();
    if (auto failure = e.checklist.first_failure())
        throw ProtocolError("subject checklist failed: " + *failure);
    s.id = e.id.empty() ? std::string(to_string(e.emotion)) + "-" + std::string(to_string(e.stimulus.kind)) + "-"
                              + format_compact(at)
                        : e.id;
    s.emotion = e.emotion;
    s.stimulus = e.stimulus;
    s.date = format_date(at);
    s.subject = e.subject;
    s.checklist = e.checklist;
    s.config = e.config;
    s.rois = e.rois;
    s.phases = {PhaseRecord{PhaseKind::Acclimatization, at, std::nullopt, {}}};
    s.status = SessionStatus::Running;
}

void apply_env(Session& s, const EnvRecorded& e, Instant at)
{
    require_running(s, "recording an environmental reading");
    const std::string name(to_string(e.checkpoint));
    if (!std::isfinite(e.temp_c) || e.temp_c < kEnvTempMin || e.temp_c > kEnvTempMax)
        throw InputError("room temperature " + fmt_number(e.temp_c) + " degC outside plausibility band [10, 35] degC");
    if (!std::isfinite(e.humidity_pct) || e.humidity_pct < kEnvHumidityMin || e.humidity_pct > kEnvHumidityMax)
        throw InputError("humidity " + fmt_number(e.humidity_pct) + " % outside plausibility band [10, 90] %");
    if (s.env_reading(e.checkpoint))
        throw ProtocolError("checkpoint " + name + " already recorded");

    const PhaseKind phase = s.open_phase()->kind;
    bool position_ok = false;
    switch (e.checkpoint) {
    case EnvCheckpoint::StartAcclimatization: position_ok = phase == PhaseKind::Acclimatization; break;
    case EnvCheckpoint::StartStimulus: position_ok = phase == PhaseKind::Stimulus; break;
    case EnvCheckpoint::FinalStimulus:
        position_ok = phase == PhaseKind::Stimulus && s.env_reading(EnvCheckpoint::StartStimulus);
        break;
    case EnvCheckpoint::FinalResponse: position_ok = phase == PhaseKind::Response; break;
    }
    if (!position_ok)
        throw ProtocolError("checkpoint " + name + " does not match the current protocol position ("
                            + std::string(to_string(phase)) + ")");

    EnvReading reading;
    reading.checkpoint = e.checkpoint;
    reading.temp_c = e.temp_c;
    reading.humidity_pct = e.humidity_pct;
    reading.at = at;
    s.env.push_back(reading);
}

void apply_capture(Session& s, const CaptureRecorded& e, Instant at)
{
    require_running(s, "recording a capture");
    if (e.frame_ref.empty())
        throw InputError("capture needs a frame reference");
    PhaseRecord& phase = open_phase_mut(s);
    const std::string phase_name(to_string(phase.kind));

    if (phase.has_role(CaptureRole::PhaseEnd))
        throw ProtocolError(phase_name + " phase already has its end capture; advance the phase");
    if (phase.kind != PhaseKind::Response && !s.env_reading(start_checkpoint_of(phase.kind)))
        throw ProtocolError("record checkpoint " + std::string(to_string(start_checkpoint_of(phase.kind)))
                            + " before the first " + phase_name + " capture");

    const bool first = phase.captures.empty();
    if (e.role == CaptureRole::PhaseStart && !first)
        throw ProtocolError("phase start capture must be the first capture of the " + phase_name + " phase");
    if (first && phase.kind != PhaseKind::Acclimatization && e.role != CaptureRole::PhaseStart)
        throw ProtocolError("the first " + phase_name + " capture must carry the phase_start role");
    if (e.role == CaptureRole::PhaseEnd) {
        if (phase.kind != PhaseKind::Stimulus)
            throw ProtocolError("phase_end captures only close the stimulus phase");
        if (first)
            throw ProtocolError("phase_end capture needs a preceding phase_start capture");
    }
    if (at < phase.started)
        throw ProtocolError("capture precedes the start of the " + phase_name + " phase");
    if (!first && at <= phase.captures.back().at)
        throw ProtocolError("capture timestamps within a phase must be strictly increasing");

    if (e.role == CaptureRole::Scheduled && !first) {
        const Instant expected = phase.captures.back().at + s.config.capture_period;
        const Millis deviation = at > expected ? at - expected : expected - at;
        if (deviation > s.config.cadence_tolerance) {
            const long secs = static_cast<long>(std::chrono::duration_cast<Seconds>(deviation).count());
            add_deviation(s, at,
                          "capture cadence: " + phase_name + " capture " + std::to_string(secs) + " s "
                              + (at > expected ? "late" : "early") + " (due " + format_iso8601(expected) + ")");
        }
    }
    phase.captures.push_back({at, e.frame_ref, e.role});
}

void apply_advance(Session& s, Instant at)
{
    require_running(s, "advancing the phase");
    PhaseRecord& phase = open_phase_mut(s);
    const Millis elapsed = at - phase.started;
    const ProtocolConfig& cfg = s.config;

    auto require_env = [&](EnvCheckpoint cp) {
        if (!s.env_reading(cp))
            throw ProtocolError("missing env checkpoint " + std::string(to_string(cp)));
    };

    switch (phase.kind) {
    case PhaseKind::Acclimatization: {
        if (elapsed < cfg.acclim_min)
            throw ProtocolError("acclimatization incomplete: " + fmt_duration(elapsed) + " elapsed, minimum "
                                + fmt_duration(cfg.acclim_min));
        require_env(EnvCheckpoint::StartAcclimatization);
        if (phase.captures.size() < 2)
            throw ProtocolError("acclimatization needs at least 2 captures");
        if (elapsed > cfg.acclim_max)
            add_deviation(s, at,
                          "acclimatization ran " + fmt_duration(elapsed) + ", beyond the maximum "
                              + fmt_duration(cfg.acclim_max));
        phase.ended = at;
        s.phases.push_back({PhaseKind::Stimulus, at, std::nullopt, {}});
        break;
    }
    case PhaseKind::Stimulus: {
        if (elapsed < cfg.stimulus_min)
            throw ProtocolError("stimulus too short: " + fmt_duration(elapsed) + " elapsed, minimum "
                                + fmt_duration(cfg.stimulus_min));
        if (elapsed > cfg.stimulus_max)
            throw ProtocolError("stimulus too long: " + fmt_duration(elapsed) + " elapsed, maximum "
                                + fmt_duration(cfg.stimulus_max));
        if (!phase.has_role(CaptureRole::PhaseEnd))
            throw ProtocolError("stimulus end capture missing");
        require_env(EnvCheckpoint::StartStimulus);
        require_env(EnvCheckpoint::FinalStimulus);
        const std::size_t expected = expected_stimulus_captures(elapsed, cfg.capture_period);
        if (phase.captures.size() != expected)
            add_deviation(s, at,
                          "stimulus capture count " + std::to_string(phase.captures.size()) + " differs from expected "
                              + std::to_string(expected) + " for " + format_minutes_seconds(elapsed));
        phase.ended = at;
        s.phases.push_back({PhaseKind::Response, at, std::nullopt, {}});
        break;
    }
    case PhaseKind::Response: {
        if (elapsed < cfg.response_duration)
            throw ProtocolError("response incomplete: " + fmt_duration(elapsed) + " elapsed, required "
                                + fmt_duration(cfg.response_duration));
        require_env(EnvCheckpoint::FinalResponse);
        for (const PhaseRecord& p : s.phases)
            if (p.captures.size() < 2)
                throw ProtocolError(std::string(to_string(p.kind)) + " phase needs at least 2 captures");
        phase.ended = at;
        s.status = SessionStatus::Completed;
        break;
    }
    }
}

void apply_abort(Session& s, const SessionAborted& e, Instant at)
{
    if (s.status != SessionStatus::Running && s.status != SessionStatus::Draft)
        throw ProtocolError("cannot abort a session that is " + std::string(to_string(s.status)));
    for (PhaseRecord& p : s.phases)
        if (!p.ended)
            p.ended = at;
    s.status = SessionStatus::Aborted;
    s.abort_reason = e.reason;
}

void apply_note(Session& s, const NoteAdded& e, Instant at)
{
    if (s.status == SessionStatus::Draft)
        throw ProtocolError("notes need a started session");
    if (e.text.empty())
        throw InputError("note text is empty");
    s.notes.push_back({at, NoteKind::Operator, e.text});
}

Instant last_event_instant(const Session& s)
{
    Instant last{};
    for (const PhaseRecord& p : s.phases) {
        last = std::max(last, p.started);
        if (p.ended)
            last = std::max(last, *p.ended);
        for (const Capture& c : p.captures)
            last = std::max(last, c.at);
    }
    for (const EnvReading& r : s.env)
        last = std::max(last, r.at);
    for (const Note& n : s.notes)
        last = std::max(last, n.at);
    return last;
}

} // namespace

// -- enum names ---------------------------------------------------------------

std::string_view to_string(EmotionLabel emotion)
{
    switch (emotion) {
    case EmotionLabel::Joy: return "joy";
    case EmotionLabel::Love: return "love";
    case EmotionLabel::Happiness: return "happiness";
    case EmotionLabel::Sadness: return "sadness";
    case EmotionLabel::Fear: return "fear";
    case EmotionLabel::Anger: return "anger";
    }
    return "?";
}

EmotionLabel parse_emotion(std::string_view text)
{
    return parse_enum(text, kEmotions, "emotion");
}

std::string_view to_string(StimulusKind kind)
{
    return kind == StimulusKind::Video ? "video" : "music";
}

StimulusKind parse_stimulus_kind(std::string_view text)
{
    return parse_enum(text, std::array{StimulusKind::Video, StimulusKind::Music}, "stimulus kind");
}

std::string_view to_string(EnvCheckpoint checkpoint)
{
    switch (checkpoint) {
    case EnvCheckpoint::StartAcclimatization: return "start_acclimatization";
    case EnvCheckpoint::StartStimulus: return "start_stimulus";
    case EnvCheckpoint::FinalStimulus: return "final_stimulus";
    case EnvCheckpoint::FinalResponse: return "final_response";
    }
    return "?";
}

EnvCheckpoint parse_checkpoint(std::string_view text)
{
    return parse_enum(text, kCheckpoints, "checkpoint");
}

std::string_view to_string(CaptureRole role)
{
    switch (role) {
    case CaptureRole::Scheduled: return "scheduled";
    case CaptureRole::PhaseStart: return "phase_start";
    case CaptureRole::PhaseEnd: return "phase_end";
    }
    return "?";
}

CaptureRole parse_capture_role(std::string_view text)
{
    return parse_enum(text, std::array{CaptureRole::Scheduled, CaptureRole::PhaseStart, CaptureRole::PhaseEnd},
                      "capture role");
}

std::string_view to_string(SessionStatus status)
{
    switch (status) {
    case SessionStatus::Draft: return "draft";
    case SessionStatus::Running: return "running";
    case SessionStatus::Completed: return "completed";
    case SessionStatus::Aborted: return "aborted";
    }
    return "?";
}

SessionStatus parse_session_status(std::string_view text)
{
    return parse_enum(text,
                      std::array{SessionStatus::Draft, SessionStatus::Running, SessionStatus::Completed,
                                 SessionStatus::Aborted},
                      "session status");
}

std::string_view event_type_name(const EventPayload& payload)
{
    struct Visitor {
        std::string_view operator()(const SessionStarted&) const { return "session_started"; }
        std::string_view operator()(const EnvRecorded&) const { return "env_recorded"; }
        std::string_view operator()(const CaptureRecorded&) const { return "capture_recorded"; }
        std::string_view operator()(const PhaseAdvanced&) const { return "phase_advanced"; }
        std::string_view operator()(const SessionAborted&) const { return "session_aborted"; }
        std::string_view operator()(const NoteAdded&) const { return "note_added"; }
    };
    return std::visit(Visitor{}, payload);
}

// -- value types --------------------------------------------------------------

void ProtocolConfig::validate(const CameraSpec& camera) const
{
    if (acclim_min > acclim_max)
        throw InputError("acclimatization minimum exceeds maximum");
    if (stimulus_min > stimulus_max)
        throw InputError("stimulus minimum exceeds maximum");
    if (capture_period <= Seconds{0})
        throw InputError("capture period must be positive");
    if (cadence_tolerance < Seconds{0})
        throw InputError("cadence tolerance must be >= 0");
    if (acclim_min < Seconds{0} || stimulus_min < Seconds{0} || response_duration < Seconds{0})
        throw InputError("phase durations must be >= 0");
    if (!(subject_camera_distance >= camera.min_focus))
        throw InputError("subject-camera distance " + fmt_number(subject_camera_distance)
                         + " m is below the camera's minimum focus distance " + fmt_number(camera.min_focus) + " m");
}

SubjectChecklist SubjectChecklist::all_clear()
{
    return {true, true, true, true, true, true};
}

std::optional<std::string> SubjectChecklist::first_failure() const
{
    if (!hair_tied_back)
        return "hair_tied_back (hair must be tied back)";
    if (!no_makeup)
        return "no_makeup (no makeup on the face)";
    if (!no_face_cream)
        return "no_face_cream (no face cream)";
    if (!no_recent_exercise)
        return "no_recent_exercise (no physical exercise or effort before the session)";
    if (!no_stimulants_last_hour)
        return "no_stimulants_last_hour (no tea, coffee or nicotine for at least an hour)";
    if (!informed_consent_signed)
        return "informed_consent_signed (signed informed consent required)";
    return std::nullopt;
}

bool PhaseRecord::has_role(CaptureRole role) const
{
    return std::any_of(captures.begin(), captures.end(), [role](const Capture& c) { return c.role == role; });
}

std::optional<Millis> PhaseRecord::duration() const
{
    if (!ended)
        return std::nullopt;
    return *ended - started;
}

const PhaseRecord* Session::open_phase() const
{
    for (const PhaseRecord& p : phases)
        if (!p.ended)
            return &p;
    return nullptr;
}

const PhaseRecord* Session::phase(PhaseKind kind) const
{
    for (const PhaseRecord& p : phases)
        if (p.kind == kind)
            return &p;
    return nullptr;
}

const EnvReading* Session::env_reading(EnvCheckpoint checkpoint) const
{
    for (const EnvReading& r : env)
        if (r.checkpoint == checkpoint)
            return &r;
    return nullptr;
}

std::size_t Session::total_captures() const
{
    std::size_t n = 0;
    for (const PhaseRecord& p : phases)
        n += p.captures.size();
    return n;
}

std::optional<Instant> Session::started_at() const
{
    if (phases.empty())
        return std::nullopt;
    return phases.front().started;
}

std::optional<Instant> Session::ended_at() const
{
    if (phases.empty() || status == SessionStatus::Running || status == SessionStatus::Draft)
        return std::nullopt;
    return phases.back().ended;
}

std::vector<Note> Session::deviations() const
{
    std::vector<Note> out;
    for (const Note& n : notes)
        if (n.kind == NoteKind::Deviation)
            out.push_back(n);
    return out;
}

// -- folding ------------------------------------------------------------------

Session apply_event(Session s, const Event& event)
{
    if (event.seq != s.version + 1)
        throw ProtocolError("event sequence " + std::to_string(event.seq) + " does not follow "
                            + std::to_string(s.version));
    if (s.version > 0 && event.at < last_event_instant(s))
        throw ProtocolError("event at " + format_iso8601(event.at) + " precedes earlier session activity");

    struct Visitor {
        Session& s;
        Instant at;
        void operator()(const SessionStarted& e) const { apply_started(s, e, at); }
        void operator()(const EnvRecorded& e) const { apply_env(s, e, at); }
        void operator()(const CaptureRecorded& e) const { apply_capture(s, e, at); }
        void operator()(const PhaseAdvanced&) const { apply_advance(s, at); }
        void operator()(const SessionAborted& e) const { apply_abort(s, e, at); }
        void operator()(const NoteAdded& e) const { apply_note(s, e, at); }
    };
    if (s.version == 0 && !std::holds_alternative<SessionStarted>(event.payload))
        throw ProtocolError("a session log must begin with session_started");
    std::visit(Visitor{s, event.at}, event.payload);
    s.version = event.seq;
    return s;
}

Session replay(std::span<const Event> events)
{
    Session s;
    for (const Event& e : events)
        s = apply_event(std::move(s), e);
    return s;
}

SessionRecord SessionRecord::start(SessionStarted params, Instant now)
{
    SessionRecord record;
    record.append(now, std::move(params));
    return record;
}

SessionRecord SessionRecord::from_events(std::vector<Event> events)
{
    SessionRecord record;
    record.session_ = replay(events);
    record.events_ = std::move(events);
    return record;
}

const Event& SessionRecord::append(Instant now, EventPayload payload)
{
    Event event{session_.version + 1, now, std::move(payload)};
    Session next = apply_event(session_, event);
    session_ = std::move(next);
    events_.push_back(std::move(event));
    return events_.back();
}

void SessionRecord::record_env(EnvCheckpoint checkpoint, double temp_c, double humidity_pct, Instant now)
{
    append(now, EnvRecorded{checkpoint, temp_c, humidity_pct});
}

void SessionRecord::record_capture(std::string frame_ref, Instant now, CaptureRole role)
{
    append(now, CaptureRecorded{std::move(frame_ref), role});
}

void SessionRecord::advance_phase(Instant now)
{
    append(now, PhaseAdvanced{});
}

void SessionRecord::abort(Instant now, std::string reason)
{
    append(now, SessionAborted{std::move(reason)});
}

void SessionRecord::add_note(Instant now, std::string text)
{
    append(now, NoteAdded{std::move(text)});
}

// -- queries ------------------------------------------------------------------

std::optional<Instant> next_capture_due(const Session& session, Instant now)
{
    if (session.status != SessionStatus::Running)
        return std::nullopt;
    const PhaseRecord* phase = session.open_phase();
    if (!phase || phase->has_role(CaptureRole::PhaseEnd))
        return std::nullopt;
    const ProtocolConfig& cfg = session.config;
    const Instant due = phase->captures.empty() ? phase->started : phase->captures.back().at + cfg.capture_period;

    switch (phase->kind) {
    case PhaseKind::Acclimatization: {
        // At the upper bound the phase must transition instead.
        const Instant cap = phase->started + cfg.acclim_max;
        if (now >= cap || due >= cap)
            return std::nullopt;
        return due;
    }
    case PhaseKind::Stimulus:
        if (due > phase->started + cfg.stimulus_max)
            return std::nullopt;
        return due;
    case PhaseKind::Response:
        if (due > phase->started + cfg.response_duration)
            return std::nullopt;
        return due;
    }
    return std::nullopt;
}

CaptureRole suggested_role(const Session& session)
{
    const PhaseRecord* phase = session.open_phase();
    if (phase && phase->captures.empty() && phase->kind != PhaseKind::Acclimatization)
        return CaptureRole::PhaseStart;
    return CaptureRole::Scheduled;
}

std::optional<EnvCheckpoint> pending_checkpoint(const Session& session)
{
    if (session.status != SessionStatus::Running)
        return std::nullopt;
    const PhaseRecord* phase = session.open_phase();
    if (!phase)
        return std::nullopt;
    switch (phase->kind) {
    case PhaseKind::Acclimatization:
        if (!session.env_reading(EnvCheckpoint::StartAcclimatization))
            return EnvCheckpoint::StartAcclimatization;
        break;
    case PhaseKind::Stimulus:
        if (!session.env_reading(EnvCheckpoint::StartStimulus))
            return EnvCheckpoint::StartStimulus;
        if (!session.env_reading(EnvCheckpoint::FinalStimulus))
            return EnvCheckpoint::FinalStimulus;
        break;
    case PhaseKind::Response:
        if (!session.env_reading(EnvCheckpoint::FinalResponse))
            return EnvCheckpoint::FinalResponse;
        break;
    }
    return std::nullopt;
}

std::optional<std::string> advance_blocker(const Session& session, Instant now)
{
    try {
        (void)apply_event(session, Event{session.version + 1, now, PhaseAdvanced{}});
        return std::nullopt;
    } catch (const Error& e) {
        return std::string(e.what());
    }
}

std::string NextAction::describe() const
{
    switch (kind) {
    case ActionKind::None: return "none";
    case ActionKind::RecordEnv: return "record env " + std::string(to_string(*checkpoint));
    case ActionKind::Capture:
        return "capture " + std::string(to_string(*role)) + (due ? " due " + format_iso8601(*due) : std::string());
    case ActionKind::AdvancePhase: return "advance phase";
    }
    return "none";
}

NextAction next_action(const Session& session, Instant now)
{
    NextAction action;
    if (session.status != SessionStatus::Running)
        return action;
    const PhaseRecord* phase = session.open_phase();
    const auto pending = pending_checkpoint(session);

    // Start checkpoints gate the first capture of their phase.
    if (pending && (*pending == EnvCheckpoint::StartAcclimatization || *pending == EnvCheckpoint::StartStimulus)) {
        action.kind = ActionKind::RecordEnv;
        action.checkpoint = pending;
        return action;
    }
    if (const auto due = next_capture_due(session, now)) {
        action.kind = ActionKind::Capture;
        action.role = suggested_role(session);
        action.due = due;
        return action;
    }
    if (phase->kind == PhaseKind::Stimulus && !phase->has_role(CaptureRole::PhaseEnd)) {
        action.kind = ActionKind::Capture;
        action.role = CaptureRole::PhaseEnd;
        return action;
    }
    if (pending) {
        action.kind = ActionKind::RecordEnv;
        action.checkpoint = pending;
        return action;
    }
    action.kind = ActionKind::AdvancePhase;
    return action;
}

std::size_t expected_stimulus_captures(Millis duration, Seconds capture_period)
{
    const auto period = std::chrono::duration_cast<Millis>(capture_period);
    return static_cast<std::size_t>(duration / period) + 2;
}

SessionSummary session_summary(const Session& session)
{
    SessionSummary out;
    out.id = session.id;
    out.emotion = session.emotion;
    out.stimulus = session.stimulus;
    out.date = session.date;
    out.status = session.status;
    out.complete = session.status == SessionStatus::Completed;
    for (const PhaseRecord& p : session.phases)
        out.images_per_phase[static_cast<std::size_t>(p.kind)] = p.captures.size();
    out.stimulus_images = out.images_per_phase[static_cast<std::size_t>(PhaseKind::Stimulus)];
    out.total_images = session.total_captures();
    if (const PhaseRecord* stim = session.phase(PhaseKind::Stimulus); stim && stim->ended) {
        out.stimulus_duration = *stim->ended - stim->started;
        out.expected_stimulus_images = expected_stimulus_captures(*out.stimulus_duration, session.config.capture_period);
        out.stimulus_count_mismatch = *out.expected_stimulus_images != out.stimulus_images;
    }
    for (EnvCheckpoint cp : kCheckpoints)
        if (const EnvReading* r = session.env_reading(cp))
            out.env.push_back(*r);
    return out;
}

std::optional<std::string> rest_interval_warning(const Session& previous, const Session& next, Seconds min_rest)
{
    if (!previous.subject || !next.subject || !previous.subject->id || !next.subject->id
        || *previous.subject->id != *next.subject->id)
        return std::nullopt;
    const auto prev_end = previous.ended_at();
    const auto next_start = next.started_at();
    if (!prev_end || !next_start || *next_start < *prev_end)
        return std::nullopt;
    const Millis gap = *next_start - *prev_end;
    if (gap >= min_rest)
        return std::nullopt;
    return "subject " + *next.subject->id + " rested " + fmt_duration(gap) + " since session " + previous.id
           + " (recommended " + fmt_duration(min_rest) + ")";
}

} // namespace thermolab
