#pragma once

#include "thermolab/radiometry.hpp"
#include "thermolab/roi.hpp"
#include "thermolab/time.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace thermolab {

enum class EmotionLabel { Joy, Love, Happiness, Sadness, Fear, Anger };

inline constexpr std::array<EmotionLabel, 6> kEmotions{EmotionLabel::Joy,     EmotionLabel::Love,
                                                       EmotionLabel::Happiness, EmotionLabel::Sadness,
                                                       EmotionLabel::Fear,    EmotionLabel::Anger};

std::string_view to_string(EmotionLabel emotion);
EmotionLabel parse_emotion(std::string_view text);

enum class StimulusKind { Video, Music };

std::string_view to_string(StimulusKind kind);
StimulusKind parse_stimulus_kind(std::string_view text);

struct Stimulus {
    StimulusKind kind = StimulusKind::Video;
    std::string descriptor; ///< title or source of the clip or track

    bool operator==(const Stimulus&) const = default;
};

struct ProtocolConfig {
    Seconds acclim_min{600};
    Seconds acclim_max{900};
    Seconds stimulus_min{120};
    Seconds stimulus_max{600};
    Seconds response_duration{600};
    Seconds capture_period{60};
    Seconds cadence_tolerance{5};
    double subject_camera_distance = 0.8; ///< metres

    /// Throws InputError on inconsistent bounds or a distance below the camera's focus limit.
    void validate(const CameraSpec& camera = kReferenceCamera) const;

    bool operator==(const ProtocolConfig&) const = default;
};

struct SubjectChecklist {
    bool hair_tied_back = false;
    bool no_makeup = false;
    bool no_face_cream = false;
    bool no_recent_exercise = false;
    bool no_stimulants_last_hour = false; ///< no tea, coffee or nicotine in the last hour
    bool informed_consent_signed = false;

    static SubjectChecklist all_clear();
    /// Name and rule text of the first unmet item, if any.
    std::optional<std::string> first_failure() const;

    bool operator==(const SubjectChecklist&) const = default;
};

struct SubjectMeta {
    std::optional<std::string> id;
    std::optional<int> age;
    std::optional<std::string> gender;

    bool operator==(const SubjectMeta&) const = default;
};

enum class EnvCheckpoint { StartAcclimatization, StartStimulus, FinalStimulus, FinalResponse };

inline constexpr std::array<EnvCheckpoint, 4> kCheckpoints{
    EnvCheckpoint::StartAcclimatization, EnvCheckpoint::StartStimulus, EnvCheckpoint::FinalStimulus,
    EnvCheckpoint::FinalResponse};

std::string_view to_string(EnvCheckpoint checkpoint);
EnvCheckpoint parse_checkpoint(std::string_view text);

// Plausibility bands for room readings.
inline constexpr double kEnvTempMin = 10.0;
inline constexpr double kEnvTempMax = 35.0;
inline constexpr double kEnvHumidityMin = 10.0;
inline constexpr double kEnvHumidityMax = 90.0;

struct EnvReading {
    EnvCheckpoint checkpoint = EnvCheckpoint::StartAcclimatization;
    double temp_c = 0.0;
    double humidity_pct = 0.0;
    double probe_accuracy_temp = kReferenceProbe.temp_accuracy;
    double probe_accuracy_humidity = kReferenceProbe.humidity_accuracy;
    Instant at{};

    bool operator==(const EnvReading&) const = default;
};

enum class CaptureRole { Scheduled, PhaseStart, PhaseEnd };

std::string_view to_string(CaptureRole role);
CaptureRole parse_capture_role(std::string_view text);

struct Capture {
    Instant at{};
    std::string frame_ref; ///< path of the frame file relative to the session directory
    CaptureRole role = CaptureRole::Scheduled;

    bool operator==(const Capture&) const = default;
};

struct PhaseRecord {
    PhaseKind kind = PhaseKind::Acclimatization;
    Instant started{};
    std::optional<Instant> ended;
    std::vector<Capture> captures;

    bool has_role(CaptureRole role) const;
    std::optional<Millis> duration() const;

    bool operator==(const PhaseRecord&) const = default;
};

enum class SessionStatus { Draft, Running, Completed, Aborted };

std::string_view to_string(SessionStatus status);
SessionStatus parse_session_status(std::string_view text);

enum class NoteKind { Operator, Deviation };

struct Note {
    Instant at{};
    NoteKind kind = NoteKind::Operator;
    std::string text;

    bool operator==(const Note&) const = default;
};

struct Session {
    std::string id;
    EmotionLabel emotion = EmotionLabel::Joy;
    Stimulus stimulus;
    std::string date; ///< YYYY-MM-DD of the start instant
    std::optional<SubjectMeta> subject;
    SubjectChecklist checklist;
    ProtocolConfig config;
    std::optional<RoiSet> rois;
    std::vector<PhaseRecord> phases;
    std::vector<EnvReading> env;
    std::vector<Note> notes;
    SessionStatus status = SessionStatus::Draft;
    std::optional<std::string> abort_reason;
    std::uint64_t version = 0; ///< number of applied events

    const PhaseRecord* open_phase() const;
    const PhaseRecord* phase(PhaseKind kind) const;
    const EnvReading* env_reading(EnvCheckpoint checkpoint) const;
    std::size_t total_captures() const;
    std::optional<Instant> started_at() const;
    std::optional<Instant> ended_at() const;
    std::vector<Note> deviations() const;

    bool operator==(const Session&) const = default;
};

// -- events -----------------------------------------------------------------

struct SessionStarted {
    std::string id; ///< empty: derived from emotion, stimulus and start instant
    EmotionLabel emotion = EmotionLabel::Joy;
    Stimulus stimulus;
    std::optional<SubjectMeta> subject;
    SubjectChecklist checklist;
    ProtocolConfig config;
    std::optional<RoiSet> rois;

    bool operator==(const SessionStarted&) const = default;
};

struct EnvRecorded {
    EnvCheckpoint checkpoint = EnvCheckpoint::StartAcclimatization;
    double temp_c = 0.0;
    double humidity_pct = 0.0;

    bool operator==(const EnvRecorded&) const = default;
};

struct CaptureRecorded {
    std::string frame_ref;
    CaptureRole role = CaptureRole::Scheduled;

    bool operator==(const CaptureRecorded&) const = default;
};

struct PhaseAdvanced {
    bool operator==(const PhaseAdvanced&) const = default;
};

struct SessionAborted {
    std::string reason;

    bool operator==(const SessionAborted&) const = default;
};

struct NoteAdded {
    std::string text;

    bool operator==(const NoteAdded&) const = default;
};

using EventPayload = std::variant<SessionStarted, EnvRecorded, CaptureRecorded, PhaseAdvanced, SessionAborted, NoteAdded>;

struct Event {
    std::uint64_t seq = 0; ///< 1-based position in the log
    Instant at{};
    EventPayload payload;

    bool operator==(const Event&) const = default;
};

std::string_view event_type_name(const EventPayload& payload);

/// Folds one event into the session. Throws ProtocolError when the state
/// machine forbids the event and InputError when its values are invalid; the
/// input session is left untouched in both cases.
Session apply_event(Session session, const Event& event);

/// Session state as the fold of a whole log.
Session replay(std::span<const Event> events);

/// Event-sourced session: every mutation appends one event and folds it.
class SessionRecord {
public:
    SessionRecord() = default;

    static SessionRecord start(SessionStarted params, Instant now);
    static SessionRecord from_events(std::vector<Event> events);

    void record_env(EnvCheckpoint checkpoint, double temp_c, double humidity_pct, Instant now);
    void record_capture(std::string frame_ref, Instant now, CaptureRole role);
    void advance_phase(Instant now);
    void abort(Instant now, std::string reason);
    void add_note(Instant now, std::string text);

    /// Appends an arbitrary event after validating it against the current state.
    const Event& append(Instant now, EventPayload payload);

    const Session& session() const { return session_; }
    const std::vector<Event>& events() const { return events_; }

private:
    Session session_;
    std::vector<Event> events_;
};

// -- queries ----------------------------------------------------------------

/// Instant of the next scheduled capture in the open phase, or nullopt when
/// the phase is waiting for a transition (or the session is not running).
std::optional<Instant> next_capture_due(const Session& session, Instant now);

/// Role the next capture of the open phase should carry.
CaptureRole suggested_role(const Session& session);

/// Checkpoint the protocol demands next in the open phase, if any.
std::optional<EnvCheckpoint> pending_checkpoint(const Session& session);

/// Reason advance_phase would be refused at `now`, or nullopt when it would succeed.
std::optional<std::string> advance_blocker(const Session& session, Instant now);

enum class ActionKind { None, RecordEnv, Capture, AdvancePhase };

struct NextAction {
    ActionKind kind = ActionKind::None;
    std::optional<EnvCheckpoint> checkpoint;
    std::optional<CaptureRole> role;
    std::optional<Instant> due;

    std::string describe() const;
};

NextAction next_action(const Session& session, Instant now);

/// floor(duration / capture_period) + 2: the start capture, one per elapsed
/// period and the end capture.
std::size_t expected_stimulus_captures(Millis duration, Seconds capture_period);

struct SessionSummary {
    std::string id;
    EmotionLabel emotion = EmotionLabel::Joy;
    Stimulus stimulus;
    std::string date;
    SessionStatus status = SessionStatus::Draft;
    bool complete = false;
    std::optional<Millis> stimulus_duration;
    std::array<std::size_t, 3> images_per_phase{};
    std::size_t stimulus_images = 0;
    std::size_t total_images = 0;
    std::optional<std::size_t> expected_stimulus_images;
    bool stimulus_count_mismatch = false;
    std::vector<EnvReading> env; ///< checkpoint order
};

SessionSummary session_summary(const Session& session);

/// Warning text when the same subject starts `next` less than `min_rest` after
/// `previous` ended.
std::optional<std::string> rest_interval_warning(const Session& previous, const Session& next,
                                                 Seconds min_rest = Seconds{2 * 3600});

} // namespace thermolab
