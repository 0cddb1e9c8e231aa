#include "thermolab/serialization.hpp"

#include "thermolab/error.hpp"

#include <fstream>
#include <sstream>

namespace thermolab {

namespace fs = std::filesystem;

namespace {

template <typename T>
T get_field(const Json& j, const char* key)
{
    if (!j.contains(key))
        throw InputError(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("field '") + key + "': " + e.what());
    }
}

template <typename T>
std::optional<T> get_optional(const Json& j, const char* key)
{
    if (!j.contains(key) || j.at(key).is_null())
        return std::nullopt;
    return get_field<T>(j, key);
}

Json opt_json(const auto& v)
{
    return v ? Json(*v) : Json(nullptr);
}

long long seconds_of(Seconds s)
{
    return static_cast<long long>(s.count());
}

Instant get_instant(const Json& j, const char* key)
{
    return parse_iso8601(get_field<std::string>(j, key));
}

} // namespace

void to_json(Json& j, const RadiometricCalibration& c)
{
    j = Json{{"r1", c.r1},
             {"r2", c.r2},
             {"b", c.b},
             {"o", c.o},
             {"f", c.f},
             {"emissivity", c.emissivity},
             {"reflected_temp_k", c.reflected_temp_k}};
}

void from_json(const Json& j, RadiometricCalibration& c)
{
    c.r1 = get_field<double>(j, "r1");
    c.r2 = get_field<double>(j, "r2");
    c.b = get_field<double>(j, "b");
    c.o = get_field<double>(j, "o");
    c.f = get_field<double>(j, "f");
    c.emissivity = get_field<double>(j, "emissivity");
    c.reflected_temp_k = get_field<double>(j, "reflected_temp_k");
}

void to_json(Json& j, const RoiBox& b)
{
    j = Json{{"label", to_string(b.label)}, {"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}};
}

void from_json(const Json& j, RoiBox& b)
{
    b.label = parse_roi_label(get_field<std::string>(j, "label"));
    b.x = get_field<int>(j, "x");
    b.y = get_field<int>(j, "y");
    b.w = get_field<int>(j, "w");
    b.h = get_field<int>(j, "h");
}

void to_json(Json& j, const RoiSet& s)
{
    j = Json::array();
    for (const RoiBox& b : s.boxes())
        j.push_back(b);
}

void from_json(const Json& j, RoiSet& s)
{
    if (!j.is_array())
        throw InputError("ROI set must be an array");
    std::vector<RoiBox> boxes;
    for (const Json& item : j)
        boxes.push_back(item.get<RoiBox>());
    s = RoiSet(std::move(boxes));
}

void to_json(Json& j, const RoiStats& s)
{
    j = Json{{"label", to_string(s.label)},
             {"min", s.min},
             {"max", s.max},
             {"mean", s.mean},
             {"valid_pixel_fraction", s.valid_pixel_fraction},
             {"timestamp", format_iso8601(s.timestamp)}};
}

void to_json(Json& j, const ProtocolConfig& c)
{
    j = Json{{"acclim_min_s", seconds_of(c.acclim_min)},
             {"acclim_max_s", seconds_of(c.acclim_max)},
             {"stimulus_min_s", seconds_of(c.stimulus_min)},
             {"stimulus_max_s", seconds_of(c.stimulus_max)},
             {"response_duration_s", seconds_of(c.response_duration)},
             {"capture_period_s", seconds_of(c.capture_period)},
             {"cadence_tolerance_s", seconds_of(c.cadence_tolerance)},
             {"subject_camera_distance_m", c.subject_camera_distance}};
}

void from_json(const Json& j, ProtocolConfig& c)
{
    // Missing keys keep their defaults so a config file can override a subset.
    ProtocolConfig d;
    auto secs = [&](const char* key, Seconds fallback) {
        return j.contains(key) ? Seconds{get_field<long long>(j, key)} : fallback;
    };
    c.acclim_min = secs("acclim_min_s", d.acclim_min);
    c.acclim_max = secs("acclim_max_s", d.acclim_max);
    c.stimulus_min = secs("stimulus_min_s", d.stimulus_min);
    c.stimulus_max = secs("stimulus_max_s", d.stimulus_max);
    c.response_duration = secs("response_duration_s", d.response_duration);
    c.capture_period = secs("capture_period_s", d.capture_period);
    c.cadence_tolerance = secs("cadence_tolerance_s", d.cadence_tolerance);
    c.subject_camera_distance = j.contains("subject_camera_distance_m")
                                    ? get_field<double>(j, "subject_camera_distance_m")
                                    : d.subject_camera_distance;
}

void to_json(Json& j, const SubjectChecklist& c)
{
    j = Json{{"hair_tied_back", c.hair_tied_back},
             {"no_makeup", c.no_makeup},
             {"no_face_cream", c.no_face_cream},
             {"no_recent_exercise", c.no_recent_exercise},
             {"no_stimulants_last_hour", c.no_stimulants_last_hour},
             {"informed_consent_signed", c.informed_consent_signed}};
}

void from_json(const Json& j, SubjectChecklist& c)
{
    c.hair_tied_back = get_field<bool>(j, "hair_tied_back");
    c.no_makeup = get_field<bool>(j, "no_makeup");
    c.no_face_cream = get_field<bool>(j, "no_face_cream");
    c.no_recent_exercise = get_field<bool>(j, "no_recent_exercise");
    c.no_stimulants_last_hour = get_field<bool>(j, "no_stimulants_last_hour");
    c.informed_consent_signed = get_field<bool>(j, "informed_consent_signed");
}

void to_json(Json& j, const SubjectMeta& m)
{
    j = Json{{"id", opt_json(m.id)}, {"age", opt_json(m.age)}, {"gender", opt_json(m.gender)}};
}

void from_json(const Json& j, SubjectMeta& m)
{
    m.id = get_optional<std::string>(j, "id");
    m.age = get_optional<int>(j, "age");
    m.gender = get_optional<std::string>(j, "gender");
}

void to_json(Json& j, const Stimulus& s)
{
    j = Json{{"kind", to_string(s.kind)}, {"descriptor", s.descriptor}};
}

void from_json(const Json& j, Stimulus& s)
{
    s.kind = parse_stimulus_kind(get_field<std::string>(j, "kind"));
    s.descriptor = j.contains("descriptor") ? get_field<std::string>(j, "descriptor") : std::string();
}

void to_json(Json& j, const EnvReading& r)
{
    j = Json{{"checkpoint", to_string(r.checkpoint)},
             {"temp_c", r.temp_c},
             {"humidity_pct", r.humidity_pct},
             {"probe_accuracy_temp", r.probe_accuracy_temp},
             {"probe_accuracy_humidity", r.probe_accuracy_humidity},
             {"at", format_iso8601(r.at)}};
}

void from_json(const Json& j, EnvReading& r)
{
    r.checkpoint = parse_checkpoint(get_field<std::string>(j, "checkpoint"));
    r.temp_c = get_field<double>(j, "temp_c");
    r.humidity_pct = get_field<double>(j, "humidity_pct");
    r.probe_accuracy_temp = get_field<double>(j, "probe_accuracy_temp");
    r.probe_accuracy_humidity = get_field<double>(j, "probe_accuracy_humidity");
    r.at = get_instant(j, "at");
}

void to_json(Json& j, const Capture& c)
{
    j = Json{{"at", format_iso8601(c.at)}, {"frame_ref", c.frame_ref}, {"role", to_string(c.role)}};
}

void from_json(const Json& j, Capture& c)
{
    c.at = get_instant(j, "at");
    c.frame_ref = get_field<std::string>(j, "frame_ref");
    c.role = parse_capture_role(get_field<std::string>(j, "role"));
}

void to_json(Json& j, const PhaseRecord& p)
{
    j = Json{{"kind", to_string(p.kind)},
             {"started", format_iso8601(p.started)},
             {"ended", p.ended ? Json(format_iso8601(*p.ended)) : Json(nullptr)},
             {"captures", p.captures}};
}

void from_json(const Json& j, PhaseRecord& p)
{
    p.kind = parse_phase_kind(get_field<std::string>(j, "kind"));
    p.started = get_instant(j, "started");
    if (auto ended = get_optional<std::string>(j, "ended"))
        p.ended = parse_iso8601(*ended);
    else
        p.ended.reset();
    p.captures = get_field<std::vector<Capture>>(j, "captures");
}

void to_json(Json& j, const Note& n)
{
    j = Json{{"at", format_iso8601(n.at)},
             {"kind", n.kind == NoteKind::Operator ? "operator" : "deviation"},
             {"text", n.text}};
}

void from_json(const Json& j, Note& n)
{
    n.at = get_instant(j, "at");
    const auto kind = get_field<std::string>(j, "kind");
    if (kind == "operator")
        n.kind = NoteKind::Operator;
    else if (kind == "deviation")
        n.kind = NoteKind::Deviation;
    else
        throw InputError("unknown note kind '" + kind + "'");
    n.text = get_field<std::string>(j, "text");
}

void to_json(Json& j, const Session& s)
{
    j = Json{{"id", s.id},
             {"emotion", to_string(s.emotion)},
             {"stimulus", s.stimulus},
             {"date", s.date},
             {"subject", opt_json(s.subject)},
             {"checklist", s.checklist},
             {"config", s.config},
             {"rois", s.rois ? Json(*s.rois) : Json(nullptr)},
             {"phases", s.phases},
             {"env", s.env},
             {"notes", s.notes},
             {"status", to_string(s.status)},
             {"abort_reason", opt_json(s.abort_reason)},
             {"version", s.version}};
}

void from_json(const Json& j, Session& s)
{
    s.id = get_field<std::string>(j, "id");
    s.emotion = parse_emotion(get_field<std::string>(j, "emotion"));
    s.stimulus = get_field<Stimulus>(j, "stimulus");
    s.date = get_field<std::string>(j, "date");
    s.subject = get_optional<SubjectMeta>(j, "subject");
    s.checklist = get_field<SubjectChecklist>(j, "checklist");
    s.config = get_field<ProtocolConfig>(j, "config");
    s.rois = get_optional<RoiSet>(j, "rois");
    s.phases = get_field<std::vector<PhaseRecord>>(j, "phases");
    s.env = get_field<std::vector<EnvReading>>(j, "env");
    s.notes = get_field<std::vector<Note>>(j, "notes");
    s.status = parse_session_status(get_field<std::string>(j, "status"));
    s.abort_reason = get_optional<std::string>(j, "abort_reason");
    s.version = get_field<std::uint64_t>(j, "version");
}

void to_json(Json& j, const SessionStarted& e)
{
    j = Json{{"id", e.id},
             {"emotion", to_string(e.emotion)},
             {"stimulus", e.stimulus},
             {"subject", opt_json(e.subject)},
             {"checklist", e.checklist},
             {"config", e.config},
             {"rois", e.rois ? Json(*e.rois) : Json(nullptr)}};
}

void from_json(const Json& j, SessionStarted& e)
{
    e.id = j.contains("id") ? get_field<std::string>(j, "id") : std::string();
    e.emotion = parse_emotion(get_field<std::string>(j, "emotion"));
    e.stimulus = get_field<Stimulus>(j, "stimulus");
    e.subject = get_optional<SubjectMeta>(j, "subject");
    e.checklist = get_field<SubjectChecklist>(j, "checklist");
    e.config = j.contains("config") ? get_field<ProtocolConfig>(j, "config") : ProtocolConfig{};
    e.rois = get_optional<RoiSet>(j, "rois");
}

void to_json(Json& j, const SessionSummary& s)
{
    j = Json{{"id", s.id},
             {"emotion", to_string(s.emotion)},
             {"stimulus", s.stimulus},
             {"date", s.date},
             {"status", to_string(s.status)},
             {"complete", s.complete},
             {"stimulus_duration_s",
              s.stimulus_duration ? Json(to_seconds(*s.stimulus_duration)) : Json(nullptr)},
             {"stimulus_duration",
              s.stimulus_duration ? Json(format_minutes_seconds(*s.stimulus_duration)) : Json(nullptr)},
             {"images_per_phase",
              {{"acclimatization", s.images_per_phase[0]},
               {"stimulus", s.images_per_phase[1]},
               {"response", s.images_per_phase[2]}}},
             {"stimulus_images", s.stimulus_images},
             {"total_images", s.total_images},
             {"expected_stimulus_images", opt_json(s.expected_stimulus_images)},
             {"stimulus_count_mismatch", s.stimulus_count_mismatch},
             {"env", s.env}};
}

Json event_payload_json(const EventPayload& payload)
{
    struct Visitor {
        Json operator()(const SessionStarted& e) const { return Json(e); }
        Json operator()(const EnvRecorded& e) const
        {
            return Json{{"checkpoint", to_string(e.checkpoint)}, {"temp_c", e.temp_c}, {"humidity_pct", e.humidity_pct}};
        }
        Json operator()(const CaptureRecorded& e) const
        {
            return Json{{"frame_ref", e.frame_ref}, {"role", to_string(e.role)}};
        }
        Json operator()(const PhaseAdvanced&) const { return Json::object(); }
        Json operator()(const SessionAborted& e) const { return Json{{"reason", e.reason}}; }
        Json operator()(const NoteAdded& e) const { return Json{{"text", e.text}}; }
    };
    return std::visit(Visitor{}, payload);
}

EventPayload event_payload_from_json(std::string_view type, const Json& data)
{
    if (type == "session_started")
        return data.get<SessionStarted>();
    if (type == "env_recorded")
        return EnvRecorded{parse_checkpoint(get_field<std::string>(data, "checkpoint")),
                           get_field<double>(data, "temp_c"), get_field<double>(data, "humidity_pct")};
    if (type == "capture_recorded")
        return CaptureRecorded{get_field<std::string>(data, "frame_ref"),
                               parse_capture_role(get_field<std::string>(data, "role"))};
    if (type == "phase_advanced")
        return PhaseAdvanced{};
    if (type == "session_aborted")
        return SessionAborted{get_field<std::string>(data, "reason")};
    if (type == "note_added")
        return NoteAdded{get_field<std::string>(data, "text")};
    throw InputError("unknown event type '" + std::string(type) + "'");
}

std::string event_to_line(const Event& event)
{
    const Json j{{"seq", event.seq},
                 {"at", format_iso8601(event.at)},
                 {"type", event_type_name(event.payload)},
                 {"data", event_payload_json(event.payload)}};
    return j.dump();
}

Event event_from_line(std::string_view line, std::size_t line_no)
{
    const std::string where = line_no ? "line " + std::to_string(line_no) + ": " : std::string();
    try {
        const Json j = Json::parse(line);
        Event e;
        e.seq = get_field<std::uint64_t>(j, "seq");
        e.at = get_instant(j, "at");
        e.payload = event_payload_from_json(get_field<std::string>(j, "type"), j.at("data"));
        return e;
    } catch (const nlohmann::json::exception& ex) {
        throw InputError(where + ex.what());
    } catch (const InputError& ex) {
        throw InputError(where + ex.what());
    }
}

std::string serialize_events(const std::vector<Event>& events)
{
    std::string out;
    for (const Event& e : events) {
        out += event_to_line(e);
        out += '\n';
    }
    return out;
}

std::vector<Event> parse_events(std::string_view text, std::string_view origin)
{
    std::vector<Event> events;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        ++line_no;
        const std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        if (line.empty())
            continue;
        try {
            events.push_back(event_from_line(line, 0));
        } catch (const InputError& e) {
            throw InputError(std::string(origin) + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return events;
}

std::vector<Event> read_event_log(const fs::path& path)
{
    return parse_events(read_text_file(path), path.string());
}

void write_event_log(const fs::path& path, const std::vector<Event>& events)
{
    write_text_file(path, serialize_events(events));
}

std::string canonical_json(const Session& session)
{
    return Json(session).dump();
}

RoiSet read_roi_layout(const fs::path& path)
{
    try {
        const Json j = Json::parse(read_text_file(path));
        return j.at("rois").get<RoiSet>();
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    } catch (const InputError& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

void write_roi_layout(const fs::path& path, const RoiSet& rois)
{
    write_text_file(path, Json{{"rois", rois}}.dump(2) + "\n");
}

std::string read_text_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const fs::path& path, std::string_view content)
{
    std::error_code ec;
    if (path.has_parent_path())
        fs::create_directories(path.parent_path(), ec);
    if (ec)
        throw InputError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw InputError("cannot write " + path.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out)
            throw InputError("write failed for " + path.string());
    }
    fs::rename(tmp, path, ec);
    if (ec)
        throw InputError("cannot write " + path.string() + ": " + ec.message());
}

} // namespace thermolab
