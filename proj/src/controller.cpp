#include "thermolab/controller.hpp"

#include "thermolab/error.hpp"
#include "thermolab/frame_io.hpp"

#include <algorithm>

namespace thermolab {

namespace fs = std::filesystem;

namespace {

constexpr std::array<CommandVerb, 6> kVerbs{CommandVerb::StartSession, CommandVerb::RecordEnv,
                                            CommandVerb::ConfirmCapture, CommandVerb::AdvancePhase,
                                            CommandVerb::Abort, CommandVerb::Note};

std::string_view action_name(ActionKind kind)
{
    switch (kind) {
    case ActionKind::None: return "none";
    case ActionKind::RecordEnv: return "record_env";
    case ActionKind::Capture: return "capture";
    case ActionKind::AdvancePhase: return "advance_phase";
    }
    return "?";
}

Json opt_instant(const std::optional<Instant>& t)
{
    return t ? Json(format_iso8601(*t)) : Json(nullptr);
}

template <typename T>
T payload_field(const Json& payload, const char* key)
{
    if (!payload.contains(key))
        throw InputError(std::string("payload is missing '") + key + "'");
    try {
        return payload.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("payload field '") + key + "': " + e.what());
    }
}

EventPayload to_event(const CommandRequest& c, const Session& session)
{
    switch (c.verb) {
    case CommandVerb::StartSession: return c.payload.get<SessionStarted>();
    case CommandVerb::RecordEnv:
        return EnvRecorded{parse_checkpoint(payload_field<std::string>(c.payload, "checkpoint")),
                           payload_field<double>(c.payload, "temp_c"), payload_field<double>(c.payload, "humidity_pct")};
    case CommandVerb::ConfirmCapture: {
        const auto ref = payload_field<std::string>(c.payload, "frame_ref");
        if (ref.empty())
            throw InputError("frame_ref must not be empty");
        const CaptureRole role = c.payload.contains("role") && !c.payload.at("role").is_null()
                                     ? parse_capture_role(payload_field<std::string>(c.payload, "role"))
                                     : suggested_role(session);
        return CaptureRecorded{ref, role};
    }
    case CommandVerb::AdvancePhase: return PhaseAdvanced{};
    case CommandVerb::Abort: return SessionAborted{payload_field<std::string>(c.payload, "reason")};
    case CommandVerb::Note: return NoteAdded{payload_field<std::string>(c.payload, "text")};
    }
    throw InputError("unknown verb");
}

CommandResult failure(ErrorCode code, std::string message, const std::string& id, std::uint64_t version)
{
    CommandResult r;
    r.session_id = id;
    r.version = version;
    r.error = code;
    r.message = std::move(message);
    return r;
}

Json phase_json(const Session& s, Instant now)
{
    const PhaseRecord* p = s.open_phase();
    if (!p)
        return nullptr;
    const ProtocolConfig& c = s.config;
    const Millis elapsed = now - p->started;
    Json min_s = nullptr;
    Json max_s = nullptr;
    switch (p->kind) {
    case PhaseKind::Acclimatization:
        min_s = c.acclim_min.count();
        max_s = c.acclim_max.count();
        break;
    case PhaseKind::Stimulus:
        min_s = c.stimulus_min.count();
        max_s = c.stimulus_max.count();
        break;
    case PhaseKind::Response: min_s = c.response_duration.count(); break;
    }
    const double e = to_seconds(elapsed);
    return Json{{"kind", to_string(p->kind)},
                {"started", format_iso8601(p->started)},
                {"elapsed_s", e},
                {"min_s", min_s},
                {"max_s", max_s},
                {"minimum_reached", e >= min_s.get<double>()},
                {"maximum_exceeded", !max_s.is_null() && e > max_s.get<double>()},
                {"captures", p->captures.size()}};
}

} // namespace

std::string_view to_string(CommandVerb verb)
{
    switch (verb) {
    case CommandVerb::StartSession: return "StartSession";
    case CommandVerb::RecordEnv: return "RecordEnv";
    case CommandVerb::ConfirmCapture: return "ConfirmCapture";
    case CommandVerb::AdvancePhase: return "AdvancePhase";
    case CommandVerb::Abort: return "Abort";
    case CommandVerb::Note: return "Note";
    }
    return "?";
}

CommandVerb parse_command_verb(std::string_view text)
{
    for (CommandVerb v : kVerbs)
        if (text == to_string(v))
            return v;
    throw InputError("unknown command verb '" + std::string(text) + "'");
}

CommandRequest parse_command(const Json& j)
{
    if (!j.is_object())
        throw InputError("command must be a JSON object");
    CommandRequest c;
    c.verb = parse_command_verb(payload_field<std::string>(j, "verb"));
    c.request_id = payload_field<std::string>(j, "request_id");
    if (c.request_id.empty())
        throw InputError("request_id must not be empty");
    if (j.contains("session_id") && !j.at("session_id").is_null())
        c.session_id = payload_field<std::string>(j, "session_id");
    if (c.verb != CommandVerb::StartSession && c.session_id.empty())
        throw InputError(std::string(to_string(c.verb)) + " needs a session_id");
    if (j.contains("payload") && !j.at("payload").is_null()) {
        c.payload = j.at("payload");
        if (!c.payload.is_object())
            throw InputError("payload must be a JSON object");
    }
    return c;
}

Json command_json(const CommandRequest& c)
{
    Json j{{"verb", to_string(c.verb)}, {"request_id", c.request_id}, {"payload", c.payload}};
    if (!c.session_id.empty())
        j["session_id"] = c.session_id;
    return j;
}

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidCommand: return "invalid_command";
    case ErrorCode::ProtocolConflict: return "protocol_conflict";
    case ErrorCode::NotFound: return "not_found";
    }
    return "?";
}

int http_status(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidCommand: return 400;
    case ErrorCode::ProtocolConflict: return 409;
    case ErrorCode::NotFound: return 404;
    }
    return 500;
}

Json CommandResult::to_json() const
{
    if (error)
        return Json{{"error", {{"code", thermolab::to_string(*error)}, {"message", message}}},
                    {"session_id", session_id},
                    {"version", version}};
    return Json{{"ok", true}, {"session_id", session_id}, {"version", version}};
}

// -- SessionController ----------------------------------------------------------

SessionController::SessionController(fs::path dir, std::shared_ptr<const Clock> clock, SessionRecord record)
    : dir_(std::move(dir)), clock_(std::move(clock)), record_(std::move(record))
{
}

std::string SessionController::id() const
{
    std::lock_guard lock(mutex_);
    return record_.session().id;
}

CommandResult SessionController::submit(const CommandRequest& request)
{
    std::lock_guard lock(mutex_);
    const std::string& id = record_.session().id;
    if (const auto it = seen_requests_.find(request.request_id); it != seen_requests_.end())
        return it->second;

    CommandResult result;
    if (request.verb == CommandVerb::StartSession) {
        result = failure(ErrorCode::ProtocolConflict, "session " + id + " has already started", id, record_.session().version);
    } else {
        try {
            const EventPayload payload = to_event(request, record_.session());
            const Event& e = record_.append(clock_->now(), payload);
            persist();
            if (const auto* cap = std::get_if<CaptureRecorded>(&e.payload))
                refresh_stats(Capture{e.at, cap->frame_ref, cap->role});
            result.session_id = id;
            result.version = record_.session().version;
            changed_.notify_all();
        } catch (const ProtocolError& e) {
            result = failure(ErrorCode::ProtocolConflict, e.what(), id, record_.session().version);
        } catch (const Error& e) {
            result = failure(ErrorCode::InvalidCommand, e.what(), id, record_.session().version);
        } catch (const nlohmann::json::exception& e) {
            result = failure(ErrorCode::InvalidCommand, e.what(), id, record_.session().version);
        }
    }
    seen_requests_.emplace(request.request_id, result);
    return result;
}

std::uint64_t SessionController::version() const
{
    std::lock_guard lock(mutex_);
    return record_.session().version;
}

Session SessionController::session() const
{
    std::lock_guard lock(mutex_);
    return record_.session();
}

std::vector<Event> SessionController::events() const
{
    std::lock_guard lock(mutex_);
    return record_.events();
}

void SessionController::persist() const
{
    write_event_log(dir_ / "log" / "events.log", record_.events());
}

void SessionController::refresh_stats(const Capture& capture)
{
    const fs::path path = dir_ / capture.frame_ref;
    std::error_code ec;
    if (!fs::exists(path, ec)) {
        stats_error_ = "frame " + capture.frame_ref + " not found; ROI readout unavailable";
        return;
    }
    try {
        const FrameTemperatures ft = to_temperatures(load_captured_frame(path), capture.at);
        const RoiSet rois = resolve_rois(record_.session(), std::nullopt, ft.map.width, ft.map.height);
        for (RoiStats s : extract_stats(ft.map, rois)) {
            s.timestamp = capture.at;
            latest_stats_[s.label] = s;
        }
        stats_error_.reset();
    } catch (const Error& e) {
        stats_error_ = std::string("ROI readout failed: ") + e.what();
    }
}

Json SessionController::state_json(const Session& s, std::uint64_t version, Instant now) const
{
    const NextAction next = next_action(s, now);
    const auto pending = pending_checkpoint(s);
    const auto blocker = s.status == SessionStatus::Running ? advance_blocker(s, now) : std::nullopt;
    Json deviations = Json::array();
    for (const Note& n : s.deviations())
        deviations.push_back(n);
    return Json{{"session_id", s.id},
                {"version", version},
                {"status", to_string(s.status)},
                {"now", format_iso8601(now)},
                {"phase", phase_json(s, now)},
                {"next_capture_due", opt_instant(s.status == SessionStatus::Running ? next_capture_due(s, now) : std::nullopt)},
                {"next_action",
                 {{"kind", action_name(next.kind)},
                  {"checkpoint", next.checkpoint ? Json(to_string(*next.checkpoint)) : Json(nullptr)},
                  {"role", next.role ? Json(to_string(*next.role)) : Json(nullptr)},
                  {"due", opt_instant(next.due)},
                  {"text", next.describe()}}},
                {"pending_checkpoint", pending ? Json(to_string(*pending)) : Json(nullptr)},
                {"advance_blocker", blocker ? Json(*blocker) : Json(nullptr)},
                {"deviations", deviations},
                {"summary", session_summary(s)},
                {"session", s}};
}

Json SessionController::live_state() const
{
    std::lock_guard lock(mutex_);
    Json j = state_json(record_.session(), record_.session().version, clock_->now());
    Json stats = Json::object();
    for (const auto& [label, s] : latest_stats_)
        stats[std::string(to_string(label))] = s;
    j["latest_stats"] = stats;
    j["latest_stats_error"] = stats_error_ ? Json(*stats_error_) : Json(nullptr);
    return j;
}

Json SessionController::state_at(std::uint64_t version) const
{
    std::lock_guard lock(mutex_);
    const auto& events = record_.events();
    if (version == 0 || version > events.size())
        throw InputError("no state version " + std::to_string(version));
    const Session s = replay(std::span<const Event>(events.data(), version));
    Json j = state_json(s, version, events[version - 1].at);
    j["event"] = Json::parse(event_to_line(events[version - 1]));
    return j;
}

std::uint64_t SessionController::wait_for_version(std::uint64_t after, Millis timeout) const
{
    std::unique_lock lock(mutex_);
    changed_.wait_for(lock, timeout, [&] { return record_.session().version > after; });
    return record_.session().version;
}

std::shared_ptr<const SessionAnalysis> SessionController::analysis(const AnalysisOptions& opts)
{
    std::lock_guard lock(mutex_);
    const bool default_opts = !opts.roi_override && opts.trend.tau == TrendConfig{}.tau
                              && opts.trend.consensus_floor == TrendConfig{}.consensus_floor;
    if (default_opts && analysis_ && analysis_version_ == record_.session().version)
        return analysis_;
    auto a = std::make_shared<const SessionAnalysis>(analyze_session(record_.session(), directory_loader(dir_), opts));
    if (default_opts) {
        analysis_ = a;
        analysis_version_ = record_.session().version;
    }
    return a;
}

// -- SessionStore ---------------------------------------------------------------

SessionStore::SessionStore(fs::path root, std::shared_ptr<const Clock> clock)
    : root_(std::move(root)), clock_(std::move(clock))
{
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec)
        throw InputError("cannot create session store " + root_.string() + ": " + ec.message());
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(root_))
        if (entry.is_directory() && fs::exists(entry.path() / "log" / "events.log"))
            dirs.push_back(entry.path());
    std::sort(dirs.begin(), dirs.end());
    for (const fs::path& d : dirs) {
        SessionRecord rec = SessionRecord::from_events(read_event_log(d / "log" / "events.log"));
        const std::string id = rec.session().id;
        sessions_[id] = std::make_shared<SessionController>(d, clock_, std::move(rec));
    }
}

CommandResult SessionStore::submit(const CommandRequest& request)
{
    if (request.verb != CommandVerb::StartSession) {
        const auto controller = find(request.session_id);
        if (!controller)
            return failure(ErrorCode::NotFound, "no session '" + request.session_id + "'", request.session_id, 0);
        return controller->submit(request);
    }

    std::lock_guard lock(mutex_);
    if (const auto it = started_requests_.find(request.request_id); it != started_requests_.end())
        return it->second;
    CommandResult result;
    try {
        SessionRecord rec = SessionRecord::start(request.payload.get<SessionStarted>(), clock_->now());
        const std::string id = rec.session().id;
        if (sessions_.count(id))
            throw ProtocolError("session " + id + " already exists");
        const fs::path dir = root_ / id;
        auto controller = std::make_shared<SessionController>(dir, clock_, std::move(rec));
        write_event_log(dir / "log" / "events.log", controller->events());
        sessions_[id] = controller;
        result.session_id = id;
        result.version = 1;
    } catch (const ProtocolError& e) {
        result = failure(ErrorCode::ProtocolConflict, e.what(), "", 0);
    } catch (const Error& e) {
        result = failure(ErrorCode::InvalidCommand, e.what(), "", 0);
    } catch (const nlohmann::json::exception& e) {
        result = failure(ErrorCode::InvalidCommand, e.what(), "", 0);
    }
    started_requests_.emplace(request.request_id, result);
    return result;
}

std::shared_ptr<SessionController> SessionStore::find(const std::string& id) const
{
    std::lock_guard lock(mutex_);
    const auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

std::vector<std::string> SessionStore::ids() const
{
    std::lock_guard lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [id, _] : sessions_)
        out.push_back(id);
    return out;
}

} // namespace thermolab
