#pragma once

#include "thermolab/analysis.hpp"
#include "thermolab/protocol.hpp"
#include "thermolab/serialization.hpp"
#include "thermolab/time.hpp"

#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace thermolab {

enum class CommandVerb { StartSession, RecordEnv, ConfirmCapture, AdvancePhase, Abort, Note };

std::string_view to_string(CommandVerb verb);
CommandVerb parse_command_verb(std::string_view text);

/// Wire form: {"verb", "request_id", "session_id", "payload"}. Payloads:
///   StartSession   SessionStarted fields (emotion, stimulus, checklist, ...)
///   RecordEnv      {checkpoint, temp_c, humidity_pct}
///   ConfirmCapture {frame_ref, role?}  role defaults to the suggested one
///   AdvancePhase   {}
///   Abort          {reason}
///   Note           {text}
struct CommandRequest {
    CommandVerb verb = CommandVerb::Note;
    std::string request_id;
    std::string session_id; ///< empty for StartSession
    Json payload = Json::object();
};

CommandRequest parse_command(const Json& j);
Json command_json(const CommandRequest& c);

enum class ErrorCode { InvalidCommand, ProtocolConflict, NotFound };

std::string_view to_string(ErrorCode code);
int http_status(ErrorCode code);

struct CommandResult {
    std::string session_id;
    std::uint64_t version = 0;
    std::optional<ErrorCode> error;
    std::string message;

    bool ok() const { return !error; }
    /// {"ok":true,...} or {"error":{"code","message"},"version"}.
    Json to_json() const;
};

/// Serialized command stream for one session. Every accepted command appends
/// exactly one event and rewrites the session's log; rejected commands leave
/// state and version unchanged.
class SessionController {
public:
    SessionController(std::filesystem::path dir, std::shared_ptr<const Clock> clock, SessionRecord record);

    const std::filesystem::path& dir() const { return dir_; }
    std::string id() const;

    CommandResult submit(const CommandRequest& request);

    std::uint64_t version() const;
    Session session() const;
    std::vector<Event> events() const;

    /// Snapshot: session, phase timing, next action, latest ROI stats,
    /// pending checkpoint and deviations.
    Json live_state() const;
    /// State as of `version` (1..current), without live ROI stats.
    Json state_at(std::uint64_t version) const;

    /// Blocks until the version exceeds `after` or `timeout` passes; returns
    /// the current version.
    std::uint64_t wait_for_version(std::uint64_t after, Millis timeout) const;

    /// Analysis of the completed session, cached per version.
    std::shared_ptr<const SessionAnalysis> analysis(const AnalysisOptions& opts = {});

private:
    Json state_json(const Session& session, std::uint64_t version, Instant now) const;
    void persist() const;
    void refresh_stats(const Capture& capture);

    std::filesystem::path dir_;
    std::shared_ptr<const Clock> clock_;
    mutable std::mutex mutex_;
    mutable std::condition_variable changed_;
    SessionRecord record_;
    std::map<std::string, CommandResult> seen_requests_;
    std::map<RoiLabel, RoiStats> latest_stats_;
    std::optional<std::string> stats_error_;
    std::shared_ptr<const SessionAnalysis> analysis_;
    std::uint64_t analysis_version_ = 0;
};

/// Sessions kept as <root>/<session id>/log/events.log with their frames
/// alongside.
class SessionStore {
public:
    SessionStore(std::filesystem::path root, std::shared_ptr<const Clock> clock);

    const std::filesystem::path& root() const { return root_; }
    std::shared_ptr<const Clock> clock() const { return clock_; }

    /// Routes a command: StartSession creates a session, everything else goes
    /// to the named session's controller.
    CommandResult submit(const CommandRequest& request);

    std::shared_ptr<SessionController> find(const std::string& id) const;
    std::vector<std::string> ids() const;

private:
    std::filesystem::path root_;
    std::shared_ptr<const Clock> clock_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<SessionController>> sessions_;
    std::map<std::string, CommandResult> started_requests_;
};

} // namespace thermolab
