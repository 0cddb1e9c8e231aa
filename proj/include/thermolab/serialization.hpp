#pragma once

#include "thermolab/protocol.hpp"
#include "thermolab/radiometry.hpp"
#include "thermolab/roi.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace thermolab {

using Json = nlohmann::json;

void to_json(Json& j, const RadiometricCalibration& c);
void from_json(const Json& j, RadiometricCalibration& c);

void to_json(Json& j, const RoiBox& b);
void from_json(const Json& j, RoiBox& b);
void to_json(Json& j, const RoiSet& s);
void from_json(const Json& j, RoiSet& s);
void to_json(Json& j, const RoiStats& s);

void to_json(Json& j, const ProtocolConfig& c);
void from_json(const Json& j, ProtocolConfig& c);
void to_json(Json& j, const SubjectChecklist& c);
void from_json(const Json& j, SubjectChecklist& c);
void to_json(Json& j, const SubjectMeta& m);
void from_json(const Json& j, SubjectMeta& m);
void to_json(Json& j, const Stimulus& s);
void from_json(const Json& j, Stimulus& s);
void to_json(Json& j, const EnvReading& r);
void from_json(const Json& j, EnvReading& r);
void to_json(Json& j, const Capture& c);
void from_json(const Json& j, Capture& c);
void to_json(Json& j, const PhaseRecord& p);
void from_json(const Json& j, PhaseRecord& p);
void to_json(Json& j, const Note& n);
void from_json(const Json& j, Note& n);
void to_json(Json& j, const Session& s);
void from_json(const Json& j, Session& s);
void to_json(Json& j, const SessionStarted& e);
void from_json(const Json& j, SessionStarted& e);
void to_json(Json& j, const SessionSummary& s);

Json event_payload_json(const EventPayload& payload);
EventPayload event_payload_from_json(std::string_view type, const Json& data);

/// One event as a single compact JSON line (no trailing newline).
std::string event_to_line(const Event& event);
/// Throws InputError quoting `line_no` on malformed input.
Event event_from_line(std::string_view line, std::size_t line_no = 0);

std::string serialize_events(const std::vector<Event>& events);
std::vector<Event> parse_events(std::string_view text, std::string_view origin = "event log");

std::vector<Event> read_event_log(const std::filesystem::path& path);
void write_event_log(const std::filesystem::path& path, const std::vector<Event>& events);

/// Canonical compact encoding; equal sessions give equal bytes.
std::string canonical_json(const Session& session);

/// ROI layout document: {"rois":[{"label":..,"x":..,"y":..,"w":..,"h":..}, ...]}
RoiSet read_roi_layout(const std::filesystem::path& path);
void write_roi_layout(const std::filesystem::path& path, const RoiSet& rois);

std::string read_text_file(const std::filesystem::path& path);
/// Writes through a temporary file and renames into place.
void write_text_file(const std::filesystem::path& path, std::string_view content);

} // namespace thermolab
