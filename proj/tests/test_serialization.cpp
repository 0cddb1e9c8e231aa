#include "support.hpp"

#include "thermolab/serialization.hpp"

#include <doctest.h>

using namespace thermolab;
using namespace testsupport;

TEST_CASE("event lines round-trip")
{
    const SessionRecord rec = scripted_session(11, Millis{300'000}, 6, 11);
    for (const Event& e : rec.events()) {
        const std::string line = event_to_line(e);
        CHECK(line.find('\n') == std::string::npos);
        CHECK(event_from_line(line) == e);
    }
    const std::string log = serialize_events(rec.events());
    CHECK(parse_events(log) == rec.events());
}

TEST_CASE("event log files round-trip and report bad lines")
{
    TempDir dir("log");
    const SessionRecord rec = scripted_session(11, Millis{300'000}, 6, 11);
    write_event_log(dir / "log/events.log", rec.events());
    CHECK(read_event_log(dir / "log/events.log") == rec.events());

    std::string log = serialize_events(rec.events());
    log.insert(log.find('\n') + 1, "{not json}\n");
    CHECK_THROWS_WITH_AS(parse_events(log, "events.log"), doctest::Contains("events.log:2"), InputError);
}

TEST_CASE("session JSON round-trips")
{
    SessionStarted p = start_params(EmotionLabel::Anger, StimulusKind::Music);
    p.subject = SubjectMeta{std::string("s7"), 33, std::string("f")};
    p.rois = default_roi_layout(160, 120);
    const SessionRecord rec = scripted_session(11, Millis{300'000}, 6, 11, p);
    const Json j = rec.session();
    CHECK(j.get<Session>() == rec.session());
    CHECK(canonical_json(j.get<Session>()) == canonical_json(rec.session()));
}

TEST_CASE("canonical JSON is stable and version-sensitive")
{
    SessionRecord rec = SessionRecord::start(start_params(), t0());
    const std::string a = canonical_json(rec.session());
    CHECK(a == canonical_json(replay(rec.events())));
    rec.add_note(t0() + Seconds{1}, "hello");
    CHECK(canonical_json(rec.session()) != a);
}

TEST_CASE("ROI layout files")
{
    TempDir dir("roi");
    const RoiSet rois = default_roi_layout(320, 240);
    write_roi_layout(dir / "rois.json", rois);
    CHECK(read_roi_layout(dir / "rois.json") == rois);
    write_text_file(dir / "bad.json", R"([{"label":"forehead","x":0,"y":0,"w":1,"h":4}])");
    CHECK_THROWS_AS(read_roi_layout(dir / "bad.json"), InputError);
    write_text_file(dir / "broken.json", "[");
    CHECK_THROWS_AS(read_roi_layout(dir / "broken.json"), InputError);
}

TEST_CASE("start payload accepts defaults and rejects unknown labels")
{
    const Json j = Json::parse(R"({"emotion":"fear","stimulus":{"kind":"music"},
        "checklist":{"hair_tied_back":true,"no_makeup":true,"no_face_cream":true,
                     "no_recent_exercise":true,"no_stimulants_last_hour":true,"informed_consent_signed":true}})");
    const SessionStarted s = j.get<SessionStarted>();
    CHECK(s.emotion == EmotionLabel::Fear);
    CHECK(s.stimulus.kind == StimulusKind::Music);
    CHECK(s.config == ProtocolConfig{});
    Json bad = j;
    bad["emotion"] = "boredom";
    CHECK_THROWS_AS(bad.get<SessionStarted>(), InputError);
}

TEST_CASE("missing files are input errors")
{
    CHECK_THROWS_AS(read_text_file("/nonexistent/thermolab/file"), InputError);
    CHECK_THROWS_AS(read_event_log("/nonexistent/thermolab/events.log"), InputError);
}
