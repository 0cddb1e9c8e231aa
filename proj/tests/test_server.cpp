#include "support.hpp"

#include "thermolab/render.hpp"
#include "thermolab/server.hpp"

#include <doctest.h>
#include <httplib.h>

#include <sstream>
#include <thread>

using namespace thermolab;
using namespace testsupport;

namespace {

class LiveServer {
public:
    LiveServer(const fs::path& root, std::shared_ptr<SimulatedClock> sim)
    {
        std::shared_ptr<const Clock> clock = sim ? std::shared_ptr<const Clock>(sim) : std::make_shared<SystemClock>();
        store = std::make_shared<SessionStore>(root, clock);
        ServiceOptions opts;
        opts.simulated_clock = sim;
        opts.stream_poll = Millis{50};
        Service(store, opts).mount(server_);
        port = server_.bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~LiveServer()
    {
        server_.stop();
        thread_.join();
    }

    httplib::Client client() const
    {
        httplib::Client c("127.0.0.1", port);
        c.set_read_timeout(30, 0);
        return c;
    }

    std::shared_ptr<SessionStore> store;
    int port = 0;

private:
    httplib::Server server_;
    std::thread thread_;
};

httplib::Result post_json(httplib::Client& c, const std::string& path, const Json& body)
{
    return c.Post(path, body.dump(), "application/json");
}

Json body_of(const httplib::Result& r)
{
    REQUIRE(r);
    return Json::parse(r->body);
}

} // namespace

TEST_CASE("service: health, sessions and structured errors")
{
    TempDir dir("srv");
    auto sim = std::make_shared<SimulatedClock>(t0());
    LiveServer srv(dir / "store", sim);
    auto c = srv.client();

    const Json health = body_of(c.Get("/api/health"));
    CHECK(health.at("ok") == true);
    CHECK(health.at("simulated_clock") == true);
    CHECK(health.at("now") == "2019-02-21T10:00:00.000Z");

    auto r = c.Post("/api/commands", "{not json", "application/json");
    REQUIRE(r);
    CHECK(r->status == 400);
    CHECK(body_of(r).at("error").at("code") == "invalid_command");

    r = post_json(c, "/api/commands", {{"verb", "AdvancePhase"}, {"request_id", "x"}, {"session_id", "nobody"}});
    CHECK(r->status == 404);
    CHECK(body_of(r).at("error").at("code") == "not_found");
    CHECK(c.Get("/api/sessions/nobody/state")->status == 404);

    r = post_json(c, "/api/commands", {{"verb", "StartSession"}, {"request_id", "s1"}, {"payload", Json(start_params())}});
    REQUIRE(r->status == 200);
    const Json started = body_of(r);
    const std::string id = started.at("session_id");
    CHECK(started.at("state").at("status") == "running");
    const Json list = body_of(c.Get("/api/sessions"));
    REQUIRE(list.at("sessions").size() == 1);
    CHECK(list.at("sessions")[0].at("id") == id);

    r = post_json(c, "/api/commands", {{"verb", "AdvancePhase"}, {"request_id", "a1"}, {"session_id", id}});
    CHECK(r->status == 409);
    CHECK(body_of(r).at("error").at("code") == "protocol_conflict");
    CHECK(body_of(r).at("version") == 1);
    CHECK(body_of(c.Get("/api/sessions/" + id + "/state")).at("version") == 1);

    CHECK(c.Get("/api/sessions/" + id + "/tables/deltas.csv")->status == 409);

    const Json clock = body_of(post_json(c, "/api/clock", {{"advance_s", 30}}));
    CHECK(clock.at("now") == "2019-02-21T10:00:30.000Z");
    CHECK(post_json(c, "/api/clock", {{"advance_s", -1}})->status == 400);
}

TEST_CASE("service: duplicate capture requests record one capture")
{
    TempDir dir("srv");
    auto sim = std::make_shared<SimulatedClock>(t0());
    LiveServer srv(dir / "store", sim);
    auto c = srv.client();
    const std::string id = body_of(post_json(c, "/api/commands",
                                             {{"verb", "StartSession"}, {"request_id", "s1"}, {"payload", Json(start_params())}}))
                               .at("session_id");
    post_json(c, "/api/commands",
              {{"verb", "RecordEnv"},
               {"request_id", "e1"},
               {"session_id", id},
               {"payload", {{"checkpoint", "start_acclimatization"}, {"temp_c", 20.4}, {"humidity_pct", 36.8}}}});
    const Json cap{{"verb", "ConfirmCapture"}, {"request_id", "c1"}, {"session_id", id}, {"payload", {{"frame_ref", "frames/0001.raw"}}}};
    const Json a = body_of(post_json(c, "/api/commands", cap));
    const Json b = body_of(post_json(c, "/api/commands", cap));
    CHECK(a.at("version") == 3);
    CHECK(b.at("version") == 3);
    CHECK(b.at("state").at("session").at("phases")[0].at("captures").size() == 1);
    CHECK(body_of(c.Get("/api/sessions/" + id + "/state")).at("latest_stats_error").is_string());
}

TEST_CASE("service: wall-clock services refuse clock changes")
{
    TempDir dir("srv");
    LiveServer srv(dir / "store", nullptr);
    auto c = srv.client();
    CHECK(post_json(c, "/api/clock", {{"advance_s", 1}})->status == 409);
}

TEST_CASE("service: a scripted session streams ordered versions and serves its results")
{
    TempDir dir("srv");
    const FixtureSession f = synth_session(EmotionLabel::Anger, StimulusKind::Video, dir / "fixture");
    auto sim = std::make_shared<SimulatedClock>(f.events.front().at);
    LiveServer srv(dir / "store", sim);
    copy_frames(f.dir, dir / "store" / f.session.id);
    const auto cmds = commands_from_events(f.events, f.session.id);

    auto c = srv.client();
    c.Post("/api/clock", Json{{"set", format_iso8601(cmds[0].at)}}.dump(), "application/json");
    REQUIRE(c.Post("/api/commands", command_json(cmds[0].request).dump(), "application/json")->status == 200);

    std::string streamed;
    std::thread reader([&] {
        auto rc = srv.client();
        rc.Get("/api/sessions/" + f.session.id + "/stream?since=0", [&](const char* data, std::size_t n) {
            streamed.append(data, n);
            return true;
        });
    });

    for (std::size_t i = 1; i < cmds.size(); ++i) {
        c.Post("/api/clock", Json{{"set", format_iso8601(cmds[i].at)}}.dump(), "application/json");
        const auto r = c.Post("/api/commands", command_json(cmds[i].request).dump(), "application/json");
        REQUIRE(r);
        REQUIRE_MESSAGE(r->status == 200, r->body);
    }
    reader.join();

    std::istringstream lines(streamed);
    std::string line;
    std::uint64_t expected = 1;
    std::string last_status;
    while (std::getline(lines, line)) {
        const Json s = Json::parse(line);
        CHECK(s.at("version") == expected);
        CHECK(s.at("event").at("seq") == expected);
        last_status = s.at("status");
        ++expected;
    }
    CHECK(expected - 1 == f.events.size());
    CHECK(last_status == "completed");

    const auto log = c.Get("/api/sessions/" + f.session.id + "/log");
    CHECK(log->body == serialize_events(f.events));
    const auto deltas = c.Get("/api/sessions/" + f.session.id + "/tables/deltas.csv");
    REQUIRE(deltas->status == 200);
    CHECK(deltas->body.find("anger,video,forehead,acclimatization,36.1,35.1") != std::string::npos);
    CHECK(c.Get("/api/sessions/" + f.session.id + "/tables/deltas_wide.csv")->status == 200);
    CHECK(c.Get("/api/sessions/" + f.session.id + "/tables/comparison.csv")->body.find("consensus") != std::string::npos);
    CHECK(body_of(c.Get("/api/sessions/" + f.session.id + "/tables/analysis.json")).at("deltas").size() == 12);
    CHECK(c.Get("/api/sessions/" + f.session.id + "/tables/other.csv")->status == 404);
    CHECK(body_of(c.Get("/api/sessions/" + f.session.id + "/summary")).at("total_images") == f.session.total_captures());

    const auto ppm = c.Get("/api/sessions/" + f.session.id + "/renders/1.ppm");
    REQUIRE(ppm->status == 200);
    CHECK(parse_ppm(ppm->body).width == 160);
    CHECK(parse_ppm(c.Get("/api/sessions/" + f.session.id + "/renders/sequence.ppm")->body).width == 6 * 160 + 20);
    CHECK(c.Get("/api/sessions/" + f.session.id + "/renders/999.ppm")->status == 404);

    const Json bundle = body_of(c.Post("/api/sessions/" + f.session.id + "/bundle", "", "application/json"));
    CHECK(bundle.at("manifest").at("captures").size() == f.session.total_captures());
    const Json again = body_of(c.Post("/api/sessions/" + f.session.id + "/bundle", "", "application/json"));
    CHECK(again.at("manifest") == bundle.at("manifest"));
    const auto manifest = c.Get("/api/sessions/" + f.session.id + "/bundle/manifest.json");
    CHECK(Json::parse(manifest->body) == bundle.at("manifest"));
    CHECK(c.Get("/api/sessions/" + f.session.id + "/bundle/../../x")->status >= 400);

    const auto replayed = c.Get("/api/sessions/" + f.session.id + "/stream?since=3&follow=0");
    CHECK(Json::parse(replayed->body.substr(0, replayed->body.find('\n'))).at("version") == 4);
}
