#include "support.hpp"

#include <doctest.h>

#include <cstdlib>
#include <sys/wait.h>

using namespace thermolab;
using namespace testsupport;

namespace {

struct CliRun {
    int code = -1;
    std::string out;
    std::string err;
};

std::string quote(const std::string& s)
{
    std::string q = "'";
    for (char c : s)
        q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return q + "'";
}

CliRun cli(const TempDir& dir, const std::vector<std::string>& args, const std::string& stdin_text = "")
{
    std::string cmd = quote(cli_path().string());
    for (const std::string& a : args)
        cmd += " " + quote(a);
    write_text_file(dir / "stdin.txt", stdin_text);
    cmd += " < " + quote((dir / "stdin.txt").string()) + " > " + quote((dir / "stdout.txt").string()) + " 2> "
           + quote((dir / "stderr.txt").string());
    const int status = std::system(cmd.c_str());
    CliRun r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_text_file(dir / "stdout.txt");
    r.err = read_text_file(dir / "stderr.txt");
    return r;
}

} // namespace

TEST_CASE("cli: analyze a fixture directory")
{
    TempDir dir("cli");
    const FixtureSession f = synth_session(EmotionLabel::Anger, StimulusKind::Video, dir / "anger");
    const CliRun r = cli(dir, {"analyze", f.dir.string(), "--out", (dir / "out").string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const std::string deltas = read_text_file(dir / "out" / f.session.id / "deltas.csv");
    CHECK(deltas.find("anger,video,forehead,acclimatization,36.1,35.1") != std::string::npos);
    CHECK(fs::exists(dir / "out" / f.session.id / "renders/sequence.ppm"));
    CHECK(fs::exists(dir / "out" / f.session.id / "analysis.json"));
}

TEST_CASE("cli: empty and malformed inputs exit with the input-error code")
{
    TempDir dir("cli");
    fs::create_directories(dir / "empty");
    CliRun r = cli(dir, {"analyze", (dir / "empty").string(), "--out", (dir / "out").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("no frames found") != std::string::npos);

    write_text_file(dir / "bad.csv", "emotion,stimulus,roi,phase,start,final\njoy,video,nose,stimulus,36.1\n");
    r = cli(dir, {"analyze", (dir / "bad.csv").string(), "--out", (dir / "out").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("bad.csv:2") != std::string::npos);

    r = cli(dir, {"analyze"});
    CHECK(r.code == 2);
    r = cli(dir, {"frobnicate"});
    CHECK(r.code == 2);
    r = cli(dir, {"analyze", (dir / "missing").string()});
    CHECK(r.code == 2);
}

TEST_CASE("cli: start/final tables give an endpoint comparison with flagged exemptions")
{
    TempDir dir("cli");
    const CliRun r = cli(dir, {"analyze", (fixtures_dir() / "video_endpoints.csv").string(),
                               (fixtures_dir() / "music_endpoints.csv").string(), "--out", (dir / "out").string(),
                               "--reference", (fixtures_dir() / "trend_reference.csv").string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const std::string check = read_text_file(dir / "out/reference_check.csv");
    CHECK(check.find("# assumption:") == 0);
    CHECK(check.find("fear,acclimatization,video,decrease,decrease,endpoints,match") != std::string::npos);
    CHECK(check.find("anger,acclimatization,video,decrease,decrease,endpoints,match") != std::string::npos);
    CHECK(check.find("love,response,music,decrease,decrease,endpoints,match") != std::string::npos);
    CHECK(check.find(",exempt,compound label") != std::string::npos);
    CHECK(r.out.find("mismatch") != std::string::npos);
    CHECK(read_text_file(dir / "out/comparison.csv").find("endpoint-only") != std::string::npos);
}

TEST_CASE("cli: celsius-grid and radiometric inputs give identical tables")
{
    TempDir dir("cli");
    const CliRun s1 = cli(dir, {"synth", "--tables", fixtures_dir().string(), "--out", (dir / "raw").string(), "--session", "joy-music"});
    const CliRun s2 = cli(dir, {"synth", "--tables", fixtures_dir().string(), "--out", (dir / "grid").string(), "--session",
                                "joy-music", "--celsius-grid"});
    REQUIRE(s1.code == 0);
    REQUIRE(s2.code == 0);
    CHECK(cli(dir, {"analyze", (dir / "raw/joy-music").string(), "--out", (dir / "a").string(), "--no-renders"}).code == 0);
    CHECK(cli(dir, {"analyze", (dir / "grid/joy-music").string(), "--out", (dir / "b").string(), "--no-renders"}).code == 0);
    const std::string id = "joy-music-20190304T100000Z";
    for (const char* name : {"deltas.csv", "trends.csv", "deltas_wide.csv"})
        CHECK(read_text_file(dir / "a" / id / name) == read_text_file(dir / "b" / id / name));
}

TEST_CASE("cli: export and import")
{
    TempDir dir("cli");
    const FixtureSession f = synth_session(EmotionLabel::Sadness, StimulusKind::Video, dir / "s");
    CliRun r = cli(dir, {"export", f.dir.string(), "--out", (dir / "bundle").string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    r = cli(dir, {"import", (dir / "bundle").string(), "--out", (dir / "restored").string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("verified") != std::string::npos);
    CHECK(read_event_log(dir / "restored/log/events.log") == f.events);

    r = cli(dir, {"export", f.dir.string(), "--out", (dir / "bundle").string()});
    CHECK(r.code == 2);

    std::string bytes = read_text_file(dir / "bundle/frames/0002.raw");
    bytes[64] = static_cast<char>(bytes[64] ^ 0x10);
    write_text_file(dir / "bundle/frames/0002.raw", bytes);
    r = cli(dir, {"import", (dir / "bundle").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("frames/0002.raw") != std::string::npos);
}

TEST_CASE("cli: incomplete sessions are protocol-state errors")
{
    TempDir dir("cli");
    SessionRecord rec = SessionRecord::start(start_params(), t0());
    write_event_log(dir / "s/log/events.log", rec.events());
    CHECK(cli(dir, {"export", (dir / "s").string(), "--out", (dir / "b").string()}).code == 3);
    CHECK(cli(dir, {"analyze", (dir / "s").string(), "--out", (dir / "o").string()}).code == 3);
}

TEST_CASE("cli: run a scripted session end to end")
{
    TempDir dir("cli");
    const FixtureSession f = synth_session(EmotionLabel::Joy, StimulusKind::Video, dir / "fixture");
    write_text_file(dir / "start.json", Json(std::get<SessionStarted>(f.events.front().payload)).dump());
    copy_frames(f.dir, dir / "store" / f.session.id);
    const std::string script = transcript_from_events(f.events);
    const std::string start = format_iso8601(f.events.front().at);

    CliRun r = cli(dir, {"run", "--store", (dir / "store").string(), "--config", (dir / "start.json").string(),
                         "--simulated-clock", start},
                   script);
    REQUIRE_MESSAGE(r.code == 0, (r.out + r.err));
    CHECK(r.out.find("completed") != std::string::npos);
    CHECK(read_text_file(dir / "store" / f.session.id / "log/events.log") == serialize_events(f.events));
    CHECK(cli(dir, {"export", (dir / "store" / f.session.id).string(), "--out", (dir / "bundle").string()}).code == 0);
    CHECK(cli(dir, {"import", (dir / "bundle").string()}).code == 0);
}

TEST_CASE("cli: run exit codes for rejections, resumes and interrupts")
{
    TempDir dir("cli");
    write_text_file(dir / "start.json", Json(start_params()).dump());
    const std::string store = (dir / "store").string();
    CliRun r = cli(dir, {"run", "--store", store, "--config", (dir / "start.json").string(), "--simulated-clock",
                         "2019-02-21T10:00:00Z"},
                   "env start_acclimatization 20.4 36.8\nwait 30\nadvance\nquit\n");
    CHECK(r.code == 3);
    CHECK(r.out.find("acclimatization incomplete") != std::string::npos);
    const std::string id = "joy-video-20190221T100000Z";
    CHECK(replay(read_event_log(dir / "store" / id / "log/events.log")).status == SessionStatus::Running);

    r = cli(dir, {"run", "--store", store, "--session", id, "--simulated-clock", "2019-02-21T10:01:00Z"},
            "note resumed\nquit\n");
    CHECK(r.code == 0);

    r = cli(dir, {"run", "--store", store, "--session", id, "--simulated-clock", "2019-02-21T10:02:00Z"},
            "interrupt\n");
    CHECK(r.code == 3);
    const Session s = replay(read_event_log(dir / "store" / id / "log/events.log"));
    CHECK(s.status == SessionStatus::Aborted);
    CHECK(s.notes.back().text == "resumed");

    CHECK(cli(dir, {"run", "--store", store, "--session", "nobody"}).code == 2);
    CHECK(cli(dir, {"run", "--store", store}).code == 2);
}
