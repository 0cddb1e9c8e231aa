#include "support.hpp"

#include "thermolab/bundle.hpp"
#include "thermolab/terminal.hpp"

#include <doctest.h>

#include <sstream>

using namespace thermolab;
using namespace testsupport;

namespace {

struct Rig {
    TempDir dir{"term"};
    FixtureSession fixture;
    std::shared_ptr<SimulatedClock> clock;
    std::unique_ptr<SessionStore> store;
    std::shared_ptr<SessionController> controller;

    explicit Rig(EmotionLabel e = EmotionLabel::Joy, StimulusKind k = StimulusKind::Video)
        : fixture(synth_session(e, k, dir / "fixture"))
    {
        clock = std::make_shared<SimulatedClock>(fixture.events.front().at);
        store = std::make_unique<SessionStore>(dir / "store", clock);
        copy_frames(fixture.dir, dir / "store" / fixture.session.id);
        const auto cmds = commands_from_events(fixture.events, fixture.session.id, "term");
        REQUIRE(store->submit(cmds.front().request).ok());
        controller = store->find(fixture.session.id);
    }

    TerminalOutcome run(const std::string& script, std::string* output = nullptr, const std::atomic<bool>* flag = nullptr)
    {
        std::istringstream in(script);
        std::ostringstream out;
        TerminalOptions opts;
        opts.simulated_clock = clock;
        opts.interrupted = flag;
        const TerminalOutcome o = run_terminal(*controller, in, out, opts);
        if (output)
            *output = out.str();
        return o;
    }
};

std::string first_lines(const std::string& text, std::size_t n)
{
    std::istringstream in(text);
    std::string line, out;
    for (std::size_t i = 0; i < n && std::getline(in, line); ++i)
        out += line + "\n";
    return out;
}

std::size_t count_lines(const std::string& text)
{
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

} // namespace

TEST_CASE("a scripted transcript completes the session with a log identical to the UI path")
{
    Rig rig;
    std::string out;
    const TerminalOutcome o = rig.run(transcript_from_events(rig.fixture.events), &out);
    CHECK(o.status == SessionStatus::Completed);
    CHECK(o.rejected == 0);
    CHECK(out.find("session " + rig.fixture.session.id + " completed") != std::string::npos);
    CHECK(serialize_events(rig.controller->events()) == serialize_events(rig.fixture.events));

    const ExportResult ex = export_bundle(directory_source(rig.controller->events(), rig.controller->dir()),
                                          rig.dir / "bundle");
    CHECK(ex.frame_count == 33);
    CHECK(import_bundle(rig.dir / "bundle").warnings.empty());
}

TEST_CASE("advancing the stimulus at 90 s is rejected and the session resumes")
{
    Rig rig;
    const std::string full = transcript_from_events(rig.fixture.events);
    // Everything up to and including the stimulus phase-start capture.
    const auto stim_start = full.find("phase_start\n");
    REQUIRE(stim_start != std::string::npos);
    const std::string head = full.substr(0, stim_start + 12);
    const std::string tail = full.substr(stim_start + 12);

    std::string out;
    const TerminalOutcome first = rig.run(head + "wait 90\nadvance\nstatus\nquit\n", &out);
    CHECK(first.rejected == 1);
    CHECK(first.status == SessionStatus::Running);
    CHECK(out.find("stimulus too short") != std::string::npos);
    CHECK(rig.controller->session().open_phase()->kind == PhaseKind::Stimulus);

    const TerminalOutcome second = rig.run(tail);
    CHECK(second.rejected == 0);
    CHECK(second.status == SessionStatus::Completed);
    CHECK(rig.controller->events() == rig.fixture.events);
}

TEST_CASE("an interrupt aborts the session and keeps the log intact")
{
    Rig rig;
    const std::string script = first_lines(transcript_from_events(rig.fixture.events), 12) + "interrupt\n";
    const TerminalOutcome o = rig.run(script);
    CHECK(o.interrupted);
    CHECK(o.status == SessionStatus::Aborted);
    const auto log = read_event_log(rig.controller->dir() / "log/events.log");
    CHECK(log == rig.controller->events());
    CHECK(replay(log).status == SessionStatus::Aborted);
    CHECK(replay(log).abort_reason == "interrupted by operator");
    for (std::size_t i = 0; i + 1 < log.size(); ++i)
        CHECK(log[i] == rig.fixture.events[i]);
}

TEST_CASE("the interrupt flag is honoured between commands")
{
    Rig rig;
    std::atomic<bool> flag{true};
    const TerminalOutcome o = rig.run("note hello\n", nullptr, &flag);
    CHECK(o.interrupted);
    CHECK(o.status == SessionStatus::Aborted);
}

TEST_CASE("bad terminal input is reported and counted")
{
    Rig rig;
    std::string out;
    const TerminalOutcome o = rig.run("dance\nenv start_acclimatization 20\nwait x\nnote  spaced  text\nquit\n", &out);
    CHECK(o.rejected == 3);
    CHECK(out.find("unknown command 'dance'") != std::string::npos);
    CHECK(rig.controller->session().notes.back().text == "spaced  text");
    CHECK(count_lines(out) >= 4);
}
