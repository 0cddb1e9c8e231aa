// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "support.hpp"

#include "thermolab/bundle.hpp"
#include "thermolab/radiometry.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

using namespace thermolab;
using namespace testsupport;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Collects the reasons a criterion failed.
struct Verdict {
    std::vector<std::string> failures;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok)
            failures.push_back(what);
    }
};

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

void check_table(Verdict& v, const std::vector<PhaseDeltaRow>& got, const std::vector<PhaseDeltaRow>& want)
{
    v.require(got.size() == 12, "expected 12 rows, got " + std::to_string(got.size()));
    v.require(want.size() == 12, "fixture block has " + std::to_string(want.size()) + " rows");
    for (const PhaseDeltaRow& w : want) {
        const PhaseDeltaRow& g = find_row(got, w.roi, w.phase);
        const std::string where = std::string(to_string(w.roi)) + " " + std::string(to_string(w.phase));
        v.require(fmt(g.start_mean) == fmt(w.start_mean) && fmt(g.final_mean) == fmt(w.final_mean),
                  where + ": " + fmt(g.start_mean) + "->" + fmt(g.final_mean) + " vs " + fmt(w.start_mean) + "->"
                      + fmt(w.final_mean));
    }
}

Verdict radiometry_round_trip()
{
    Verdict v;
    std::mt19937_64 rng(20190221);
    std::uniform_real_distribution<double> r1(8000.0, 30000.0), r2(0.005, 0.05), b(1200.0, 1600.0), o(-9000.0, 0.0),
        f(1.0, 1.5), e(0.5, 1.0), tr(253.15, 313.15), temp(-20.0, 250.0);
    const auto start = Clock::now();
    double worst = 0.0;
    std::size_t undecodable = 0;
    for (int i = 0; i < 10000; ++i) {
        RadiometricCalibration cal;
        cal.r1 = r1(rng);
        cal.r2 = r2(rng);
        cal.b = b(rng);
        cal.o = o(rng);
        cal.f = f(rng);
        cal.emissivity = e(rng);
        cal.reflected_temp_k = tr(rng);
        const double t = temp(rng);
        const auto back = signal_to_temperature(forward_signal(t, cal), cal);
        if (!back) {
            ++undecodable;
            continue;
        }
        worst = std::max(worst, std::abs(*back - t));
    }
    const double elapsed = seconds_since(start);
    v.require(undecodable == 0, std::to_string(undecodable) + " samples failed to decode");
    v.require(worst < 1e-6, "max error " + std::to_string(worst));
    v.require(elapsed < 1.0, "runtime " + std::to_string(elapsed) + " s");
    char buf[96];
    std::snprintf(buf, sizeof buf, "max error %.3g degC in %.3f s", worst, elapsed);
    v.detail = buf;
    return v;
}

Verdict fixture_deltas(EmotionLabel emotion, StimulusKind stimulus, RoiLabel roi, PhaseKind phase)
{
    Verdict v;
    TempDir dir("acc");
    const FixtureSession f = synth_session(emotion, stimulus, dir.path());
    const SessionAnalysis a = analyze_session(f.session, directory_loader(f.dir));
    check_table(v, a.deltas, endpoint_rows(emotion, stimulus));
    const PhaseDeltaRow& r = find_row(a.deltas, roi, phase);
    v.detail = std::string(to_string(roi)) + " " + std::string(to_string(phase)) + " " + fmt(r.start_mean) + "->"
               + fmt(r.final_mean);
    return v;
}

Verdict trend_comparison()
{
    Verdict v;
    std::vector<SessionTrends> video, music;
    for (EmotionLabel e : kEmotions) {
        video.push_back(endpoint_trends(endpoint_rows(e, StimulusKind::Video), {}));
        music.push_back(endpoint_trends(endpoint_rows(e, StimulusKind::Music), {}));
    }
    const ReferenceTable ref = parse_reference_table(read_text_file(fixtures_dir() / "trend_reference.csv"),
                                                     "trend_reference.csv");
    const auto checks = check_against_reference(compare_stimuli(video, music), ref);

    auto computed = [&](EmotionLabel e, const std::string& aspect, StimulusKind k) -> std::optional<TrendLabel> {
        for (const ReferenceCheck& c : checks)
            if (c.expected.emotion == e && c.expected.aspect == aspect && c.expected.stimulus == k)
                return c.computed;
        return std::nullopt;
    };
    const struct {
        EmotionLabel emotion;
        const char* aspect;
        StimulusKind stimulus;
    } required[] = {
        {EmotionLabel::Fear, "acclimatization", StimulusKind::Video},
        {EmotionLabel::Fear, "acclimatization", StimulusKind::Music},
        {EmotionLabel::Anger, "acclimatization", StimulusKind::Video},
        {EmotionLabel::Love, "response", StimulusKind::Video},
        {EmotionLabel::Love, "response", StimulusKind::Music},
    };
    for (const auto& r : required) {
        const auto got = computed(r.emotion, r.aspect, r.stimulus);
        v.require(got == TrendLabel::Decrease, std::string(to_string(r.emotion)) + " " + r.aspect + " "
                                                   + std::string(to_string(r.stimulus)) + " not decrease");
    }

    std::size_t match = 0, mismatch = 0, exempt = 0;
    for (const ReferenceCheck& c : checks) {
        const bool compound = c.expected.label == TrendLabel::IncreaseThenDecrease
                              || c.expected.label == TrendLabel::DecreaseThenIncrease;
        v.require(compound == (c.status == CellStatus::Exempt), "exemption state wrong for a reference cell");
        if (c.status == CellStatus::Exempt)
            v.require(!c.note.empty(), "exempt cell without a flag note");
        match += c.status == CellStatus::Match;
        mismatch += c.status == CellStatus::Mismatch;
        exempt += c.status == CellStatus::Exempt;
    }
    v.require(exempt > 0, "no compound cells exempted");
    v.detail = std::to_string(match) + " match, " + std::to_string(mismatch) + " mismatch, " + std::to_string(exempt)
               + " exempt (flagged)";
    return v;
}

Verdict protocol_properties()
{
    Verdict v;
    std::mt19937_64 rng(1729);
    DriveStats stats;
    const auto start = Clock::now();
    std::size_t violations = 0, replay_diffs = 0;
    for (int i = 0; i < 10000; ++i) {
        const SessionRecord rec = random_session(rng, stats);
        Session state;
        for (const Event& e : rec.events()) {
            state = apply_event(std::move(state), e);
            if (protocol_violation(state)) {
                ++violations;
                break;
            }
        }
        const std::string log = serialize_events(rec.events());
        const auto parsed = parse_events(log);
        if (serialize_events(parsed) != log || canonical_json(replay(parsed)) != canonical_json(rec.session())
            || !(state == rec.session()))
            ++replay_diffs;
    }
    const double elapsed = seconds_since(start);
    v.require(violations == 0, std::to_string(violations) + " sessions violated an invariant");
    v.require(replay_diffs == 0, std::to_string(replay_diffs) + " replays differed");
    v.require(stats.completed > 0, "no session completed");
    v.require(elapsed < 30.0, "runtime " + std::to_string(elapsed) + " s");
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu sessions, %zu completed, %zu aborted, %zu rejected commands, %.2f s",
                  stats.sessions, stats.completed, stats.aborted, stats.rejected, elapsed);
    v.detail = buf;
    return v;
}

Verdict session_summary_row()
{
    Verdict v;
    const SessionRecord rec = scripted_session(12, Millis{512'000}, 9, 12);
    const Session& s = rec.session();
    v.require(s.status == SessionStatus::Completed, "session not completed");
    const SessionSummary sum = session_summary(s);
    const std::string dur = sum.stimulus_duration ? format_minutes_seconds(*sum.stimulus_duration) : "-";
    v.require(sum.stimulus_images == 9, "stimulus images " + std::to_string(sum.stimulus_images));
    v.require(sum.total_images == 33, "total images " + std::to_string(sum.total_images));
    v.require(dur == "8'32''", "duration " + dur);
    v.require(sum.expected_stimulus_images == std::size_t{10}, "expected count not 10");
    v.require(sum.stimulus_count_mismatch, "mismatch not flagged");
    bool noted = false;
    for (const Note& n : s.deviations())
        noted |= n.text.find("expected 10") != std::string::npos;
    v.require(noted, "no deviation note");
    v.detail = "(" + std::to_string(sum.stimulus_images) + ", " + std::to_string(sum.total_images) + ", " + dur
               + "), expected " + std::to_string(sum.expected_stimulus_images.value_or(0)) + " flagged";
    return v;
}

Verdict bundle_round_trip()
{
    Verdict v;
    TempDir dir("accb");
    std::size_t sessions = 0;
    for (EmotionLabel e : kEmotions)
        for (StimulusKind k : {StimulusKind::Video, StimulusKind::Music}) {
            const std::string tag = std::string(to_string(e)) + "-" + std::string(to_string(k));
            const FixtureSession f = synth_session(e, k, dir / (tag + "/session"));
            const ExportResult ex = export_bundle(directory_source(f.events, f.dir), dir / (tag + "/bundle"));
            const ImportResult im = import_bundle(dir / (tag + "/bundle"));
            export_bundle(im.source(), dir / (tag + "/again"), im.export_options());
            v.require(read_text_file(dir / (tag + "/bundle/manifest.json"))
                          == read_text_file(dir / (tag + "/again/manifest.json")),
                      tag + ": manifests differ");
            v.require(im.warnings.empty(), tag + ": import warnings");
            v.require(im.session == f.session && im.events == f.events, tag + ": session differs");
            v.require(format_delta_csv(im.analysis.deltas) == format_delta_csv(ex.analysis.deltas)
                          && format_trend_csv(im.analysis.trends) == format_trend_csv(ex.analysis.trends),
                      tag + ": tables differ");
            v.require(read_text_file(dir / (tag + "/bundle/tables/deltas.csv"))
                          == read_text_file(dir / (tag + "/again/tables/deltas.csv")),
                      tag + ": deltas.csv differs");
            ++sessions;
        }
    v.detail = std::to_string(sessions) + " sessions";
    return v;
}

Verdict dual_path()
{
    Verdict v;
    TempDir dir("accd");
    double worst = 0.0;
    std::size_t sessions = 0;
    for (EmotionLabel e : kEmotions)
        for (StimulusKind k : {StimulusKind::Video, StimulusKind::Music}) {
            const std::string tag = std::string(to_string(e)) + "-" + std::string(to_string(k));
            const FixtureSession raw = synth_session(e, k, dir / (tag + "/raw"));
            const FixtureSession grid = synth_session(e, k, dir / (tag + "/grid"), true);
            const SessionAnalysis a = analyze_session(raw.session, directory_loader(raw.dir));
            const SessionAnalysis b = analyze_session(grid.session, directory_loader(grid.dir));
            v.require(a.series.size() == b.series.size(), tag + ": series count differs");
            for (std::size_t i = 0; i < std::min(a.series.size(), b.series.size()); ++i) {
                v.require(a.series[i].samples.size() == b.series[i].samples.size(), tag + ": sample count differs");
                for (std::size_t s = 0; s < std::min(a.series[i].samples.size(), b.series[i].samples.size()); ++s)
                    worst = std::max(worst, std::abs(a.series[i].samples[s].mean - b.series[i].samples[s].mean));
            }
            for (std::size_t r = 0; r < std::min(a.deltas.size(), b.deltas.size()); ++r)
                worst = std::max({worst, std::abs(a.deltas[r].start_mean - b.deltas[r].start_mean),
                                  std::abs(a.deltas[r].final_mean - b.deltas[r].final_mean)});
            ++sessions;
        }
    v.require(worst < 1e-6, "max difference " + std::to_string(worst));
    char buf[96];
    std::snprintf(buf, sizeof buf, "%zu sessions, max difference %.3g degC", sessions, worst);
    v.detail = buf;
    return v;
}

Verdict nose_divergence_report()
{
    Verdict v;
    const SessionTrends joy = endpoint_trends(endpoint_rows(EmotionLabel::Joy, StimulusKind::Music), {});
    const auto rows = endpoint_rows(EmotionLabel::Joy, StimulusKind::Music);
    const PhaseDeltaRow& nose = find_row(rows, RoiLabel::Nose, PhaseKind::Acclimatization);
    const PhaseDeltaRow& fh = find_row(rows, RoiLabel::Forehead, PhaseKind::Acclimatization);
    v.require(fmt(nose.start_mean) == "27.4" && fmt(nose.final_mean) == "27.6", "nose fixture row differs");
    v.require(fmt(fh.start_mean) == "34.0" && fmt(fh.final_mean) == "34.0", "forehead fixture row differs");
    bool flagged = false;
    for (const NoseDivergence& d : nose_divergence(joy))
        if (d.phase == PhaseKind::Acclimatization)
            flagged = d.diverges && d.nose == TrendLabel::Increase;
    for (const PhaseTrend& p : joy.phases)
        if (p.phase == PhaseKind::Acclimatization)
            for (const RoiTrend& r : p.rois)
                if (r.roi == RoiLabel::Forehead)
                    v.require(r.detail.label == TrendLabel::Stable, "forehead not stable");
    v.require(flagged, "nose divergence not flagged in acclimatization");
    v.detail = "nose " + fmt(nose.start_mean) + "->" + fmt(nose.final_mean) + " increase vs forehead "
               + fmt(fh.start_mean) + "->" + fmt(fh.final_mean) + " stable";
    return v;
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"radiometry round trip (10k random pairs, -20..250 degC)", radiometry_round_trip},
        {"anger-video fixture delta table", [] {
             return fixture_deltas(EmotionLabel::Anger, StimulusKind::Video, RoiLabel::Forehead,
                                   PhaseKind::Acclimatization);
         }},
        {"happiness-music fixture delta table", [] {
             return fixture_deltas(EmotionLabel::Happiness, StimulusKind::Music, RoiLabel::Nose, PhaseKind::Stimulus);
         }},
        {"endpoint trend comparison with flagged exemptions", trend_comparison},
        {"protocol property suite (10k random sequences)", protocol_properties},
        {"joy-video session summary row", session_summary_row},
        {"bundle round trip for every fixture session", bundle_round_trip},
        {"dual-path equivalence (celsius grids vs radiometric frames)", dual_path},
        {"joy-music nose divergence in acclimatization", nose_divergence_report},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v.failures.push_back(std::string("exception: ") + e.what());
        }
        const bool ok = v.failures.empty();
        failed += ok ? 0 : 1;
        std::cout << (ok ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first;
        if (!v.detail.empty())
            std::cout << ": " << v.detail;
        std::cout << "\n";
        for (const std::string& f : v.failures)
            std::cout << "     - " << f << "\n";
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
