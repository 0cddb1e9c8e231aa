#include "thermolab/analysis.hpp"
#include "thermolab/bundle.hpp"
#include "thermolab/controller.hpp"
#include "thermolab/error.hpp"
#include "thermolab/render.hpp"
#include "thermolab/server.hpp"
#include "thermolab/synthetic.hpp"
#include "thermolab/terminal.hpp"
#include "thermolab/watch_folder.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace thermolab;

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_sigint(int)
{
    g_interrupted.store(true);
}

struct AnalyzeArgs {
    std::vector<std::string> inputs;
    std::string out = "analysis";
    std::string rois;
    double tau = TrendConfig{}.tau;
    double floor = TrendConfig{}.consensus_floor;
    std::string reference;
    bool no_renders = false;
};

AnalysisOptions analysis_options(const std::string& rois, double tau, double floor)
{
    AnalysisOptions o;
    if (!rois.empty())
        o.roi_override = read_roi_layout(rois);
    o.trend.tau = tau;
    o.trend.consensus_floor = floor;
    return o;
}

bool has_frames(const fs::path& dir)
{
    std::error_code ec;
    for (const auto& e : fs::recursive_directory_iterator(dir, ec)) {
        const auto ext = e.path().extension();
        if (e.is_regular_file() && (ext == ".raw" || ext == ".csv"))
            return true;
    }
    return false;
}

void write_session_outputs(const SessionAnalysis& a, const fs::path& dir, bool renders)
{
    write_text_file(dir / "deltas.csv", format_delta_csv(a.deltas));
    write_text_file(dir / "deltas_wide.csv", format_delta_table_wide(a.deltas));
    write_text_file(dir / "trends.csv", format_trend_csv(a.trends));
    write_text_file(dir / "analysis.json", analysis_json(a).dump(2) + "\n");
    if (!renders)
        return;
    std::vector<TemperatureMap> maps;
    for (const CaptureAnalysis& c : a.captures)
        maps.push_back(c.map);
    const RenderSpec spec = default_render_spec(maps);
    const auto ppms = render_sequence(maps, spec);
    for (std::size_t i = 0; i < ppms.size(); ++i)
        write_text_file(dir / "renders" / (sequence_name(i + 1) + ".ppm"), ppms[i]);
    std::vector<TemperatureMap> panels;
    for (const PanelPick& p : sequence_panels(a.session))
        panels.push_back(maps.at(p.capture));
    write_text_file(dir / "renders" / "sequence.ppm", render_filmstrip(panels, spec));
}

int cmd_analyze(const AnalyzeArgs& args)
{
    const AnalysisOptions opts = analysis_options(args.rois, args.tau, args.floor);
    opts.trend.validate();
    const fs::path out(args.out);
    std::vector<SessionTrends> video, music;
    std::vector<PhaseDeltaRow> endpoint_rows;

    for (const std::string& input : args.inputs) {
        const fs::path p(input);
        if (!fs::exists(p))
            throw InputError(input + ": no such file or directory");
        std::optional<SessionAnalysis> a;
        if (fs::is_regular_file(p)) {
            const auto rows = parse_delta_csv(read_text_file(p), p.string());
            if (rows.empty())
                throw InputError(input + ": no start/final rows");
            endpoint_rows.insert(endpoint_rows.end(), rows.begin(), rows.end());
            continue;
        }
        if (fs::exists(p / "manifest.json")) {
            ImportResult r = import_bundle(p);
            for (const std::string& w : r.warnings)
                std::cerr << "warning: " << input << ": " << w << "\n";
            a = analyze_session(r.session,
                                [src = r.source()](const Capture& c, std::size_t seq) {
                                    return load_captured_frame(src.frame_path(c, seq));
                                },
                                opts);
        } else if (fs::exists(p / "log" / "events.log")) {
            a = analyze_session(replay(read_event_log(p / "log" / "events.log")), directory_loader(p), opts);
        } else if (!has_frames(p)) {
            throw InputError(input + ": no frames found");
        } else {
            throw InputError(input + ": frames without log/events.log; captures cannot be assigned to phases");
        }
        const fs::path dir = out / a->session.id;
        write_session_outputs(*a, dir, !args.no_renders);
        std::cout << a->session.id << ": " << a->captures.size() << " captures -> " << dir.string() << "\n";
        for (const NoseDivergence& n : a->nose)
            if (n.diverges)
                std::cout << "  nose diverges in " << to_string(n.phase) << " (" << to_string(n.nose) << ")\n";
        (a->session.stimulus.kind == StimulusKind::Video ? video : music).push_back(a->trends);
    }

    if (!endpoint_rows.empty()) {
        for (SessionTrends& t : endpoint_trends_by_session(endpoint_rows, opts.trend)) {
            auto& side = t.stimulus == StimulusKind::Video ? video : music;
            const bool dup = std::any_of(side.begin(), side.end(), [&](const SessionTrends& s) { return s.emotion == t.emotion; });
            if (dup) {
                std::cerr << "warning: endpoint rows for " << to_string(t.emotion) << " " << to_string(t.stimulus)
                          << " ignored; a full series is available\n";
                continue;
            }
            write_text_file(out / "endpoints" / (std::string(to_string(t.emotion)) + "-" + std::string(to_string(t.stimulus)) + "-trends.csv"),
                            format_trend_csv(t));
            side.push_back(std::move(t));
        }
        std::cout << endpoint_rows.size() << " start/final rows read\n";
    }

    const auto paired = [](std::vector<SessionTrends>& side, const std::vector<SessionTrends>& other) {
        std::vector<SessionTrends> kept;
        for (SessionTrends& t : side) {
            if (std::any_of(other.begin(), other.end(), [&](const SessionTrends& o) { return o.emotion == t.emotion; }))
                kept.push_back(std::move(t));
            else
                std::cerr << "warning: " << to_string(t.emotion) << " " << to_string(t.stimulus)
                          << " has no counterpart; left out of the comparison\n";
        }
        return kept;
    };
    video = paired(video, music);
    music = paired(music, video);
    if (!video.empty() && !music.empty()) {
        const StimulusComparison cmp = compare_stimuli(video, music);
        write_text_file(out / "comparison.csv", format_comparison_csv(cmp));
        write_text_file(out / "comparison.json", to_json_value(cmp).dump(2) + "\n");
        std::cout << "comparison: " << cmp.rows.size() << " rows -> " << (out / "comparison.csv").string() << "\n";
        if (!args.reference.empty()) {
            const ReferenceTable ref = parse_reference_table(read_text_file(args.reference), args.reference);
            const auto checks = check_against_reference(cmp, ref);
            std::string csv;
            for (const std::string& a : ref.assumptions)
                csv += "# assumption: " + a + "\n";
            csv += "emotion,aspect,stimulus,expected,computed,basis,status,note\n";
            std::size_t counts[3] = {0, 0, 0};
            for (const ReferenceCheck& c : checks) {
                ++counts[static_cast<int>(c.status)];
                csv += std::string(to_string(c.expected.emotion)) + "," + c.expected.aspect + ","
                       + std::string(to_string(c.expected.stimulus)) + "," + std::string(to_string(c.expected.label)) + ","
                       + std::string(to_string(c.computed)) + "," + std::string(to_string(c.basis)) + ","
                       + std::string(to_string(c.status)) + "," + c.note + "\n";
            }
            write_text_file(out / "reference_check.csv", csv);
            std::cout << "reference: " << counts[0] << " match, " << counts[1] << " mismatch, " << counts[2]
                      << " exempt\n";
        }
    } else if (!args.reference.empty()) {
        throw InputError("--reference needs both video and music inputs");
    }
    return kExitOk;
}

int cmd_export(const std::string& session_dir, const std::string& dest, const std::string& rois, double tau,
               double floor, bool with_maps, std::optional<double> scale_min, std::optional<double> scale_max)
{
    const fs::path dir(session_dir);
    ExportOptions opts;
    opts.analysis = analysis_options(rois, tau, floor);
    opts.include_maps = with_maps;
    if (scale_min || scale_max) {
        if (!scale_min || !scale_max)
            throw InputError("--scale-min and --scale-max go together");
        RenderSpec spec;
        spec.scale_min = *scale_min;
        spec.scale_max = *scale_max;
        opts.render = spec;
    }
    const ExportResult r = export_bundle(directory_source(read_event_log(dir / "log" / "events.log"), dir), dest, opts);
    std::cout << "exported " << r.frame_count << " frames, " << r.render_count << " renders, "
              << r.manifest.at("files").size() << " files -> " << dest << "\n";
    return kExitOk;
}

int cmd_import(const std::string& bundle, const std::string& out)
{
    const ImportResult r = import_bundle(bundle);
    std::cout << "bundle " << bundle << ": session " << r.session.id << " (" << to_string(r.session.status) << ", "
              << r.events.size() << " events, " << r.analysis.captures.size() << " captures) verified\n";
    for (const std::string& w : r.warnings)
        std::cout << "warning: " << w << "\n";
    if (!out.empty()) {
        const fs::path dir(out);
        write_event_log(dir / "log" / "events.log", r.events);
        write_text_file(dir / "deltas.csv", format_delta_csv(r.analysis.deltas));
        write_text_file(dir / "analysis.json", analysis_json(r.analysis).dump(2) + "\n");
    }
    return kExitOk;
}

struct RunArgs {
    std::string store = "sessions";
    std::string config;
    std::string session;
    std::string script;
    std::string simulated;
    bool echo = false;
    bool watch = false;
    int watch_ms = 500;
};

int cmd_run(const RunArgs& args)
{
    std::shared_ptr<SimulatedClock> sim;
    std::shared_ptr<const Clock> clock;
    if (!args.simulated.empty()) {
        sim = std::make_shared<SimulatedClock>(parse_iso8601(args.simulated));
        clock = sim;
    } else {
        clock = std::make_shared<SystemClock>();
    }
    SessionStore store(args.store, clock);
    std::string id = args.session;
    if (id.empty()) {
        if (args.config.empty())
            throw InputError("run needs --config (new session) or --session (resume)");
        CommandRequest start;
        start.verb = CommandVerb::StartSession;
        start.request_id = "term-start";
        try {
            start.payload = Json::parse(read_text_file(args.config));
        } catch (const nlohmann::json::exception& e) {
            throw InputError(args.config + ": " + e.what());
        }
        const CommandResult r = store.submit(start);
        if (!r.ok()) {
            std::cerr << "error " << to_string(*r.error) << ": " << r.message << "\n";
            return *r.error == ErrorCode::ProtocolConflict ? kExitProtocolError : kExitInputError;
        }
        id = r.session_id;
        std::cout << "session " << id << " started\n";
    }
    const auto controller = store.find(id);
    if (!controller)
        throw InputError("no session '" + id + "' in " + args.store);

    std::unique_ptr<WatchFolder> watcher;
    if (args.watch) {
        watcher = std::make_unique<WatchFolder>(controller);
        watcher->start(Millis{args.watch_ms});
    }

    std::signal(SIGINT, on_sigint);
    TerminalOptions topts;
    topts.simulated_clock = sim;
    topts.echo = args.echo;
    topts.interrupted = &g_interrupted;
    TerminalOutcome outcome;
    if (!args.script.empty()) {
        std::ifstream in(args.script);
        if (!in)
            throw InputError("cannot open " + args.script);
        outcome = run_terminal(*controller, in, std::cout, topts);
    } else {
        outcome = run_terminal(*controller, std::cin, std::cout, topts);
    }
    if (watcher)
        watcher->stop();
    if (outcome.status == SessionStatus::Completed)
        return kExitOk;
    if (outcome.status == SessionStatus::Aborted || outcome.rejected > 0)
        return kExitProtocolError;
    return kExitOk;
}

int cmd_serve(const std::string& store_dir, const std::string& host, int port, const std::string& simulated)
{
    ServiceOptions opts;
    std::shared_ptr<const Clock> clock;
    if (!simulated.empty()) {
        opts.simulated_clock = std::make_shared<SimulatedClock>(parse_iso8601(simulated));
        clock = opts.simulated_clock;
    } else {
        clock = std::make_shared<SystemClock>();
    }
    auto store = std::make_shared<SessionStore>(store_dir, clock);
    std::cout << "serving " << store_dir << " on http://" << host << ":" << port << std::endl;
    if (!serve(store, host, port, opts)) {
        std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
        return kExitInputError;
    }
    return kExitOk;
}

int cmd_synth(const std::string& tables_dir, const std::string& out, const std::vector<std::string>& which,
              bool celsius, double noise, std::optional<std::uint64_t> seed)
{
    const fs::path t(tables_dir);
    FixtureTables tables;
    for (const char* name : {"video_endpoints.csv", "music_endpoints.csv"}) {
        const auto rows = parse_delta_csv(read_text_file(t / name), (t / name).string());
        tables.endpoints.insert(tables.endpoints.end(), rows.begin(), rows.end());
    }
    tables.env = parse_env_csv(read_text_file(t / "env_readings.csv"), (t / "env_readings.csv").string());
    tables.sessions = parse_session_log_csv(read_text_file(t / "session_log.csv"), (t / "session_log.csv").string());

    std::vector<std::pair<EmotionLabel, StimulusKind>> pairs;
    if (which.empty()) {
        for (const SessionLogRow& r : tables.sessions)
            pairs.emplace_back(r.emotion, r.stimulus);
    } else {
        for (const std::string& w : which) {
            const auto dash = w.find('-');
            if (dash == std::string::npos)
                throw InputError("session '" + w + "' is not <emotion>-<stimulus>");
            pairs.emplace_back(parse_emotion(w.substr(0, dash)), parse_stimulus_kind(w.substr(dash + 1)));
        }
    }
    for (const auto& [emotion, stimulus] : pairs) {
        FixtureSpec spec = fixture_spec(tables, emotion, stimulus);
        spec.celsius_grid = celsius;
        spec.noise_netd = noise;
        if (seed)
            spec.seed = *seed;
        const fs::path dir = fs::path(out) / (std::string(to_string(emotion)) + "-" + std::string(to_string(stimulus)));
        const FixtureSession s = write_fixture_session(spec, dir);
        std::cout << s.session.id << " -> " << dir.string() << " (" << s.session.total_captures() << " captures)\n";
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"thermolab: facial thermography sessions, analysis and learning bundles"};
    app.require_subcommand(1);

    AnalyzeArgs analyze;
    auto* a = app.add_subcommand("analyze", "analyze session directories, bundles or start/final CSV files");
    a->add_option("inputs", analyze.inputs, "session directories, bundle directories or start/final CSV files")->required();
    a->add_option("-o,--out", analyze.out, "output directory");
    a->add_option("--rois", analyze.rois, "ROI layout file (JSON)");
    a->add_option("--tau", analyze.tau, "trend threshold in degC");
    a->add_option("--consensus-floor", analyze.floor, "per-ROI vote threshold in degC");
    a->add_option("--reference", analyze.reference, "reference label table to check the comparison against");
    a->add_flag("--no-renders", analyze.no_renders, "skip PPM renders");

    std::string exp_dir, exp_out, exp_rois;
    double exp_tau = TrendConfig{}.tau, exp_floor = TrendConfig{}.consensus_floor;
    bool exp_maps = false;
    std::optional<double> exp_min, exp_max;
    auto* e = app.add_subcommand("export", "export a completed session as a learning bundle");
    e->add_option("session", exp_dir, "session directory")->required();
    e->add_option("-o,--out", exp_out, "bundle directory (must not exist or be empty)")->required();
    e->add_option("--rois", exp_rois, "ROI layout file (JSON)");
    e->add_option("--tau", exp_tau, "trend threshold in degC");
    e->add_option("--consensus-floor", exp_floor, "per-ROI vote threshold in degC");
    e->add_flag("--with-maps", exp_maps, "include decoded degC grids");
    e->add_option("--scale-min", exp_min, "render scale minimum in degC");
    e->add_option("--scale-max", exp_max, "render scale maximum in degC");

    std::string imp_dir, imp_out;
    auto* i = app.add_subcommand("import", "verify a bundle and recompute its analysis");
    i->add_option("bundle", imp_dir, "bundle directory")->required();
    i->add_option("-o,--out", imp_out, "write the replayed log and recomputed tables here");

    RunArgs run;
    auto* r = app.add_subcommand("run", "conduct a session from the terminal");
    r->add_option("--store", run.store, "session store directory");
    r->add_option("--config", run.config, "session start parameters (JSON)");
    r->add_option("--session", run.session, "resume this session id");
    r->add_option("--script", run.script, "read commands from a file instead of stdin");
    r->add_option("--simulated-clock", run.simulated, "start a simulated clock at this UTC instant");
    r->add_flag("--echo", run.echo, "echo commands");
    r->add_flag("--watch", run.watch, "auto-confirm new frame files in the session's frames/ directory");
    r->add_option("--watch-interval-ms", run.watch_ms, "watch-folder poll interval");

    std::string srv_store = "sessions", srv_host = "127.0.0.1", srv_sim;
    int srv_port = 8765;
    auto* s = app.add_subcommand("serve", "run the local service for the operator console");
    s->add_option("--store", srv_store, "session store directory");
    s->add_option("--host", srv_host, "bind address");
    s->add_option("--port", srv_port, "port");
    s->add_option("--simulated-clock", srv_sim, "start a simulated clock at this UTC instant");

    std::string syn_tables, syn_out;
    std::vector<std::string> syn_which;
    bool syn_celsius = false;
    double syn_noise = 0.0;
    std::optional<std::uint64_t> syn_seed;
    auto* y = app.add_subcommand("synth", "write synthetic sessions from start/final, environment and session-log tables");
    y->add_option("--tables", syn_tables, "directory with video_endpoints.csv, music_endpoints.csv, env_readings.csv, session_log.csv")->required();
    y->add_option("-o,--out", syn_out, "output directory")->required();
    y->add_option("--session", syn_which, "<emotion>-<stimulus>, repeatable (default: all)");
    y->add_flag("--celsius-grid", syn_celsius, "write degC grids instead of radiometric frames");
    y->add_option("--noise", syn_noise, "Gaussian temperature noise in degC");
    y->add_option("--seed", syn_seed, "noise seed (default: derived per session)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? kExitOk : kExitInputError;
    }

    try {
        if (*a)
            return cmd_analyze(analyze);
        if (*e)
            return cmd_export(exp_dir, exp_out, exp_rois, exp_tau, exp_floor, exp_maps, exp_min, exp_max);
        if (*i)
            return cmd_import(imp_dir, imp_out);
        if (*r)
            return cmd_run(run);
        if (*s)
            return cmd_serve(srv_store, srv_host, srv_port, srv_sim);
        if (*y)
            return cmd_synth(syn_tables, syn_out, syn_which, syn_celsius, syn_noise, syn_seed);
    } catch (const ProtocolError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitProtocolError;
    } catch (const Error& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitInputError;
    }
    return kExitOk;
}
