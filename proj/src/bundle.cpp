#include "thermolab/bundle.hpp"

#include "thermolab/digest.hpp"
#include "thermolab/error.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

namespace thermolab {

namespace fs = std::filesystem;

namespace {

struct FileSet {
    std::map<std::string, std::string> contents; ///< bundle path -> bytes, sorted by path

    void add(std::string path, std::string bytes) { contents[std::move(path)] = std::move(bytes); }
};

std::string frame_extension(const fs::path& p)
{
    return is_celsius_grid_path(p) ? ".csv" : ".raw";
}

Json file_entries(const FileSet& files)
{
    Json out = Json::array();
    for (const auto& [path, bytes] : files.contents)
        out.push_back({{"path", path}, {"sha256", sha256_hex(bytes)}, {"bytes", bytes.size()}});
    return out;
}

bool safe_relative(const std::string& p)
{
    const fs::path path(p);
    if (p.empty() || path.is_absolute() || path.has_root_name())
        return false;
    for (const auto& part : path)
        if (part == "..")
            return false;
    return true;
}

std::vector<std::string> bundle_assumptions(const SessionAnalysis& a)
{
    std::vector<std::string> out;
    out.push_back("analysis runs on decoded degC values; renders are presentation only");
    out.push_back("start/final values are the first/last capture of each phase; tables round to 0.1 degC");
    out.push_back("trend threshold tau " + Json(a.trend_config.tau).dump() + " degC, consensus floor "
                  + Json(a.trend_config.consensus_floor).dump() + " degC");
    return out;
}

// Recomputable from frames and log, so tampering is reported rather than fatal.
bool derived_artifact(const std::string& path)
{
    return path.rfind("tables/", 0) == 0 || path.rfind("renders/", 0) == 0 || path.rfind("maps/", 0) == 0;
}

struct Tables {
    std::string deltas;
    std::string comparison;
    std::string analysis;
};

Tables make_tables(const SessionAnalysis& a)
{
    return {format_delta_csv(a.deltas), format_trend_csv(a.trends), analysis_json(a).dump(2) + "\n"};
}

} // namespace

std::string sequence_name(std::size_t sequence)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04zu", sequence);
    return buf;
}

SessionSource directory_source(std::vector<Event> events, fs::path base_dir)
{
    SessionSource s;
    s.events = std::move(events);
    s.frame_path = [base = std::move(base_dir)](const Capture& c, std::size_t) {
        const fs::path ref(c.frame_ref);
        return ref.is_absolute() ? ref : base / ref;
    };
    return s;
}

ExportResult export_bundle(const SessionSource& source, const fs::path& destination, const ExportOptions& opts)
{
    const Session session = replay(source.events);
    if (session.status != SessionStatus::Completed)
        throw ProtocolError("only completed sessions can be exported (status is "
                            + std::string(to_string(session.status)) + ")");
    std::error_code ec;
    if (fs::exists(destination, ec) && !(fs::is_directory(destination, ec) && fs::is_empty(destination, ec)))
        throw InputError("destination " + destination.string() + " exists and is not an empty directory");

    const FrameLoader loader = [&](const Capture& c, std::size_t seq) { return load_captured_frame(source.frame_path(c, seq)); };

    ExportResult result;
    result.root = destination;
    result.analysis = analyze_session(session, loader, opts.analysis);
    const SessionAnalysis& a = result.analysis;

    FileSet files;
    Json captures = Json::array();
    std::vector<TemperatureMap> maps;
    maps.reserve(a.captures.size());
    for (const CaptureAnalysis& ca : a.captures) {
        const fs::path src = source.frame_path(ca.capture, ca.sequence);
        const std::string name = sequence_name(ca.sequence);
        const std::string frame = "frames/" + name + frame_extension(src);
        files.add(frame, read_text_file(src));
        Json entry{{"sequence", ca.sequence},
                   {"phase", to_string(ca.phase)},
                   {"role", to_string(ca.capture.role)},
                   {"at", format_iso8601(ca.capture.at)},
                   {"frame_ref", ca.capture.frame_ref},
                   {"frame", frame}};
        if (!is_celsius_grid_path(src)) {
            const std::string meta = "frames/" + name + ".meta";
            files.add(meta, read_text_file(meta_path_for(src)));
            entry["meta"] = meta;
        }
        if (opts.include_maps) {
            const std::string map = "maps/" + name + ".csv";
            files.add(map, encode_celsius_grid(ca.map));
            entry["map"] = map;
        }
        entry["render"] = "renders/" + name + ".ppm";
        captures.push_back(std::move(entry));
        maps.push_back(ca.map);
    }

    const RenderSpec spec = opts.render ? *opts.render : default_render_spec(maps);
    spec.validate();
    const auto renders = render_sequence(maps, spec);
    for (std::size_t i = 0; i < renders.size(); ++i)
        files.add("renders/" + sequence_name(i + 1) + ".ppm", renders[i]);

    Json panels = Json::array();
    const auto picks = sequence_panels(session);
    std::vector<TemperatureMap> panel_maps;
    for (const PanelPick& p : picks) {
        panel_maps.push_back(maps.at(p.capture));
        panels.push_back({{"caption", p.caption}, {"sequence", p.capture + 1}});
    }
    files.add("renders/sequence.ppm", render_filmstrip(panel_maps, spec));

    const Tables tables = make_tables(a);
    files.add("tables/deltas.csv", tables.deltas);
    files.add("tables/comparison.csv", tables.comparison);
    files.add("tables/analysis.json", tables.analysis);
    files.add("log/events.log", serialize_events(source.events));

    result.manifest = Json{{"format", kBundleFormat},
                           {"format_version", kBundleFormatVersion},
                           {"exported_at", format_iso8601(source.events.back().at)},
                           {"session", session},
                           {"summary", session_summary(session)},
                           {"rois", a.rois},
                           {"trend_config", a.trend_config},
                           {"render_spec", spec},
                           {"sequence_panels", panels},
                           {"captures", captures},
                           {"files", file_entries(files)},
                           {"assumptions", bundle_assumptions(a)}};

    for (const auto& [path, bytes] : files.contents)
        write_text_file(destination / path, bytes);
    write_text_file(destination / "manifest.json", result.manifest.dump(2) + "\n");
    result.frame_count = a.captures.size();
    result.render_count = renders.size();
    return result;
}

SessionSource ImportResult::source() const
{
    std::map<std::size_t, fs::path> frames;
    for (const Json& c : manifest.at("captures"))
        frames[c.at("sequence").get<std::size_t>()] = root / c.at("frame").get<std::string>();
    SessionSource s;
    s.events = events;
    s.frame_path = [frames = std::move(frames)](const Capture& c, std::size_t seq) {
        const auto it = frames.find(seq);
        if (it == frames.end())
            throw InputError("bundle has no frame for capture " + sequence_name(seq) + " (" + c.frame_ref + ")");
        return it->second;
    };
    return s;
}

ExportOptions ImportResult::export_options() const
{
    ExportOptions o;
    o.analysis.roi_override = manifest.at("rois").get<RoiSet>();
    o.analysis.trend = manifest.at("trend_config").get<TrendConfig>();
    o.render = manifest.at("render_spec").get<RenderSpec>();
    for (const Json& c : manifest.at("captures"))
        if (c.contains("map"))
            o.include_maps = true;
    return o;
}

ImportResult import_bundle(const fs::path& root)
{
    ImportResult r;
    r.root = root;
    const fs::path manifest_path = root / "manifest.json";
    if (!fs::exists(manifest_path))
        throw InputError("no manifest.json in " + root.string());
    try {
        r.manifest = Json::parse(read_text_file(manifest_path));
    } catch (const nlohmann::json::exception& e) {
        throw InputError(manifest_path.string() + ": " + e.what());
    }
    if (r.manifest.value("format", "") != kBundleFormat)
        throw InputError(manifest_path.string() + ": not a thermolab bundle");

    try {
        // Which capture a frame file belongs to, for diagnostics.
        std::map<std::string, std::size_t> frame_owner;
        for (const Json& c : r.manifest.at("captures")) {
            const auto seq = c.at("sequence").get<std::size_t>();
            for (const char* key : {"frame", "meta", "map"})
                if (c.contains(key))
                    frame_owner[c.at(key).get<std::string>()] = seq;
        }
        std::map<std::string, bool> listed;
        for (const Json& f : r.manifest.at("files")) {
            const auto path = f.at("path").get<std::string>();
            if (!safe_relative(path))
                throw IntegrityError("manifest lists a path outside the bundle: " + path);
            listed[path] = true;
            const fs::path full = root / path;
            if (!fs::exists(full)) {
                const auto owner = frame_owner.find(path);
                if (owner != frame_owner.end())
                    throw IntegrityError("bundle is missing the frame of capture " + sequence_name(owner->second) + " ("
                                         + path + ")");
                throw IntegrityError("bundle is missing " + path);
            }
            if (sha256_file(full) != f.at("sha256").get<std::string>()) {
                if (!derived_artifact(path))
                    throw IntegrityError("digest mismatch for " + path);
                r.warnings.push_back("digest mismatch for " + path + " (derived artifact, checked by recomputation)");
            }
        }
        for (const auto& [path, seq] : frame_owner)
            if (!listed.count(path))
                throw IntegrityError("capture " + sequence_name(seq) + " references unlisted file " + path);
        if (!listed.count("log/events.log"))
            throw IntegrityError("bundle has no event log");

        r.events = read_event_log(root / "log/events.log");
        r.session = replay(r.events);
        if (Json(r.session) != r.manifest.at("session"))
            throw InputError("event log and manifest disagree on the session record");

        const SessionSource src = r.source();
        const FrameLoader loader = [&](const Capture& c, std::size_t seq) {
            return load_captured_frame(src.frame_path(c, seq));
        };
        const ExportOptions opts = r.export_options();
        r.analysis = analyze_session(r.session, loader, opts.analysis);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(manifest_path.string() + ": " + e.what());
    }

    const Tables tables = make_tables(r.analysis);
    const std::pair<const char*, const std::string*> stored[] = {{"tables/deltas.csv", &tables.deltas},
                                                                 {"tables/comparison.csv", &tables.comparison},
                                                                 {"tables/analysis.json", &tables.analysis}};
    for (const auto& [path, recomputed] : stored) {
        const fs::path full = root / path;
        if (!fs::exists(full))
            r.warnings.push_back(std::string(path) + " is missing");
        else if (read_text_file(full) != *recomputed)
            r.warnings.push_back(std::string(path) + " differs from the recomputed analysis");
    }
    const RenderSpec spec = r.manifest.at("render_spec").get<RenderSpec>();
    for (const Json& c : r.manifest.at("captures")) {
        const fs::path full = root / c.at("render").get<std::string>();
        if (!fs::exists(full))
            continue;
        const PpmImage img = parse_ppm(read_text_file(full));
        if (!img.spec || *img.spec != spec)
            r.warnings.push_back(c.at("render").get<std::string>() + " does not carry the session render scale");
    }
    return r;
}

} // namespace thermolab
