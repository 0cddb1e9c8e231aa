#pragma once

#include "thermolab/analysis.hpp"
#include "thermolab/render.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace thermolab {

// Bundle layout (all paths relative to the bundle root):
//   manifest.json
//   frames/NNNN.raw + frames/NNNN.meta   radiometric captures
//   frames/NNNN.csv                      pre-calibrated degC captures
//   maps/NNNN.csv                        optional decoded degC grids
//   renders/NNNN.ppm, renders/sequence.ppm
//   tables/deltas.csv, tables/comparison.csv, tables/analysis.json
//   log/events.log
// NNNN is the 1-based capture sequence across the session.

inline constexpr std::string_view kBundleFormat = "thermolab-bundle";
inline constexpr int kBundleFormatVersion = 1;

/// Where the frame file of each capture lives.
using FramePathResolver = std::function<std::filesystem::path(const Capture& capture, std::size_t sequence)>;

struct SessionSource {
    std::vector<Event> events;
    FramePathResolver frame_path;
};

/// Frames resolved by frame_ref relative to `base_dir`.
SessionSource directory_source(std::vector<Event> events, std::filesystem::path base_dir);

struct ExportOptions {
    AnalysisOptions analysis;
    std::optional<RenderSpec> render; ///< default: session-wide min/max with 0.5 degC margins
    bool include_maps = false;
};

struct ExportResult {
    std::filesystem::path root;
    Json manifest;
    std::size_t frame_count = 0;
    std::size_t render_count = 0;
    SessionAnalysis analysis;
};

/// Writes the bundle into `destination`, which must not exist or be empty.
/// Output is a pure function of the inputs. Throws ProtocolError for an
/// incomplete session and InputError when a frame is unreadable or the
/// destination cannot be written.
ExportResult export_bundle(const SessionSource& source, const std::filesystem::path& destination,
                           const ExportOptions& opts = {});

struct ImportResult {
    std::filesystem::path root;
    Json manifest;
    std::vector<Event> events;
    Session session;
    SessionAnalysis analysis;
    std::vector<std::string> warnings; ///< stored artifacts that differ from recomputation

    /// Source reading frames from the bundle, for re-export.
    SessionSource source() const;
    /// Options reproducing the original export.
    ExportOptions export_options() const;
};

/// Verifies every digest, replays the log, checks it against the manifest and
/// recomputes the analysis. Throws IntegrityError on a missing or altered
/// file and InputError when log and manifest disagree.
ImportResult import_bundle(const std::filesystem::path& root);

/// Four-digit capture sequence ("0007").
std::string sequence_name(std::size_t sequence);

} // namespace thermolab
