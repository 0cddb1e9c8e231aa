#pragma once

#include "thermolab/protocol.hpp"
#include "thermolab/trend.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

namespace thermolab {

// Synthetic sessions whose ROI means follow linear ramps between given
// per-phase start/final values. Used for fixtures, demos and tests.

struct EnvRow {
    EmotionLabel emotion = EmotionLabel::Joy;
    StimulusKind stimulus = StimulusKind::Video;
    EnvCheckpoint checkpoint = EnvCheckpoint::StartAcclimatization;
    double temp_c = 0.0;
    double humidity_pct = 0.0;
};

/// emotion,stimulus,checkpoint,temp_c,humidity_pct
std::vector<EnvRow> parse_env_csv(std::string_view text, std::string_view origin);

struct SessionLogRow {
    std::string date; ///< YYYY-MM-DD
    EmotionLabel emotion = EmotionLabel::Joy;
    StimulusKind stimulus = StimulusKind::Video;
    std::size_t stimulus_images = 0;
    std::size_t total_images = 0;
    Millis stimulus_duration{0};
};

/// date,emotion,stimulus,stimulus_images,total_images,stimulus_duration
/// with durations written as 8'32''.
std::vector<SessionLogRow> parse_session_log_csv(std::string_view text, std::string_view origin);

/// Parses 8'32'' (minutes and seconds).
Millis parse_minutes_seconds(std::string_view text);

struct FixtureTimeline {
    std::size_t acclim_captures = 11;
    std::size_t stimulus_captures = 10;
    Millis stimulus_duration{480'000};
    std::size_t response_captures = 11;
};

/// Splits the non-stimulus images of a log row between acclimatization
/// (rounded up) and response.
FixtureTimeline timeline_from_log(const SessionLogRow& row);

struct FixtureSpec {
    EmotionLabel emotion = EmotionLabel::Joy;
    Stimulus stimulus;
    Instant start{};
    FixtureTimeline timeline;
    std::vector<PhaseDeltaRow> endpoints; ///< 4 ROIs x 3 phases
    std::array<EnvRecorded, 4> env{};     ///< checkpoint order
    int width = 160;
    int height = 120;
    RadiometricCalibration calibration;
    double background_c = 28.0;
    double face_c = 32.5;
    double texture_c = 0.2; ///< zero-mean checkerboard amplitude inside each ROI
    double noise_netd = 0.0;
    std::uint64_t seed = 1;
    bool celsius_grid = false; ///< write degC grids instead of radiometric frames
};

/// Instants of every capture of the fixture, per phase.
std::array<std::vector<Instant>, 3> fixture_capture_times(const FixtureSpec& spec);

/// Temperature field of one capture, snapped to the 16-bit count lattice.
/// `fraction` runs from 0 at the first capture of the phase to 1 at the last.
TemperatureMap fixture_field(const FixtureSpec& spec, PhaseKind phase, double fraction);

struct FixtureSession {
    std::filesystem::path dir;
    std::vector<Event> events;
    Session session;
};

/// Writes frames/NNNN.raw+.meta (or .csv) and log/events.log under `dir` and
/// returns the event log of a completed session.
FixtureSession write_fixture_session(const FixtureSpec& spec, const std::filesystem::path& dir);

struct FixtureTables {
    std::vector<PhaseDeltaRow> endpoints;
    std::vector<EnvRow> env;
    std::vector<SessionLogRow> sessions;
};

/// Spec for one (emotion, stimulus) pair from the three tables. Sessions on
/// the same date start three hours apart from 10:00 UTC.
FixtureSpec fixture_spec(const FixtureTables& tables, EmotionLabel emotion, StimulusKind stimulus);

} // namespace thermolab
