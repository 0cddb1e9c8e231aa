#pragma once

#include "thermolab/time.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace thermolab {

inline constexpr double kKelvinOffset = 273.15;

/// Instrument characteristics of the reference uncooled microbolometer camera.
struct CameraSpec {
    double netd = 0.06;          ///< thermal sensitivity, degC
    double accuracy_abs = 2.0;   ///< degC
    double accuracy_rel = 0.02;  ///< fraction of reading
    double min_focus = 0.5;      ///< metres
    double range_min = -20.0;    ///< degC
    double range_max = 250.0;    ///< degC

    /// Stated accuracy for a reading: the larger of the absolute and relative bounds.
    double accuracy_at(double reading_c) const
    {
        return std::max(accuracy_abs, accuracy_rel * std::abs(reading_c));
    }
};

inline constexpr CameraSpec kReferenceCamera{};

/// Temperature/humidity probe used at environmental checkpoints.
struct ProbeSpec {
    double temp_accuracy = 0.5;     ///< degC
    double humidity_accuracy = 3.0; ///< percent RH
};

inline constexpr ProbeSpec kReferenceProbe{};

/// Single-band Planck calibration of the sensor plus the emissivity model.
///
/// Blackbody signal at temperature T (kelvin):
///     S(T) = r1 / (r2 * (exp(b / T) - f)) - o
/// and its inverse
///     T = b / ln(r1 / (r2 * (S + o)) + f).
struct RadiometricCalibration {
    double r1 = 16000.0;
    double r2 = 0.012;
    double b = 1400.0;                 ///< kelvin
    double o = -7000.0;                ///< counts
    double f = 1.0;
    double emissivity = 0.96;
    double reflected_temp_k = 293.15;

    /// Throws InputError naming the first violated constraint.
    void validate() const;

    bool operator==(const RadiometricCalibration&) const = default;
};

struct RadiometricFrame {
    int width = 0;
    int height = 0;
    std::vector<std::uint16_t> counts; ///< row-major
    RadiometricCalibration calibration;
    Instant timestamp{};
    std::int64_t sequence_index = 0;

    void validate() const;
    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }

    bool operator==(const RadiometricFrame&) const = default;
};

/// Per-pixel degC grid. Invalid pixels hold NaN.
struct TemperatureMap {
    int width = 0;
    int height = 0;
    std::vector<double> temps; ///< row-major
    Instant source_timestamp{};

    static TemperatureMap uniform(int width, int height, double value, Instant ts = {});

    void validate() const;
    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
    bool valid(std::size_t i) const { return std::isfinite(temps[i]); }
    double at(int x, int y) const { return temps[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)]; }
    double& at(int x, int y) { return temps[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)]; }
};

struct DecodedFrame {
    TemperatureMap map;
    std::size_t invalid_pixels = 0;
};

/// Signal of an ideal blackbody at `temp_k` under the calibration's Planck constants.
double blackbody_signal(double temp_k, const RadiometricCalibration& cal);

/// Removes the reflected-surroundings contribution from a raw reading:
///     S_obj = (S_raw - (1 - e) * S(T_refl)) / e
/// Throws InputError on non-finite input.
double object_signal(double raw, const RadiometricCalibration& cal);

/// Decodes one reading to degC. Returns nullopt where the Planck inverse is
/// undefined or the result falls outside the camera's measurable range.
std::optional<double> signal_to_temperature(double raw, const RadiometricCalibration& cal,
                                            const CameraSpec& camera = kReferenceCamera);

/// Raw reading the sensor produces for a surface at `temp_c`; exact inverse of
/// signal_to_temperature. Throws InputError outside the measurable range.
double forward_signal(double temp_c, const RadiometricCalibration& cal,
                      const CameraSpec& camera = kReferenceCamera);

/// Frame to temperature map; invalid pixels are NaN and counted.
/// Throws InputError when no pixel decodes.
DecodedFrame raw_to_temperature(const RadiometricFrame& frame, const CameraSpec& camera = kReferenceCamera);

/// Builds the 16-bit frame a camera would record for `field`, with optional
/// Gaussian temperature noise of standard deviation `noise_netd`. NaN pixels
/// are written as count 0.
RadiometricFrame synth_frame(const TemperatureMap& field, const RadiometricCalibration& cal,
                             double noise_netd = kReferenceCamera.netd, std::uint64_t seed = 0,
                             std::int64_t sequence_index = 0);

/// The field as the 16-bit sensor can represent it: every valid pixel moved to
/// the temperature of its nearest integer count. Frames synthesized from a
/// snapped field decode back to it exactly.
TemperatureMap snap_to_counts(const TemperatureMap& field, const RadiometricCalibration& cal);

} // namespace thermolab
