#include "thermolab/radiometry.hpp"

#include "thermolab/error.hpp"

#include <random>
#include <string>

namespace thermolab {

namespace {

// Decoded values this close outside the measurable range still count as valid;
// they arise from rounding at the range limits.
constexpr double kRangeSlack = 1e-7;

constexpr double kMinReflectedK = 233.15;
constexpr double kMaxReflectedK = 373.15;

} // namespace

void RadiometricCalibration::validate() const
{
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(r1) || !finite(r2) || !finite(b) || !finite(o) || !finite(f) || !finite(emissivity)
        || !finite(reflected_temp_k))
        throw InputError("calibration contains a non-finite constant");
    if (!(emissivity > 0.0 && emissivity <= 1.0))
        throw InputError("calibration emissivity " + std::to_string(emissivity) + " outside (0, 1]");
    if (!(b > 0.0))
        throw InputError("calibration b must be > 0");
    if (!(r2 > 0.0))
        throw InputError("calibration r2 must be > 0");
    if (!(r1 > 0.0))
        throw InputError("calibration r1 must be > 0");
    if (!(f >= 1.0))
        throw InputError("calibration f must be >= 1");
    if (reflected_temp_k < kMinReflectedK || reflected_temp_k > kMaxReflectedK)
        throw InputError("reflected temperature " + std::to_string(reflected_temp_k)
                         + " K outside [233.15, 373.15] K");
}

void RadiometricFrame::validate() const
{
    if (width < 1 || height < 1)
        throw InputError("frame dimensions must be >= 1x1");
    if (counts.size() != pixel_count())
        throw InputError("frame has " + std::to_string(counts.size()) + " counts, expected "
                         + std::to_string(pixel_count()));
    calibration.validate();
}

TemperatureMap TemperatureMap::uniform(int width, int height, double value, Instant ts)
{
    TemperatureMap map;
    map.width = width;
    map.height = height;
    map.temps.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), value);
    map.source_timestamp = ts;
    return map;
}

void TemperatureMap::validate() const
{
    if (width < 1 || height < 1)
        throw InputError("temperature map dimensions must be >= 1x1");
    if (temps.size() != pixel_count())
        throw InputError("temperature map has " + std::to_string(temps.size()) + " values, expected "
                         + std::to_string(pixel_count()));
    for (std::size_t i = 0; i < temps.size(); ++i) {
        const double t = temps[i];
        if (std::isfinite(t)
            && (t < kReferenceCamera.range_min - kRangeSlack || t > kReferenceCamera.range_max + kRangeSlack))
            throw InputError("temperature " + std::to_string(t) + " at pixel " + std::to_string(i)
                             + " outside measurable range [-20, 250] degC");
    }
}

double blackbody_signal(double temp_k, const RadiometricCalibration& cal)
{
    return cal.r1 / (cal.r2 * (std::exp(cal.b / temp_k) - cal.f)) - cal.o;
}

double object_signal(double raw, const RadiometricCalibration& cal)
{
    if (!std::isfinite(raw))
        throw InputError("non-finite raw signal");
    if (cal.emissivity == 1.0)
        return raw;
    const double reflected = blackbody_signal(cal.reflected_temp_k, cal);
    return (raw - (1.0 - cal.emissivity) * reflected) / cal.emissivity;
}

std::optional<double> signal_to_temperature(double raw, const RadiometricCalibration& cal, const CameraSpec& camera)
{
    const double s = object_signal(raw, cal) + cal.o;
    if (!(s > 0.0))
        return std::nullopt;
    const double arg = cal.r1 / (cal.r2 * s) + cal.f;
    if (!(arg > 0.0))
        return std::nullopt;
    const double ln = std::log(arg);
    if (!(ln > 0.0))
        return std::nullopt;
    const double temp_c = cal.b / ln - kKelvinOffset;
    if (!std::isfinite(temp_c) || temp_c < camera.range_min - kRangeSlack || temp_c > camera.range_max + kRangeSlack)
        return std::nullopt;
    return temp_c;
}

double forward_signal(double temp_c, const RadiometricCalibration& cal, const CameraSpec& camera)
{
    if (!std::isfinite(temp_c) || temp_c < camera.range_min || temp_c > camera.range_max)
        throw InputError("temperature " + std::to_string(temp_c) + " degC outside measurable range ["
                         + std::to_string(camera.range_min) + ", " + std::to_string(camera.range_max) + "]");
    const double object = blackbody_signal(temp_c + kKelvinOffset, cal);
    if (cal.emissivity == 1.0)
        return object;
    const double reflected = blackbody_signal(cal.reflected_temp_k, cal);
    return cal.emissivity * object + (1.0 - cal.emissivity) * reflected;
}

DecodedFrame raw_to_temperature(const RadiometricFrame& frame, const CameraSpec& camera)
{
    frame.validate();
    DecodedFrame out;
    out.map.width = frame.width;
    out.map.height = frame.height;
    out.map.source_timestamp = frame.timestamp;
    out.map.temps.resize(frame.pixel_count());
    for (std::size_t i = 0; i < frame.counts.size(); ++i) {
        const auto t = signal_to_temperature(static_cast<double>(frame.counts[i]), frame.calibration, camera);
        if (t) {
            out.map.temps[i] = *t;
        } else {
            out.map.temps[i] = std::numeric_limits<double>::quiet_NaN();
            ++out.invalid_pixels;
        }
    }
    if (out.invalid_pixels == frame.counts.size())
        throw InputError("frame " + std::to_string(frame.sequence_index) + ": every pixel is invalid");
    return out;
}

RadiometricFrame synth_frame(const TemperatureMap& field, const RadiometricCalibration& cal, double noise_netd,
                             std::uint64_t seed, std::int64_t sequence_index)
{
    field.validate();
    cal.validate();
    if (!(noise_netd >= 0.0) || !std::isfinite(noise_netd))
        throw InputError("noise_netd must be finite and >= 0");

    RadiometricFrame frame;
    frame.width = field.width;
    frame.height = field.height;
    frame.calibration = cal;
    frame.timestamp = field.source_timestamp;
    frame.sequence_index = sequence_index;
    frame.counts.resize(field.pixel_count());

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_netd > 0.0 ? noise_netd : 1.0);

    for (std::size_t i = 0; i < field.temps.size(); ++i) {
        if (!field.valid(i)) {
            frame.counts[i] = 0;
            continue;
        }
        double t = field.temps[i];
        if (noise_netd > 0.0)
            t += noise(rng);
        t = std::clamp(t, kReferenceCamera.range_min, kReferenceCamera.range_max);
        const double s = std::round(forward_signal(t, cal));
        if (s < 0.0 || s > 65535.0)
            throw InputError("pixel " + std::to_string(i) + " at " + std::to_string(t)
                             + " degC needs signal " + std::to_string(s) + " outside the 16-bit range");
        frame.counts[i] = static_cast<std::uint16_t>(s);
    }
    return frame;
}

TemperatureMap snap_to_counts(const TemperatureMap& field, const RadiometricCalibration& cal)
{
    const RadiometricFrame frame = synth_frame(field, cal, 0.0);
    TemperatureMap snapped = field;
    for (std::size_t i = 0; i < field.temps.size(); ++i) {
        if (!field.valid(i))
            continue;
        const auto t = signal_to_temperature(static_cast<double>(frame.counts[i]), cal);
        snapped.temps[i] = t ? *t : std::numeric_limits<double>::quiet_NaN();
    }
    return snapped;
}

} // namespace thermolab
