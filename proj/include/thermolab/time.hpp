#pragma once

#include <chrono>
#include <mutex>
#include <string>
#include <string_view>

namespace thermolab {

using Instant = std::chrono::sys_time<std::chrono::milliseconds>;
using Seconds = std::chrono::seconds;
using Millis = std::chrono::milliseconds;

/// "2019-02-21T10:00:00.000Z"
std::string format_iso8601(Instant t);

/// Accepts "YYYY-MM-DDTHH:MM:SS[.fff]Z". Throws InputError otherwise.
Instant parse_iso8601(std::string_view text);

/// "2019-02-21"
std::string format_date(Instant t);

/// Compact UTC stamp used in generated identifiers: "20190221T100000Z".
std::string format_compact(Instant t);

/// Minutes and seconds in the 8'32'' notation of protocol sheets.
std::string format_minutes_seconds(Millis d);

double to_seconds(Millis d);

/// All protocol timing reads one injected clock.
class Clock {
public:
    virtual ~Clock() = default;
    virtual Instant now() const = 0;
};

class SystemClock final : public Clock {
public:
    Instant now() const override;
};

/// Manually driven clock for scripted sessions and tests.
class SimulatedClock final : public Clock {
public:
    explicit SimulatedClock(Instant start) : now_(start) {}

    Instant now() const override;
    void advance(Millis d);
    void set(Instant t);

private:
    mutable std::mutex mutex_;
    Instant now_;
};

} // namespace thermolab
