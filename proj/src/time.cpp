#include "thermolab/time.hpp"

#include "thermolab/error.hpp"

#include <charconv>
#include <cstdio>

namespace thermolab {

namespace {

int parse_int(std::string_view text, std::size_t pos, std::size_t len, std::string_view whole)
{
    int value = 0;
    if (pos + len > text.size())
        throw InputError("malformed timestamp '" + std::string(whole) + "'");
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, value);
    if (ec != std::errc{} || ptr != text.data() + pos + len)
        throw InputError("malformed timestamp '" + std::string(whole) + "'");
    return value;
}

void expect_char(std::string_view text, std::size_t pos, char c)
{
    if (pos >= text.size() || text[pos] != c)
        throw InputError("malformed timestamp '" + std::string(text) + "'");
}

} // namespace

std::string format_iso8601(Instant t)
{
    using namespace std::chrono;
    const auto day = floor<days>(t);
    const year_month_day ymd{day};
    const hh_mm_ss hms{t - day};
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ld.%03ldZ",
                  static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()), static_cast<long>(hms.hours().count()),
                  static_cast<long>(hms.minutes().count()), static_cast<long>(hms.seconds().count()),
                  static_cast<long>(hms.subseconds().count()));
    return buf;
}

Instant parse_iso8601(std::string_view text)
{
    using namespace std::chrono;
    const int y = parse_int(text, 0, 4, text);
    expect_char(text, 4, '-');
    const int mo = parse_int(text, 5, 2, text);
    expect_char(text, 7, '-');
    const int d = parse_int(text, 8, 2, text);
    expect_char(text, 10, 'T');
    const int h = parse_int(text, 11, 2, text);
    expect_char(text, 13, ':');
    const int mi = parse_int(text, 14, 2, text);
    expect_char(text, 16, ':');
    const int s = parse_int(text, 17, 2, text);
    std::size_t pos = 19;
    int ms = 0;
    if (pos < text.size() && text[pos] == '.') {
        std::size_t end = pos + 1;
        while (end < text.size() && text[end] >= '0' && text[end] <= '9')
            ++end;
        const std::size_t digits = end - pos - 1;
        if (digits == 0 || digits > 9)
            throw InputError("malformed timestamp '" + std::string(text) + "'");
        int frac = parse_int(text, pos + 1, digits, text);
        for (std::size_t i = digits; i < 3; ++i)
            frac *= 10;
        for (std::size_t i = 3; i < digits; ++i)
            frac /= 10;
        ms = frac;
        pos = end;
    }
    expect_char(text, pos, 'Z');
    if (pos + 1 != text.size())
        throw InputError("malformed timestamp '" + std::string(text) + "'");

    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || s > 59)
        throw InputError("timestamp out of range '" + std::string(text) + "'");
    return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s} + milliseconds{ms};
}

std::string format_date(Instant t)
{
    return format_iso8601(t).substr(0, 10);
}

std::string format_compact(Instant t)
{
    const std::string iso = format_iso8601(t);
    std::string out;
    for (char c : iso.substr(0, 19))
        if (c != '-' && c != ':')
            out.push_back(c);
    return out + "Z";
}

std::string format_minutes_seconds(Millis d)
{
    const long total = static_cast<long>(std::chrono::duration_cast<Seconds>(d).count());
    char buf[32];
    std::snprintf(buf, sizeof buf, "%ld'%02ld''", total / 60, total % 60);
    return buf;
}

double to_seconds(Millis d)
{
    return static_cast<double>(d.count()) / 1000.0;
}

Instant SystemClock::now() const
{
    return std::chrono::time_point_cast<Millis>(std::chrono::system_clock::now());
}

Instant SimulatedClock::now() const
{
    std::lock_guard lock(mutex_);
    return now_;
}

void SimulatedClock::advance(Millis d)
{
    std::lock_guard lock(mutex_);
    now_ += d;
}

void SimulatedClock::set(Instant t)
{
    std::lock_guard lock(mutex_);
    now_ = t;
}

} // namespace thermolab
