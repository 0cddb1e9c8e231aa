#include "thermolab/terminal.hpp"

#include "thermolab/csv.hpp"
#include "thermolab/error.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace thermolab {

namespace {

std::string rest_of(std::istringstream& ss)
{
    std::string rest;
    std::getline(ss, rest);
    const auto start = rest.find_first_not_of(" \t");
    return start == std::string::npos ? std::string() : rest.substr(start);
}

void print_status(const SessionController& session, std::ostream& out)
{
    const Json s = session.live_state();
    out << "status " << s.at("status").get<std::string>() << " v" << s.at("version").get<std::uint64_t>();
    if (!s.at("phase").is_null()) {
        const Json& p = s.at("phase");
        out << " phase " << p.at("kind").get<std::string>() << " elapsed "
            << format_minutes_seconds(Millis{static_cast<long long>(p.at("elapsed_s").get<double>() * 1000)})
            << " captures " << p.at("captures").get<std::size_t>();
    }
    out << "\n";
    out << "next: " << s.at("next_action").at("text").get<std::string>() << "\n";
    for (const auto& [label, stats] : s.at("latest_stats").items()) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "  %-12s mean %.2f min %.2f max %.2f\n", label.c_str(),
                      stats.at("mean").get<double>(), stats.at("min").get<double>(), stats.at("max").get<double>());
        out << buf;
    }
}

} // namespace

TerminalOutcome run_terminal(SessionController& session, std::istream& in, std::ostream& out,
                             const TerminalOptions& opts)
{
    TerminalOutcome outcome;
    std::size_t counter = session.version();
    char nonce[16];
    std::snprintf(nonce, sizeof nonce, "%08x", std::random_device{}());
    const std::string prefix = "term-" + session.id() + "-" + nonce + "-";
    auto submit = [&](CommandVerb verb, Json payload) {
        CommandRequest req;
        req.verb = verb;
        req.session_id = session.id();
        req.request_id = prefix + std::to_string(++counter);
        req.payload = std::move(payload);
        const CommandResult r = session.submit(req);
        if (r.ok()) {
            out << "ok v" << r.version << "\n";
        } else {
            ++outcome.rejected;
            out << "error " << to_string(*r.error) << ": " << r.message << "\n";
        }
    };

    print_status(session, out);
    std::string line;
    while (true) {
        if (opts.interrupted && opts.interrupted->load()) {
            outcome.interrupted = true;
            break;
        }
        const SessionStatus st = session.session().status;
        if (st == SessionStatus::Completed || st == SessionStatus::Aborted)
            break;
        out << "> " << std::flush;
        if (!std::getline(in, line)) {
            if (opts.interrupted && opts.interrupted->load())
                outcome.interrupted = true;
            break;
        }
        if (opts.echo)
            out << line << "\n";
        std::istringstream ss(line);
        std::string cmd;
        ss >> cmd;
        if (cmd.empty() || cmd.front() == '#')
            continue;
        try {
            if (cmd == "env") {
                std::string cp, t, h;
                ss >> cp >> t >> h;
                if (h.empty())
                    throw InputError("usage: env <checkpoint> <temp_c> <humidity_pct>");
                submit(CommandVerb::RecordEnv,
                       {{"checkpoint", cp}, {"temp_c", parse_double_cell(t)}, {"humidity_pct", parse_double_cell(h)}});
            } else if (cmd == "capture") {
                std::string ref, role;
                ss >> ref >> role;
                if (ref.empty())
                    throw InputError("usage: capture <frame_ref> [role]");
                Json payload{{"frame_ref", ref}};
                if (!role.empty())
                    payload["role"] = role;
                submit(CommandVerb::ConfirmCapture, payload);
            } else if (cmd == "advance") {
                submit(CommandVerb::AdvancePhase, Json::object());
            } else if (cmd == "note") {
                submit(CommandVerb::Note, {{"text", rest_of(ss)}});
            } else if (cmd == "abort") {
                std::string reason = rest_of(ss);
                submit(CommandVerb::Abort, {{"reason", reason.empty() ? "aborted by operator" : reason}});
            } else if (cmd == "wait") {
                std::string secs;
                ss >> secs;
                const Millis d{static_cast<long long>(parse_double_cell(secs) * 1000.0)};
                if (d < Millis{0})
                    throw InputError("wait needs a non-negative duration");
                if (opts.simulated_clock)
                    opts.simulated_clock->advance(d);
                else
                    std::this_thread::sleep_for(d);
            } else if (cmd == "at") {
                std::string when;
                ss >> when;
                if (!opts.simulated_clock)
                    throw InputError("'at' needs the simulated clock");
                opts.simulated_clock->set(parse_iso8601(when));
            } else if (cmd == "status") {
                print_status(session, out);
            } else if (cmd == "interrupt") {
                outcome.interrupted = true;
                break;
            } else if (cmd == "quit") {
                break;
            } else {
                throw InputError("unknown command '" + cmd + "'");
            }
        } catch (const Error& e) {
            ++outcome.rejected;
            out << "error: " << e.what() << "\n";
        }
    }
    if (outcome.interrupted && session.session().status == SessionStatus::Running) {
        submit(CommandVerb::Abort, {{"reason", "interrupted by operator"}});
    }
    outcome.status = session.session().status;
    out << "session " << session.id() << " " << to_string(outcome.status) << " v" << session.version() << "\n";
    return outcome;
}

} // namespace thermolab
