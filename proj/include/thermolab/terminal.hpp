#pragma once

#include "thermolab/controller.hpp"

#include <atomic>
#include <iosfwd>
#include <memory>
#include <string>

namespace thermolab {

/// Line-oriented operator console. Commands:
///   env <checkpoint> <temp_c> <humidity_pct>
///   capture <frame_ref> [role]
///   advance
///   note <text>
///   abort <reason>
///   wait <seconds>        advance the simulated clock
///   at <iso8601>          set the simulated clock
///   status
///   interrupt             same as Ctrl-C: abort and stop
///   quit
/// Protocol errors are printed verbatim and the run continues.
struct TerminalOptions {
    std::shared_ptr<SimulatedClock> simulated_clock; ///< null: wall clock, `wait` sleeps
    bool echo = false;                               ///< echo commands (for scripted input)
    const std::atomic<bool>* interrupted = nullptr;  ///< checked between lines
};

struct TerminalOutcome {
    SessionStatus status = SessionStatus::Running;
    std::size_t rejected = 0; ///< commands refused by the state machine or input checks
    bool interrupted = false;
};

TerminalOutcome run_terminal(SessionController& session, std::istream& in, std::ostream& out,
                             const TerminalOptions& opts = {});

} // namespace thermolab
