#pragma once

#include "thermolab/controller.hpp"

#include <memory>
#include <string>

namespace httplib {
class Server;
}

namespace thermolab {

// Local HTTP service backing the operator console. JSON bodies throughout.
//   GET  /api/health
//   GET  /api/sessions
//   GET  /api/sessions/{id}/state
//   GET  /api/sessions/{id}/stream?since=N   newline-delimited state versions
//   GET  /api/sessions/{id}/summary
//   GET  /api/sessions/{id}/log
//   GET  /api/sessions/{id}/tables/{deltas.csv|comparison.csv|analysis.json}
//   GET  /api/sessions/{id}/renders/{NNNN|sequence}.ppm
//   POST /api/sessions/{id}/bundle           export into <store>/<id>/bundle
//   GET  /api/sessions/{id}/bundle/{path}
//   POST /api/commands                       CommandRequest
//   POST /api/clock                          {"advance_s"} or {"set"}; simulated clock only
// Errors: {"error":{"code","message"},"version"} with 400/404/409.

struct ServiceOptions {
    std::shared_ptr<SimulatedClock> simulated_clock;
    Millis stream_poll{1000}; ///< how long the stream waits for a new version before re-checking
};

class Service {
public:
    Service(std::shared_ptr<SessionStore> store, ServiceOptions opts = {});

    /// Registers all routes on `server`.
    void mount(httplib::Server& server);

private:
    std::shared_ptr<SessionStore> store_;
    ServiceOptions opts_;
};

/// Blocks serving on host:port until the server is stopped.
bool serve(std::shared_ptr<SessionStore> store, const std::string& host, int port, ServiceOptions opts = {});

} // namespace thermolab
