#include "thermolab/server.hpp"

#include "thermolab/bundle.hpp"
#include "thermolab/error.hpp"
#include "thermolab/render.hpp"

#include <httplib.h>

namespace thermolab {

namespace fs = std::filesystem;

namespace {

void send_json(httplib::Response& res, const Json& body, int status = 200)
{
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& message, std::uint64_t version = 0)
{
    send_json(res, Json{{"error", {{"code", to_string(code)}, {"message", message}}}, {"version", version}},
              http_status(code));
}

std::uint64_t parse_since(const httplib::Request& req)
{
    if (!req.has_param("since"))
        return 0;
    try {
        return std::stoull(req.get_param_value("since"));
    } catch (const std::exception&) {
        throw InputError("since must be a non-negative integer");
    }
}

/// Runs a handler, mapping library errors onto the structured error body.
template <typename F>
httplib::Server::Handler guarded(F f)
{
    return [f](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const ProtocolError& e) {
            send_error(res, ErrorCode::ProtocolConflict, e.what());
        } catch (const Error& e) {
            send_error(res, ErrorCode::InvalidCommand, e.what());
        } catch (const nlohmann::json::exception& e) {
            send_error(res, ErrorCode::InvalidCommand, e.what());
        }
    };
}

} // namespace

Service::Service(std::shared_ptr<SessionStore> store, ServiceOptions opts) : store_(std::move(store)), opts_(std::move(opts))
{
}

void Service::mount(httplib::Server& server)
{
    auto store = store_;
    auto opts = opts_;

    auto lookup = [store](const httplib::Request& req, httplib::Response& res) -> std::shared_ptr<SessionController> {
        const std::string id = req.matches[1];
        auto c = store->find(id);
        if (!c)
            send_error(res, ErrorCode::NotFound, "no session '" + id + "'");
        return c;
    };

    server.Get("/api/health", guarded([store, opts](const httplib::Request&, httplib::Response& res) {
                   send_json(res, Json{{"ok", true},
                                       {"now", format_iso8601(store->clock()->now())},
                                       {"simulated_clock", opts.simulated_clock != nullptr}});
               }));

    server.Get("/api/sessions", guarded([store](const httplib::Request&, httplib::Response& res) {
                   Json list = Json::array();
                   for (const std::string& id : store->ids()) {
                       const auto c = store->find(id);
                       const Session s = c->session();
                       list.push_back({{"id", s.id},
                                       {"emotion", to_string(s.emotion)},
                                       {"stimulus", s.stimulus},
                                       {"status", to_string(s.status)},
                                       {"version", s.version}});
                   }
                   send_json(res, Json{{"sessions", list}});
               }));

    server.Get(R"(/api/sessions/([^/]+)/state)", guarded([lookup](const httplib::Request& req, httplib::Response& res) {
                   if (auto c = lookup(req, res))
                       send_json(res, c->live_state());
               }));

    server.Get(R"(/api/sessions/([^/]+)/summary)", guarded([lookup](const httplib::Request& req, httplib::Response& res) {
                   if (auto c = lookup(req, res))
                       send_json(res, Json(session_summary(c->session())));
               }));

    server.Get(R"(/api/sessions/([^/]+)/log)", guarded([lookup](const httplib::Request& req, httplib::Response& res) {
                   if (auto c = lookup(req, res))
                       res.set_content(serialize_events(c->events()), "application/x-ndjson");
               }));

    server.Get(R"(/api/sessions/([^/]+)/stream)",
               guarded([lookup, opts](const httplib::Request& req, httplib::Response& res) {
                   auto c = lookup(req, res);
                   if (!c)
                       return;
                   std::uint64_t since = parse_since(req);
                   const bool follow = !req.has_param("follow") || req.get_param_value("follow") != "0";
                   const Millis poll = opts.stream_poll;
                   res.set_chunked_content_provider(
                       "application/x-ndjson", [c, since, follow, poll](std::size_t, httplib::DataSink& sink) mutable {
                           const std::uint64_t current = c->wait_for_version(since, follow ? poll : Millis{0});
                           while (since < current) {
                               ++since;
                               const std::string line = c->state_at(since).dump() + "\n";
                               if (!sink.write(line.data(), line.size()))
                                   return false;
                           }
                           const SessionStatus st = c->session().status;
                           const bool finished = st == SessionStatus::Completed || st == SessionStatus::Aborted;
                           if (!follow || (finished && since >= c->version())) {
                               sink.done();
                               return true;
                           }
                           return sink.is_writable();
                       });
               }));

    server.Get(R"(/api/sessions/([^/]+)/tables/([a-z_]+\.(csv|json)))",
               guarded([lookup](const httplib::Request& req, httplib::Response& res) {
                   auto c = lookup(req, res);
                   if (!c)
                       return;
                   const std::string name = req.matches[2];
                   const auto a = c->analysis();
                   if (name == "deltas.csv")
                       res.set_content(format_delta_csv(a->deltas), "text/csv");
                   else if (name == "deltas_wide.csv")
                       res.set_content(format_delta_table_wide(a->deltas), "text/csv");
                   else if (name == "comparison.csv")
                       res.set_content(format_trend_csv(a->trends), "text/csv");
                   else if (name == "analysis.json")
                       send_json(res, analysis_json(*a));
                   else
                       send_error(res, ErrorCode::NotFound, "no table '" + name + "'");
               }));

    server.Get(R"(/api/sessions/([^/]+)/renders/([0-9]+|sequence)\.ppm)",
               guarded([lookup](const httplib::Request& req, httplib::Response& res) {
                   auto c = lookup(req, res);
                   if (!c)
                       return;
                   const auto a = c->analysis();
                   std::vector<TemperatureMap> maps;
                   for (const CaptureAnalysis& ca : a->captures)
                       maps.push_back(ca.map);
                   const RenderSpec spec = default_render_spec(maps);
                   const std::string which = req.matches[2];
                   if (which == "sequence") {
                       std::vector<TemperatureMap> panels;
                       for (const PanelPick& p : sequence_panels(a->session))
                           panels.push_back(maps.at(p.capture));
                       res.set_content(render_filmstrip(panels, spec), "image/x-portable-pixmap");
                       return;
                   }
                   const std::size_t n = std::stoul(which);
                   if (n == 0 || n > maps.size()) {
                       send_error(res, ErrorCode::NotFound, "no capture " + which);
                       return;
                   }
                   res.set_content(render_ppm(maps[n - 1], spec), "image/x-portable-pixmap");
               }));

    server.Post(R"(/api/sessions/([^/]+)/bundle)", guarded([lookup](const httplib::Request& req, httplib::Response& res) {
                    auto c = lookup(req, res);
                    if (!c)
                        return;
                    const fs::path dest = c->dir() / "bundle";
                    if (fs::exists(dest / "manifest.json")) {
                        send_json(res, Json{{"path", "bundle"}, {"manifest", Json::parse(read_text_file(dest / "manifest.json"))}});
                        return;
                    }
                    const ExportResult r = export_bundle(directory_source(c->events(), c->dir()), dest);
                    send_json(res, Json{{"path", "bundle"}, {"manifest", r.manifest}});
                }));

    server.Get(R"(/api/sessions/([^/]+)/bundle/(.+))", guarded([lookup](const httplib::Request& req, httplib::Response& res) {
                   auto c = lookup(req, res);
                   if (!c)
                       return;
                   const std::string rel = req.matches[2];
                   if (rel.find("..") != std::string::npos) {
                       send_error(res, ErrorCode::InvalidCommand, "invalid bundle path");
                       return;
                   }
                   const fs::path p = c->dir() / "bundle" / rel;
                   if (!fs::is_regular_file(p)) {
                       send_error(res, ErrorCode::NotFound, "no bundle file '" + rel + "'");
                       return;
                   }
                   res.set_content(read_text_file(p), "application/octet-stream");
               }));

    server.Post("/api/commands", guarded([store](const httplib::Request& req, httplib::Response& res) {
                    Json body;
                    try {
                        body = Json::parse(req.body);
                    } catch (const nlohmann::json::exception& e) {
                        send_error(res, ErrorCode::InvalidCommand, std::string("malformed JSON: ") + e.what());
                        return;
                    }
                    const CommandRequest cmd = parse_command(body);
                    const CommandResult r = store->submit(cmd);
                    Json out = r.to_json();
                    if (const auto c = store->find(r.session_id))
                        out["state"] = c->live_state();
                    send_json(res, out, r.error ? http_status(*r.error) : 200);
                }));

    server.Post("/api/clock", guarded([opts](const httplib::Request& req, httplib::Response& res) {
                    if (!opts.simulated_clock) {
                        send_error(res, ErrorCode::ProtocolConflict, "the service runs on the wall clock");
                        return;
                    }
                    const Json body = Json::parse(req.body);
                    if (body.contains("set"))
                        opts.simulated_clock->set(parse_iso8601(body.at("set").get<std::string>()));
                    if (body.contains("advance_s")) {
                        const double s = body.at("advance_s").get<double>();
                        if (s < 0)
                            throw InputError("advance_s must be non-negative");
                        opts.simulated_clock->advance(Millis{static_cast<long long>(s * 1000.0)});
                    }
                    send_json(res, Json{{"now", format_iso8601(opts.simulated_clock->now())}});
                }));
}

bool serve(std::shared_ptr<SessionStore> store, const std::string& host, int port, ServiceOptions opts)
{
    httplib::Server server;
    Service service(std::move(store), std::move(opts));
    service.mount(server);
    return server.listen(host, port);
}

} // namespace thermolab
