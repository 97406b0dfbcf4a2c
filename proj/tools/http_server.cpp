#include "http_server.hpp"

#include <httplib.h>
#include <json.hpp>

#include "blockweave/composer.hpp"
#include "blockweave/error.hpp"
#include "blockweave/pipeline.hpp"
#include "blockweave/service.hpp"

namespace bw::http {

using nlohmann::json;

namespace {

constexpr const char* kJson = "application/json";

int status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound: return 404;
    case ErrorCode::StaleRevision: return 409;
    case ErrorCode::BadRequest:
    case ErrorCode::FormatError:
    case ErrorCode::BundleError:
    case ErrorCode::SyntaxError: return 400;
    case ErrorCode::ComposeError:
    case ErrorCode::UnsetSupply:
    case ErrorCode::UnplacedInstance:
    case ErrorCode::StructureError:
    case ErrorCode::MatNotEmpty:
    case ErrorCode::PortError:
    case ErrorCode::ClassificationError:
    case ErrorCode::DefError: return 422;
    case ErrorCode::Io: return 500;
  }
  return 500;
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(2) + "\n", kJson);
}

void send_error(httplib::Response& res, const Error& e) {
  json body = {{"error", to_string(e.code())}, {"message", e.what()}};
  if (const auto* blocked = dynamic_cast<const BlockedError*>(&e)) {
    body["diagnostics"] = json::parse(render_diagnostics_json(blocked->diagnostics()));
  }
  send_json(res, status_of(e.code()), body);
}

json diagnostics_json(const std::vector<Diagnostic>& diags) { return json::parse(render_diagnostics_json(diags)); }

template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      send_error(res, e);
    } catch (const json::exception& e) {
      send_json(res, 400, {{"error", "BadRequest"}, {"message", e.what()}});
    } catch (const std::exception& e) {
      send_json(res, 500, {{"error", "Internal"}, {"message", e.what()}});
    }
  };
}

}  // namespace

int status_for(const std::string& error_code) {
  for (auto code : {ErrorCode::SyntaxError, ErrorCode::PortError, ErrorCode::ClassificationError,
                    ErrorCode::BundleError, ErrorCode::NotFound, ErrorCode::StructureError, ErrorCode::MatNotEmpty,
                    ErrorCode::DefError, ErrorCode::ComposeError, ErrorCode::UnsetSupply,
                    ErrorCode::UnplacedInstance, ErrorCode::StaleRevision, ErrorCode::BadRequest,
                    ErrorCode::FormatError, ErrorCode::Io}) {
    if (to_string(code) == error_code) return status_of(code);
  }
  return 500;
}

Server::Server(DesignService& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
  routes();
}

Server::~Server() { stop(); }

int Server::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool Server::listen() { return server_->listen_after_bind(); }

void Server::stop() {
  if (server_->is_running()) server_->stop();
}

void Server::routes() {
  auto& s = *server_;
  DesignService& svc = service_;

  s.Post("/library/blocks", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
           BundleFiles files;
           if (req.is_multipart_form_data()) {
             if (!req.has_file("bundle")) throw Error(ErrorCode::BadRequest, "multipart body needs a 'bundle' part");
             files.bundle = parse_bundle_json(req.get_file_value("bundle").content);
             if (req.has_file("image")) files.image_bytes = req.get_file_value("image").content;
           } else {
             files.bundle = parse_bundle_json(req.body);
           }
           const bool overwrite = req.has_param("overwrite") && req.get_param_value("overwrite") != "0";
           const auto report = svc.library().import_bundle(files, overwrite);
           send_json(res, report.accepted ? 200 : 422,
                     {{"accepted", report.accepted},
                      {"block", files.bundle.id},
                      {"diagnostics", diagnostics_json(report.diagnostics)}});
         }));

  s.Get("/library/blocks", guarded([&svc](const httplib::Request&, httplib::Response& res) {
          res.set_content(render_catalog_json(svc.library()), kJson);
        }));

  s.Get(R"(/library/blocks/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
          res.set_content(render_definition_json(*svc.library().get(req.matches[1].str())), kJson);
        }));

  s.Post("/designs", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
           std::string name;
           if (!req.body.empty()) name = json::parse(req.body).value("name", std::string{});
           const std::string id = svc.create_design(name);
           send_json(res, 201, {{"id", id}, {"revision", 0}});
         }));

  s.Get("/designs", guarded([&svc](const httplib::Request&, httplib::Response& res) {
          send_json(res, 200, svc.design_ids());
        }));

  s.Get(R"(/designs/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
          res.set_content(svc.state_json(req.matches[1].str()), kJson);
        }));

  s.Delete(R"(/designs/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
             svc.delete_design(req.matches[1].str());
             res.status = 204;
           }));

  s.Post(R"(/designs/([^/]+)/ops)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
           const json body = json::parse(req.body);
           std::optional<long> expected;
           if (body.contains("expected_revision") && !body["expected_revision"].is_null()) {
             expected = body["expected_revision"].get<long>();
           }
           Op op = parse_op(req.body);
           const auto r = svc.apply(req.matches[1].str(), std::move(op), expected);
           json out = {{"revision", r.revision},
                       {"applied", r.applied},
                       {"new_diagnostics", diagnostics_json(r.added)},
                       {"retracted_diagnostics", diagnostics_json(r.retracted)}};
           if (!r.instance_id.empty()) out["instance_id"] = r.instance_id;
           if (r.error) out["error"] = *r.error;
           send_json(res, 200, out);
         }));

  s.Post(R"(/designs/([^/]+)/compose)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
           const auto a = svc.compose(req.matches[1].str());
           send_json(res, 200,
                     {{"netlist", json::parse(a.netlist_json)},
                      {"board", json::parse(a.board_json)},
                      {"report", json::parse(a.report_json)},
                      {"svg", a.svg}});
         }));

  s.Get(R"(/designs/([^/]+)/export)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
          const std::string id = req.matches[1].str();
          const std::string format = req.has_param("format") ? req.get_param_value("format") : "design";
          if (format == "design") {
            res.set_content(render_design(svc.design(id)), kJson);
          } else if (format == "netlist") {
            res.set_content(svc.compose(id).netlist_json, kJson);
          } else if (format == "svg") {
            res.set_content(svc.compose(id).svg, "image/svg+xml");
          } else {
            throw Error(ErrorCode::BadRequest, "format must be design, netlist or svg");
          }
        }));
}

}  // namespace bw::http
