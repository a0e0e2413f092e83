#pragma once

#include "rscm/subagent.hpp"

#include <json.hpp>

#include <memory>
#include <string>
#include <thread>
#include <vector>

namespace httplib
{
class Server;
}

// JSON envelope over the subagent's operations.
//
// Request:  {"op": "...", "path": "<canonical rdn>", "payload": {string: string}}
// Response: {"status": "ok", "body": ...}
//        or {"status": "error", "error_code": "...", "body": {"message": ..., "violations": [...]}}
//
// Ops and payloads:
//   children                                   -> [segment]
//   params                                     -> [{name, type, value}]
//   get           {"@names": "A,B"}            -> [{name, value}]
//   set           {param: value, ...}          -> {}
//   signature                                  -> {class, columns, params: [{name, type, required, default, password}]}
//   create        {gattr: value, ..., "@class"?} -> {path}
//   delete                                     -> {}
//   actions                                    -> [name]
//   action_sig    {"@action": name}            -> [{name, type}]
//   do_action     {"@action": name, arg: value} -> {result}
//   monitors                                   -> [name]
//   get_monitors  {"@names": "A,B"}            -> [{name, value}]
//   notifications {"@open": "true"?}           -> [{kind, source, code, text, timestamp}]
namespace rscm::mgmt
{

using json = nlohmann::ordered_json;

// Flat column list of a creation signature: own parameters first, then
// descendants' parameters as dotted names, in schema order.
std::vector<std::string> linearize_signature(const CreationSignature& sig);

class ManagementService
{
public:
  explicit ManagementService(Subagent& subagent) : subagent_(subagent) {}

  // Never throws; every failure becomes an error response.
  json handle(const json& request) const;
  // Parses `body` first; malformed JSON yields a BadRequest response.
  json handle_text(std::string_view body) const;

private:
  json dispatch(const std::string& op, const RdnPath& path, const json& payload) const;

  Subagent& subagent_;
};

json error_response(ErrorCode code, const std::string& message, const std::vector<Violation>& violations = {});

// host:port; port 0 asks the OS for a free one.
struct ListenAddress
{
  std::string host = "127.0.0.1";
  int port = 7070;
};

// Throws std::invalid_argument.
ListenAddress parse_listen_address(std::string_view text);

// POST /rscm and GET /health over HTTP, with permissive CORS for browser
// consoles.
class HttpEndpoint
{
public:
  HttpEndpoint(const ManagementService& service, std::string cors_origin = "*");
  ~HttpEndpoint();

  HttpEndpoint(const HttpEndpoint&) = delete;
  HttpEndpoint& operator=(const HttpEndpoint&) = delete;

  // Binds and starts serving on a background thread; returns the bound port.
  // Throws std::runtime_error when the address cannot be bound.
  int start(const ListenAddress& address);
  void stop();
  int port() const noexcept { return port_; }

private:
  const ManagementService& service_;
  std::string cors_origin_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

// Something that can carry one request to a management service.
class Transport
{
public:
  virtual ~Transport() = default;
  virtual json call(const json& request) = 0;
};

class InProcessTransport : public Transport
{
public:
  explicit InProcessTransport(const ManagementService& service) : service_(service) {}
  json call(const json& request) override { return service_.handle(request); }

private:
  const ManagementService& service_;
};

// Connection failures are reported as error responses with code
// "Unreachable" so callers have a single error path.
class HttpTransport : public Transport
{
public:
  explicit HttpTransport(const ListenAddress& endpoint);
  json call(const json& request) override;

private:
  ListenAddress endpoint_;
};

} // namespace rscm::mgmt
