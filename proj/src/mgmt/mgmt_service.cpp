#include "rscm/mgmt_service.hpp"

#include <httplib.h>

#include <charconv>
#include <iomanip>
#include <sstream>

namespace rscm::mgmt
{

namespace
{

class BadRequest : public std::runtime_error
{
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_names(const std::string& list)
{
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    auto b = current.find_first_not_of(' ');
    auto e = current.find_last_not_of(' ');
    if (b != std::string::npos)
      out.push_back(current.substr(b, e - b + 1));
    current.clear();
  };
  for (char c : list) {
    if (c == ',')
      flush();
    else
      current += c;
  }
  flush();
  return out;
}

const std::string* payload_value(const json& payload, const std::string& key)
{
  auto it = payload.find(key);
  if (it == payload.end())
    return nullptr;
  return it->get_ptr<const std::string*>();
}

std::string require_value(const json& payload, const std::string& key)
{
  const auto* v = payload_value(payload, key);
  if (!v)
    throw BadRequest("payload needs '" + key + "'");
  return *v;
}

// Payload entries that do not start with '@'.
std::vector<std::pair<std::string, std::string>> assignments(const json& payload)
{
  std::vector<std::pair<std::string, std::string>> out;
  for (auto it = payload.begin(); it != payload.end(); ++it)
    if (!it.key().starts_with("@"))
      out.emplace_back(it.key(), it.value().get<std::string>());
  return out;
}

json named_values(const std::vector<std::string>& names, const std::vector<std::string>& values)
{
  json out = json::array();
  for (std::size_t i = 0; i < names.size(); ++i)
    out.push_back({{"name", names[i]}, {"value", values[i]}});
  return out;
}

std::string iso_time(std::chrono::system_clock::time_point t)
{
  auto secs = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

json ok(json body) { return json{{"status", "ok"}, {"body", std::move(body)}}; }

} // namespace

std::vector<std::string> linearize_signature(const CreationSignature& sig)
{
  std::vector<std::string> columns;
  for (const auto& p : sig.params)
    columns.push_back(p.name);
  return columns;
}

json error_response(ErrorCode code, const std::string& message, const std::vector<Violation>& violations)
{
  json vs = json::array();
  for (const auto& v : violations)
    vs.push_back({{"path", v.path}, {"reason", v.reason}});
  return json{{"status", "error"},
              {"error_code", std::string(to_string(code))},
              {"body", {{"message", message}, {"violations", std::move(vs)}}}};
}

json ManagementService::handle_text(std::string_view body) const
{
  json request = json::parse(body, nullptr, false);
  if (request.is_discarded())
    return error_response(ErrorCode::BadRequest, "request body is not valid JSON");
  return handle(request);
}

json ManagementService::handle(const json& request) const
{
  try {
    if (!request.is_object())
      throw BadRequest("request must be a JSON object");
    auto op = request.find("op");
    auto path = request.find("path");
    if (op == request.end() || !op->is_string())
      throw BadRequest("request needs a string 'op'");
    if (path == request.end() || !path->is_string())
      throw BadRequest("request needs a string 'path'");
    json payload = json::object();
    if (auto p = request.find("payload"); p != request.end() && !p->is_null()) {
      if (!p->is_object())
        throw BadRequest("'payload' must be an object");
      for (auto it = p->begin(); it != p->end(); ++it)
        if (!it.value().is_string())
          throw BadRequest("payload value '" + it.key() + "' must be a string");
      payload = *p;
    }
    return dispatch(op->get<std::string>(), RdnPath::parse(path->get<std::string>()), payload);
  } catch (const BadRequest& e) {
    return error_response(ErrorCode::BadRequest, e.what());
  } catch (const Error& e) {
    return error_response(e.code(), e.what(), e.violations());
  } catch (const std::exception& e) {
    return error_response(ErrorCode::ActionFailed, e.what());
  }
}

json ManagementService::dispatch(const std::string& op, const RdnPath& path, const json& payload) const
{
  Subagent& s = subagent_;

  if (op == "children")
    return ok(s.list_children(path));

  if (op == "params") {
    json out = json::array();
    for (const auto& p : s.list_configuration_parameters(path))
      out.push_back({{"name", p.name}, {"type", p.type}, {"value", p.value}});
    return ok(std::move(out));
  }

  if (op == "get") {
    auto names = split_names(require_value(payload, "@names"));
    return ok(named_values(names, s.get_configuration_parameters(path, names)));
  }

  if (op == "set") {
    s.set_configuration_parameters(path, assignments(payload));
    return ok(json::object());
  }

  if (op == "signature") {
    auto sig = s.get_child_creation_signature(path);
    json params = json::array();
    for (const auto& p : sig.params)
      params.push_back({{"name", p.name},
                        {"type", std::string(schema::to_string(p.type))},
                        {"required", p.required},
                        {"default", p.default_value ? json(*p.default_value) : json(nullptr)},
                        {"password", p.is_password}});
    return ok({{"class", sig.class_name}, {"columns", linearize_signature(sig)}, {"params", std::move(params)}});
  }

  if (op == "create") {
    const auto* cls = payload_value(payload, "@class");
    auto created = s.create_managed_object(path, assignments(payload), cls ? *cls : std::string());
    return ok({{"path", created.str()}});
  }

  if (op == "delete") {
    s.delete_managed_object(path);
    return ok(json::object());
  }

  if (op == "actions")
    return ok(s.list_actions(path));

  if (op == "action_sig") {
    json out = json::array();
    for (const auto& p : s.get_action_signature(path, require_value(payload, "@action")))
      out.push_back({{"name", p.name}, {"type", std::string(schema::to_string(p.type))}});
    return ok(std::move(out));
  }

  if (op == "do_action") {
    ActionArgs args;
    for (auto& [k, v] : assignments(payload))
      args[k] = v;
    return ok({{"result", s.do_action(path, require_value(payload, "@action"), args)}});
  }

  if (op == "monitors")
    return ok(s.list_monitoring_variables(path));

  if (op == "get_monitors") {
    auto names = split_names(require_value(payload, "@names"));
    return ok(named_values(names, s.get_monitoring_variables(path, names)));
  }

  if (op == "notifications") {
    const auto* open = payload_value(payload, "@open");
    json out = json::array();
    for (const auto& n : (open && *open == "true") ? s.open_alarms() : s.notifications())
      out.push_back({{"kind", std::string(to_string(n.kind))},
                     {"source", n.source},
                     {"code", n.code},
                     {"text", n.text},
                     {"timestamp", iso_time(n.timestamp)}});
    return ok(std::move(out));
  }

  throw BadRequest("unknown op '" + op + "'");
}

ListenAddress parse_listen_address(std::string_view text)
{
  auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0)
    throw std::invalid_argument("expected host:port, got '" + std::string(text) + "'");
  ListenAddress a;
  a.host = std::string(text.substr(0, colon));
  auto port = text.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), a.port);
  if (ec != std::errc() || ptr != port.data() + port.size() || a.port < 0 || a.port > 65535)
    throw std::invalid_argument("bad port in '" + std::string(text) + "'");
  return a;
}

// ---------------------------------------------------------------------------

HttpEndpoint::HttpEndpoint(const ManagementService& service, std::string cors_origin)
  : service_(service), cors_origin_(std::move(cors_origin)), server_(std::make_unique<httplib::Server>())
{
  server_->set_default_headers({{"Access-Control-Allow-Origin", cors_origin_},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
  server_->Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  server_->Get("/health", [](const httplib::Request&, httplib::Response& res) { res.set_content("ok", "text/plain"); });
  server_->Post("/rscm", [this](const httplib::Request& req, httplib::Response& res) {
    json response = service_.handle_text(req.body);
    if (response.value("error_code", "") == "BadRequest")
      res.status = 400;
    res.set_content(response.dump(-1, ' ', false, json::error_handler_t::replace), "application/json");
  });
}

HttpEndpoint::~HttpEndpoint() { stop(); }

int HttpEndpoint::start(const ListenAddress& address)
{
  if (address.port == 0)
    port_ = server_->bind_to_any_port(address.host);
  else
    port_ = server_->bind_to_port(address.host, address.port) ? address.port : -1;
  if (port_ <= 0)
    throw std::runtime_error("cannot bind management endpoint to " + address.host + ":" + std::to_string(address.port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void HttpEndpoint::stop()
{
  if (thread_.joinable()) {
    server_->stop();
    thread_.join();
  }
}

// ---------------------------------------------------------------------------

HttpTransport::HttpTransport(const ListenAddress& endpoint) : endpoint_(endpoint) {}

json HttpTransport::call(const json& request)
{
  httplib::Client client(endpoint_.host, endpoint_.port);
  client.set_connection_timeout(5);
  client.set_read_timeout(30);
  auto res = client.Post("/rscm", request.dump(-1, ' ', false, json::error_handler_t::replace), "application/json");
  if (!res) {
    json r = error_response(ErrorCode::BadRequest, "cannot reach " + endpoint_.host + ":" +
                                                       std::to_string(endpoint_.port) + ": " +
                                                       httplib::to_string(res.error()));
    r["error_code"] = "Unreachable";
    return r;
  }
  json response = json::parse(res->body, nullptr, false);
  if (response.is_discarded())
    return error_response(ErrorCode::BadRequest, "endpoint returned a non-JSON body");
  return response;
}

} // namespace rscm::mgmt
