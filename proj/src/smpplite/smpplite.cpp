#include "smpplite/smpplite.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

namespace smpplite
{

using rscm::Error;
using rscm::ErrorCode;
using rscm::ObjectId;

std::optional<BindType> parse_bind_type(std::string_view text)
{
  if (text == "TX")
    return BindType::TX;
  if (text == "RX")
    return BindType::RX;
  if (text == "TRX")
    return BindType::TRX;
  return std::nullopt;
}

std::string_view to_string(BindType type)
{
  switch (type) {
  case BindType::TX: return "TX";
  case BindType::RX: return "RX";
  case BindType::TRX: return "TRX";
  }
  return "TRX";
}

bool permits(BindType permitted, BindType requested)
{
  return permitted == BindType::TRX || permitted == requested;
}

// ---------------------------------------------------------------------------
// Runtime

Runtime::~Runtime() { stop(); }

void Runtime::reap_locked()
{
  for (auto it = workers_.begin(); it != workers_.end();) {
    if (it->done.load()) {
      it->thread.join();
      it = workers_.erase(it);
    } else {
      ++it;
    }
  }
}

void Runtime::spawn(std::function<void()> fn)
{
  std::lock_guard lock(mutex_);
  reap_locked();
  if (stopping_)
    throw std::runtime_error("runtime is stopping");
  auto& w = workers_.emplace_back();
  w.thread = std::thread([&w, fn = std::move(fn)] {
    fn();
    w.done = true;
  });
}

void Runtime::stop()
{
  stopping_ = true;
  while (true) {
    std::thread t;
    {
      std::lock_guard lock(mutex_);
      if (workers_.empty())
        return;
      t = std::move(workers_.front().thread);
      workers_.pop_front();
    }
    if (t.joinable())
      t.join();
  }
}

std::size_t Runtime::live_threads() const
{
  std::lock_guard lock(mutex_);
  return std::count_if(workers_.begin(), workers_.end(), [](const Worker& w) { return !w.done.load(); });
}

// ---------------------------------------------------------------------------
// SessionControl

void SessionControl::request_close(std::string reason)
{
  std::lock_guard lock(mutex_);
  if (!reason_)
    reason_ = std::move(reason);
}

std::optional<std::string> SessionControl::close_reason() const
{
  std::lock_guard lock(mutex_);
  return reason_;
}

// ---------------------------------------------------------------------------
// SmppConnection

namespace
{

long seconds_value(const std::optional<std::string>& text)
{
  if (!text)
    return 0;
  long v = 0;
  auto [ptr, ec] = std::from_chars(text->data(), text->data() + text->size(), v);
  if (ec != std::errc() || v < 0)
    return 0;
  return v;
}

} // namespace

SmppConnection::SmppConnection(std::string class_name) : ManagedObject(std::move(class_name), rscm::ObjectKind::Simple) {}

SmppConnection::~SmppConnection() { finalized_count.fetch_add(1); }

std::vector<std::string> SmppConnection::monitoring_variables() const
{
  return {"MessagesReceived", "MessagesSent", "Bound"};
}

std::optional<std::string> SmppConnection::monitoring_value(std::string_view name) const
{
  if (name == "MessagesReceived")
    return std::to_string(messages_received());
  if (name == "MessagesSent")
    return std::to_string(messages_sent());
  if (name == "Bound")
    return bound() ? "1" : "0";
  return std::nullopt;
}

std::string SmppConnection::do_action(std::string_view name, const rscm::ActionArgs&)
{
  if (name != "Disconnect")
    throw Error(ErrorCode::NoSuchAction, "no action '" + std::string(name) + "'");
  std::lock_guard lock(session_mutex_);
  if (!session_)
    throw Error(ErrorCode::ActionFailed, "not connected");
  session_->request_close("Disconnected");
  return "disconnected";
}

void SmppConnection::on_released()
{
  std::lock_guard lock(session_mutex_);
  if (session_)
    session_->request_close("Deleted");
}

long SmppConnection::enquire_link_timeout() const { return seconds_value(config("EnquireLinkTimeout")); }
long SmppConnection::inactivity_timeout() const { return seconds_value(config("InactivityTimeout")); }

bool SmppConnection::attach_session(std::shared_ptr<SessionControl> session)
{
  std::lock_guard lock(session_mutex_);
  if (session_)
    return false;
  session_ = std::move(session);
  return true;
}

void SmppConnection::detach_session(const std::shared_ptr<SessionControl>& session)
{
  std::lock_guard lock(session_mutex_);
  if (session_ == session)
    session_.reset();
}

bool SmppConnection::bound() const
{
  std::lock_guard lock(session_mutex_);
  return session_ != nullptr;
}

// ---------------------------------------------------------------------------
// sockets

namespace
{

class Fd
{
public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  ~Fd() { reset(); }
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd& operator=(Fd&& o) noexcept
  {
    if (this != &o) {
      reset();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  void reset()
  {
    if (fd_ >= 0)
      ::close(fd_);
    fd_ = -1;
  }
  int get() const noexcept { return fd_; }
  explicit operator bool() const noexcept { return fd_ >= 0; }

private:
  int fd_ = -1;
};

bool send_line(int fd, std::string line)
{
  line += '\n';
  std::size_t off = 0;
  while (off < line.size()) {
    ssize_t n = ::send(fd, line.data() + off, line.size() - off, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR)
      continue;
    if (n <= 0)
      return false;
    off += static_cast<std::size_t>(n);
  }
  return true;
}

enum class ReadResult
{
  Idle,
  Data,
  Closed,
};

ReadResult poll_read(int fd, std::string& buffer, std::chrono::milliseconds timeout)
{
  pollfd p{fd, POLLIN, 0};
  int r = ::poll(&p, 1, static_cast<int>(timeout.count()));
  if (r <= 0)
    return ReadResult::Idle;
  char chunk[8192];
  ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
  if (n < 0 && (errno == EINTR || errno == EAGAIN))
    return ReadResult::Idle;
  if (n <= 0)
    return ReadResult::Closed;
  buffer.append(chunk, static_cast<std::size_t>(n));
  return ReadResult::Data;
}

std::optional<std::string> next_line(std::string& buffer)
{
  auto nl = buffer.find('\n');
  if (nl == std::string::npos)
    return std::nullopt;
  std::string line = buffer.substr(0, nl);
  buffer.erase(0, nl + 1);
  if (!line.empty() && line.back() == '\r')
    line.pop_back();
  return line;
}

Fd open_listener(const std::string& host, std::uint16_t port, int& bound_port)
{
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE | AI_NUMERICSERV;
  addrinfo* res = nullptr;
  auto service = std::to_string(port);
  if (::getaddrinfo(host.empty() ? nullptr : host.c_str(), service.c_str(), &hints, &res) != 0 || !res)
    return {};
  Fd fd(::socket(res->ai_family, res->ai_socktype, res->ai_protocol));
  int one = 1;
  bool ok = fd && ::setsockopt(fd.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one) == 0 &&
            ::bind(fd.get(), res->ai_addr, res->ai_addrlen) == 0 && ::listen(fd.get(), 128) == 0;
  ::freeaddrinfo(res);
  if (!ok)
    return {};
  sockaddr_in addr{};
  socklen_t len = sizeof addr;
  ::getsockname(fd.get(), reinterpret_cast<sockaddr*>(&addr), &len);
  bound_port = ntohs(addr.sin_port);
  return fd;
}

std::vector<std::string_view> split_words(std::string_view line)
{
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    auto sp = line.find(' ', pos);
    if (sp == std::string_view::npos)
      sp = line.size();
    out.push_back(line.substr(pos, sp - pos));
    pos = sp + 1;
  }
  return out;
}

constexpr std::size_t max_line = 64 * 1024;

struct LoopContext
{
  rscm::Subagent* subagent;
  std::shared_ptr<Runtime> runtime;
  ObjectId server;
};

void session_loop(const LoopContext& ctx, Fd sock);

void accept_loop(const LoopContext& ctx)
{
  auto& registry = ctx.subagent->registry();
  Fd listener;
  bool alarm_open = false;
  while (!ctx.runtime->stopping()) {
    {
      auto self = registry.resolve_as<SmppServer>(ctx.server);
      if (!self)
        break;
      if (!listener || self->rebind_requested()) {
        listener.reset();
        const auto& opts = ctx.runtime->options();
        auto port = opts.port_override ? *opts.port_override
                                       : static_cast<std::uint16_t>(seconds_value(self->config("Port")));
        int bound = 0;
        listener = open_listener(opts.bind_host, port, bound);
        if (!listener) {
          if (!alarm_open) {
            alarm_open = true;
            try {
              ctx.subagent->notify_alarm(rscm::AlarmKind::Raised, ctx.server, "ListenFailed",
                                         "cannot listen on " + opts.bind_host + ":" + std::to_string(port) + ": " +
                                             std::strerror(errno));
            } catch (const Error&) {
            }
          }
          self->set_listen_state(0, true);
        } else {
          if (alarm_open) {
            alarm_open = false;
            try {
              ctx.subagent->notify_alarm(rscm::AlarmKind::Cleared, ctx.server, "ListenFailed",
                                         "listening on port " + std::to_string(bound));
            } catch (const Error&) {
            }
          }
          self->set_listen_state(bound, false);
        }
      }
    }
    if (!listener) {
      std::this_thread::sleep_for(iteration);
      continue;
    }
    pollfd p{listener.get(), POLLIN, 0};
    if (::poll(&p, 1, static_cast<int>(iteration.count())) <= 0)
      continue;
    Fd client(::accept(listener.get(), nullptr, nullptr));
    if (!client)
      continue;
    timeval send_timeout{1, 0};
    ::setsockopt(client.get(), SOL_SOCKET, SO_SNDTIMEO, &send_timeout, sizeof send_timeout);
    auto shared = std::make_shared<Fd>(std::move(client));
    try {
      ctx.runtime->spawn([ctx, shared] { session_loop(ctx, std::move(*shared)); });
    } catch (const std::runtime_error&) {
      break;
    }
  }
  if (auto self = registry.resolve_as<SmppServer>(ctx.server))
    self->set_listen_state(0, false);
}

struct Session
{
  Session(const LoopContext& c, int f) : ctx(c), fd(f) {}

  const LoopContext& ctx;
  int fd;
  std::string buffer;
  std::shared_ptr<SmppConnection> temp;
  std::shared_ptr<SessionControl> control;
  std::optional<ObjectId> managed;
  ObjectId client;
  std::string system_id;
  Clock::time_point started = Clock::now();
  Clock::time_point last_activity = started;
  Clock::time_point last_enquire = started;
  std::optional<std::string> closing;

  void close_with(std::string reason)
  {
    send_line(fd, "CLOSED " + reason);
    closing = std::move(reason);
  }

  // BIND_FAIL reason, or nullopt on success.
  std::optional<std::string> bind(SmppServer& server, std::string_view id, std::string_view password, BindType type)
  {
    auto& registry = ctx.subagent->registry();
    auto table_id = server.child("ExternalClientsTable");
    auto table = table_id ? registry.resolve(*table_id) : std::nullopt;
    auto client_id = table ? (*table)->child_by_key(id) : std::nullopt;
    auto client_obj = client_id ? registry.resolve(*client_id) : std::nullopt;
    if (!client_obj)
      return "UnknownSystemId";
    if ((*client_obj)->config("Password").value_or("") != password)
      return "InvalidPassword";
    auto permitted = parse_bind_type((*client_obj)->config("PermittedBindTypes").value_or("TRX"));
    if (!permitted || !permits(*permitted, type))
      return "BindTypeNotPermitted";

    auto session = std::make_shared<SessionControl>(type);
    if (server.config("BindProcessPolicy").value_or("") == "SwitchToKnownConnections") {
      auto conn_id = (*client_obj)->child("Connection");
      auto conn = conn_id ? registry.resolve_as<SmppConnection>(*conn_id) : nullptr;
      if (!conn)
        return "UnknownSystemId";
      if (!conn->attach_session(session))
        return "AlreadyBound";
      managed = *conn_id;
      temp.reset();
    } else {
      temp->attach_session(session);
    }
    control = std::move(session);
    client = *client_id;
    system_id = std::string(id);
    return std::nullopt;
  }

  void handle_line(SmppServer& server, SmppConnection& conn, const std::string& line)
  {
    auto now = Clock::now();
    last_activity = now;
    auto space = line.find(' ');
    std::string_view verb = std::string_view(line).substr(0, space);
    std::string_view rest = space == std::string::npos ? std::string_view() : std::string_view(line).substr(space + 1);

    if (verb == "BIND") {
      if (control) {
        send_line(fd, "BIND_FAIL AlreadyBound");
        return;
      }
      auto args = split_words(rest);
      auto type = args.size() == 3 ? parse_bind_type(args[2]) : std::nullopt;
      if (!type || args[0].empty()) {
        send_line(fd, "BIND_FAIL BadBind");
        closing = "BadBind";
        return;
      }
      if (auto failure = bind(server, args[0], args[1], *type)) {
        send_line(fd, "BIND_FAIL " + *failure);
        closing = *failure;
        return;
      }
      last_enquire = now;
      send_line(fd, "BIND_OK");
    } else if (verb == "ENQUIRE") {
      last_enquire = now;
      send_line(fd, "ENQUIRE_OK");
    } else if (verb == "UNBIND") {
      close_with("Unbound");
    } else if (verb == "SUBMIT") {
      if (!control) {
        close_with("NotBound");
        return;
      }
      conn.count_received();
      SubmitContext sc{*ctx.subagent, ctx.server, managed, client, system_id};
      std::string reply;
      try {
        reply = server.on_submit(sc, rest);
      } catch (const std::exception&) {
        reply = std::string(rest);
      }
      if (send_line(fd, "DELIVER " + reply))
        conn.count_sent();
      else
        closing = "SendFailed";
    } else {
      close_with("ProtocolError");
    }
  }

  void run()
  {
    auto& registry = ctx.subagent->registry();
    while (!closing) {
      auto read = poll_read(fd, buffer, iteration);
      if (read == ReadResult::Closed)
        break;
      if (ctx.runtime->stopping()) {
        close_with("Shutdown");
        break;
      }

      auto server = registry.resolve_as<SmppServer>(ctx.server);
      if (!server) {
        close_with("Shutdown");
        break;
      }
      std::shared_ptr<SmppConnection> conn = temp;
      if (managed) {
        conn = registry.resolve_as<SmppConnection>(*managed);
        if (!conn) {
          close_with("Deleted");
          break;
        }
      }
      if (control)
        if (auto reason = control->close_reason()) {
          close_with(*reason);
          break;
        }

      while (!closing)
        if (auto line = next_line(buffer))
          handle_line(*server, *conn, *line);
        else
          break;
      if (closing)
        break;
      if (buffer.size() > max_line) {
        close_with("ProtocolError");
        break;
      }

      auto now = Clock::now();
      auto elapsed = [&](Clock::time_point since) {
        return std::chrono::duration_cast<std::chrono::seconds>(now - since).count();
      };
      if (!control) {
        long limit = seconds_value(server->config("SessionInitTimeout"));
        if (limit > 0 && elapsed(started) >= limit)
          close_with("SessionInitTimeout");
      } else {
        long enquire = conn->enquire_link_timeout();
        long inactivity = conn->inactivity_timeout();
        if (enquire > 0 && elapsed(last_enquire) >= enquire)
          close_with("EnquireLinkTimeout");
        else if (inactivity > 0 && elapsed(last_activity) >= inactivity)
          close_with("InactivityTimeout");
      }
    }

    if (control) {
      if (managed) {
        if (auto conn = registry.resolve_as<SmppConnection>(*managed))
          conn->detach_session(control);
      } else if (temp) {
        temp->detach_session(control);
      }
    }
  }
};

void session_loop(const LoopContext& ctx, Fd sock)
{
  Session s{ctx, sock.get()};
  {
    auto server = ctx.subagent->registry().resolve_as<SmppServer>(ctx.server);
    if (!server)
      return;
    auto template_id = server->child("DefaultConnectionTemplate");
    auto tmpl = template_id ? ctx.subagent->registry().resolve(*template_id) : std::nullopt;
    s.temp = std::make_shared<SmppConnection>(tmpl ? (*tmpl)->class_name() : "SmppConnection");
    if (tmpl)
      s.temp->replace_config((*tmpl)->config_values());
    server->session_started();
  }
  s.run();
  if (auto server = ctx.subagent->registry().resolve_as<SmppServer>(ctx.server))
    server->session_ended();
}

} // namespace

// ---------------------------------------------------------------------------
// SmppServer

SmppServer::SmppServer(std::string class_name, rscm::Subagent& subagent, std::shared_ptr<Runtime> runtime)
  : ManagedObject(std::move(class_name), rscm::ObjectKind::Simple), subagent_(subagent), runtime_(std::move(runtime))
{
}

std::vector<std::string> SmppServer::monitoring_variables() const { return {"BoundPort", "ActiveSessions"}; }

std::optional<std::string> SmppServer::monitoring_value(std::string_view name) const
{
  if (name == "BoundPort")
    return std::to_string(bound_port_.load());
  if (name == "ActiveSessions")
    return std::to_string(active_sessions_.load());
  return std::nullopt;
}

void SmppServer::on_attached()
{
  if (!runtime_->options().listen)
    return;
  LoopContext ctx{&subagent_, runtime_, id()};
  runtime_->spawn([ctx] { accept_loop(ctx); });
}

void SmppServer::on_reconfigured(const std::vector<std::string>& changed)
{
  if (std::find(changed.begin(), changed.end(), "Port") != changed.end() && !runtime_->options().port_override)
    rebind_ = true;
}

std::string SmppServer::on_submit(const SubmitContext&, std::string_view text) { return std::string(text); }

bool SmppServer::wait_listening(std::chrono::milliseconds timeout) const
{
  std::unique_lock lock(listen_mutex_);
  listen_cv_.wait_for(lock, timeout, [&] { return bound_port_.load() > 0 || listen_failed_.load(); });
  return bound_port_.load() > 0;
}

bool SmppServer::rebind_requested() { return rebind_.exchange(false); }

void SmppServer::set_listen_state(int port, bool failed)
{
  {
    std::lock_guard lock(listen_mutex_);
    bound_port_ = port;
    listen_failed_ = failed;
  }
  listen_cv_.notify_all();
}

// ---------------------------------------------------------------------------

rscm::ClassFactory make_factory(std::shared_ptr<Runtime> runtime)
{
  rscm::ClassFactory f;
  f.add("SmppServer", [runtime](const rscm::FactoryContext& ctx) {
    return std::make_shared<SmppServer>(ctx.descriptor.class_name, ctx.subagent, runtime);
  });
  f.add("SmppConnection",
        [](const rscm::FactoryContext& ctx) { return std::make_shared<SmppConnection>(ctx.descriptor.class_name); });
  f.add("SmppExternalClient",
        [](const rscm::FactoryContext& ctx) { return std::make_shared<SmppExternalClient>(ctx.descriptor.class_name); },
        {"Password"});
  f.add_plain("SmppExternalClientsTable");
  return f;
}

} // namespace smpplite
