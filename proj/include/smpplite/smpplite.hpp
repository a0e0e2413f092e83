#pragma once

#include "rscm/subagent.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

// Manageable server-side networking over a newline-delimited text protocol.
//
//   client -> server: BIND <SystemId> <Password> <TX|RX|TRX>, SUBMIT <text>, ENQUIRE, UNBIND
//   server -> client: BIND_OK, BIND_FAIL <reason>, DELIVER <text>, ENQUIRE_OK, CLOSED <reason>
//
// Every network thread holds managed-object handles only for one loop
// iteration (at most `iteration` long) and re-resolves them by ObjectId, so a
// deleted object is finalized and its socket closed shortly after DELETE.
namespace smpplite
{

using Clock = std::chrono::steady_clock;
constexpr std::chrono::milliseconds iteration{100};

enum class BindType
{
  TX,
  RX,
  TRX,
};

std::optional<BindType> parse_bind_type(std::string_view text);
std::string_view to_string(BindType type);
// TRX permits every bind type; TX and RX permit only themselves.
bool permits(BindType permitted, BindType requested);

// Owns the threads of every server, session and connection loop of one
// application, so that shutdown can stop and join them before the MIB goes
// away.
class Runtime
{
public:
  struct Options
  {
    bool listen = true;
    std::string bind_host = "0.0.0.0";
    // Replaces the configured Port; 0 picks a free port (see BoundPort).
    std::optional<std::uint16_t> port_override;
  };

  explicit Runtime(Options options) : options_(std::move(options)) {}
  Runtime() : Runtime(Options{}) {}
  ~Runtime();

  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  const Options& options() const noexcept { return options_; }
  bool stopping() const noexcept { return stopping_.load(); }

  void spawn(std::function<void()> fn);
  // Signals every loop to finish and joins all threads.
  void stop();
  std::size_t live_threads() const;

private:
  struct Worker
  {
    std::thread thread;
    std::atomic<bool> done{false};
  };
  void reap_locked();

  Options options_;
  std::atomic<bool> stopping_{false};
  mutable std::mutex mutex_;
  std::list<Worker> workers_;
};

// Control block of one live socket; shared between the loop that owns the
// socket and the managed connection that may be asked to drop it.
class SessionControl
{
public:
  explicit SessionControl(BindType bind_type) : bind_type_(bind_type) {}

  void request_close(std::string reason);
  std::optional<std::string> close_reason() const;
  BindType bind_type() const noexcept { return bind_type_; }

private:
  BindType bind_type_;
  mutable std::mutex mutex_;
  std::optional<std::string> reason_;
};

class SmppConnection : public rscm::ManagedObject
{
public:
  explicit SmppConnection(std::string class_name);
  ~SmppConnection() override;

  std::vector<std::string> monitoring_variables() const override;
  std::optional<std::string> monitoring_value(std::string_view name) const override;
  std::string do_action(std::string_view name, const rscm::ActionArgs& args) override;
  void on_released() override;

  // Seconds; 0 disables the check.
  long enquire_link_timeout() const;
  long inactivity_timeout() const;

  // False if another session already holds this connection.
  bool attach_session(std::shared_ptr<SessionControl> session);
  void detach_session(const std::shared_ptr<SessionControl>& session);
  bool bound() const;

  void count_received() noexcept { received_.fetch_add(1, std::memory_order_relaxed); }
  void count_sent() noexcept { sent_.fetch_add(1, std::memory_order_relaxed); }
  std::uint64_t messages_received() const noexcept { return received_.load(); }
  std::uint64_t messages_sent() const noexcept { return sent_.load(); }

  // Test hook: called from the destructor.
  static inline std::atomic<std::uint64_t> finalized_count{0};

private:
  std::atomic<std::uint64_t> received_{0};
  std::atomic<std::uint64_t> sent_{0};
  mutable std::mutex session_mutex_;
  std::shared_ptr<SessionControl> session_;
};

class SmppExternalClient : public rscm::ManagedObject
{
public:
  explicit SmppExternalClient(std::string class_name) : ManagedObject(std::move(class_name), rscm::ObjectKind::Simple) {}
};

struct SubmitContext
{
  rscm::Subagent& subagent;
  rscm::ObjectId server;
  // Absent for clients served on their initial connection.
  std::optional<rscm::ObjectId> connection;
  rscm::ObjectId client;
  std::string system_id;
};

class SmppServer : public rscm::ManagedObject
{
public:
  SmppServer(std::string class_name, rscm::Subagent& subagent, std::shared_ptr<Runtime> runtime);

  std::vector<std::string> monitoring_variables() const override;
  std::optional<std::string> monitoring_value(std::string_view name) const override;
  void on_attached() override;
  void on_reconfigured(const std::vector<std::string>& changed) override;

  // Reply text for one SUBMIT; the default echoes it back.
  virtual std::string on_submit(const SubmitContext& ctx, std::string_view text);

  int bound_port() const noexcept { return bound_port_.load(); }
  // Blocks until the listener is up (or failed); false on timeout or failure.
  bool wait_listening(std::chrono::milliseconds timeout) const;

  // Used by the network loops.
  bool rebind_requested();
  void set_listen_state(int port, bool failed);
  void session_started() noexcept { active_sessions_.fetch_add(1); }
  void session_ended() noexcept { active_sessions_.fetch_sub(1); }

protected:
  rscm::Subagent& subagent() const noexcept { return subagent_; }

private:
  rscm::Subagent& subagent_;
  std::shared_ptr<Runtime> runtime_;
  std::atomic<int> bound_port_{0};
  std::atomic<bool> rebind_{false};
  std::atomic<bool> listen_failed_{false};
  std::atomic<std::uint64_t> active_sessions_{0};
  mutable std::mutex listen_mutex_;
  mutable std::condition_variable listen_cv_;
};

// Registers SmppServer, SmppConnection, SmppExternalClient (Password is a
// password parameter) and SmppExternalClientsTable.
rscm::ClassFactory make_factory(std::shared_ptr<Runtime> runtime);

} // namespace smpplite
