#pragma once

#include "rscm/subagent.hpp"
#include "smpplite/smpplite.hpp"

#include <deque>
#include <functional>
#include <map>
#include <memory>

// Demonstration application: replaces misspelled words in submitted
// messages according to a managed rules table, with a per-client rolling
// one-minute budget of replacements.
namespace wordreplacer
{

using Clock = smpplite::Clock;
using ClockFn = std::function<Clock::time_point()>;

class WordReplacementRule : public rscm::ManagedObject
{
public:
  explicit WordReplacementRule(std::string class_name) : ManagedObject(std::move(class_name), rscm::ObjectKind::Simple) {}

  std::vector<std::string> monitoring_variables() const override { return {"TimesApplied"}; }
  std::optional<std::string> monitoring_value(std::string_view name) const override;

  void applied() noexcept { times_applied_.fetch_add(1, std::memory_order_relaxed); }
  std::uint64_t times_applied() const noexcept { return times_applied_.load(); }

private:
  std::atomic<std::uint64_t> times_applied_{0};
};

struct PlannedReplacement
{
  std::size_t offset = 0;
  std::size_t length = 0;
  rscm::ObjectId rule;
  std::string new_word;
};

// Whitespace-separated tokens that exactly match a rule's OriginalWord. An
// absent or deleted rules list yields no replacements.
std::vector<PlannedReplacement> plan_replacements(const rscm::ObjectRegistry& registry,
                                                  std::optional<rscm::ObjectId> rules_list, std::string_view text);

// Composes the new text (single pass, separators preserved) and counts each
// applied rule that still exists.
std::string apply_replacements(const rscm::ObjectRegistry& registry, std::string_view text,
                               const std::vector<PlannedReplacement>& plan);

std::string replace_words(const rscm::ObjectRegistry& registry, std::optional<rscm::ObjectId> rules_list,
                          std::string_view text);

class WordReplacer : public rscm::ManagedObject
{
public:
  WordReplacer(std::string class_name, rscm::Subagent& subagent)
    : ManagedObject(std::move(class_name), rscm::ObjectKind::Simple), subagent_(subagent)
  {
  }

  // ReplaceWord(Word); does not consume any client's license.
  std::string do_action(std::string_view name, const rscm::ActionArgs& args) override;

private:
  rscm::Subagent& subagent_;
};

// Rolling-window budget of replaced words.
class LicenseWindow
{
public:
  static constexpr std::chrono::seconds window{60};

  // Records `count` replacements at `now` if they fit under `license`.
  bool try_consume(Clock::time_point now, std::uint64_t count, std::uint64_t license);
  std::uint64_t used(Clock::time_point now);

private:
  void expire(Clock::time_point now);

  std::deque<std::pair<Clock::time_point, std::uint64_t>> events_;
  std::uint64_t used_ = 0;
};

class WR_Server : public smpplite::SmppServer
{
public:
  WR_Server(std::string class_name, rscm::Subagent& subagent, std::shared_ptr<smpplite::Runtime> runtime, ClockFn clock);

  // Replaces words within the client's license; a message that would exceed
  // it is delivered unchanged and raises LicenseExceeded on the client.
  std::string on_submit(const smpplite::SubmitContext& ctx, std::string_view text) override;

private:
  struct ClientBudget
  {
    LicenseWindow window;
    bool alarm_open = false;
  };

  ClockFn clock_;
  std::mutex budgets_mutex_;
  std::map<rscm::ObjectId, ClientBudget> budgets_;
};

std::vector<std::pair<std::string_view, std::string_view>> schema_resources();
std::string_view sample_configuration();
std::vector<rscm::schema::SchemaDocument> schema_documents();
rscm::schema::UnifiedSchema unified_schema();

rscm::ClassFactory make_factory(std::shared_ptr<smpplite::Runtime> runtime, ClockFn clock = Clock::now);

struct ApplicationOptions
{
  std::filesystem::path config_path;
  rscm::PasswordCipher cipher;
  smpplite::Runtime::Options network;
  ClockFn clock = Clock::now;
  rscm::WriteFaultHook persist_fault;
};

// The whole application: MIB, subagent and network runtime. Destruction
// stops every network thread before the MIB is torn down.
class Application
{
public:
  explicit Application(ApplicationOptions options);
  ~Application();

  Application(const Application&) = delete;
  Application& operator=(const Application&) = delete;

  // Loads the configuration file, writing the shipped sample first when the
  // file does not exist yet.
  void load();
  void load_from_text(std::string_view config_text);
  void stop();

  rscm::Subagent& subagent() { return *subagent_; }
  smpplite::Runtime& runtime() { return *runtime_; }
  // Listening port of the SMPP-like server once it is up; 0 otherwise.
  int smpp_port(std::chrono::milliseconds wait = std::chrono::seconds(5));

private:
  std::shared_ptr<smpplite::Runtime> runtime_;
  std::unique_ptr<rscm::Subagent> subagent_;
};

} // namespace wordreplacer
