#include "wordreplacer/wordreplacer.hpp"

#include "rscm/mib.hpp"

#include <charconv>

namespace wordreplacer
{

namespace embedded
{
std::vector<std::pair<std::string_view, std::string_view>> schemas();
std::vector<std::pair<std::string_view, std::string_view>> samples();
} // namespace embedded

using rscm::ObjectId;

std::optional<std::string> WordReplacementRule::monitoring_value(std::string_view name) const
{
  if (name == "TimesApplied")
    return std::to_string(times_applied());
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// replacement

namespace
{

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::uint64_t unsigned_value(const std::optional<std::string>& text)
{
  std::uint64_t v = 0;
  if (text)
    std::from_chars(text->data(), text->data() + text->size(), v);
  return v;
}

std::optional<ObjectId> rules_list_of(const rscm::ManagedObject& app) { return app.child("WordReplacementRulesList"); }

} // namespace

std::vector<PlannedReplacement> plan_replacements(const rscm::ObjectRegistry& registry,
                                                  std::optional<ObjectId> rules_list, std::string_view text)
{
  std::vector<PlannedReplacement> plan;
  if (!rules_list)
    return plan;
  auto list = registry.resolve(*rules_list);
  if (!list)
    return plan;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i]))
      ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i]))
      ++i;
    if (i == start)
      break;
    auto token = text.substr(start, i - start);
    auto rule_id = (*list)->child_by_key(token);
    if (!rule_id)
      continue;
    auto rule = registry.resolve(*rule_id);
    if (!rule)
      continue;
    if (auto new_word = (*rule)->config("NewWord"))
      plan.push_back({start, i - start, *rule_id, *new_word});
  }
  return plan;
}

std::string apply_replacements(const rscm::ObjectRegistry& registry, std::string_view text,
                               const std::vector<PlannedReplacement>& plan)
{
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  for (const auto& r : plan) {
    out.append(text.substr(pos, r.offset - pos));
    out.append(r.new_word);
    pos = r.offset + r.length;
    if (auto rule = registry.resolve_as<WordReplacementRule>(r.rule))
      rule->applied();
  }
  out.append(text.substr(pos));
  return out;
}

std::string replace_words(const rscm::ObjectRegistry& registry, std::optional<ObjectId> rules_list,
                          std::string_view text)
{
  return apply_replacements(registry, text, plan_replacements(registry, rules_list, text));
}

std::string WordReplacer::do_action(std::string_view name, const rscm::ActionArgs& args)
{
  if (name != "ReplaceWord")
    throw rscm::Error(rscm::ErrorCode::NoSuchAction, "no action '" + std::string(name) + "'");
  auto word = args.find("Word");
  if (word == args.end())
    throw rscm::Error(rscm::ErrorCode::BadActionArgs, "ReplaceWord needs Word");
  return replace_words(subagent_.registry(), rules_list_of(*this), word->second);
}

// ---------------------------------------------------------------------------
// licensing

void LicenseWindow::expire(Clock::time_point now)
{
  while (!events_.empty() && now - events_.front().first >= window) {
    used_ -= events_.front().second;
    events_.pop_front();
  }
}

bool LicenseWindow::try_consume(Clock::time_point now, std::uint64_t count, std::uint64_t license)
{
  expire(now);
  if (used_ + count > license)
    return false;
  events_.emplace_back(now, count);
  used_ += count;
  return true;
}

std::uint64_t LicenseWindow::used(Clock::time_point now)
{
  expire(now);
  return used_;
}

WR_Server::WR_Server(std::string class_name, rscm::Subagent& subagent, std::shared_ptr<smpplite::Runtime> runtime,
                     ClockFn clock)
  : SmppServer(std::move(class_name), subagent, std::move(runtime)), clock_(std::move(clock))
{
}

std::string WR_Server::on_submit(const smpplite::SubmitContext& ctx, std::string_view text)
{
  auto& registry = ctx.subagent.registry();
  std::optional<ObjectId> rules;
  if (auto app_id = parent())
    if (auto app = registry.resolve(*app_id))
      rules = rules_list_of(**app);

  auto plan = plan_replacements(registry, rules, text);
  if (plan.empty())
    return std::string(text);

  auto client = registry.resolve(ctx.client);
  if (!client)
    return std::string(text);
  auto license = unsigned_value((*client)->config("WordReplacementLicensePerMinute"));

  enum class Alarm { None, Raise, Clear } alarm = Alarm::None;
  bool allowed;
  {
    std::lock_guard lock(budgets_mutex_);
    auto& budget = budgets_[ctx.client];
    allowed = budget.window.try_consume(clock_(), plan.size(), license);
    if (!allowed && !budget.alarm_open) {
      budget.alarm_open = true;
      alarm = Alarm::Raise;
    } else if (allowed && budget.alarm_open) {
      budget.alarm_open = false;
      alarm = Alarm::Clear;
    }
  }
  try {
    if (alarm == Alarm::Raise)
      ctx.subagent.notify_alarm(rscm::AlarmKind::Raised, ctx.client, "LicenseExceeded",
                                ctx.system_id + " exceeded " + std::to_string(license) + " replacements per minute");
    else if (alarm == Alarm::Clear)
      ctx.subagent.notify_alarm(rscm::AlarmKind::Cleared, ctx.client, "LicenseExceeded",
                                ctx.system_id + " is back within its license");
  } catch (const rscm::Error&) {
  }
  if (!allowed)
    return std::string(text);
  return apply_replacements(registry, text, plan);
}

// ---------------------------------------------------------------------------
// application

std::vector<std::pair<std::string_view, std::string_view>> schema_resources() { return embedded::schemas(); }

std::string_view sample_configuration() { return embedded::samples().front().second; }

std::vector<rscm::schema::SchemaDocument> schema_documents()
{
  std::vector<rscm::schema::SchemaDocument> docs;
  for (const auto& [name, text] : schema_resources())
    docs.push_back(rscm::schema::parse_schema(text));
  return docs;
}

rscm::schema::UnifiedSchema unified_schema()
{
  return rscm::schema::compose_unified_schema(schema_documents(), rscm::xml::parse(sample_configuration()));
}

rscm::ClassFactory make_factory(std::shared_ptr<smpplite::Runtime> runtime, ClockFn clock)
{
  rscm::ClassFactory f = smpplite::make_factory(runtime);
  f.add("WordReplacer", [](const rscm::FactoryContext& ctx) {
    return std::make_shared<WordReplacer>(ctx.descriptor.class_name, ctx.subagent);
  });
  f.add("WR_Server", [runtime, clock](const rscm::FactoryContext& ctx) {
    return std::make_shared<WR_Server>(ctx.descriptor.class_name, ctx.subagent, runtime, clock);
  });
  f.add("WR_Connection", [](const rscm::FactoryContext& ctx) {
    return std::make_shared<smpplite::SmppConnection>(ctx.descriptor.class_name);
  });
  f.add("WR_ExternalClient",
        [](const rscm::FactoryContext& ctx) {
          return std::make_shared<smpplite::SmppExternalClient>(ctx.descriptor.class_name);
        },
        {"Password"});
  f.add_plain("WR_ExternalClientsTable");
  f.add_plain("WordReplacementRulesList");
  f.add("WordReplacementRule", [](const rscm::FactoryContext& ctx) {
    return std::make_shared<WordReplacementRule>(ctx.descriptor.class_name);
  });
  return f;
}

Application::Application(ApplicationOptions options)
  : runtime_(std::make_shared<smpplite::Runtime>(options.network))
{
  rscm::SubagentOptions sub{std::move(options.config_path), std::move(options.cipher), std::move(options.persist_fault)};
  subagent_ = std::make_unique<rscm::Subagent>(unified_schema(), make_factory(runtime_, std::move(options.clock)),
                                               std::move(sub));
}

Application::~Application() { stop(); }

void Application::load()
{
  const auto& path = subagent_->options().config_path;
  if (!path.empty() && !std::filesystem::exists(path))
    rscm::write_file_atomically(path, sample_configuration());
  subagent_->load_from_file();
}

void Application::load_from_text(std::string_view config_text) { subagent_->load_from_config(config_text); }

void Application::stop()
{
  runtime_->stop();
  if (subagent_)
    subagent_->shutdown();
}

int Application::smpp_port(std::chrono::milliseconds wait)
{
  auto id = rscm::resolve_path(subagent_->registry(), subagent_->root(),
                               rscm::RdnPath::parse("WordReplacer,WordReplacerServer"));
  if (!id)
    return 0;
  auto server = subagent_->registry().resolve_as<smpplite::SmppServer>(*id);
  if (!server || !server->wait_listening(wait))
    return 0;
  return server->bound_port();
}

} // namespace wordreplacer
