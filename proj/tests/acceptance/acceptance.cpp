// Acceptance runner: one PASS/FAIL line per release criterion.

#include "app_fixture.hpp"
#include "transcript.hpp"

#include "rscm/cli.hpp"
#include "rscm/mgmt_service.hpp"

#include <array>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

using namespace std::chrono_literals;
using fixtures::LineClient;
using fixtures::RunningApp;
using rscm::RdnPath;
using steady = std::chrono::steady_clock;

namespace
{

struct Outcome
{
  bool pass = true;
  std::string detail;

  void fail(const std::string& why)
  {
    if (pass)
      detail.clear();
    pass = false;
    detail += (detail.empty() ? "" : "; ") + why;
  }
  void note(const std::string& text)
  {
    if (pass)
      detail += (detail.empty() ? "" : ", ") + text;
  }
};

double ms_since(steady::time_point t) { return std::chrono::duration<double, std::milli>(steady::now() - t).count(); }

std::string fmt_ms(double ms)
{
  std::ostringstream os;
  os.precision(1);
  os << std::fixed << ms << " ms";
  return os.str();
}

const std::string server_path = "WordReplacer,WordReplacerServer";
const std::string table_path = server_path + ",ExternalClientsTable";
const std::string rules_path = "WordReplacer,WordReplacementRulesList";

std::string client_path(const std::string& id) { return table_path + ",ExternalClient=\"" + id + "\""; }
std::string rule_path(const std::string& word) { return rules_path + ",WordReplacementRule=\"" + word + "\""; }

using Assignments = std::vector<std::pair<std::string, std::string>>;

Assignments client_assignments(const std::string& id, const std::string& password, const std::string& license)
{
  return {{"SystemId", id},
          {"SystemType", "Load"},
          {"Password", password},
          {"PermittedBindTypes", "TRX"},
          {"WordReplacementLicensePerMinute", license},
          {"Connection.EnquireLinkTimeout", "60"},
          {"Connection.InactivityTimeout", "600"},
          {"Connection.ResponseTimeout", "30"}};
}

// Polls `done` until it holds or `limit` passes.
template <class Pred>
bool eventually(Pred done, std::chrono::milliseconds limit)
{
  auto deadline = steady::now() + limit;
  while (!done()) {
    if (steady::now() >= deadline)
      return false;
    std::this_thread::sleep_for(1ms);
  }
  return true;
}

// ---------------------------------------------------------------------------

Outcome transcript_goldens()
{
  Outcome out;
  auto start = steady::now();
  struct Case
  {
    std::string config, script, golden;
  };
  const std::vector<Case> cases{
    {fixtures::sample_config(), "add_rule.script", "add_rule.golden"},
    {fixtures::data_file("deletion_rules.xml"), "delete_objects.script", "delete_objects.golden"},
  };
  for (const auto& c : cases) {
    RunningApp app(c.config, wordreplacer::Clock::now, false);
    rscm::mgmt::ManagementService service(app.subagent());
    rscm::mgmt::HttpEndpoint endpoint(service);
    int port = endpoint.start({"127.0.0.1", 0});
    rscm::mgmt::HttpTransport transport({"127.0.0.1", port});
    auto got = fixtures::run_transcript(transport, fixtures::data_file(c.script));
    auto diff = fixtures::first_difference(fixtures::data_file(c.golden), got);
    if (!diff.empty())
      out.fail(c.script + " " + diff);
  }
  double elapsed = ms_since(start);
  if (elapsed >= 5000)
    out.fail("took " + fmt_ms(elapsed));
  out.note("2 transcripts over HTTP in " + fmt_ms(elapsed));
  return out;
}

// ---------------------------------------------------------------------------

Outcome hot_deletion()
{
  Outcome out;
  constexpr int reps = 50;
  RunningApp app;
  auto& sub = app.subagent();
  double min_rate = 1e18, max_finalize = 0, max_close = 0;
  int passed = 0;

  for (int rep = 0; rep < reps; ++rep) {
    std::string id = "Hot" + std::to_string(rep);
    sub.create_managed_object(RdnPath::parse(table_path), client_assignments(id, "pw" + id, "4000000000"));
    auto conn_id = app.id_of(client_path(id) + ",Connection");

    LineClient client(app.port);
    client.send("BIND " + id + " pw" + id + " TRX");
    if (client.read_line() != "BIND_OK") {
      out.fail("rep " + std::to_string(rep) + ": bind failed");
      continue;
    }
    std::weak_ptr<smpplite::SmppConnection> watch = sub.registry().resolve_as<smpplite::SmppConnection>(conn_id);

    std::atomic<bool> stop{false};
    std::atomic<std::uint64_t> delivered{0};
    std::atomic<bool> saw_close{false};
    std::thread sender([&] {
      auto next = steady::now();
      while (!stop) {
        for (int k = 0; k < 20; ++k)
          if (!client.send("SUBMIT load beleive " + std::to_string(k))) {
            stop = true;
            return;
          }
        next += 10ms;
        std::this_thread::sleep_until(next);
      }
    });
    std::thread reader([&] {
      while (!client.closed()) {
        auto line = client.read_line(20ms);
        if (line && line->starts_with("DELIVER "))
          delivered.fetch_add(1);
        else if (line && line->starts_with("CLOSED "))
          saw_close = true;
      }
      saw_close = true;
    });

    std::this_thread::sleep_for(150ms);
    auto window_start = steady::now();
    auto base = delivered.load();
    std::this_thread::sleep_for(300ms);
    double rate = static_cast<double>(delivered.load() - base) / (ms_since(window_start) / 1000.0);
    min_rate = std::min(min_rate, rate);

    auto t0 = steady::now();
    sub.delete_managed_object(RdnPath::parse(client_path(id)));
    bool absent = !sub.registry().resolve(conn_id).has_value() &&
                  !rscm::resolve_path(sub.registry(), sub.root(), RdnPath::parse(client_path(id) + ",Connection"));
    bool finalized = eventually([&] { return watch.expired(); }, 1000ms);
    double finalize_ms = ms_since(t0);
    bool closed = eventually([&] { return saw_close.load(); }, 1000ms);
    double close_ms = ms_since(t0);

    stop = true;
    sender.join();
    ::shutdown(client.fd(), SHUT_RDWR);
    reader.join();

    max_finalize = std::max(max_finalize, finalize_ms);
    max_close = std::max(max_close, close_ms);
    std::string tag = "rep " + std::to_string(rep) + ": ";
    if (rate < 1000)
      out.fail(tag + "load only " + std::to_string(static_cast<int>(rate)) + " msg/s");
    if (!absent)
      out.fail(tag + "still resolvable after delete");
    if (!finalized)
      out.fail(tag + "not finalized within 1 s");
    if (!closed)
      out.fail(tag + "socket not closed within 1 s");
    if (rate >= 1000 && absent && finalized && closed)
      ++passed;
  }
  out.note(std::to_string(passed) + "/" + std::to_string(reps) + " reps, min load " +
           std::to_string(static_cast<int>(min_rate)) + " msg/s, max finalize " + fmt_ms(max_finalize) +
           ", max close " + fmt_ms(max_close));
  return out;
}

// ---------------------------------------------------------------------------

using State = std::map<std::string, std::map<std::string, std::string>>;

State capture(const rscm::Subagent& sub)
{
  State state;
  std::vector<rscm::ObjectId> stack{sub.root()};
  while (!stack.empty()) {
    auto id = stack.back();
    stack.pop_back();
    auto node = sub.registry().resolve(id);
    if (!node)
      continue;
    auto path = rscm::canonical_path(sub.registry(), id);
    auto& entry = state[path ? path->str() : "?"];
    for (auto& [k, v] : (*node)->config_values())
      entry[k] = v;
    for (const auto& link : (*node)->children())
      stack.push_back(link.id);
  }
  return state;
}

std::string describe_difference(const State& want, const State& got)
{
  for (const auto& [path, params] : want) {
    auto it = got.find(path);
    if (it == got.end())
      return "missing " + path;
    if (it->second != params)
      return "params differ at " + path;
  }
  for (const auto& [path, _] : got)
    if (!want.contains(path))
      return "unexpected " + path;
  return {};
}

struct PersistedApp
{
  fixtures::TempDir dir;
  std::filesystem::path config = dir / "wordreplacer.xml";
  std::shared_ptr<bool> fault = std::make_shared<bool>(false);
  std::unique_ptr<wordreplacer::Application> app;

  static wordreplacer::ApplicationOptions options(const std::filesystem::path& path)
  {
    wordreplacer::ApplicationOptions o;
    o.config_path = path;
    o.cipher = rscm::PasswordCipher(std::string("acceptance-secret"));
    o.network.listen = false;
    return o;
  }

  PersistedApp()
  {
    rscm::write_file_atomically(config, fixtures::sample_config());
    auto o = options(config);
    o.persist_fault = [f = fault](rscm::WriteStage stage) {
      if (*f && stage == rscm::WriteStage::BeforeRename)
        throw rscm::Error(rscm::ErrorCode::PersistFailed, "injected fault");
    };
    app = std::make_unique<wordreplacer::Application>(std::move(o));
    app->load();
  }

  State reload() const
  {
    auto copy = dir / "reload.xml";
    std::filesystem::copy_file(config, copy, std::filesystem::copy_options::overwrite_existing);
    wordreplacer::Application fresh(options(copy));
    fresh.load();
    return capture(fresh.subagent());
  }
};

Outcome persistence_round_trip()
{
  Outcome out;
  PersistedApp p;
  auto& sub = p.app->subagent();
  State model = capture(sub);
  std::mt19937 rng(20240607);
  auto pick = [&](auto lo, auto hi) { return std::uniform_int_distribution<long long>(lo, hi)(rng); };
  auto word = [&] {
    std::string w;
    for (int i = 0, n = static_cast<int>(pick(3, 8)); i < n; ++i)
      w += static_cast<char>('a' + pick(0, 25));
    return w;
  };
  auto keys_under = [&](const std::string& prefix) {
    std::vector<std::string> keys;
    for (const auto& [path, _] : model) {
      auto q = path.rfind("=\"");
      if (path.starts_with(prefix) && q != std::string::npos && path.find(',', prefix.size() + 1) == std::string::npos)
        keys.push_back(path.substr(q + 2, path.size() - q - 3));
    }
    return keys;
  };
  auto erase_subtree = [&](const std::string& path) {
    for (auto it = model.begin(); it != model.end();)
      it = (it->first == path || it->first.starts_with(path + ",")) ? model.erase(it) : std::next(it);
  };
  const std::array<std::string, 3> bind_types{"TX", "RX", "TRX"};

  int valid = 0, rejected = 0;
  for (int step = 0; step < 500 && out.pass; ++step) {
    auto rules = keys_under(rules_path + ",WordReplacementRule");
    auto clients = keys_under(table_path + ",ExternalClient");
    State next = model;
    std::function<void()> op;
    std::string label;
    bool expect_failure = pick(0, 9) < 3;

    if (!expect_failure) {
      switch (pick(0, 7)) {
      case 0: {
        auto w = word();
        if (next.contains(rule_path(w)))
          w += "q";
        auto nw = word();
        label = "create rule " + w;
        next[rule_path(w)] = {{"OriginalWord", w}, {"NewWord", nw}};
        op = [&sub, w, nw] { sub.create_managed_object(RdnPath::parse(rules_path), {{"OriginalWord", w}, {"NewWord", nw}}); };
        break;
      }
      case 1:
        if (!rules.empty()) {
          auto w = rules[pick(0ul, rules.size() - 1)];
          label = "delete rule " + w;
          next.erase(rule_path(w));
          op = [&sub, w] { sub.delete_managed_object(RdnPath::parse(rule_path(w))); };
          break;
        }
        [[fallthrough]];
      case 2:
        if (!rules.empty()) {
          auto w = rules[pick(0ul, rules.size() - 1)];
          auto nw = word();
          label = "set rule " + w;
          next[rule_path(w)]["NewWord"] = nw;
          op = [&sub, w, nw] { sub.set_configuration_parameters(RdnPath::parse(rule_path(w)), {{"NewWord", nw}}); };
          break;
        }
        [[fallthrough]];
      case 3: {
        auto id = "C" + word();
        auto pw = word();
        auto bt = bind_types[pick(0, 2)];
        auto lic = std::to_string(pick(0, 100000));
        auto enq = std::to_string(pick(0, 300)), inact = std::to_string(pick(0, 3000));
        auto resp = std::to_string(pick(1, 60));
        label = "create client " + id;
        next[client_path(id)] = {{"SystemId", id}, {"SystemType", "T"}, {"Password", pw}, {"PermittedBindTypes", bt},
                                 {"WordReplacementLicensePerMinute", lic}};
        next[client_path(id) + ",Connection"] = {{"EnquireLinkTimeout", enq}, {"InactivityTimeout", inact},
                                                 {"ResponseTimeout", resp}};
        Assignments a{{"SystemId", id}, {"SystemType", "T"}, {"Password", pw}, {"WordReplacementLicensePerMinute", lic},
                      {"Connection.EnquireLinkTimeout", enq}, {"Connection.InactivityTimeout", inact},
                      {"Connection.ResponseTimeout", resp}};
        if (bt != "TRX" || pick(0, 1))
          a.emplace_back("PermittedBindTypes", bt);
        op = [&sub, a] { sub.create_managed_object(RdnPath::parse(table_path), a); };
        break;
      }
      case 4:
        if (clients.size() > 1) {
          auto id = clients[pick(0ul, clients.size() - 1)];
          label = "delete client " + id;
          std::swap(model, next);
          erase_subtree(client_path(id));
          std::swap(model, next);
          op = [&sub, id] { sub.delete_managed_object(RdnPath::parse(client_path(id))); };
          break;
        }
        [[fallthrough]];
      case 5:
        if (!clients.empty()) {
          auto id = clients[pick(0ul, clients.size() - 1)];
          Assignments a{{"SystemType", word()}, {"Password", word()}, {"PermittedBindTypes", bind_types[pick(0, 2)]},
                        {"WordReplacementLicensePerMinute", std::to_string(pick(0, 999))}};
          a.resize(static_cast<std::size_t>(pick(1, 4)));
          label = "set client " + id;
          for (auto& [k, v] : a)
            next[client_path(id)][k] = v;
          op = [&sub, id, a] { sub.set_configuration_parameters(RdnPath::parse(client_path(id)), a); };
          break;
        }
        [[fallthrough]];
      case 6:
        if (!clients.empty()) {
          auto id = clients[pick(0ul, clients.size() - 1)];
          auto path = client_path(id) + ",Connection";
          Assignments a{{"InactivityTimeout", std::to_string(pick(0, 9999))}, {"ResponseTimeout", std::to_string(pick(1, 99))}};
          label = "set connection " + id;
          for (auto& [k, v] : a)
            next[path][k] = v;
          op = [&sub, path, a] { sub.set_configuration_parameters(RdnPath::parse(path), a); };
          break;
        }
        [[fallthrough]];
      default: {
        Assignments a{{"SessionInitTimeout", std::to_string(pick(1, 120))},
                      {"Port", std::to_string(pick(1024, 65535))},
                      {"BindProcessPolicy", pick(0, 1) ? "SwitchToKnownConnections" : "ContinueInitialConnection"}};
        label = "set server";
        for (auto& [k, v] : a)
          next[server_path][k] = v;
        op = [&sub, a] { sub.set_configuration_parameters(RdnPath::parse(server_path), a); };
      }
      }
    } else {
      switch (pick(0, 5)) {
      case 0:
        label = "port below minimum";
        op = [&sub] { sub.set_configuration_parameters(RdnPath::parse(server_path), {{"SessionInitTimeout", "5"}, {"Port", "80"}}); };
        break;
      case 1:
        if (!rules.empty()) {
          auto w = rules.front();
          label = "duplicate rule " + w;
          op = [&sub, w] { sub.create_managed_object(RdnPath::parse(rules_path), {{"OriginalWord", w}, {"NewWord", "x"}}); };
          break;
        }
        [[fallthrough]];
      case 2:
        if (!clients.empty()) {
          auto id = clients.front();
          label = "bad bind type";
          op = [&sub, id] {
            sub.set_configuration_parameters(RdnPath::parse(client_path(id)), {{"SystemType", "Z"}, {"PermittedBindTypes", "XYZ"}});
          };
          break;
        }
        [[fallthrough]];
      case 3:
        label = "delete missing";
        op = [&sub] { sub.delete_managed_object(RdnPath::parse(rule_path("nonexistentword"))); };
        break;
      case 4: {
        label = "client without license";
        auto a = client_assignments("Cmissing", "pw", "1");
        a.erase(a.begin() + 4);
        op = [&sub, a] { sub.create_managed_object(RdnPath::parse(table_path), a); };
        break;
      }
      default: {
        auto w = word() + "f";
        label = "persist fault on create " + w;
        op = [&sub, &p, w] {
          *p.fault = true;
          try {
            sub.create_managed_object(RdnPath::parse(rules_path), {{"OriginalWord", w}, {"NewWord", "n"}});
          } catch (...) {
            *p.fault = false;
            throw;
          }
          *p.fault = false;
        };
      }
      }
    }

    auto before = rscm::read_file(p.config);
    bool threw = false;
    try {
      op();
    } catch (const rscm::Error&) {
      threw = true;
    }
    std::string tag = "step " + std::to_string(step) + " (" + label + "): ";
    if (expect_failure) {
      ++rejected;
      if (!threw)
        out.fail(tag + "invalid operation accepted");
      if (rscm::read_file(p.config) != before)
        out.fail(tag + "file changed by a failed operation");
    } else {
      ++valid;
      if (threw)
        out.fail(tag + "valid operation rejected");
      model = std::move(next);
    }
    auto live = capture(sub);
    if (auto d = describe_difference(model, live); !d.empty())
      out.fail(tag + "live state vs model: " + d);
    if (auto d = describe_difference(live, p.reload()); !d.empty())
      out.fail(tag + "reloaded file vs live: " + d);
  }
  out.note(std::to_string(valid) + " valid + " + std::to_string(rejected) + " rejected operations, " +
           std::to_string(model.size()) + " objects at end");
  return out;
}

// ---------------------------------------------------------------------------

rscm::xml::Element* child_named(rscm::xml::Element& parent, const std::string& name)
{
  for (auto& c : parent.children)
    if (c.name == name)
      return &c;
  return nullptr;
}

rscm::xml::Element* find_path(rscm::xml::Element& root, const std::vector<std::string>& names)
{
  auto* node = &root;
  for (const auto& n : names)
    if (!(node = child_named(*node, n)))
      return nullptr;
  return node;
}

Outcome schema_suite()
{
  Outcome out;
  std::vector<rscm::schema::SchemaDocument> docs;
  for (const auto& f : fixtures::schema_files()) {
    try {
      docs.push_back(rscm::schema::parse_schema(fixtures::read_source(f)));
    } catch (const std::exception& e) {
      out.fail(f + ": " + e.what());
    }
  }
  if (!out.pass)
    return out;
  auto sample = rscm::xml::parse(fixtures::sample_config());
  auto u = rscm::schema::compose_unified_schema(docs, sample);
  const auto* slot = u.cls("WR_ExternalClientsTable").element("ExternalClient");
  const auto* table = u.cls("WR_Server").element("ExternalClientsTable");
  if (!slot || slot->class_type != "WR_ExternalClient" || !table || table->class_type != "WR_ExternalClientsTable")
    out.fail("ExternalClientsTable children not narrowed to WR_ExternalClient");
  if (auto vs = rscm::schema::validate_document(u, sample); !vs.empty())
    out.fail("sample rejected at " + vs.front().path);

  const std::string server = "PA_Component/WordReplacer/WordReplacerServer";
  const std::string client1 = server + "/ExternalClientsTable/ExternalClient[SystemId=\"WRClient1\"]";
  struct Rejection
  {
    std::string name;
    std::function<void(rscm::xml::Element&)> mutate;
    std::string expected_path;
  };
  const std::vector<Rejection> rejections{
    {"Port=80", [](auto& d) { find_path(d, {"WordReplacer", "WordReplacerServer", "Port"})->text = "80"; },
     server + "/Port"},
    {"PermittedBindTypes=XYZ",
     [](auto& d) {
       auto* c = find_path(d, {"WordReplacer", "WordReplacerServer", "ExternalClientsTable", "ExternalClient"});
       child_named(*c, "PermittedBindTypes")->text = "XYZ";
     },
     client1 + "/PermittedBindTypes"},
    {"duplicate OriginalWord",
     [](auto& d) {
       auto* list = find_path(d, {"WordReplacer", "WordReplacementRulesList"});
       list->children.push_back(list->children.back());
     },
     "PA_Component/WordReplacer/WordReplacementRulesList"},
    {"missing license",
     [](auto& d) {
       auto* c = find_path(d, {"WordReplacer", "WordReplacerServer", "ExternalClientsTable", "ExternalClient"});
       std::erase_if(c->children, [](const auto& e) { return e.name == "WordReplacementLicensePerMinute"; });
     },
     client1 + "/WordReplacementLicensePerMinute"},
  };
  for (const auto& r : rejections) {
    auto doc = sample;
    r.mutate(doc);
    auto vs = rscm::schema::validate_document(u, doc);
    bool named = std::any_of(vs.begin(), vs.end(), [&](const auto& v) { return v.path == r.expected_path; });
    if (vs.empty())
      out.fail(r.name + " accepted");
    else if (!named)
      out.fail(r.name + " reported at " + vs.front().path);
  }
  out.note(std::to_string(docs.size()) + " schemas, " + std::to_string(rejections.size()) +
           " rejections with paths, sample accepted");
  return out;
}

// ---------------------------------------------------------------------------

bool exchange(LineClient& c, int count, const std::string& text = "hello")
{
  for (int i = 0; i < count; ++i) {
    if (!c.send("SUBMIT " + text))
      return false;
    auto reply = c.read_line();
    if (!reply || !reply->starts_with("DELIVER "))
      return false;
  }
  return true;
}

Outcome bind_lifecycle()
{
  Outcome out;
  const std::string conn1 = fixtures::client1_connection;
  const std::string conn2 = fixtures::client2_connection;
  auto counters = [](RunningApp& app, const std::string& conn) {
    return app.monitor(conn, "MessagesReceived") + "/" + app.monitor(conn, "MessagesSent");
  };
  auto expect_counters = [&](RunningApp& app, const std::string& conn, const std::string& want, const std::string& what) {
    if (!eventually([&] { return counters(app, conn) == want; }, 1000ms))
      out.fail(what + ": counters " + counters(app, conn) + ", expected " + want);
  };

  {
    RunningApp app;
    {
      LineClient c(app.port);
      c.send("BIND WRClient1 wrpass1 TRX");
      if (c.read_line() != "BIND_OK" || !exchange(c, 7))
        out.fail("switch: first session failed");
      expect_counters(app, conn1, "7/7", "switch first session");
      c.send("UNBIND");
      c.wait_closed(2s);
    }
    if (!eventually([&] { return app.monitor(conn1, "Bound") == "0"; }, 1000ms))
      out.fail("switch: connection still bound after unbind");
    LineClient again(app.port);
    again.send("BIND WRClient1 wrpass1 TRX");
    if (again.read_line() != "BIND_OK" || !exchange(again, 3))
      out.fail("switch: reconnect failed");
    expect_counters(app, conn1, "10/10", "switch after reconnect");
    expect_counters(app, conn2, "0/0", "switch other client");
  }
  {
    auto config = fixtures::with_value(fixtures::sample_config(), "BindProcessPolicy", "ContinueInitialConnection");
    RunningApp app(config);
    LineClient c(app.port);
    c.send("BIND WRClient1 wrpass1 TRX");
    if (c.read_line() != "BIND_OK" || !exchange(c, 5))
      out.fail("continue: session failed");
    std::this_thread::sleep_for(200ms);
    expect_counters(app, conn1, "0/0", "continue managed connection");
    if (app.monitor(conn1, "Bound") != "0")
      out.fail("continue: managed connection reports bound");
  }
  double closed_after = 0;
  {
    constexpr int timeout_s = 2;
    RunningApp app(fixtures::with_value(fixtures::sample_config(), "SessionInitTimeout", std::to_string(timeout_s)));
    LineClient silent(app.port);
    auto t0 = steady::now();
    bool closed = silent.wait_closed(std::chrono::seconds(timeout_s + 2));
    closed_after = ms_since(t0);
    if (!closed || closed_after > (timeout_s + 1) * 1000.0)
      out.fail("silent socket closed after " + fmt_ms(closed_after) + " with timeout " + std::to_string(timeout_s) + " s");
    if (silent.pending().find("CLOSED SessionInitTimeout") == std::string::npos)
      out.fail("no SessionInitTimeout reason sent");
  }
  out.note("switch 7/7 then 10/10 across reconnect, continue left 0/0, init timeout 2 s closed at " +
           fmt_ms(closed_after));
  return out;
}

// ---------------------------------------------------------------------------

struct RegistryProbe
{
  static constexpr std::size_t capacity = 1'100'000;
  std::uint64_t base = 0;
  std::unique_ptr<std::atomic<std::uint32_t>[]> issued{new std::atomic<std::uint32_t>[capacity]()};
  std::unique_ptr<std::atomic<std::uint32_t>[]> finalized{new std::atomic<std::uint32_t>[capacity]()};
  std::atomic<std::uint64_t> out_of_range{0};

  std::atomic<std::uint32_t>* slot(std::unique_ptr<std::atomic<std::uint32_t>[]>& table, rscm::ObjectId id)
  {
    if (id.value < base || id.value - base >= capacity) {
      out_of_range.fetch_add(1);
      return nullptr;
    }
    return &table[id.value - base];
  }
};

class Probed : public rscm::ManagedObject
{
public:
  explicit Probed(RegistryProbe& probe) : ManagedObject("Probe", rscm::ObjectKind::Simple), probe_(probe) {}
  ~Probed() override
  {
    if (auto* s = probe_.slot(probe_.finalized, id()))
      s->fetch_add(1);
  }

private:
  RegistryProbe& probe_;
};

Outcome registry_properties()
{
  Outcome out;
  constexpr int threads = 8;
  constexpr int cycles_per_thread = 125'000;
  rscm::ObjectRegistry registry;
  RegistryProbe probe;
  probe.base = registry.register_object(std::make_shared<rscm::ManagedObject>("Base", rscm::ObjectKind::Simple)).value + 1;

  constexpr std::size_t ring_size = 1024;
  std::array<std::atomic<std::uint64_t>, ring_size> deleted_ring{};
  std::atomic<std::uint64_t> ring_pos{0};
  std::atomic<std::uint64_t> present_after_delete{0}, missing_before_delete{0}, not_finalized{0}, cross_thread_checks{0};

  auto start = steady::now();
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      std::mt19937_64 rng(static_cast<std::uint64_t>(t) * 7919 + 1);
      for (int i = 0; i < cycles_per_thread; ++i) {
        auto obj = std::make_shared<Probed>(probe);
        std::weak_ptr<Probed> weak = obj;
        auto id = registry.register_object(std::move(obj));
        if (auto* s = probe.slot(probe.issued, id))
          s->fetch_add(1);
        if (!registry.resolve(id))
          missing_before_delete.fetch_add(1);
        registry.unregister(id);
        if (registry.resolve(id))
          present_after_delete.fetch_add(1);
        if (!weak.expired())
          not_finalized.fetch_add(1);
        deleted_ring[ring_pos.fetch_add(1) % ring_size].store(id.value, std::memory_order_release);

        auto seen = deleted_ring[rng() % ring_size].load(std::memory_order_acquire);
        if (seen != 0) {
          cross_thread_checks.fetch_add(1);
          if (registry.resolve(rscm::ObjectId{seen}))
            present_after_delete.fetch_add(1);
        }
      }
    });
  for (auto& th : pool)
    th.join();
  double elapsed = ms_since(start);

  const std::uint64_t total = static_cast<std::uint64_t>(threads) * cycles_per_thread;
  std::uint64_t ids = 0, reused = 0, double_final = 0, unfinalized = 0;
  for (std::size_t i = 0; i < RegistryProbe::capacity; ++i) {
    auto n = probe.issued[i].load();
    auto f = probe.finalized[i].load();
    ids += n ? 1 : 0;
    reused += n > 1 ? 1 : 0;
    double_final += f > 1 ? 1 : 0;
    unfinalized += (n == 1 && f == 0) ? 1 : 0;
  }
  if (ids != total)
    out.fail("distinct ids " + std::to_string(ids) + " != " + std::to_string(total));
  if (reused)
    out.fail(std::to_string(reused) + " ids reused");
  if (double_final)
    out.fail(std::to_string(double_final) + " double finalizations");
  if (unfinalized || not_finalized)
    out.fail(std::to_string(unfinalized + not_finalized) + " objects not finalized after unregister");
  if (present_after_delete)
    out.fail(std::to_string(present_after_delete) + " resolves succeeded after delete");
  if (missing_before_delete)
    out.fail(std::to_string(missing_before_delete) + " resolves failed before delete");
  if (probe.out_of_range)
    out.fail("ids outside the probe range");
  if (registry.size() != 1)
    out.fail("registry size " + std::to_string(registry.size()));
  out.note(std::to_string(total) + " cycles on " + std::to_string(threads) + " threads in " + fmt_ms(elapsed) + ", " +
           std::to_string(cross_thread_checks.load()) + " cross-thread post-delete resolves");
  return out;
}

// ---------------------------------------------------------------------------

Outcome license_throttle()
{
  Outcome out;
  const std::map<std::string, std::string> rules{{"acheive", "achieve"}, {"accross", "across"},
                                                 {"appearence", "appearance"}, {"begining", "beginning"},
                                                 {"beleive", "believe"}};
  auto now = std::make_shared<smpplite::Clock::time_point>(smpplite::Clock::now());
  RunningApp app(fixtures::sample_config(), [now] { return *now; });

  std::mt19937 rng(5);
  std::vector<std::string> words;
  for (const auto& [w, _] : rules)
    words.push_back(w);

  struct Run
  {
    std::string system_id, password;
    int license;
  };
  std::map<std::string, int> expected_counts;
  int replaced_total = 0;
  std::string summary;
  for (const Run& r : {Run{"WRClient1", "wrpass1", 5}, Run{"WRClient2", "wrpass2", 500}}) {
    LineClient c(app.port);
    c.send("BIND " + r.system_id + " " + r.password + " TRX");
    if (c.read_line() != "BIND_OK") {
      out.fail(r.system_id + " bind failed");
      continue;
    }
    int replaced = 0;
    for (int i = 0; i < 6; ++i) {
      *now += 5s;
      auto w = words[rng() % words.size()];
      c.send("SUBMIT " + w);
      auto reply = c.read_line();
      bool within = i < r.license;
      auto want = "DELIVER " + (within ? rules.at(w) : w);
      if (reply != want)
        out.fail(r.system_id + " message " + std::to_string(i + 1) + ": got [" + reply.value_or("<none>") +
                 "] expected [" + want + "]");
      if (reply && *reply == "DELIVER " + rules.at(w))
        ++replaced;
      if (within)
        ++expected_counts[w];
    }
    int want_replaced = std::min(6, r.license);
    if (replaced != want_replaced)
      out.fail(r.system_id + " got " + std::to_string(replaced) + " replacements, expected " + std::to_string(want_replaced));
    replaced_total += replaced;
    summary += (summary.empty() ? "" : ", ") + r.system_id + " " + std::to_string(replaced) + "/6";
  }

  int times_applied_total = 0, oracle_total = 0;
  for (const auto& w : words) {
    int got = std::stoi(app.monitor(rule_path(w), "TimesApplied"));
    times_applied_total += got;
    oracle_total += expected_counts[w];
    if (got != expected_counts[w])
      out.fail("TimesApplied(" + w + ")=" + std::to_string(got) + ", oracle " + std::to_string(expected_counts[w]));
  }
  bool alarm = false;
  for (const auto& n : app.subagent().notifications())
    alarm = alarm || n.code == "LicenseExceeded";
  if (!alarm)
    out.fail("no LicenseExceeded notification");
  out.note(summary + " replaced, TimesApplied total " + std::to_string(times_applied_total) + " = oracle " +
           std::to_string(oracle_total));
  return out;
}

} // namespace

int main()
{
  struct Criterion
  {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
    {"transcript-goldens", transcript_goldens},
    {"hot-deletion-latency", hot_deletion},
    {"persistence-round-trip", persistence_round_trip},
    {"schema-suite", schema_suite},
    {"bind-lifecycle", bind_lifecycle},
    {"registry-properties", registry_properties},
    {"license-throttle", license_throttle},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS " : "FAIL ") << c.name << ": " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
