#include "fixtures.hpp"

#include "rscm/atomic_file.hpp"
#include "rscm/error.hpp"
#include "rscm/mib.hpp"
#include "rscm/object_registry.hpp"
#include "rscm/password_cipher.hpp"
#include "rscm/rdn_path.hpp"
#include "rscm/xml.hpp"

#include <doctest.h>

#include <atomic>
#include <set>
#include <thread>

using namespace rscm;

namespace
{

ErrorCode code_of(const std::function<void()>& fn)
{
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected rscm::Error");
  return ErrorCode::ParseError;
}

struct Probe : ManagedObject
{
  explicit Probe(std::atomic<int>* finalized, ObjectKind kind = ObjectKind::Simple)
    : ManagedObject("Probe", kind), finalized_(finalized)
  {
  }
  ~Probe() override
  {
    if (finalized_)
      finalized_->fetch_add(1);
  }
  std::atomic<int>* finalized_;
};

} // namespace

TEST_CASE("rdn path parsing and rendering")
{
  auto p = RdnPath::parse(R"(WordReplacer,WordReplacementRulesList,WordReplacementRule="acheive")");
  REQUIRE(p.size() == 3);
  CHECK(p.segments()[0] == RdnSegment{"WordReplacer", std::nullopt});
  CHECK(p.segments()[2] == RdnSegment{"WordReplacementRule", std::string("acheive")});
  CHECK(p.str() == R"(WordReplacer,WordReplacementRulesList,WordReplacementRule="acheive")");

  CHECK(RdnPath::parse("").empty());
  CHECK(RdnPath::parse("  WordReplacer , WordReplacementRulesList ").str() == "WordReplacer,WordReplacementRulesList");

  auto quoted = RdnPath::parse(R"(T,Row="a,b \"c\"")");
  CHECK(*quoted.back().key == "a,b \"c\"");
  CHECK(RdnPath::parse(quoted.str()) == quoted);

  CHECK(code_of([] { RdnPath::parse("A,,B"); }) == ErrorCode::MalformedPath);
  CHECK(code_of([] { RdnPath::parse(R"(A,B="x)"); }) == ErrorCode::MalformedPath);
  CHECK(code_of([] { RdnPath::parse(R"(A,B="x"y)"); }) == ErrorCode::MalformedPath);
  CHECK(code_of([] { RdnPath::parse("A,..,B"); }) == ErrorCode::MalformedPath);
  CHECK(code_of([] { RdnPath::parse("A,"); }) == ErrorCode::MalformedPath);
}

TEST_CASE("relative paths fold parent references")
{
  auto active = RdnPath::parse("WordReplacer,WordReplacementRulesList");
  auto rel = RdnPath::parse(R"(.., WordReplacerServer, ExternalClientsTable, ExternalClient="WRClient2")", true);
  CHECK(!rel.is_canonical());
  CHECK(active.resolve(rel).str() == R"(WordReplacer,WordReplacerServer,ExternalClientsTable,ExternalClient="WRClient2")");
  CHECK(active.resolve(RdnPath::parse("..,..", true)).empty());
  CHECK(code_of([&] { active.resolve(RdnPath::parse("..,..,..", true)); }) == ErrorCode::MalformedPath);

  // Oracle: a stack machine over the raw segment strings.
  std::mt19937 rng(7);
  const std::vector<std::string> names{"A", "B", R"(T="k1")", ".."};
  for (int round = 0; round < 500; ++round) {
    std::vector<std::string> base, rel_parts;
    for (int i = rng() % 4; i > 0; --i)
      base.push_back(names[rng() % 3]);
    for (int i = rng() % 5; i > 0; --i)
      rel_parts.push_back(names[rng() % 4]);
    std::vector<std::string> stack = base;
    bool underflow = false;
    for (const auto& s : rel_parts) {
      if (s == "..") {
        if (stack.empty()) {
          underflow = true;
          break;
        }
        stack.pop_back();
      } else {
        stack.push_back(s);
      }
    }
    auto join = [](const std::vector<std::string>& v) {
      std::string out;
      for (const auto& s : v)
        out += (out.empty() ? "" : ",") + s;
      return out;
    };
    auto b = RdnPath::parse(join(base));
    auto r = RdnPath::parse(join(rel_parts), true);
    if (underflow)
      CHECK(code_of([&] { b.resolve(r); }) == ErrorCode::MalformedPath);
    else
      CHECK(b.resolve(r).str() == join(stack));
  }
}

TEST_CASE("registry issues increasing ids and resolves them")
{
  ObjectRegistry reg;
  auto a = reg.register_object(std::make_shared<ManagedObject>("A", ObjectKind::Simple));
  auto b = reg.register_object(std::make_shared<ManagedObject>("B", ObjectKind::Simple));
  CHECK(a.value >= 1);
  CHECK(b.value > a.value);
  REQUIRE(reg.resolve(a));
  CHECK(reg.resolve(a)->get()->class_name() == "A");
  CHECK(reg.resolve(a)->get()->id() == a);
  CHECK(!reg.resolve(ObjectId{999'999'999}));
  CHECK(!reg.resolve(ObjectId{}));
}

TEST_CASE("unregister makes an id absent and rejects a second delete")
{
  ObjectRegistry reg;
  auto id = reg.register_object(std::make_shared<ManagedObject>("A", ObjectKind::Simple));
  reg.unregister(id);
  CHECK(!reg.resolve(id));
  CHECK(!reg.contains(id));
  CHECK(code_of([&] { reg.unregister(id); }) == ErrorCode::NotRegistered);
}

TEST_CASE("an outstanding handle delays finalization but not invisibility")
{
  ObjectRegistry reg;
  std::atomic<int> finalized{0};
  auto id = reg.register_object(std::make_shared<Probe>(&finalized));

  std::atomic<bool> holding{false}, release{false}, saw_absent{false};
  std::thread holder([&] {
    auto h = reg.resolve(id);
    REQUIRE(h);
    holding = true;
    while (!release)
      std::this_thread::yield();
    saw_absent = !reg.resolve(id).has_value();
  });
  while (!holding)
    std::this_thread::yield();
  reg.unregister(id);
  CHECK(!reg.resolve(id));
  CHECK(finalized == 0);
  release = true;
  holder.join();
  CHECK(saw_absent);
  CHECK(finalized == 1);
}

TEST_CASE("ids are never reused across register/unregister cycles")
{
  ObjectRegistry reg;
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    auto id = reg.register_object(std::make_shared<ManagedObject>("A", ObjectKind::Simple));
    CHECK(seen.insert(id.value).second);
    reg.unregister(id);
  }
  CHECK(reg.size() == 0);
}

TEST_CASE("path resolution over a small tree")
{
  ObjectRegistry reg;
  auto rule = std::make_shared<ManagedObject>("Rule", ObjectKind::Simple);
  auto rule_id = reg.register_object(rule);
  auto list = std::make_shared<ManagedObject>("List", ObjectKind::Tabular);
  list->set_tabular_element("Rule");
  list->attach_child({"Rule", std::string("acheive")}, rule_id);
  auto list_id = reg.register_object(list);
  rule->set_parent(list_id, {"Rule", std::string("acheive")});
  auto leaf = std::make_shared<ManagedObject>("Leaf", ObjectKind::Simple);
  auto leaf_id = reg.register_object(leaf);
  auto app = std::make_shared<ManagedObject>("App", ObjectKind::Simple);
  app->attach_child({"Leaf", std::nullopt}, leaf_id);
  app->attach_child({"List", std::nullopt}, list_id);
  auto app_id = reg.register_object(app);
  list->set_parent(app_id, {"List", std::nullopt});
  leaf->set_parent(app_id, {"Leaf", std::nullopt});

  CHECK(resolve_path(reg, app_id, RdnPath{}) == app_id);
  CHECK(resolve_path(reg, app_id, RdnPath::parse(R"(List,Rule="acheive")")) == rule_id);
  CHECK(!resolve_path(reg, app_id, RdnPath::parse("List,NoSuchChild")));
  CHECK(!resolve_path(reg, app_id, RdnPath::parse(R"(Leaf,Rule="acheive")")));
  CHECK(!resolve_path(reg, app_id, RdnPath::parse(R"(List,Other="acheive")")));

  CHECK(list_child_names(reg, app_id) == std::vector<std::string>{"Leaf", "List"});
  CHECK(list_child_names(reg, list_id) == std::vector<std::string>{R"(Rule="acheive")"});
  CHECK(list_child_names(reg, leaf_id).empty());

  for (auto id : {app_id, list_id, rule_id, leaf_id})
    CHECK(resolve_path(reg, app_id, *canonical_path(reg, id)) == id);

  reg.unregister(rule_id);
  CHECK(!resolve_path(reg, app_id, RdnPath::parse(R"(List,Rule="acheive")")));
  CHECK(code_of([&] { list_child_names(reg, rule_id); }) == ErrorCode::NotRegistered);
}

TEST_CASE("xml parse and serialize round trip")
{
  auto doc = xml::parse(R"(<?xml version="1.0"?>
<A x="1 &amp; 2">
  <B>text &lt;here&gt;</B>
  <C/>
</A>)");
  CHECK(doc.name == "A");
  CHECK(doc.attribute("x") == "1 & 2");
  REQUIRE(doc.children.size() == 2);
  CHECK(doc.children[0].text == "text <here>");
  CHECK(doc.children[1].line == 4);
  CHECK(xml::parse(xml::serialize(doc)).same_content(doc));
  CHECK(code_of([] { xml::parse("<A><B></A>"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { xml::parse(""); }) == ErrorCode::ParseError);
}

TEST_CASE("atomic write survives injected faults")
{
  fixtures::TempDir dir;
  auto file = dir / "config.xml";
  write_file_atomically(file, "original");
  CHECK(read_file(file) == "original");

  for (auto stage : {WriteStage::BeforeWrite, WriteStage::BeforeRename}) {
    auto hook = [stage](WriteStage s) {
      if (s == stage)
        throw std::runtime_error("injected");
    };
    CHECK(code_of([&] { write_file_atomically(file, "replacement", hook); }) == ErrorCode::PersistFailed);
    CHECK(read_file(file) == "original");
    CHECK(!std::filesystem::exists(dir / "config.xml.tmp"));
  }
  write_file_atomically(file, "replacement");
  CHECK(read_file(file) == "replacement");
  CHECK(code_of([&] { write_file_atomically(dir / "missing-dir" / "x", "data"); }) == ErrorCode::PersistFailed);
}

TEST_CASE("password cipher")
{
  PasswordCipher cipher(std::string("s3cret"));
  auto stored = cipher.encrypt("wrpass1");
  CHECK(stored.starts_with(PasswordCipher::prefix));
  CHECK(stored.find("wrpass1") == std::string::npos);
  CHECK(cipher.decrypt(stored) == "wrpass1");
  CHECK(cipher.encrypt("wrpass1") != stored);
  CHECK(cipher.decrypt("plain") == "plain");

  PasswordCipher other(std::string("different"));
  CHECK(code_of([&] { other.decrypt(stored); }) == ErrorCode::DecryptFailed);
  PasswordCipher none;
  CHECK(!none.enabled());
  CHECK(none.encrypt("x") == "x");
  CHECK(code_of([&] { none.decrypt(stored); }) == ErrorCode::DecryptFailed);
}
