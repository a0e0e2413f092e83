#include "app_fixture.hpp"

#include <doctest.h>

#include <map>
#include <sstream>

using namespace std::chrono_literals;
using fixtures::LineClient;
using fixtures::RunningApp;

namespace
{

const std::string rules_path = "WordReplacer,WordReplacementRulesList";

std::string rule_path(const std::string& word) { return rules_path + ",WordReplacementRule=\"" + word + "\""; }

// Independent reference: split on single spaces, map whole tokens.
std::string oracle_replace(const std::string& text, const std::map<std::string, std::string>& rules,
                           std::map<std::string, int>* counts = nullptr)
{
  std::string out, token;
  auto flush = [&] {
    auto it = rules.find(token);
    if (it != rules.end()) {
      out += it->second;
      if (counts)
        ++(*counts)[token];
    } else {
      out += token;
    }
    token.clear();
  };
  for (char ch : text) {
    if (ch == ' ' || ch == '\t' || ch == '\n') {
      flush();
      out += ch;
    } else {
      token += ch;
    }
  }
  flush();
  return out;
}

const std::map<std::string, std::string> sample_rules = {
  {"acheive", "achieve"}, {"accross", "across"}, {"appearence", "appearance"},
  {"begining", "beginning"}, {"beleive", "believe"},
};

struct ManualClock
{
  std::shared_ptr<smpplite::Clock::time_point> now = std::make_shared<smpplite::Clock::time_point>(smpplite::Clock::now());
  wordreplacer::ClockFn fn() const
  {
    return [n = now] { return *n; };
  }
  void advance(std::chrono::seconds s) const { *now += s; }
};

} // namespace

TEST_CASE("replacement matches whole tokens only")
{
  RunningApp app(fixtures::sample_config(), wordreplacer::Clock::now, false);
  auto& reg = app.subagent().registry();
  auto list = app.id_of(rules_path);

  std::mt19937 rng(7);
  std::vector<std::string> vocab = {"acheive", "accross", "beleive", "Beleive", "beleive,", "xbegining",
                                    "begining", "appearence", "plain", "", "word"};
  for (int i = 0; i < 300; ++i) {
    std::string text;
    int n = static_cast<int>(rng() % 8);
    for (int k = 0; k < n; ++k) {
      if (k)
        text += (rng() % 5 == 0) ? "  " : " ";
      text += vocab[rng() % vocab.size()];
    }
    CHECK(wordreplacer::replace_words(reg, list, text) == oracle_replace(text, sample_rules));
  }
  CHECK(wordreplacer::replace_words(reg, std::nullopt, "beleive") == "beleive");
}

TEST_CASE("TimesApplied counts each applied replacement")
{
  RunningApp app(fixtures::sample_config(), wordreplacer::Clock::now, false);
  auto& reg = app.subagent().registry();
  auto list = app.id_of(rules_path);
  std::map<std::string, int> expected;
  for (std::string text : {"acheive beleive beleive", "accross the begining", "nothing here", "beleive"})
    wordreplacer::replace_words(reg, list, text), oracle_replace(text, sample_rules, &expected);
  for (const auto& [word, _] : sample_rules)
    CHECK(app.monitor(rule_path(word), "TimesApplied") == std::to_string(expected[word]));
}

TEST_CASE("ReplaceWord action")
{
  RunningApp app(fixtures::sample_config(), wordreplacer::Clock::now, false);
  auto wr = rscm::RdnPath::parse("WordReplacer");
  CHECK(app.subagent().do_action(wr, "ReplaceWord", {{"Word", "beleive"}}) == "believe");
  CHECK(app.subagent().do_action(wr, "ReplaceWord", {{"Word", "fine"}}) == "fine");
  CHECK(app.monitor(rule_path("beleive"), "TimesApplied") == "1");
  CHECK_THROWS_AS(app.subagent().do_action(wr, "ReplaceWord", {}), rscm::Error);
}

TEST_CASE("rules created at runtime apply immediately")
{
  RunningApp app;
  app.subagent().create_managed_object(rscm::RdnPath::parse(rules_path),
                                       {{"OriginalWord", "consciuos"}, {"NewWord", "conscious"}});
  LineClient c(app.port);
  REQUIRE(c.send("BIND WRClient2 wrpass2 TRX"));
  CHECK(c.read_line() == "BIND_OK");
  REQUIRE(c.send("SUBMIT be consciuos"));
  CHECK(c.read_line() == "DELIVER be conscious");
  app.subagent().delete_managed_object(rscm::RdnPath::parse(rule_path("consciuos")));
  REQUIRE(c.send("SUBMIT be consciuos"));
  CHECK(c.read_line() == "DELIVER be consciuos");
}

TEST_CASE("license window arithmetic")
{
  wordreplacer::LicenseWindow w;
  auto t0 = smpplite::Clock::time_point{} + 1000s;
  CHECK(w.try_consume(t0, 3, 5));
  CHECK(w.try_consume(t0 + 10s, 2, 5));
  CHECK_FALSE(w.try_consume(t0 + 20s, 1, 5));
  CHECK(w.used(t0 + 20s) == 5);
  CHECK(w.used(t0 + 60s) == 2);
  CHECK(w.try_consume(t0 + 60s, 3, 5));
  CHECK(w.used(t0 + 70s) == 3);
  CHECK_FALSE(w.try_consume(t0 + 70s, 3, 5));
  CHECK(w.try_consume(t0 + 70s, 0, 3));
  CHECK(w.used(t0 + 500s) == 0);
}

TEST_CASE("license exceeded leaves the message unchanged and raises an alarm")
{
  ManualClock clock;
  RunningApp app(fixtures::sample_config(), clock.fn());
  LineClient c(app.port);
  REQUIRE(c.send("BIND WRClient1 wrpass1 TRX"));
  REQUIRE(c.read_line() == "BIND_OK");

  REQUIRE(c.send("SUBMIT beleive beleive beleive beleive"));
  CHECK(c.read_line() == "DELIVER believe believe believe believe");
  REQUIRE(c.send("SUBMIT acheive accross"));
  CHECK(c.read_line() == "DELIVER acheive accross");
  auto alarms = app.subagent().open_alarms();
  REQUIRE(alarms.size() == 1);
  CHECK(alarms[0].code == "LicenseExceeded");
  REQUIRE(c.send("SUBMIT acheive"));
  CHECK(c.read_line() == "DELIVER achieve");
  CHECK(app.subagent().open_alarms().empty());

  clock.advance(61s);
  REQUIRE(c.send("SUBMIT acheive accross begining beleive beleive"));
  CHECK(c.read_line() == "DELIVER achieve across beginning believe believe");
  CHECK(app.monitor(rule_path("acheive"), "TimesApplied") == "2");
  CHECK(app.monitor(rule_path("beleive"), "TimesApplied") == "6");
}
