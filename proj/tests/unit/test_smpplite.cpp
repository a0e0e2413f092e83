#include "app_fixture.hpp"

#include <doctest.h>

#include <thread>

using namespace std::chrono_literals;
using fixtures::LineClient;
using fixtures::RunningApp;
using fixtures::with_value;

namespace
{

std::string bind_reply(LineClient& c, const std::string& bind)
{
  REQUIRE(c.send(bind));
  return c.read_line().value_or("<none>");
}

rscm::RdnPath path(const std::string& text) { return rscm::RdnPath::parse(text); }

} // namespace

TEST_CASE("bind type permissions")
{
  using smpplite::BindType;
  CHECK(smpplite::permits(BindType::TRX, BindType::TX));
  CHECK(smpplite::permits(BindType::TRX, BindType::RX));
  CHECK(smpplite::permits(BindType::TRX, BindType::TRX));
  CHECK(smpplite::permits(BindType::TX, BindType::TX));
  CHECK_FALSE(smpplite::permits(BindType::TX, BindType::RX));
  CHECK_FALSE(smpplite::permits(BindType::TX, BindType::TRX));
  CHECK_FALSE(smpplite::permits(BindType::RX, BindType::TX));
  CHECK(smpplite::parse_bind_type("RX") == BindType::RX);
  CHECK_FALSE(smpplite::parse_bind_type("rx"));
  CHECK(smpplite::to_string(BindType::TRX) == "TRX");
}

TEST_CASE("bind outcomes")
{
  auto config = with_value(fixtures::sample_config(), "PermittedBindTypes", "TX", "WRClient2");
  RunningApp app(config);

  SUBCASE("accepted")
  {
    LineClient c(app.port);
    CHECK(bind_reply(c, "BIND WRClient1 wrpass1 TRX") == "BIND_OK");
    REQUIRE(c.send("ENQUIRE"));
    CHECK(c.read_line() == "ENQUIRE_OK");
    REQUIRE(c.send("SUBMIT hello beleive"));
    CHECK(c.read_line() == "DELIVER hello believe");
    REQUIRE(c.send("UNBIND"));
    CHECK(c.read_line() == "CLOSED Unbound");
    CHECK(c.wait_closed(2s));
  }
  SUBCASE("unknown system id")
  {
    LineClient c(app.port);
    CHECK(bind_reply(c, "BIND Nobody x TRX") == "BIND_FAIL UnknownSystemId");
    CHECK(c.wait_closed(2s));
  }
  SUBCASE("invalid password")
  {
    LineClient c(app.port);
    CHECK(bind_reply(c, "BIND WRClient1 wrong TRX") == "BIND_FAIL InvalidPassword");
    CHECK(c.wait_closed(2s));
  }
  SUBCASE("bind type not permitted")
  {
    LineClient c(app.port);
    CHECK(bind_reply(c, "BIND WRClient2 wrpass2 RX") == "BIND_FAIL BindTypeNotPermitted");
    LineClient d(app.port);
    CHECK(bind_reply(d, "BIND WRClient2 wrpass2 TX") == "BIND_OK");
  }
  SUBCASE("malformed bind")
  {
    LineClient c(app.port);
    CHECK(bind_reply(c, "BIND WRClient1 wrpass1 XX") == "BIND_FAIL BadBind");
    CHECK(c.wait_closed(2s));
  }
  SUBCASE("second bind of a known connection")
  {
    LineClient a(app.port);
    CHECK(bind_reply(a, "BIND WRClient1 wrpass1 TRX") == "BIND_OK");
    LineClient b(app.port);
    CHECK(bind_reply(b, "BIND WRClient1 wrpass1 TRX") == "BIND_FAIL AlreadyBound");
    CHECK(bind_reply(a, "BIND WRClient1 wrpass1 TRX") == "BIND_FAIL AlreadyBound");
  }
  SUBCASE("submit before bind")
  {
    LineClient c(app.port);
    REQUIRE(c.send("SUBMIT hi"));
    CHECK(c.read_line() == "CLOSED NotBound");
    CHECK(c.wait_closed(2s));
  }
  SUBCASE("unknown verb")
  {
    LineClient c(app.port);
    REQUIRE(c.send("HELLO"));
    CHECK(c.read_line() == "CLOSED ProtocolError");
  }
  SUBCASE("password changes take effect for the next bind")
  {
    app.subagent().set_configuration_parameters(
      path(R"(WordReplacer,WordReplacerServer,ExternalClientsTable,ExternalClient="WRClient1")"), {{"Password", "fresh"}});
    LineClient c(app.port);
    CHECK(bind_reply(c, "BIND WRClient1 wrpass1 TRX") == "BIND_FAIL InvalidPassword");
    LineClient d(app.port);
    CHECK(bind_reply(d, "BIND WRClient1 fresh TRX") == "BIND_OK");
  }
}

TEST_CASE("session init timeout closes unbound sockets")
{
  RunningApp app(with_value(fixtures::sample_config(), "SessionInitTimeout", "1"));
  LineClient c(app.port);
  auto start = smpplite::Clock::now();
  CHECK(c.read_line(3s) == "CLOSED SessionInitTimeout");
  CHECK(c.wait_closed(2s));
  CHECK(smpplite::Clock::now() - start < 2s);
}

TEST_CASE("connection timeouts after bind")
{
  std::string config = fixtures::sample_config();
  SUBCASE("inactivity")
  {
    config = with_value(config, "InactivityTimeout", "1", "WRClient1");
    RunningApp app(config);
    LineClient c(app.port);
    CHECK(bind_reply(c, "BIND WRClient1 wrpass1 TRX") == "BIND_OK");
    CHECK(c.read_line(3s) == "CLOSED InactivityTimeout");
  }
  SUBCASE("enquire link")
  {
    config = with_value(config, "EnquireLinkTimeout", "1", "WRClient1");
    RunningApp app(config);
    LineClient c(app.port);
    CHECK(bind_reply(c, "BIND WRClient1 wrpass1 TRX") == "BIND_OK");
    REQUIRE(c.send("SUBMIT a"));
    CHECK(c.read_line() == "DELIVER a");
    CHECK(c.read_line(3s) == "CLOSED EnquireLinkTimeout");
  }
}

TEST_CASE("disconnect action")
{
  RunningApp app;
  auto conn = path(fixtures::client1_connection);
  try {
    app.subagent().do_action(conn, "Disconnect", {});
    FAIL("expected ActionFailed");
  } catch (const rscm::Error& e) {
    CHECK(e.code() == rscm::ErrorCode::ActionFailed);
  }

  LineClient c(app.port);
  CHECK(bind_reply(c, "BIND WRClient1 wrpass1 TRX") == "BIND_OK");
  CHECK(app.monitor(fixtures::client1_connection, "Bound") == "1");
  app.subagent().do_action(conn, "Disconnect", {});
  CHECK(c.read_line(2s) == "CLOSED Disconnected");
  CHECK(c.wait_closed(2s));

  auto deadline = smpplite::Clock::now() + 2s;
  while (app.monitor(fixtures::client1_connection, "Bound") != "0" && smpplite::Clock::now() < deadline)
    std::this_thread::sleep_for(10ms);
  CHECK(app.monitor(fixtures::client1_connection, "Bound") == "0");
  LineClient again(app.port);
  CHECK(bind_reply(again, "BIND WRClient1 wrpass1 TRX") == "BIND_OK");
}

TEST_CASE("server monitoring variables")
{
  RunningApp app;
  const std::string server = "WordReplacer,WordReplacerServer";
  CHECK(app.monitor(server, "BoundPort") == std::to_string(app.port));
  LineClient c(app.port);
  CHECK(bind_reply(c, "BIND WRClient1 wrpass1 TRX") == "BIND_OK");
  CHECK(app.monitor(server, "ActiveSessions") == "1");
}

TEST_CASE("stopping the runtime closes sessions and joins threads")
{
  RunningApp app;
  LineClient c(app.port);
  CHECK(bind_reply(c, "BIND WRClient1 wrpass1 TRX") == "BIND_OK");
  app.app->stop();
  CHECK(c.read_line(2s) == "CLOSED Shutdown");
  CHECK(app.app->runtime().live_threads() == 0);
  CHECK_THROWS(app.app->runtime().spawn([] {}));
}
