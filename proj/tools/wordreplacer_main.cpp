#include "rscm/mgmt_service.hpp"
#include "wordreplacer/wordreplacer.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <iostream>

namespace
{

std::atomic<bool> interrupted{false};

void on_signal(int) { interrupted = true; }

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"WordReplacer: replaces misspelled words in messages of bound clients"};
  std::string config = std::getenv("RSCM_CONFIG") ? std::getenv("RSCM_CONFIG") : "wordreplacer.xml";
  std::string mgmt_listen = "127.0.0.1:7070";
  std::string smpp_host = "0.0.0.0";
  std::optional<std::uint16_t> smpp_port;
  std::string cors_origin = "*";
  app.add_option("--config", config, "Configuration file (created from the shipped sample if missing)");
  app.add_option("--mgmt-listen", mgmt_listen, "Management endpoint host:port");
  app.add_option("--smpp-host", smpp_host, "Address the message server binds to");
  app.add_option("--smpp-port", smpp_port, "Overrides the configured Port (0 picks a free port)");
  app.add_option("--cors-origin", cors_origin, "Access-Control-Allow-Origin for browser consoles");
  CLI11_PARSE(app, argc, argv);

  try {
    auto listen = rscm::mgmt::parse_listen_address(mgmt_listen);

    wordreplacer::ApplicationOptions options;
    options.config_path = config;
    options.cipher = rscm::PasswordCipher::from_environment();
    options.network.bind_host = smpp_host;
    options.network.port_override = smpp_port;
    wordreplacer::Application application(std::move(options));
    application.load();

    rscm::mgmt::ManagementService service(application.subagent());
    rscm::mgmt::HttpEndpoint endpoint(service, cors_origin);
    int mgmt_port = endpoint.start(listen);

    std::cerr << "wordreplacer: configuration " << config << "\n"
              << "wordreplacer: management on " << listen.host << ":" << mgmt_port << "\n";
    if (int port = application.smpp_port())
      std::cerr << "wordreplacer: messages on port " << port << "\n";
    else
      std::cerr << "wordreplacer: message server is not listening (see notifications)\n";

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!interrupted)
      std::this_thread::sleep_for(std::chrono::milliseconds(200));

    endpoint.stop();
    application.stop();
  } catch (const std::exception& e) {
    std::cerr << "wordreplacer: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
