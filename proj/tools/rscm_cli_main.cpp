#include "rscm/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

int main(int argc, char** argv)
{
  CLI::App app{"Command-line manager for runtime-configurable applications"};
  std::string endpoint = "127.0.0.1:7070";
  std::string script;
  std::string app_name = "WR";
  app.add_option("--endpoint", endpoint, "Management endpoint host:port");
  app.add_option("--script", script, "Run commands from a file and print a transcript");
  app.add_option("--app-name", app_name, "Short application name shown in the prompt");
  CLI11_PARSE(app, argc, argv);

  try {
    rscm::mgmt::HttpTransport transport(rscm::mgmt::parse_listen_address(endpoint));
    rscm::cli::Session session(transport, app_name, std::cout);
    if (script.empty()) {
      session.run(std::cin, false);
    } else {
      std::ifstream in(script);
      if (!in) {
        std::cerr << "rscm-cli: cannot open " << script << "\n";
        return 1;
      }
      session.run(in, true);
    }
  } catch (const std::exception& e) {
    std::cerr << "rscm-cli: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
