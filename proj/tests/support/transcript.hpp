#pragma once

#include "fixtures.hpp"

#include "rscm/cli.hpp"

#include <sstream>

namespace fixtures
{

// Runs a script through a CLI session in transcript mode.
inline std::string run_transcript(rscm::mgmt::Transport& transport, const std::string& script)
{
  std::istringstream in(script);
  std::ostringstream out;
  rscm::cli::Session session(transport, "WR", out);
  session.run(in, true);
  return out.str();
}

inline std::string data_file(const std::string& name) { return read_source("tests/data/" + name); }

// First line where the two texts differ, for readable failure messages.
inline std::string first_difference(const std::string& expected, const std::string& actual)
{
  std::istringstream e(expected), a(actual);
  std::string le, la;
  for (int line = 1;; ++line) {
    bool he = static_cast<bool>(std::getline(e, le));
    bool ha = static_cast<bool>(std::getline(a, la));
    if (!he && !ha)
      return {};
    if (!he || !ha || le != la)
      return "line " + std::to_string(line) + ": expected [" + (he ? le : "<eof>") + "] got [" + (ha ? la : "<eof>") + "]";
  }
}

} // namespace fixtures
