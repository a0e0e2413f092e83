#pragma once

#include "rscm/mgmt_service.hpp"
#include "rscm/rdn_path.hpp"

#include <iosfwd>
#include <string>
#include <vector>

// Line-oriented manager shell. Commands look like
//
//   $name;
//   $name: field: field ...;
//
// where fields are separated by ':' and may hold RDN paths (`A,B,C="k"`,
// `..` allowed), class names, or `attr=value` lists separated by ','.
namespace rscm::cli
{

struct Command
{
  std::string name;
  // Raw fields, trimmed; quotes are kept so paths and values can be parsed
  // per command.
  std::vector<std::string> fields;
};

// `text` is one complete command from `$` through `;`. Throws
// Error(ParseError) naming the offending token.
Command parse_command(std::string_view text);

// `a=1, B.b="x, y"` -> {{"a","1"},{"B.b","x, y"}}. Throws Error(ParseError).
std::vector<std::pair<std::string, std::string>> parse_assignments(std::string_view text);

class Session
{
public:
  Session(mgmt::Transport& transport, std::string app_name, std::ostream& out);

  std::string prompt() const;
  const RdnPath& active_path() const { return active_; }

  // Reads commands until end of input. With `echo`, every input line is
  // written back after the prompt, which makes the output a transcript.
  void run(std::istream& in, bool echo);

  // Executes one complete command; errors are printed, never thrown.
  void execute(std::string_view command_text);

private:
  void dispatch(const Command& cmd);
  RdnPath target(const Command& cmd, std::size_t field) const;
  mgmt::json call(const std::string& op, const RdnPath& path, mgmt::json payload = mgmt::json::object());
  void print_tree(const RdnPath& path, const std::string& label, int depth);
  void help(const std::string& topic);

  mgmt::Transport& transport_;
  std::string app_name_;
  std::ostream& out_;
  RdnPath active_;
};

} // namespace rscm::cli
