#include "rscm/cli.hpp"

#include <istream>
#include <map>
#include <ostream>

namespace rscm::cli
{

namespace
{

[[noreturn]] void parse_error(const std::string& message) { throw Error(ErrorCode::ParseError, message); }

std::string trim(std::string_view s)
{
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos)
    return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Splits on `sep` outside double quotes (backslash escapes inside quotes).
std::vector<std::string> split_outside_quotes(std::string_view text, char sep)
{
  std::vector<std::string> parts;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted && c == '\\' && i + 1 < text.size()) {
      current += c;
      current += text[++i];
      continue;
    }
    if (c == '"')
      quoted = !quoted;
    if (c == sep && !quoted) {
      parts.push_back(trim(current));
      current.clear();
      continue;
    }
    current += c;
  }
  if (quoted)
    parse_error("unbalanced quote in '" + trim(text) + "'");
  parts.push_back(trim(current));
  return parts;
}

// Position of the first ';' outside quotes, or npos.
std::size_t command_end(std::string_view text)
{
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted && c == '\\') {
      ++i;
      continue;
    }
    if (c == '"')
      quoted = !quoted;
    else if (c == ';' && !quoted)
      return i;
  }
  return std::string_view::npos;
}

std::string unquote(const std::string& value)
{
  if (value.size() < 2 || value.front() != '"' || value.back() != '"')
    return value;
  std::string out;
  for (std::size_t i = 1; i + 1 < value.size(); ++i) {
    if (value[i] == '\\' && i + 2 < value.size())
      ++i;
    out += value[i];
  }
  return out;
}

struct CallFailed
{
  std::string code;
  std::string message;
};

const std::map<std::string, std::string, std::less<>> help_texts{
  {"help", R"("help" command lists the available commands, or explains one of them.
Syntax: "help;" or "help: <CMD>;")"},
  {"cn", R"("cn" command changes the active node. Relative names given to other commands start from the active node.
Syntax: "cn: <RDN>;" where <RDN> is the relative distinguished name of the new active node. "cn;" returns to the root.)"},
  {"ls", R"("ls" command lists the children of a node.
Syntax: "ls: <RDN>;" where <RDN> is the relative distinguished name of the node (empty for the active node).)"},
  {"sig", R"("sig" command prints the signature for adding a new managed object to a parent tabular node.
Syntax:"sig: <RDN>;" where <RDN> is the relative distinguished name of the parent node (which is a tabular node).)"},
  {"add", R"("add" command is used to add a child node to another node. The parent node should be a tabular Managed Object.
Syntax:"add: <RDN>: <MOC>: <GATR>=<VAL>(,<GATR>=<VAL>)*;" where:
<RDN> is the relative distinguished name of the parent node
<MOC> is the managed object class of the new node
<GATR> is a generalized attribute of the new node
<VAL> is a numeric or string value
Definition: A generalized attribute of a node is either an attribute of that node or an attribute of a desendent node
In the latter case, the name of the generalized attribute consists of the sequence of intermediate nodes
and the attribute name separated by comma.
Example: Assume that object T1 is tabular and can contain objects of class C1.
Objects of class C1 contain and attribute c1 and two objects named A and B.
In addition, A contains two attributes a1 and a2 and B contains attributes b1 and b2. Then the command
"add: T1: C1: c1=7, A.a1=a1, A.a2=2, B.b1=8, B.b2=9;"
adds a new node of type C, with the specified values for attributes of itself and its children, to T1.)"},
  {"del", R"("del" command is used to delete a child node from a tabular node.
Syntax: "del: <RDN>;" where <RDN> is the relative distinguished name of the node which is to be deleted. Note that <RDN> cannot be empty
Example:
    del:M1,M2,M3="id";)"},
  {"lsatr", R"("lsatr" command lists the configuration attributes of a node and their values. Passwords are masked.
Syntax: "lsatr: <RDN>;")"},
  {"set", R"("set" command changes configuration attributes of a node. Either all values are applied or none.
Syntax: "set: <RDN>: <ATR>=<VAL>(,<ATR>=<VAL>)*;")"},
  {"action", R"("action" command runs an action of a node and prints its result.
Syntax: "action: <RDN>: <ACTION>: <ARG>=<VAL>(,<ARG>=<VAL>)*;" (the argument list may be omitted))"},
  {"mon", R"("mon" command prints monitoring variables of a node.
Syntax: "mon: <RDN>;" for all variables or "mon: <RDN>: <VAR>(,<VAR>)*;")"},
  {"tree", R"("tree" command prints a node and its whole subtree with attribute values. Passwords are masked.
Syntax: "tree: <RDN>;")"},
};

const std::vector<std::string> command_order{"help", "cn", "ls", "sig", "add", "del", "lsatr", "set", "action", "mon", "tree"};

const std::map<std::string, std::size_t, std::less<>> max_fields{
  {"help", 1}, {"cn", 1}, {"ls", 1}, {"sig", 1}, {"add", 3}, {"del", 1},
  {"lsatr", 1}, {"set", 2}, {"action", 3}, {"mon", 2}, {"tree", 1},
};

} // namespace

Command parse_command(std::string_view text)
{
  std::string t = trim(text);
  if (t.empty() || t.front() != '$')
    parse_error("expected '$' at '" + t + "'");
  auto end = command_end(t);
  if (end == std::string::npos)
    parse_error("expected ';' after '" + t + "'");
  if (end + 1 != t.size())
    parse_error("unexpected text after ';': '" + t.substr(end + 1) + "'");

  std::string body = t.substr(1, end - 1);
  auto colon = body.find(':');
  Command cmd;
  cmd.name = trim(body.substr(0, colon));
  if (cmd.name.empty())
    parse_error("missing command name in '" + t + "'");
  if (!max_fields.contains(cmd.name))
    parse_error("unknown command '" + cmd.name + "'");
  if (colon != std::string::npos)
    cmd.fields = split_outside_quotes(std::string_view(body).substr(colon + 1), ':');
  if (cmd.fields.size() > max_fields.at(cmd.name))
    parse_error("too many fields for '" + cmd.name + "': '" + cmd.fields.back() + "'");
  return cmd;
}

std::vector<std::pair<std::string, std::string>> parse_assignments(std::string_view text)
{
  std::vector<std::pair<std::string, std::string>> out;
  if (trim(text).empty())
    return out;
  for (const auto& part : split_outside_quotes(text, ',')) {
    auto eq = part.find('=');
    if (eq == std::string::npos || trim(part.substr(0, eq)).empty())
      parse_error("expected <name>=<value> at '" + part + "'");
    out.emplace_back(trim(part.substr(0, eq)), unquote(trim(part.substr(eq + 1))));
  }
  return out;
}

Session::Session(mgmt::Transport& transport, std::string app_name, std::ostream& out)
  : transport_(transport), app_name_(std::move(app_name)), out_(out)
{
}

std::string Session::prompt() const
{
  return active_.empty() ? app_name_ + ">" : app_name_ + ">" + active_.str() + ">";
}

void Session::run(std::istream& in, bool echo)
{
  std::string pending;
  std::string line;
  while (true) {
    if (!echo && trim(pending).empty())
      out_ << prompt() << std::flush;
    if (!std::getline(in, line))
      break;
    if (echo)
      out_ << (trim(pending).empty() ? prompt() : std::string()) << line << '\n';
    pending += line;
    pending += '\n';

    while (true) {
      std::string t = trim(pending);
      if (t.empty()) {
        pending.clear();
        break;
      }
      if (t.front() != '$') {
        out_ << "Error: ParseError: expected '$' at '" << t << "'\n";
        pending.clear();
        break;
      }
      auto end = command_end(pending);
      if (end == std::string::npos)
        break;
      std::string command = pending.substr(0, end + 1);
      pending.erase(0, end + 1);
      execute(command);
    }
  }
  if (!echo)
    out_ << '\n';
  std::string t = trim(pending);
  if (!t.empty() && t != "$")
    out_ << "Error: ParseError: expected ';' after '" << t << "'\n";
}

void Session::execute(std::string_view command_text)
{
  try {
    dispatch(parse_command(command_text));
  } catch (const Error& e) {
    out_ << "Error: " << to_string(e.code()) << ": " << e.what() << '\n';
  } catch (const CallFailed& e) {
    out_ << "Error: " << e.code << ": " << e.message << '\n';
  }
}

RdnPath Session::target(const Command& cmd, std::size_t field) const
{
  if (field >= cmd.fields.size())
    return active_;
  try {
    return active_.resolve(RdnPath::parse(cmd.fields[field], true));
  } catch (const Error& e) {
    parse_error(e.what());
  }
}

mgmt::json Session::call(const std::string& op, const RdnPath& path, mgmt::json payload)
{
  mgmt::json response = transport_.call({{"op", op}, {"path", path.str()}, {"payload", std::move(payload)}});
  if (response.value("status", "") != "ok") {
    std::string message;
    if (auto body = response.find("body"); body != response.end() && body->is_object())
      message = body->value("message", "");
    throw CallFailed{response.value("error_code", "Unknown"), message};
  }
  return response["body"];
}

void Session::dispatch(const Command& cmd)
{
  const auto& n = cmd.name;
  auto field = [&](std::size_t i) { return i < cmd.fields.size() ? cmd.fields[i] : std::string(); };

  if (n == "help") {
    help(field(0));
  } else if (n == "cn") {
    RdnPath next = target(cmd, 0);
    if (field(0).empty())
      next = RdnPath{};
    call("children", next);
    active_ = std::move(next);
  } else if (n == "ls") {
    for (const auto& name : call("children", target(cmd, 0)))
      out_ << name.get<std::string>() << '\n';
  } else if (n == "sig") {
    auto sig = call("signature", target(cmd, 0));
    out_ << "MOC (Managed Object Class) of children is: " << sig["class"].get<std::string>() << ".\n"
         << "The following table lists the attributes of this class.\n\n"
         << "Name | Type | Opt/Req | Default Value\n"
         << "-----|-----|-----|-----\n";
    for (const auto& p : sig["params"]) {
      out_ << p["name"].get<std::string>() << " | " << p["type"].get<std::string>() << " | "
           << (p["required"].get<bool>() ? "R" : "O") << " |";
      if (p["default"].is_string())
        out_ << ' ' << p["default"].get<std::string>();
      out_ << '\n';
    }
  } else if (n == "add") {
    auto parent = target(cmd, 0);
    mgmt::json payload = mgmt::json::object();
    for (const auto& [k, v] : parse_assignments(field(2)))
      payload[k] = v;
    if (!field(1).empty())
      payload["@class"] = field(1);
    call("create", parent, std::move(payload));
    out_ << "Add command succeeded.\n";
  } else if (n == "del") {
    if (field(0).empty())
      parse_error("del needs a non-empty <RDN>");
    call("delete", target(cmd, 0));
    out_ << "Delete command succeeded.\n";
  } else if (n == "lsatr") {
    for (const auto& p : call("params", target(cmd, 0)))
      out_ << p["name"].get<std::string>() << " : " << p["value"].get<std::string>() << '\n';
  } else if (n == "set") {
    auto assignments = parse_assignments(field(1));
    if (assignments.empty())
      parse_error("set needs at least one <ATR>=<VAL>");
    mgmt::json payload = mgmt::json::object();
    for (const auto& [k, v] : assignments)
      payload[k] = v;
    call("set", target(cmd, 0), std::move(payload));
    out_ << "Set command succeeded.\n";
  } else if (n == "action") {
    if (field(1).empty())
      parse_error("action needs an <ACTION> name");
    mgmt::json payload = mgmt::json::object();
    for (const auto& [k, v] : parse_assignments(field(2)))
      payload[k] = v;
    payload["@action"] = field(1);
    out_ << call("do_action", target(cmd, 0), std::move(payload))["result"].get<std::string>() << '\n';
  } else if (n == "mon") {
    auto path = target(cmd, 0);
    std::string names = field(1);
    if (names.empty()) {
      for (const auto& v : call("monitors", path))
        names += (names.empty() ? "" : ",") + v.get<std::string>();
      if (names.empty())
        return;
    }
    for (const auto& v : call("get_monitors", path, {{"@names", names}}))
      out_ << v["name"].get<std::string>() << " : " << v["value"].get<std::string>() << '\n';
  } else if (n == "tree") {
    auto path = target(cmd, 0);
    print_tree(path, path.empty() ? app_name_ : path.back().str(), 0);
  }
}

void Session::print_tree(const RdnPath& path, const std::string& label, int depth)
{
  std::string indent;
  for (int i = 1; i < depth; ++i)
    indent += "|   ";
  out_ << indent << (depth == 0 ? "-- " : "|-- ") << label << '\n';
  for (const auto& p : call("params", path))
    out_ << indent << "| " << p["name"].get<std::string>() << '=' << p["value"].get<std::string>() << '\n';
  for (const auto& c : call("children", path)) {
    auto segment = RdnPath::parse(c.get<std::string>()).back();
    print_tree(path.child(segment), c.get<std::string>(), depth + 1);
  }
}

void Session::help(const std::string& topic)
{
  if (topic.empty()) {
    out_ << "Commands:";
    for (const auto& c : command_order)
      out_ << ' ' << c;
    out_ << "\nType \"help: <CMD>;\" for details. Every command starts with '$' and ends with ';'.\n";
    return;
  }
  auto it = help_texts.find(topic);
  if (it == help_texts.end())
    parse_error("no help for '" + topic + "'");
  out_ << it->second << '\n';
}

} // namespace rscm::cli
