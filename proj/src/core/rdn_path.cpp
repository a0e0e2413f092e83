#include "rscm/rdn_path.hpp"

#include "rscm/error.hpp"

#include <cctype>

namespace rscm
{

namespace
{

std::string_view trim(std::string_view s)
{
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

[[noreturn]] void malformed(std::string_view text, const std::string& why)
{
  throw Error(ErrorCode::MalformedPath, "malformed path '" + std::string(text) + "': " + why);
}

bool valid_name(std::string_view name)
{
  if (name.empty())
    return false;
  for (char c : name) {
    auto u = static_cast<unsigned char>(c);
    if (!(std::isalnum(u) || c == '_' || c == '-' || c == '.'))
      return false;
  }
  return true;
}

RdnSegment parse_segment(std::string_view whole, std::string_view raw)
{
  std::string_view seg = trim(raw);
  if (seg.empty())
    malformed(whole, "empty segment");
  if (seg == "..")
    return RdnSegment::parent_ref();

  auto eq = seg.find('=');
  if (eq == std::string_view::npos) {
    if (!valid_name(seg) || seg.find('"') != std::string_view::npos)
      malformed(whole, "bad segment '" + std::string(seg) + "'");
    return {std::string(seg), std::nullopt};
  }

  std::string_view name = trim(seg.substr(0, eq));
  std::string_view rest = trim(seg.substr(eq + 1));
  if (!valid_name(name) || name == "..")
    malformed(whole, "bad segment name '" + std::string(name) + "'");
  if (rest.size() < 2 || rest.front() != '"')
    malformed(whole, "key must be quoted in '" + std::string(seg) + "'");

  std::string key;
  std::size_t i = 1;
  bool closed = false;
  for (; i < rest.size(); ++i) {
    char c = rest[i];
    if (c == '\\' && i + 1 < rest.size()) {
      key.push_back(rest[++i]);
    } else if (c == '"') {
      closed = true;
      ++i;
      break;
    } else {
      key.push_back(c);
    }
  }
  if (!closed)
    malformed(whole, "unbalanced quotes");
  if (i != rest.size())
    malformed(whole, "trailing characters after key");
  return {std::string(name), std::move(key)};
}

} // namespace

std::string quote_key(std::string_view key)
{
  std::string out = "\"";
  for (char c : key) {
    if (c == '"' || c == '\\')
      out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string RdnSegment::str() const
{
  if (!key)
    return name;
  return name + "=" + quote_key(*key);
}

RdnPath RdnPath::parse(std::string_view text, bool allow_parent_refs)
{
  std::vector<RdnSegment> segments;
  if (trim(text).empty())
    return RdnPath{};

  bool in_quotes = false;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i < text.size()) {
      char c = text[i];
      if (in_quotes && c == '\\') {
        ++i;
        continue;
      }
      if (c == '"')
        in_quotes = !in_quotes;
      if (in_quotes || c != ',')
        continue;
    }
    if (in_quotes)
      malformed(text, "unbalanced quotes");
    segments.push_back(parse_segment(text, text.substr(start, i - start)));
    start = i + 1;
  }

  if (!allow_parent_refs) {
    for (const auto& s : segments)
      if (s.is_parent_ref())
        malformed(text, "'..' not allowed in a canonical path");
  }
  return RdnPath{std::move(segments)};
}

bool RdnPath::is_canonical() const
{
  for (const auto& s : segments_)
    if (s.is_parent_ref())
      return false;
  return true;
}

RdnPath RdnPath::child(RdnSegment segment) const
{
  auto segs = segments_;
  segs.push_back(std::move(segment));
  return RdnPath{std::move(segs)};
}

RdnPath RdnPath::parent() const
{
  auto segs = segments_;
  if (!segs.empty())
    segs.pop_back();
  return RdnPath{std::move(segs)};
}

RdnPath RdnPath::resolve(const RdnPath& relative) const
{
  auto segs = segments_;
  for (const auto& s : relative.segments()) {
    if (s.is_parent_ref()) {
      if (segs.empty())
        throw Error(ErrorCode::MalformedPath, "'..' climbs above the root in '" + relative.str() + "'");
      segs.pop_back();
    } else {
      segs.push_back(s);
    }
  }
  return RdnPath{std::move(segs)};
}

std::string RdnPath::str() const
{
  std::string out;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (i)
      out.push_back(',');
    out += segments_[i].str();
  }
  return out;
}

} // namespace rscm
