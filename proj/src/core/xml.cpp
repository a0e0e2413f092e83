#include "rscm/xml.hpp"

#include "rscm/error.hpp"

#include <expat.h>

#include <cctype>

namespace rscm::xml
{

namespace
{

std::string trimmed(const std::string& s)
{
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
    ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
    --e;
  return s.substr(b, e - b);
}

struct BuildState
{
  XML_Parser parser = nullptr;
  std::vector<Element> stack;
  std::optional<Element> root;
};

void XMLCALL on_start(void* user, const XML_Char* name, const XML_Char** atts)
{
  auto* st = static_cast<BuildState*>(user);
  Element e;
  e.name = name;
  e.line = static_cast<int>(XML_GetCurrentLineNumber(st->parser));
  for (int i = 0; atts[i]; i += 2)
    e.attributes.emplace_back(atts[i], atts[i + 1]);
  st->stack.push_back(std::move(e));
}

void XMLCALL on_end(void* user, const XML_Char*)
{
  auto* st = static_cast<BuildState*>(user);
  Element e = std::move(st->stack.back());
  st->stack.pop_back();
  if (!e.children.empty())
    e.text = trimmed(e.text);
  if (st->stack.empty())
    st->root = std::move(e);
  else
    st->stack.back().children.push_back(std::move(e));
}

void XMLCALL on_chars(void* user, const XML_Char* s, int len)
{
  auto* st = static_cast<BuildState*>(user);
  if (!st->stack.empty())
    st->stack.back().text.append(s, static_cast<std::size_t>(len));
}

void write(std::string& out, const Element& e, int depth)
{
  std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
  out += indent + "<" + e.name;
  for (const auto& [k, v] : e.attributes)
    out += " " + k + "=\"" + escape(v) + "\"";
  if (e.children.empty() && e.text.empty()) {
    out += "/>\n";
    return;
  }
  out += ">";
  if (e.children.empty()) {
    out += escape(e.text) + "</" + e.name + ">\n";
    return;
  }
  out += "\n";
  if (!e.text.empty())
    out += indent + "  " + escape(e.text) + "\n";
  for (const auto& c : e.children)
    write(out, c, depth + 1);
  out += indent + "</" + e.name + ">\n";
}

} // namespace

std::optional<std::string> Element::attribute(std::string_view key) const
{
  for (const auto& [k, v] : attributes)
    if (k == key)
      return v;
  return std::nullopt;
}

void Element::set_attribute(const std::string& key, std::string value)
{
  for (auto& [k, v] : attributes) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  attributes.emplace_back(key, std::move(value));
}

const Element* Element::find_child(std::string_view child_name) const
{
  for (const auto& c : children)
    if (c.name == child_name)
      return &c;
  return nullptr;
}

std::vector<const Element*> Element::children_named(std::string_view child_name) const
{
  std::vector<const Element*> out;
  for (const auto& c : children)
    if (c.name == child_name)
      out.push_back(&c);
  return out;
}

bool Element::same_content(const Element& other) const
{
  if (name != other.name || attributes != other.attributes || text != other.text ||
      children.size() != other.children.size())
    return false;
  for (std::size_t i = 0; i < children.size(); ++i)
    if (!children[i].same_content(other.children[i]))
      return false;
  return true;
}

Element parse(std::string_view text)
{
  BuildState st;
  XML_Parser parser = XML_ParserCreate("UTF-8");
  st.parser = parser;
  XML_SetUserData(parser, &st);
  XML_SetElementHandler(parser, on_start, on_end);
  XML_SetCharacterDataHandler(parser, on_chars);

  auto status = XML_Parse(parser, text.data(), static_cast<int>(text.size()), XML_TRUE);
  if (status != XML_STATUS_OK) {
    std::string msg = "XML error at line " + std::to_string(XML_GetCurrentLineNumber(parser)) + ": " +
                      XML_ErrorString(XML_GetErrorCode(parser));
    XML_ParserFree(parser);
    throw Error(ErrorCode::ParseError, msg);
  }
  XML_ParserFree(parser);
  if (!st.root)
    throw Error(ErrorCode::ParseError, "XML document has no root element");
  return std::move(*st.root);
}

std::string serialize(const Element& root, bool with_declaration)
{
  std::string out;
  if (with_declaration)
    out += "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n";
  write(out, root, 0);
  return out;
}

std::string escape(std::string_view text)
{
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '"': out += "&quot;"; break;
    default: out.push_back(c);
    }
  }
  return out;
}

std::string_view local_name(std::string_view qualified)
{
  auto colon = qualified.find(':');
  return colon == std::string_view::npos ? qualified : qualified.substr(colon + 1);
}

} // namespace rscm::xml
