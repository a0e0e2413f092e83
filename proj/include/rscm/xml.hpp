#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rscm::xml
{

// Element-only DOM. Character data is kept per element (trimmed); mixed
// content is not needed by configuration or schema documents.
struct Element
{
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<Element> children;
  std::string text;
  int line = 0;

  std::optional<std::string> attribute(std::string_view key) const;
  void set_attribute(const std::string& key, std::string value);
  const Element* find_child(std::string_view child_name) const;
  std::vector<const Element*> children_named(std::string_view child_name) const;

  // Equality ignores line numbers.
  bool same_content(const Element& other) const;
};

// Throws Error(ParseError) with the line number on malformed input.
Element parse(std::string_view text);

std::string serialize(const Element& root, bool with_declaration = true);

std::string escape(std::string_view text);

// Strips a namespace prefix: "xs:element" -> "element".
std::string_view local_name(std::string_view qualified);

} // namespace rscm::xml
