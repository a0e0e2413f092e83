#include "detail.hpp"

#include <set>

namespace rscm::schema
{

namespace detail
{

namespace
{

void flatten_one(const std::string& name, const std::map<std::string, SchemaDocument>& docs,
                 std::map<std::string, SchemaDocument>& done, std::vector<std::string>& visiting)
{
  if (done.contains(name))
    return;
  for (const auto& v : visiting) {
    if (v == name) {
      std::string cycle;
      for (const auto& c : visiting)
        cycle += c + " -> ";
      throw Error(ErrorCode::InheritanceCycle, "inheritance cycle: " + cycle + name);
    }
  }
  auto it = docs.find(name);
  if (it == docs.end())
    throw Error(ErrorCode::UnknownClass, "unknown class '" + name + "'");

  SchemaDocument doc = it->second;
  if (doc.base_class) {
    visiting.push_back(name);
    flatten_one(*doc.base_class, docs, done, visiting);
    visiting.pop_back();

    const SchemaDocument& base = done.at(*doc.base_class);
    SchemaDocument merged = base;
    merged.class_name = doc.class_name;
    merged.base_class.reset();
    if (base.elements.empty())
      merged.compositor = doc.compositor;
    else if (!doc.elements.empty())
      merged.compositor = Compositor::Sequence;
    for (auto& e : doc.elements) {
      if (merged.element(e.name))
        throw Error(ErrorCode::SchemaSyntax,
                    "class '" + name + "' redeclares inherited element '" + e.name + "'");
      merged.elements.push_back(std::move(e));
    }
    for (auto& a : doc.actions) {
      std::erase_if(merged.actions, [&](const ActionSpec& x) { return x.name == a.name; });
      merged.actions.push_back(std::move(a));
    }
    for (auto& a : doc.attributes) {
      std::erase_if(merged.attributes, [&](const AttributeDecl& x) { return x.name == a.name; });
      merged.attributes.push_back(std::move(a));
    }
    doc = std::move(merged);
  }
  done.emplace(name, std::move(doc));
}

} // namespace

std::map<std::string, SchemaDocument> flatten(const std::map<std::string, SchemaDocument>& docs)
{
  std::map<std::string, SchemaDocument> done;
  for (const auto& [name, doc] : docs) {
    std::vector<std::string> visiting;
    flatten_one(name, docs, done, visiting);
  }
  for (const auto& [name, doc] : done)
    for (const auto& e : doc.elements)
      if (!e.is_scalar() && !done.contains(e.class_type))
        throw Error(ErrorCode::UnknownClass,
                    "element '" + e.name + "' of class '" + name + "' has unknown type '" + e.class_type + "'");
  return done;
}

} // namespace detail

namespace
{

struct Narrowing
{
  // (class, element) -> derived class observed in the sample
  std::map<std::pair<std::string, std::string>, std::string> slots;
};

void collect_narrowing(const UnifiedSchema& schema, const std::string& class_name, const xml::Element& instance,
                       Narrowing& out)
{
  const SchemaDocument& cls = schema.cls(class_name);
  for (const auto& child : instance.children) {
    const ElementDecl* decl = cls.element(child.name);
    if (!decl || decl->is_scalar())
      continue;
    std::string effective = decl->class_type;
    if (auto xsi = child.attribute("xsi:type"); xsi && *xsi != decl->class_type) {
      if (!schema.classes.contains(*xsi))
        throw Error(ErrorCode::UnknownClass, "sample uses unknown class '" + *xsi + "' at element '" +
                                                 child.name + "' (line " + std::to_string(child.line) + ")");
      if (!schema.derives_from(*xsi, decl->class_type))
        throw Error(ErrorCode::SampleMismatch, "sample uses class '" + *xsi + "' for element '" + child.name +
                                                   "' which is declared as '" + decl->class_type + "'");
      auto key = std::make_pair(class_name, child.name);
      auto [it, inserted] = out.slots.emplace(key, *xsi);
      if (!inserted && it->second != *xsi)
        throw Error(ErrorCode::SampleMismatch, "sample uses both '" + it->second + "' and '" + *xsi +
                                                   "' for element '" + child.name + "' of class '" +
                                                   class_name + "'");
      effective = *xsi;
    }
    collect_narrowing(schema, effective, child, out);
  }
}

} // namespace

const SchemaDocument& UnifiedSchema::cls(std::string_view name) const
{
  auto it = classes.find(std::string(name));
  if (it == classes.end())
    throw Error(ErrorCode::UnknownClass, "unknown class '" + std::string(name) + "'");
  return it->second;
}

bool UnifiedSchema::derives_from(std::string_view derived, std::string_view base) const
{
  std::string current(derived);
  for (std::size_t guard = 0; guard <= declared_bases.size(); ++guard) {
    if (current == base)
      return true;
    auto it = declared_bases.find(current);
    if (it == declared_bases.end())
      return false;
    current = it->second;
  }
  return false;
}

UnifiedSchema compose_unified_schema(const std::vector<SchemaDocument>& schemas, const xml::Element& sample)
{
  std::map<std::string, SchemaDocument> docs;
  UnifiedSchema unified;
  for (const auto& doc : schemas) {
    if (!docs.emplace(doc.class_name, doc).second)
      throw Error(ErrorCode::SchemaSyntax, "class '" + doc.class_name + "' declared twice");
    if (doc.is_root_element) {
      if (!unified.root_element_name.empty())
        throw Error(ErrorCode::SchemaSyntax, "more than one root element document");
      unified.root_element_name = doc.class_name;
    }
    if (doc.base_class)
      unified.declared_bases.emplace(doc.class_name, *doc.base_class);
  }
  if (unified.root_element_name.empty())
    throw Error(ErrorCode::UnknownClass, "no root element document among the schemas");

  unified.classes = detail::flatten(docs);

  if (sample.name != unified.root_element_name)
    throw Error(ErrorCode::SampleMismatch, "sample root is <" + sample.name + ">, expected <" +
                                               unified.root_element_name + ">");
  Narrowing narrowing;
  collect_narrowing(unified, unified.root_element_name, sample, narrowing);
  for (const auto& [slot, derived] : narrowing.slots) {
    auto& cls = unified.classes.at(slot.first);
    for (auto& e : cls.elements)
      if (e.name == slot.second)
        e.class_type = derived;
  }

  if (auto violations = validate_document(unified, sample); !violations.empty()) {
    std::string first = violations.front().path + ": " + violations.front().reason;
    throw Error(ErrorCode::SampleMismatch, "sample does not validate against the unified schema: " + first,
                std::move(violations));
  }
  return unified;
}

std::string serialize_unified_schema(const UnifiedSchema& schema)
{
  xml::Element root;
  root.name = "xs:schema";
  root.attributes = {{"xmlns:xs", "http://www.w3.org/2001/XMLSchema"},
                     {"xmlns:xsi", "http://www.w3.org/2001/XMLSchema-instance"},
                     {"elementFormDefault", "qualified"}};
  root.children.push_back(detail::to_xml(schema.root()));
  for (const auto& [name, doc] : schema.classes) {
    if (name == schema.root_element_name)
      continue;
    root.children.push_back(detail::to_xml(doc));
  }
  return xml::serialize(root, true);
}

UnifiedSchema parse_unified_schema(std::string_view text)
{
  xml::Element root;
  try {
    root = xml::parse(text);
  } catch (const Error& e) {
    throw Error(ErrorCode::SchemaSyntax, e.what());
  }
  if (xml::local_name(root.name) != "schema")
    detail::syntax_error(root, "unified schema must be an xs:schema document");

  std::map<std::string, SchemaDocument> docs;
  UnifiedSchema unified;
  for (const auto& c : root.children) {
    auto kind = xml::local_name(c.name);
    if (kind == "annotation")
      continue;
    SchemaDocument doc;
    if (kind == "complexType") {
      doc = detail::parse_complex_type(c);
    } else if (kind == "element") {
      doc = detail::parse_root_element(c);
      if (!unified.root_element_name.empty())
        detail::syntax_error(c, "more than one root element");
      unified.root_element_name = doc.class_name;
    } else {
      detail::syntax_error(c, "unsupported top-level construct <" + c.name + ">");
    }
    if (doc.base_class)
      unified.declared_bases.emplace(doc.class_name, *doc.base_class);
    auto name = doc.class_name;
    if (!docs.emplace(name, std::move(doc)).second)
      detail::syntax_error(c, "class '" + name + "' declared twice");
  }
  if (unified.root_element_name.empty())
    detail::syntax_error(root, "unified schema has no root element");
  unified.classes = detail::flatten(docs);
  return unified;
}

} // namespace rscm::schema
