#include "detail.hpp"

#include <regex>

namespace rscm::schema
{

namespace detail
{

void syntax_error(const xml::Element& at, const std::string& what)
{
  throw Error(ErrorCode::SchemaSyntax, "line " + std::to_string(at.line) + ": " + what);
}

namespace
{

std::string_view local(const xml::Element& e) { return xml::local_name(e.name); }

std::string required_attribute(const xml::Element& e, std::string_view key)
{
  auto v = e.attribute(key);
  if (!v || v->empty())
    syntax_error(e, "<" + e.name + "> requires attribute '" + std::string(key) + "'");
  return *v;
}

std::size_t parse_count(const xml::Element& e, const std::string& text)
{
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos)
    syntax_error(e, "bad occurrence count '" + text + "'");
  return static_cast<std::size_t>(std::stoull(text));
}

FacetSet parse_simple_type(const xml::Element& simple_type)
{
  const xml::Element* restriction = nullptr;
  for (const auto& c : simple_type.children) {
    if (local(c) == "restriction")
      restriction = &c;
    else if (local(c) != "annotation")
      syntax_error(c, "unsupported construct <" + c.name + "> in simpleType");
  }
  if (!restriction)
    syntax_error(simple_type, "simpleType without restriction");

  FacetSet facets;
  auto base_name = required_attribute(*restriction, "base");
  auto base = scalar_from_xsd(base_name);
  if (!base)
    syntax_error(*restriction, "unsupported restriction base '" + base_name + "'");
  facets.base = *base;

  for (const auto& f : restriction->children) {
    auto kind = local(f);
    if (kind == "annotation")
      continue;
    auto value = f.attribute("value");
    if (!value)
      syntax_error(f, "facet <" + f.name + "> requires 'value'");
    if (kind == "minInclusive" || kind == "maxInclusive") {
      if (facets.base == ScalarType::String)
        syntax_error(f, "numeric facet on a string restriction");
      if (!is_decimal(*value))
        syntax_error(f, "facet value '" + *value + "' is not a number");
      (kind == "minInclusive" ? facets.min_inclusive : facets.max_inclusive) = *value;
    } else if (kind == "enumeration") {
      facets.enumeration.push_back(*value);
    } else if (kind == "pattern") {
      try {
        std::regex probe(*value, std::regex::ECMAScript);
      } catch (const std::regex_error&) {
        syntax_error(f, "invalid pattern '" + *value + "'");
      }
      facets.pattern = *value;
    } else {
      syntax_error(f, "unsupported facet <" + f.name + ">");
    }
  }
  return facets;
}

KeyConstraint parse_key(const xml::Element& key)
{
  KeyConstraint k;
  k.name = required_attribute(key, "name");
  for (const auto& c : key.children) {
    if (local(c) == "selector")
      k.selector = required_attribute(c, "xpath");
    else if (local(c) == "field")
      k.field = required_attribute(c, "xpath");
    else if (local(c) != "annotation")
      syntax_error(c, "unsupported construct <" + c.name + "> in key");
  }
  static const std::regex selector_shape(R"((\.)?//[A-Za-z_][A-Za-z0-9_.\-]*)");
  static const std::regex field_shape(R"([A-Za-z_][A-Za-z0-9_.\-]*)");
  if (!std::regex_match(k.selector, selector_shape))
    syntax_error(key, "unsupported key selector '" + k.selector + "'");
  if (!std::regex_match(k.field, field_shape))
    syntax_error(key, "unsupported key field '" + k.field + "'");
  return k;
}

std::vector<const xml::Element*> particle_elements(const xml::Element& particle)
{
  std::vector<const xml::Element*> out;
  for (const auto& c : particle.children) {
    if (local(c) == "element")
      out.push_back(&c);
    else if (local(c) != "annotation")
      syntax_error(c, "unsupported construct <" + c.name + "> in " + particle.name);
  }
  return out;
}

// The single sequence/all child of a complexType body, if any.
const xml::Element* compositor_of(const xml::Element& body)
{
  const xml::Element* found = nullptr;
  for (const auto& c : body.children) {
    if (local(c) == "sequence" || local(c) == "all") {
      if (found)
        syntax_error(c, "more than one compositor");
      found = &c;
    }
  }
  return found;
}

std::vector<ActionSpec> parse_action_list(const xml::Element& list)
{
  std::vector<ActionSpec> actions;
  for (const auto& ct : list.children) {
    if (local(ct) == "annotation")
      continue;
    if (local(ct) != "complexType")
      syntax_error(ct, "action list must contain an anonymous complexType");
    const auto* comp = compositor_of(ct);
    if (!comp)
      continue;
    for (const auto* action_el : particle_elements(*comp)) {
      ActionSpec action;
      action.name = required_attribute(*action_el, "name");
      for (const auto& act : action_el->children) {
        if (local(act) == "annotation")
          continue;
        if (local(act) != "complexType")
          syntax_error(act, "action '" + action.name + "' must have an anonymous complexType");
        const auto* params = compositor_of(act);
        if (!params)
          continue;
        for (const auto* p : particle_elements(*params)) {
          ActionParam param;
          param.name = required_attribute(*p, "name");
          auto type_name = required_attribute(*p, "type");
          auto type = scalar_from_xsd(type_name);
          if (!type)
            syntax_error(*p, "action parameter type '" + type_name + "' is not a supported scalar");
          param.type = *type;
          action.params.push_back(std::move(param));
        }
      }
      actions.push_back(std::move(action));
    }
  }
  return actions;
}

void parse_element(const xml::Element& el, SchemaDocument& doc)
{
  ElementDecl decl;
  decl.name = required_attribute(el, "name");
  if (auto v = el.attribute("minOccurs"))
    decl.min_occurs = parse_count(el, *v);
  if (auto v = el.attribute("maxOccurs")) {
    if (*v == "unbounded")
      decl.max_occurs.reset();
    else
      decl.max_occurs = parse_count(el, *v);
  }

  if (decl.max_occurs && *decl.max_occurs == 0) {
    if (decl.min_occurs != 0)
      syntax_error(el, "maxOccurs=\"0\" requires minOccurs=\"0\"");
    if (!doc.actions.empty())
      syntax_error(el, "more than one action list");
    doc.actions = parse_action_list(el);
    if (doc.actions.empty())
      syntax_error(el, "action list '" + decl.name + "' declares no actions");
    return;
  }
  if (decl.max_occurs && decl.min_occurs > *decl.max_occurs)
    syntax_error(el, "minOccurs exceeds maxOccurs");

  if (auto t = el.attribute("type")) {
    if (auto scalar = scalar_from_xsd(*t))
      decl.scalar = scalar;
    else if (xml::local_name(*t) != *t)
      syntax_error(el, "unsupported built-in type '" + *t + "'");
    else
      decl.class_type = *t;
  }
  decl.default_value = el.attribute("default");

  for (const auto& c : el.children) {
    auto kind = local(c);
    if (kind == "annotation")
      continue;
    if (kind == "simpleType") {
      if (decl.scalar || !decl.class_type.empty())
        syntax_error(c, "element '" + decl.name + "' has both a type attribute and a simpleType");
      decl.facets = parse_simple_type(c);
      decl.scalar = decl.facets->base;
    } else if (kind == "key") {
      decl.keys.push_back(parse_key(c));
    } else if (kind == "complexType") {
      syntax_error(c, "anonymous complex types are only allowed in action lists");
    } else {
      syntax_error(c, "unsupported construct <" + c.name + "> in element '" + decl.name + "'");
    }
  }

  if (!decl.scalar && decl.class_type.empty())
    syntax_error(el, "element '" + decl.name + "' has no type");
  if (decl.scalar && !decl.keys.empty())
    syntax_error(el, "key declared on scalar element '" + decl.name + "'");
  if (decl.default_value) {
    if (!decl.scalar)
      syntax_error(el, "default on class-typed element '" + decl.name + "'");
    if (auto why = check_value(*decl.scalar, decl.facets, *decl.default_value))
      syntax_error(el, "default of '" + decl.name + "' violates its type: " + *why);
  }
  if (doc.element(decl.name))
    syntax_error(el, "duplicate element '" + decl.name + "'");
  doc.elements.push_back(std::move(decl));
}

void parse_attribute(const xml::Element& el, SchemaDocument& doc)
{
  AttributeDecl attr;
  attr.name = required_attribute(el, "name");
  auto type_name = el.attribute("type").value_or("xs:string");
  auto type = scalar_from_xsd(type_name);
  if (!type)
    syntax_error(el, "unsupported attribute type '" + type_name + "'");
  attr.type = *type;
  auto use = el.attribute("use").value_or("optional");
  if (use != "optional" && use != "required")
    syntax_error(el, "unsupported attribute use '" + use + "'");
  attr.required = use == "required";
  doc.attributes.push_back(std::move(attr));
}

void parse_body(const xml::Element& body, SchemaDocument& doc)
{
  for (const auto& c : body.children) {
    auto kind = local(c);
    if (kind == "annotation")
      continue;
    if (kind == "sequence" || kind == "all") {
      doc.compositor = kind == "all" ? Compositor::All : Compositor::Sequence;
      for (const auto* e : particle_elements(c))
        parse_element(*e, doc);
    } else if (kind == "attribute") {
      parse_attribute(c, doc);
    } else {
      syntax_error(c, "unsupported construct <" + c.name + "> in complexType");
    }
  }
}

} // namespace

SchemaDocument parse_complex_type(const xml::Element& ct)
{
  SchemaDocument doc;
  doc.class_name = required_attribute(ct, "name");

  const xml::Element* content = nullptr;
  for (const auto& c : ct.children)
    if (local(c) == "complexContent")
      content = &c;

  if (!content) {
    parse_body(ct, doc);
    return doc;
  }
  for (const auto& c : ct.children)
    if (&c != content && local(c) != "annotation")
      syntax_error(c, "complexContent must be the only content of a complexType");

  const xml::Element* extension = nullptr;
  for (const auto& c : content->children) {
    if (local(c) == "extension")
      extension = &c;
    else if (local(c) != "annotation")
      syntax_error(c, "unsupported construct <" + c.name + "> in complexContent");
  }
  if (!extension)
    syntax_error(*content, "complexContent without extension");
  doc.base_class = required_attribute(*extension, "base");
  parse_body(*extension, doc);
  return doc;
}

SchemaDocument parse_root_element(const xml::Element& el)
{
  SchemaDocument doc;
  doc.is_root_element = true;
  doc.class_name = required_attribute(el, "name");
  const xml::Element* body = nullptr;
  for (const auto& c : el.children) {
    auto kind = local(c);
    if (kind == "annotation") {
      for (const auto& info : c.children) {
        if (local(info) != "appinfo")
          continue;
        for (const auto& item : info.children)
          if (item.name == "managedElementType")
            doc.managed_element_type = item.attribute("value");
      }
    } else if (kind == "complexType") {
      body = &c;
    } else {
      syntax_error(c, "unsupported construct <" + c.name + "> in root element");
    }
  }
  if (!body)
    syntax_error(el, "root element '" + doc.class_name + "' has no complexType");
  parse_body(*body, doc);
  return doc;
}

namespace
{

xml::Element node(std::string name, std::vector<std::pair<std::string, std::string>> attrs = {})
{
  xml::Element e;
  e.name = std::move(name);
  e.attributes = std::move(attrs);
  return e;
}

xml::Element body_to_xml(const SchemaDocument& doc)
{
  xml::Element particle = node(doc.compositor == Compositor::All ? "xs:all" : "xs:sequence");
  for (const auto& d : doc.elements) {
    xml::Element e = node("xs:element", {{"name", d.name}});
    if (d.scalar && !d.facets)
      e.set_attribute("type", "xs:" + std::string(to_string(*d.scalar)));
    else if (!d.class_type.empty())
      e.set_attribute("type", d.class_type);
    if (d.min_occurs != 1)
      e.set_attribute("minOccurs", std::to_string(d.min_occurs));
    if (!d.max_occurs)
      e.set_attribute("maxOccurs", "unbounded");
    else if (*d.max_occurs != 1)
      e.set_attribute("maxOccurs", std::to_string(*d.max_occurs));
    if (d.default_value)
      e.set_attribute("default", *d.default_value);
    if (d.facets) {
      xml::Element r = node("xs:restriction", {{"base", "xs:" + std::string(to_string(d.facets->base))}});
      if (d.facets->min_inclusive)
        r.children.push_back(node("xs:minInclusive", {{"value", *d.facets->min_inclusive}}));
      if (d.facets->max_inclusive)
        r.children.push_back(node("xs:maxInclusive", {{"value", *d.facets->max_inclusive}}));
      for (const auto& v : d.facets->enumeration)
        r.children.push_back(node("xs:enumeration", {{"value", v}}));
      if (d.facets->pattern)
        r.children.push_back(node("xs:pattern", {{"value", *d.facets->pattern}}));
      xml::Element st = node("xs:simpleType");
      st.children.push_back(std::move(r));
      e.children.push_back(std::move(st));
    }
    for (const auto& k : d.keys) {
      xml::Element key = node("xs:key", {{"name", k.name}});
      key.children.push_back(node("xs:selector", {{"xpath", k.selector}}));
      key.children.push_back(node("xs:field", {{"xpath", k.field}}));
      e.children.push_back(std::move(key));
    }
    particle.children.push_back(std::move(e));
  }
  if (!doc.actions.empty()) {
    xml::Element list = node("xs:element", {{"minOccurs", "0"}, {"maxOccurs", "0"}, {"name", "ActionList"}});
    xml::Element ct = node("xs:complexType");
    xml::Element all = node("xs:all");
    for (const auto& a : doc.actions) {
      xml::Element action = node("xs:element", {{"name", a.name}});
      xml::Element act = node("xs:complexType");
      xml::Element params = node("xs:all");
      for (const auto& p : a.params)
        params.children.push_back(
            node("xs:element", {{"name", p.name}, {"type", "xs:" + std::string(to_string(p.type))}}));
      act.children.push_back(std::move(params));
      action.children.push_back(std::move(act));
      all.children.push_back(std::move(action));
    }
    ct.children.push_back(std::move(all));
    list.children.push_back(std::move(ct));
    particle.children.push_back(std::move(list));
  }

  xml::Element body = node("xs:complexType");
  body.children.push_back(std::move(particle));
  for (const auto& a : doc.attributes)
    body.children.push_back(node("xs:attribute", {{"name", a.name},
                                                  {"type", "xs:" + std::string(to_string(a.type))},
                                                  {"use", a.required ? "required" : "optional"}}));
  return body;
}

} // namespace

xml::Element to_xml(const SchemaDocument& doc)
{
  xml::Element body = body_to_xml(doc);
  if (doc.is_root_element) {
    xml::Element root = node("xs:element", {{"name", doc.class_name}});
    if (doc.managed_element_type) {
      xml::Element ann = node("xs:annotation");
      xml::Element info = node("xs:appinfo");
      info.children.push_back(node("managedElementType", {{"value", *doc.managed_element_type}}));
      ann.children.push_back(std::move(info));
      root.children.push_back(std::move(ann));
    }
    root.children.push_back(std::move(body));
    return root;
  }
  body.set_attribute("name", doc.class_name);
  // name first for readability
  std::rotate(body.attributes.rbegin(), body.attributes.rbegin() + 1, body.attributes.rend());
  if (!doc.base_class)
    return body;

  xml::Element ct = node("xs:complexType", {{"name", doc.class_name}});
  xml::Element content = node("xs:complexContent");
  xml::Element ext = node("xs:extension", {{"base", *doc.base_class}});
  ext.children = std::move(body.children);
  content.children.push_back(std::move(ext));
  ct.children.push_back(std::move(content));
  return ct;
}

} // namespace detail

const ElementDecl* SchemaDocument::element(std::string_view name) const
{
  for (const auto& e : elements)
    if (e.name == name)
      return &e;
  return nullptr;
}

std::vector<KeyConstraint> SchemaDocument::key_constraints() const
{
  std::vector<KeyConstraint> out;
  for (const auto& e : elements)
    out.insert(out.end(), e.keys.begin(), e.keys.end());
  return out;
}

std::string KeyConstraint::selected_element() const
{
  auto slash = selector.rfind('/');
  return slash == std::string::npos ? selector : selector.substr(slash + 1);
}

SchemaDocument parse_schema(std::string_view text)
{
  xml::Element root;
  try {
    root = xml::parse(text);
  } catch (const Error& e) {
    throw Error(ErrorCode::SchemaSyntax, e.what());
  }

  const xml::Element* top = &root;
  if (xml::local_name(root.name) == "schema") {
    const xml::Element* found = nullptr;
    for (const auto& c : root.children) {
      auto kind = xml::local_name(c.name);
      if (kind == "annotation")
        continue;
      if (kind != "complexType" && kind != "element")
        detail::syntax_error(c, "unsupported top-level construct <" + c.name + ">");
      if (found)
        detail::syntax_error(c, "a schema document declares exactly one class");
      found = &c;
    }
    if (!found)
      detail::syntax_error(root, "schema declares no class");
    top = found;
  }

  auto kind = xml::local_name(top->name);
  if (kind == "complexType")
    return detail::parse_complex_type(*top);
  if (kind == "element")
    return detail::parse_root_element(*top);
  detail::syntax_error(*top, "expected complexType or element, found <" + top->name + ">");
}

std::string serialize_schema(const SchemaDocument& doc)
{
  return xml::serialize(detail::to_xml(doc), false);
}

} // namespace rscm::schema
