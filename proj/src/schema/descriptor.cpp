#include "detail.hpp"

namespace rscm::schema
{

namespace
{

// The key naming children of `table_class` lives on whichever element
// declaration has that class as its type.
std::optional<std::string> find_key(const UnifiedSchema& schema, const std::string& table_class,
                                    const std::string& child_element)
{
  for (const auto& [name, cls] : schema.classes)
    for (const auto& e : cls.elements)
      if (e.class_type == table_class)
        for (const auto& k : e.keys)
          if (k.selected_element() == child_element)
            return k.field;
  return std::nullopt;
}

} // namespace

const ConfigParam* ClassDescriptor::param(std::string_view name) const
{
  for (const auto& p : config_params)
    if (p.name == name)
      return &p;
  return nullptr;
}

const ActionSpec* ClassDescriptor::action(std::string_view name) const
{
  for (const auto& a : actions)
    if (a.name == name)
      return &a;
  return nullptr;
}

ClassDescriptor derive_class_descriptor(const UnifiedSchema& schema, std::string_view class_name)
{
  const SchemaDocument& cls = schema.cls(class_name);
  ClassDescriptor d;
  d.class_name = cls.class_name;
  d.actions = cls.actions;
  d.attributes = cls.attributes;

  const ElementDecl* unbounded = nullptr;
  for (const auto& e : cls.elements) {
    if (!e.unbounded())
      continue;
    if (unbounded)
      throw Error(ErrorCode::AmbiguousKind, "class '" + cls.class_name + "' has more than one unbounded element");
    unbounded = &e;
  }

  if (unbounded) {
    if (cls.elements.size() != 1)
      throw Error(ErrorCode::AmbiguousKind, "class '" + cls.class_name +
                                                "' mixes an unbounded child with other elements");
    if (unbounded->is_scalar())
      throw Error(ErrorCode::AmbiguousKind, "class '" + cls.class_name + "' has an unbounded scalar element");
    auto key = find_key(schema, cls.class_name, unbounded->name);
    if (!key)
      throw Error(ErrorCode::MissingKey, "no key constraint names the '" + unbounded->name +
                                             "' children of class '" + cls.class_name + "'");
    d.kind = ObjectKind::Tabular;
    d.tabular_child = TabularChild{unbounded->name, unbounded->class_type, *key};
    return d;
  }

  d.kind = ObjectKind::Simple;
  for (const auto& e : cls.elements) {
    if (e.is_scalar()) {
      d.config_params.push_back(ConfigParam{e.name, *e.scalar, e.min_occurs >= 1, e.default_value, e.facets, false});
    } else {
      d.fixed_children.push_back(FixedChild{e.name, e.class_type, e.min_occurs >= 1});
    }
  }
  return d;
}

} // namespace rscm::schema
