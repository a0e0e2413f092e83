#include "detail.hpp"

#include <map>

namespace rscm::schema
{

namespace
{

bool ignorable_attribute(std::string_view name)
{
  return name == "xmlns" || name.starts_with("xmlns:") || name.starts_with("xsi:");
}

// Depth-first search for elements named `name` below `e`.
void descendants(const xml::Element& e, const std::string& name, std::vector<const xml::Element*>& out)
{
  for (const auto& c : e.children) {
    if (c.name == name)
      out.push_back(&c);
    descendants(c, name, out);
  }
}

class Validator
{
public:
  explicit Validator(const UnifiedSchema& schema) : schema_(schema) {}

  void body(std::string_view class_name, const xml::Element& e, const std::string& path,
            const std::vector<KeyConstraint>& keys_in_scope)
  {
    const SchemaDocument* cls = nullptr;
    try {
      cls = &schema_.cls(class_name);
    } catch (const Error&) {
      add(path, "unknown class '" + std::string(class_name) + "'");
      return;
    }

    for (const auto& a : cls->attributes) {
      auto v = e.attribute(a.name);
      if (!v) {
        if (a.required)
          add(path + "/@" + a.name, "missing required attribute '" + a.name + "'");
      } else if (auto why = check_value(a.type, std::nullopt, *v)) {
        add(path + "/@" + a.name, *why);
      }
    }
    for (const auto& [k, v] : e.attributes) {
      if (ignorable_attribute(k))
        continue;
      bool declared = false;
      for (const auto& a : cls->attributes)
        declared = declared || a.name == k;
      if (!declared)
        add(path + "/@" + k, "unexpected attribute '" + k + "'");
    }

    std::map<std::string, std::size_t> seen;
    auto child_path = [&](const xml::Element& c) {
      for (const auto& k : keys_in_scope) {
        if (k.selected_element() != c.name)
          continue;
        if (const auto* f = c.find_child(k.field))
          return path + "/" + c.name + "[" + k.field + "=\"" + f->text + "\"]";
      }
      std::size_t n = 0;
      for (const auto& other : e.children)
        n += other.name == c.name;
      if (n > 1)
        return path + "/" + c.name + "[" + std::to_string(++seen[c.name]) + "]";
      return path + "/" + c.name;
    };

    auto check_occurs = [&](const ElementDecl& d, std::size_t count) {
      if (count < d.min_occurs)
        add(path + "/" + d.name, "missing required element '" + d.name + "'");
      if (d.max_occurs && count > *d.max_occurs)
        add(path + "/" + d.name, "element '" + d.name + "' occurs " + std::to_string(count) +
                                     " times, at most " + std::to_string(*d.max_occurs) + " allowed");
    };

    std::vector<std::pair<const ElementDecl*, const xml::Element*>> matched;
    if (cls->compositor == Compositor::Sequence) {
      std::size_t i = 0;
      for (const auto& d : cls->elements) {
        std::size_t count = 0;
        while (i < e.children.size() && e.children[i].name == d.name) {
          matched.emplace_back(&d, &e.children[i]);
          ++i;
          ++count;
        }
        check_occurs(d, count);
      }
      for (; i < e.children.size(); ++i) {
        const auto& c = e.children[i];
        add(path + "/" + c.name, cls->element(c.name) ? "element '" + c.name + "' is out of order"
                                                      : "unexpected element '" + c.name + "'");
      }
    } else {
      std::map<std::string, std::size_t> counts;
      for (const auto& c : e.children) {
        if (const auto* d = cls->element(c.name)) {
          matched.emplace_back(d, &c);
          ++counts[c.name];
        } else {
          add(path + "/" + c.name, "unexpected element '" + c.name + "'");
        }
      }
      for (const auto& d : cls->elements)
        check_occurs(d, counts[d.name]);
    }

    for (const auto& [d, c] : matched) {
      std::string p = child_path(*c);
      if (d->is_scalar()) {
        if (!c->children.empty()) {
          add(p, "scalar element '" + d->name + "' has child elements");
          continue;
        }
        std::string value = c->text;
        if (value.empty() && d->default_value)
          value = *d->default_value;
        if (auto why = check_value(*d->scalar, d->facets, value))
          add(p, *why);
        continue;
      }
      std::string effective = d->class_type;
      if (auto xsi = c->attribute("xsi:type"); xsi && *xsi != d->class_type) {
        add(p, "class '" + *xsi + "' is not permitted here, expected '" + d->class_type + "'");
        continue;
      }
      body(effective, *c, p, d->keys);
      for (const auto& k : d->keys)
        check_key(k, *c, p);
    }
  }

  std::vector<Violation> take() { return std::move(violations_); }

private:
  void add(std::string path, std::string reason) { violations_.push_back({std::move(path), std::move(reason)}); }

  void check_key(const KeyConstraint& k, const xml::Element& scope, const std::string& path)
  {
    std::vector<const xml::Element*> selected;
    descendants(scope, k.selected_element(), selected);
    std::map<std::string, std::size_t> counts;
    std::vector<std::string> order;
    for (const auto* s : selected) {
      const auto* f = s->find_child(k.field);
      if (!f) {
        add(path + "/" + s->name, "key '" + k.name + "': missing field '" + k.field + "'");
        continue;
      }
      if (counts[f->text]++ == 0)
        order.push_back(f->text);
    }
    for (const auto& v : order)
      if (counts[v] > 1)
        add(path, "key '" + k.name + "': duplicate " + k.field + "=\"" + v + "\"");
  }

  const UnifiedSchema& schema_;
  std::vector<Violation> violations_;
};

} // namespace

std::vector<Violation> validate_document(const UnifiedSchema& schema, const xml::Element& doc)
{
  if (doc.name != schema.root_element_name)
    return {{doc.name, "root element must be <" + schema.root_element_name + ">"}};
  Validator v(schema);
  v.body(schema.root_element_name, doc, doc.name, {});
  return v.take();
}

std::vector<Violation> validate_element(const UnifiedSchema& schema, std::string_view class_name,
                                        const xml::Element& element, const std::string& path)
{
  Validator v(schema);
  v.body(class_name, element, path, {});
  return v.take();
}

} // namespace rscm::schema
