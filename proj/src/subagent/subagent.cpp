#include "rscm/subagent.hpp"

#include "rscm/mib.hpp"

#include <algorithm>
#include <iostream>

namespace rscm
{

using schema::ClassDescriptor;

// ---------------------------------------------------------------------------
// ClassFactory

void ClassFactory::add(const std::string& class_name, Constructor ctor, std::set<std::string> password_params)
{
  entries_[class_name] = Entry{std::move(ctor), std::move(password_params)};
}

void ClassFactory::add_plain(const std::string& class_name)
{
  add(class_name, [](const FactoryContext& ctx) {
    return std::make_shared<ManagedObject>(ctx.descriptor.class_name, ctx.descriptor.kind);
  });
}

void ClassFactory::merge(const ClassFactory& other)
{
  for (const auto& [name, entry] : other.entries_)
    entries_[name] = entry;
}

const ClassFactory::Constructor* ClassFactory::find(std::string_view class_name) const
{
  auto it = entries_.find(class_name);
  return it == entries_.end() ? nullptr : &it->second.ctor;
}

bool ClassFactory::is_password(std::string_view class_name, std::string_view param) const
{
  auto it = entries_.find(class_name);
  return it != entries_.end() && it->second.password_params.contains(std::string(param));
}

std::string_view to_string(AlarmKind kind)
{
  return kind == AlarmKind::Raised ? "AlarmRaised" : "AlarmCleared";
}

// ---------------------------------------------------------------------------
// Subagent

Subagent::Subagent(schema::UnifiedSchema schema, ClassFactory factories, SubagentOptions options)
  : schema_(std::move(schema)), factories_(std::move(factories)), options_(std::move(options))
{
  std::vector<std::string> pending{schema_.root_element_name};
  while (!pending.empty()) {
    std::string name = pending.back();
    pending.pop_back();
    if (descriptors_.contains(name))
      continue;
    ClassDescriptor d = schema::derive_class_descriptor(schema_, name);
    for (auto& p : d.config_params)
      p.is_password = factories_.is_password(name, p.name);
    for (const auto& c : d.fixed_children)
      pending.push_back(c.class_name);
    if (d.tabular_child)
      pending.push_back(d.tabular_child->class_name);
    descriptors_.emplace(name, std::move(d));
  }

  if (!options_.config_path.empty()) {
    auto unified_path = options_.config_path;
    unified_path.replace_extension(".unified.xsd");
    write_file_atomically(unified_path, schema::serialize_unified_schema(schema_));
  }
}

Subagent::~Subagent() { shutdown(); }

const ClassDescriptor& Subagent::descriptor(std::string_view class_name) const
{
  auto it = descriptors_.find(class_name);
  if (it == descriptors_.end())
    throw Error(ErrorCode::UnknownClass, "class '" + std::string(class_name) + "' is not part of this application");
  return it->second;
}

ObjectHandle Subagent::resolve_or_throw(const RdnPath& path) const
{
  if (!root_.valid())
    throw Error(ErrorCode::NoSuchObject, "application is not loaded");
  auto id = resolve_path(registry_, root_, path);
  if (!id)
    throw Error(ErrorCode::NoSuchObject, "no such object '" + path.str() + "'");
  auto handle = registry_.resolve(*id);
  if (!handle)
    throw Error(ErrorCode::NoSuchObject, "no such object '" + path.str() + "'");
  return *handle;
}

// ---------------------------------------------------------------------------
// construction and release

ObjectId Subagent::build(const std::string& class_name, const xml::Element& element, bool from_file,
                         std::vector<ObjectId>& created)
{
  const ClassDescriptor& desc = descriptor(class_name);

  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::pair<std::string, std::pair<std::string, std::string>>> loaded_ciphers;
  for (const auto& p : desc.config_params) {
    const xml::Element* child = element.find_child(p.name);
    if (!child)
      continue;
    std::string value = child->text;
    if (value.empty() && p.default_value)
      value = *p.default_value;
    if (from_file && p.is_password) {
      std::string plain = options_.cipher.decrypt(value);
      if (value != plain)
        loaded_ciphers.push_back({p.name, {plain, value}});
      value = std::move(plain);
    }
    config.emplace_back(p.name, std::move(value));
  }

  std::vector<ChildLink> children;
  for (const auto& fc : desc.fixed_children) {
    if (const xml::Element* child = element.find_child(fc.name))
      children.push_back({RdnSegment{fc.name, std::nullopt}, build(fc.class_name, *child, from_file, created)});
  }
  if (desc.tabular_child) {
    const auto& tc = *desc.tabular_child;
    for (const auto* child : element.children_named(tc.element)) {
      const xml::Element* key = child->find_child(tc.key_attribute);
      std::string key_value = key ? key->text : std::string();
      children.push_back({RdnSegment{tc.element, key_value}, build(tc.class_name, *child, from_file, created)});
    }
  }

  std::shared_ptr<ManagedObject> object;
  if (const auto* ctor = factories_.find(class_name)) {
    object = (*ctor)(FactoryContext{desc, config, *this});
  } else if (class_name == schema_.root_element_name) {
    object = std::make_shared<ManagedObject>(class_name, desc.kind);
  } else {
    throw Error(ErrorCode::MissingFactory, "no factory registered for class '" + class_name + "'");
  }
  if (!object || object->class_name() != class_name || object->kind() != desc.kind)
    throw std::logic_error("factory for '" + class_name + "' built an object of the wrong class or kind");

  object->replace_config(std::move(config));
  if (desc.tabular_child)
    object->set_tabular_element(desc.tabular_child->element);
  for (const auto& c : children)
    object->attach_child(c.segment, c.id);

  ObjectId id = registry_.register_object(std::move(object));
  created.push_back(id);
  for (const auto& c : children)
    if (auto child = registry_.resolve(c.id))
      (*child)->set_parent(id, c.segment);

  if (!loaded_ciphers.empty()) {
    std::lock_guard lock(cipher_mutex_);
    for (auto& [param, pair] : loaded_ciphers)
      cipher_cache_[{id, param}] = std::move(pair);
  }
  return id;
}

void Subagent::attach_hooks(ObjectId id)
{
  auto handle = registry_.resolve(id);
  if (!handle)
    return;
  (*handle)->on_attached();
  for (const auto& c : (*handle)->children())
    attach_hooks(c.id);
}

void Subagent::release_subtree(ObjectId id)
{
  std::vector<ChildLink> children;
  if (auto handle = registry_.resolve(id))
    children = (*handle)->children();
  for (auto it = children.rbegin(); it != children.rend(); ++it)
    release_subtree(it->id);
  if (!registry_.contains(id))
    return;
  ObjectHandle released = registry_.unregister(id);
  released->on_released();
  std::lock_guard lock(cipher_mutex_);
  std::erase_if(cipher_cache_, [&](const auto& entry) { return entry.first.first == id; });
}

namespace
{

void unregister_all(ObjectRegistry& registry, const std::vector<ObjectId>& created)
{
  for (auto it = created.rbegin(); it != created.rend(); ++it)
    if (registry.contains(*it))
      registry.unregister(*it);
}

} // namespace

ObjectId Subagent::load_from_config(std::string_view config_text)
{
  std::unique_lock lock(mutex_);
  if (root_.valid())
    throw std::logic_error("application is already loaded");

  xml::Element doc;
  try {
    doc = xml::parse(config_text);
  } catch (const Error& e) {
    throw Error(ErrorCode::ValidationFailed, std::string("configuration is not well-formed: ") + e.what());
  }
  if (auto violations = schema::validate_document(schema_, doc); !violations.empty()) {
    std::string first = violations.front().path + ": " + violations.front().reason;
    throw Error(ErrorCode::ValidationFailed, "configuration is invalid: " + first, std::move(violations));
  }
  for (const auto& [name, desc] : descriptors_)
    if (name != schema_.root_element_name && !factories_.find(name))
      throw Error(ErrorCode::MissingFactory, "no factory registered for class '" + name + "'");

  std::vector<ObjectId> created;
  try {
    root_ = build(schema_.root_element_name, doc, true, created);
  } catch (...) {
    unregister_all(registry_, created);
    throw;
  }
  attach_hooks(root_);
  return root_;
}

ObjectId Subagent::load_from_file()
{
  if (options_.config_path.empty())
    throw std::logic_error("no configuration path set");
  std::string text;
  try {
    text = read_file(options_.config_path);
  } catch (const Error& e) {
    throw Error(ErrorCode::ValidationFailed, e.what());
  }
  return load_from_config(text);
}

void Subagent::shutdown()
{
  std::unique_lock lock(mutex_);
  if (root_.valid() && registry_.contains(root_))
    release_subtree(root_);
  root_ = ObjectId{};
}

// ---------------------------------------------------------------------------
// serialization and persistence

std::string Subagent::stored_password(ObjectId id, const std::string& param, const std::string& plain) const
{
  if (!options_.cipher.enabled())
    return plain;
  std::lock_guard lock(cipher_mutex_);
  auto& slot = cipher_cache_[{id, param}];
  if (slot.first != plain || slot.second.empty())
    slot = {plain, options_.cipher.encrypt(plain)};
  return slot.second;
}

xml::Element Subagent::to_element(ObjectId id, const std::string& element_name, bool encrypt) const
{
  auto handle = registry_.resolve(id);
  if (!handle)
    throw std::logic_error("MIB references unregistered object " + to_string(id));
  const ManagedObject& obj = **handle;
  const ClassDescriptor& desc = descriptor(obj.class_name());

  xml::Element e;
  e.name = element_name;
  for (const auto& a : desc.attributes)
    if (a.name == "key" && desc.tabular_child)
      e.set_attribute("key", desc.tabular_child->key_attribute);

  if (desc.kind == ObjectKind::Tabular) {
    for (const auto& c : obj.children())
      e.children.push_back(to_element(c.id, desc.tabular_child->element, encrypt));
    return e;
  }

  for (const auto& decl : schema_.cls(desc.class_name).elements) {
    if (decl.is_scalar()) {
      auto value = obj.config(decl.name);
      if (!value)
        continue;
      xml::Element leaf;
      leaf.name = decl.name;
      const auto* p = desc.param(decl.name);
      leaf.text = (encrypt && p && p->is_password) ? stored_password(id, decl.name, *value) : *value;
      e.children.push_back(std::move(leaf));
    } else if (auto child = obj.child(decl.name)) {
      e.children.push_back(to_element(*child, decl.name, encrypt));
    }
  }
  return e;
}

xml::Element Subagent::snapshot() const
{
  std::shared_lock lock(mutex_);
  return to_element(root_, schema_.root_element_name, false);
}

void Subagent::persist_locked()
{
  xml::Element plain = to_element(root_, schema_.root_element_name, false);
  if (auto violations = schema::validate_document(schema_, plain); !violations.empty()) {
    std::string first = violations.front().path + ": " + violations.front().reason;
    throw Error(ErrorCode::ValidationFailed, "resulting configuration is invalid: " + first, std::move(violations));
  }
  if (options_.config_path.empty())
    return;
  std::string text = xml::serialize(to_element(root_, schema_.root_element_name, true));
  write_file_atomically(options_.config_path, text, options_.persist_fault);
}

void Subagent::persist_config_file()
{
  std::unique_lock lock(mutex_);
  persist_locked();
}

// ---------------------------------------------------------------------------
// MIB inspection

std::vector<std::string> Subagent::list_children(const RdnPath& path) const
{
  std::shared_lock lock(mutex_);
  auto handle = resolve_or_throw(path);
  std::vector<std::string> names;
  for (const auto& c : handle->children())
    names.push_back(c.segment.str());
  return names;
}

// ---------------------------------------------------------------------------
// configuration management

std::vector<ParameterInfo> Subagent::list_configuration_parameters(const RdnPath& path) const
{
  std::shared_lock lock(mutex_);
  auto handle = resolve_or_throw(path);
  const ClassDescriptor& desc = descriptor(handle->class_name());
  std::vector<ParameterInfo> out;
  for (const auto& p : desc.config_params) {
    auto value = handle->config(p.name).value_or("");
    out.push_back({p.name, std::string(schema::to_string(p.type)),
                   p.is_password ? std::string(password_mask) : value});
  }
  return out;
}

std::vector<std::string> Subagent::get_configuration_parameters(const RdnPath& path,
                                                                const std::vector<std::string>& names) const
{
  std::shared_lock lock(mutex_);
  auto handle = resolve_or_throw(path);
  const ClassDescriptor& desc = descriptor(handle->class_name());
  std::vector<std::string> out;
  for (const auto& name : names) {
    const auto* p = desc.param(name);
    if (!p)
      throw Error(ErrorCode::NoSuchParameter, "class '" + desc.class_name + "' has no parameter '" + name + "'");
    out.push_back(p->is_password ? std::string(password_mask) : handle->config(name).value_or(""));
  }
  return out;
}

void Subagent::set_configuration_parameters(const RdnPath& path,
                                            const std::vector<std::pair<std::string, std::string>>& assignments)
{
  std::unique_lock lock(mutex_);
  auto handle = resolve_or_throw(path);
  const ClassDescriptor& desc = descriptor(handle->class_name());

  std::optional<std::string> key_param;
  if (auto parent = handle->parent())
    if (auto p = registry_.resolve(*parent))
      if (auto pd = descriptors_.find((*p)->class_name()); pd != descriptors_.end() && pd->second.tabular_child)
        key_param = pd->second.tabular_child->key_attribute;

  std::vector<Violation> violations;
  for (const auto& [name, value] : assignments) {
    const auto* p = desc.param(name);
    if (!p)
      throw Error(ErrorCode::NoSuchParameter, "class '" + desc.class_name + "' has no parameter '" + name + "'");
    if (key_param && name == *key_param)
      violations.push_back({path.str() + "/" + name, "the key attribute cannot be changed"});
    else if (auto why = schema::check_value(p->type, p->facets, value))
      violations.push_back({path.str() + "/" + name, *why});
  }
  if (!violations.empty()) {
    std::string first = violations.front().path + ": " + violations.front().reason;
    throw Error(ErrorCode::ValidationFailed, first, std::move(violations));
  }

  auto previous = handle->config_values();
  std::vector<std::string> changed;
  for (const auto& [name, value] : assignments) {
    handle->assign_config(name, value);
    if (std::find(changed.begin(), changed.end(), name) == changed.end())
      changed.push_back(name);
  }
  // keep declaration order regardless of assignment order
  auto values = handle->config_values();
  std::vector<std::pair<std::string, std::string>> ordered;
  for (const auto& p : desc.config_params)
    for (const auto& kv : values)
      if (kv.first == p.name)
        ordered.push_back(kv);
  handle->replace_config(std::move(ordered));

  try {
    persist_locked();
  } catch (...) {
    handle->replace_config(std::move(previous));
    throw;
  }
  handle->on_reconfigured(changed);
}

void Subagent::flatten_params(const std::string& class_name, const std::string& prefix,
                              std::vector<SignatureParam>& out) const
{
  const ClassDescriptor& desc = descriptor(class_name);
  for (const auto& p : desc.config_params)
    out.push_back({prefix + p.name, p.type, p.required, p.default_value, p.is_password});
  for (const auto& c : desc.fixed_children)
    flatten_params(c.class_name, prefix + c.name + ".", out);
}

CreationSignature Subagent::signature_for(const std::string& class_name) const
{
  CreationSignature sig;
  sig.class_name = class_name;
  flatten_params(class_name, "", sig.params);
  return sig;
}

CreationSignature Subagent::get_child_creation_signature(const RdnPath& path) const
{
  std::shared_lock lock(mutex_);
  auto handle = resolve_or_throw(path);
  const ClassDescriptor& desc = descriptor(handle->class_name());
  if (desc.kind != ObjectKind::Tabular)
    throw Error(ErrorCode::NotTabular, "'" + path.str() + "' is not a tabular object");
  return signature_for(desc.tabular_child->class_name);
}

xml::Element Subagent::creation_element(const std::string& class_name, const std::string& element_name,
                                        const std::string& prefix,
                                        const std::map<std::string, std::string>& values) const
{
  const ClassDescriptor& desc = descriptor(class_name);
  xml::Element e;
  e.name = element_name;
  for (const auto& a : desc.attributes)
    if (a.name == "key" && desc.tabular_child)
      e.set_attribute("key", desc.tabular_child->key_attribute);
  if (desc.kind == ObjectKind::Tabular)
    return e;

  for (const auto& decl : schema_.cls(class_name).elements) {
    if (decl.is_scalar()) {
      xml::Element leaf;
      leaf.name = decl.name;
      if (auto it = values.find(prefix + decl.name); it != values.end())
        leaf.text = it->second;
      else if (decl.default_value)
        leaf.text = *decl.default_value;
      else
        continue;
      e.children.push_back(std::move(leaf));
    } else {
      e.children.push_back(creation_element(decl.class_type, decl.name, prefix + decl.name + ".", values));
    }
  }
  return e;
}

RdnPath Subagent::create_managed_object(const RdnPath& parent_path,
                                        const std::vector<std::pair<std::string, std::string>>& assignments,
                                        const std::string& expected_class)
{
  std::unique_lock lock(mutex_);
  auto parent = resolve_or_throw(parent_path);
  const ClassDescriptor& parent_desc = descriptor(parent->class_name());
  if (parent_desc.kind != ObjectKind::Tabular)
    throw Error(ErrorCode::NotTabular, "'" + parent_path.str() + "' is not a tabular object");
  const auto& tc = *parent_desc.tabular_child;

  if (!expected_class.empty() && expected_class != tc.class_name &&
      !schema_.derives_from(tc.class_name, expected_class))
    throw Error(ErrorCode::ValidationFailed, "children of '" + parent_path.str() + "' are of class '" +
                                                 tc.class_name + "', not '" + expected_class + "'");

  CreationSignature sig = signature_for(tc.class_name);
  std::map<std::string, std::string> values;
  for (const auto& [name, value] : assignments) {
    bool known = std::any_of(sig.params.begin(), sig.params.end(), [&](const auto& p) { return p.name == name; });
    if (!known)
      throw Error(ErrorCode::NoSuchParameter, "class '" + tc.class_name + "' has no attribute '" + name + "'");
    values[name] = value;
  }
  std::string missing;
  for (const auto& p : sig.params)
    if (p.required && !p.default_value && !values.contains(p.name))
      missing += (missing.empty() ? "" : ", ") + p.name;
  if (!missing.empty())
    throw Error(ErrorCode::MissingRequired, "missing required attributes: " + missing);

  std::string key = values.count(tc.key_attribute) ? values[tc.key_attribute] : std::string();
  RdnSegment segment{tc.element, key};
  RdnPath child_path = parent_path.child(segment);

  xml::Element element = creation_element(tc.class_name, tc.element, "", values);
  if (auto violations = schema::validate_element(schema_, tc.class_name, element, child_path.str());
      !violations.empty()) {
    std::string first = violations.front().path + ": " + violations.front().reason;
    throw Error(ErrorCode::ValidationFailed, first, std::move(violations));
  }
  if (parent->child_by_key(key))
    throw Error(ErrorCode::DuplicateKey, "'" + parent_path.str() + "' already has a child with " +
                                             tc.key_attribute + "=\"" + key + "\"");

  std::vector<ObjectId> created;
  ObjectId id;
  try {
    id = build(tc.class_name, element, false, created);
  } catch (...) {
    unregister_all(registry_, created);
    throw;
  }
  parent->attach_child(segment, id);
  if (auto child = registry_.resolve(id))
    (*child)->set_parent(parent->id(), segment);

  try {
    persist_locked();
  } catch (...) {
    parent->detach_child(id);
    unregister_all(registry_, created);
    std::lock_guard cl(cipher_mutex_);
    std::erase_if(cipher_cache_, [&](const auto& entry) {
      return std::find(created.begin(), created.end(), entry.first.first) != created.end();
    });
    throw;
  }
  attach_hooks(id);
  return child_path;
}

void Subagent::delete_managed_object(const RdnPath& path)
{
  std::unique_lock lock(mutex_);
  auto handle = resolve_or_throw(path);
  auto parent_id = handle->parent();
  if (!parent_id)
    throw Error(ErrorCode::NotDeletable, "the application root cannot be deleted");
  auto parent = registry_.resolve(*parent_id);
  if (!parent || (*parent)->kind() != ObjectKind::Tabular)
    throw Error(ErrorCode::NotDeletable, "'" + path.str() + "' is a fixed child and cannot be deleted");

  ObjectId id = handle->id();
  RdnSegment segment = handle->segment();
  auto position = (*parent)->detach_child(id);
  try {
    persist_locked();
  } catch (...) {
    (*parent)->insert_child(position.value_or(0), segment, id);
    throw;
  }
  release_subtree(id);
}

// ---------------------------------------------------------------------------
// actions

std::vector<std::string> Subagent::list_actions(const RdnPath& path) const
{
  std::shared_lock lock(mutex_);
  auto handle = resolve_or_throw(path);
  std::vector<std::string> names;
  for (const auto& a : descriptor(handle->class_name()).actions)
    names.push_back(a.name);
  return names;
}

std::vector<schema::ActionParam> Subagent::get_action_signature(const RdnPath& path, const std::string& action) const
{
  std::shared_lock lock(mutex_);
  auto handle = resolve_or_throw(path);
  const auto* declared = descriptor(handle->class_name()).action(action);
  if (!declared)
    throw Error(ErrorCode::NoSuchAction, "'" + path.str() + "' has no action '" + action + "'");
  return declared->params;
}

std::string Subagent::do_action(const RdnPath& path, const std::string& action, const ActionArgs& args)
{
  std::unique_lock lock(mutex_);
  auto handle = resolve_or_throw(path);
  const auto* declared = descriptor(handle->class_name()).action(action);
  if (!declared)
    throw Error(ErrorCode::NoSuchAction, "'" + path.str() + "' has no action '" + action + "'");

  for (const auto& [name, value] : args) {
    auto it = std::find_if(declared->params.begin(), declared->params.end(), [&](const auto& p) { return p.name == name; });
    if (it == declared->params.end())
      throw Error(ErrorCode::BadActionArgs, "action '" + action + "' has no parameter '" + name + "'");
    if (auto why = schema::check_value(it->type, std::nullopt, value))
      throw Error(ErrorCode::BadActionArgs, name + ": " + *why);
  }
  for (const auto& p : declared->params)
    if (!args.contains(p.name))
      throw Error(ErrorCode::BadActionArgs, "action '" + action + "' requires parameter '" + p.name + "'");

  try {
    return handle->do_action(action, args);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::ActionFailed, e.what());
  }
}

// ---------------------------------------------------------------------------
// performance management

std::vector<std::string> Subagent::list_monitoring_variables(const RdnPath& path) const
{
  std::shared_lock lock(mutex_);
  return resolve_or_throw(path)->monitoring_variables();
}

std::vector<std::string> Subagent::get_monitoring_variables(const RdnPath& path,
                                                            const std::vector<std::string>& names) const
{
  std::shared_lock lock(mutex_);
  auto handle = resolve_or_throw(path);
  auto known = handle->monitoring_variables();
  std::vector<std::string> out;
  for (const auto& name : names) {
    if (std::find(known.begin(), known.end(), name) == known.end())
      throw Error(ErrorCode::NoSuchVariable, "'" + path.str() + "' has no monitoring variable '" + name + "'");
    out.push_back(handle->monitoring_value(name).value_or(""));
  }
  return out;
}

// ---------------------------------------------------------------------------
// fault management

void Subagent::notify_alarm(AlarmKind kind, const RdnPath& source, const std::string& code, const std::string& text)
{
  if (!root_.valid() || !resolve_path(registry_, root_, source))
    throw Error(ErrorCode::NoSuchObject, "no such object '" + source.str() + "'");

  Notification n{kind, source.str(), code, text, std::chrono::system_clock::now()};
  std::lock_guard lock(alarm_mutex_);
  if (kind == AlarmKind::Cleared) {
    auto it = std::find_if(open_.begin(), open_.end(),
                           [&](const Notification& o) { return o.source == n.source && o.code == n.code; });
    if (it == open_.end())
      throw Error(ErrorCode::NoMatchingAlarm, "no open alarm '" + code + "' on '" + n.source + "'");
    open_.erase(it);
  } else {
    open_.push_back(n);
  }
  log_.push_back(std::move(n));
}

void Subagent::notify_alarm(AlarmKind kind, ObjectId source, const std::string& code, const std::string& text)
{
  auto path = canonical_path(registry_, source);
  if (!path)
    throw Error(ErrorCode::NoSuchObject, "object " + to_string(source) + " is not registered");
  notify_alarm(kind, *path, code, text);
}

std::vector<Notification> Subagent::notifications() const
{
  std::lock_guard lock(alarm_mutex_);
  return log_;
}

std::vector<Notification> Subagent::open_alarms() const
{
  std::lock_guard lock(alarm_mutex_);
  return open_;
}

} // namespace rscm
