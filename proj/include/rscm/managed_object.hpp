#pragma once

#include "rscm/object_id.hpp"
#include "rscm/rdn_path.hpp"

#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

namespace rscm
{

enum class ObjectKind
{
  Simple,
  Tabular,
};

using ActionArgs = std::map<std::string, std::string>;

struct ChildLink
{
  RdnSegment segment;
  ObjectId id;
};

// A node of the MIB tree plus the hooks an application class overrides.
//
// Children and the parent are held by ObjectId only. Anything that needs the
// live object resolves it through the ObjectRegistry, uses the handle for a
// short period on one thread, then drops it.
//
// Structural mutators (assign_config, attach_child, ...) are for the subagent;
// application code reads through the const accessors.
class ManagedObject
{
public:
  ManagedObject(std::string class_name, ObjectKind kind);
  virtual ~ManagedObject() = default;

  ManagedObject(const ManagedObject&) = delete;
  ManagedObject& operator=(const ManagedObject&) = delete;

  ObjectId id() const noexcept { return id_; }
  const std::string& class_name() const noexcept { return class_name_; }
  ObjectKind kind() const noexcept { return kind_; }

  std::optional<ObjectId> parent() const;
  // Name of this node as seen from its parent.
  RdnSegment segment() const;

  std::optional<std::string> config(std::string_view name) const;
  std::vector<std::pair<std::string, std::string>> config_values() const;

  std::vector<ChildLink> children() const;
  std::optional<ObjectId> child(std::string_view name) const;
  std::optional<ObjectId> child_by_key(std::string_view key) const;
  std::size_t child_count() const;

  // Element name of tabular children (empty for simple objects).
  const std::string& tabular_element() const noexcept { return tabular_element_; }

  virtual std::vector<std::string> monitoring_variables() const { return {}; }
  virtual std::optional<std::string> monitoring_value(std::string_view name) const;

  // Runs on the management executor. Throw Error(ActionFailed) to report
  // failure to the manager.
  virtual std::string do_action(std::string_view name, const ActionArgs& args);

  // Called after a SET has been validated and persisted.
  virtual void on_reconfigured(const std::vector<std::string>& changed);
  // Called once the node is registered and linked into the live tree.
  virtual void on_attached() {}
  // Called right after the registry mapping is removed.
  virtual void on_released() {}

  void assign_config(const std::string& name, std::string value);
  void erase_config(const std::string& name);
  void replace_config(std::vector<std::pair<std::string, std::string>> values);
  void set_tabular_element(std::string name) { tabular_element_ = std::move(name); }
  void set_parent(std::optional<ObjectId> parent, RdnSegment segment);
  void attach_child(RdnSegment segment, ObjectId id);
  // Returns the position the child had, for rollback via insert_child.
  std::optional<std::size_t> detach_child(ObjectId id);
  void insert_child(std::size_t position, RdnSegment segment, ObjectId id);

private:
  friend class ObjectRegistry;

  ObjectId id_;
  std::string class_name_;
  ObjectKind kind_;
  std::string tabular_element_;

  mutable std::shared_mutex mutex_;
  std::optional<ObjectId> parent_;
  RdnSegment segment_;
  std::vector<std::pair<std::string, std::string>> config_;
  std::vector<ChildLink> children_;
};

} // namespace rscm
