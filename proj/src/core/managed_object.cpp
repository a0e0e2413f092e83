#include "rscm/managed_object.hpp"

#include "rscm/error.hpp"

#include <algorithm>

namespace rscm
{

ManagedObject::ManagedObject(std::string class_name, ObjectKind kind)
  : class_name_(std::move(class_name)), kind_(kind)
{
}

std::optional<ObjectId> ManagedObject::parent() const
{
  std::shared_lock lock(mutex_);
  return parent_;
}

RdnSegment ManagedObject::segment() const
{
  std::shared_lock lock(mutex_);
  return segment_;
}

std::optional<std::string> ManagedObject::config(std::string_view name) const
{
  std::shared_lock lock(mutex_);
  for (const auto& [k, v] : config_)
    if (k == name)
      return v;
  return std::nullopt;
}

std::vector<std::pair<std::string, std::string>> ManagedObject::config_values() const
{
  std::shared_lock lock(mutex_);
  return config_;
}

std::vector<ChildLink> ManagedObject::children() const
{
  std::shared_lock lock(mutex_);
  return children_;
}

std::optional<ObjectId> ManagedObject::child(std::string_view name) const
{
  std::shared_lock lock(mutex_);
  for (const auto& c : children_)
    if (!c.segment.key && c.segment.name == name)
      return c.id;
  return std::nullopt;
}

std::optional<ObjectId> ManagedObject::child_by_key(std::string_view key) const
{
  std::shared_lock lock(mutex_);
  for (const auto& c : children_)
    if (c.segment.key && *c.segment.key == key)
      return c.id;
  return std::nullopt;
}

std::size_t ManagedObject::child_count() const
{
  std::shared_lock lock(mutex_);
  return children_.size();
}

std::optional<std::string> ManagedObject::monitoring_value(std::string_view) const
{
  return std::nullopt;
}

std::string ManagedObject::do_action(std::string_view name, const ActionArgs&)
{
  throw Error(ErrorCode::ActionFailed, "action '" + std::string(name) + "' is not implemented by " + class_name_);
}

void ManagedObject::on_reconfigured(const std::vector<std::string>&) {}

void ManagedObject::assign_config(const std::string& name, std::string value)
{
  std::unique_lock lock(mutex_);
  for (auto& [k, v] : config_) {
    if (k == name) {
      v = std::move(value);
      return;
    }
  }
  config_.emplace_back(name, std::move(value));
}

void ManagedObject::erase_config(const std::string& name)
{
  std::unique_lock lock(mutex_);
  std::erase_if(config_, [&](const auto& kv) { return kv.first == name; });
}

void ManagedObject::replace_config(std::vector<std::pair<std::string, std::string>> values)
{
  std::unique_lock lock(mutex_);
  config_ = std::move(values);
}

void ManagedObject::set_parent(std::optional<ObjectId> parent, RdnSegment segment)
{
  std::unique_lock lock(mutex_);
  parent_ = parent;
  segment_ = std::move(segment);
}

void ManagedObject::attach_child(RdnSegment segment, ObjectId id)
{
  std::unique_lock lock(mutex_);
  children_.push_back({std::move(segment), id});
}

std::optional<std::size_t> ManagedObject::detach_child(ObjectId id)
{
  std::unique_lock lock(mutex_);
  auto it = std::find_if(children_.begin(), children_.end(), [&](const ChildLink& c) { return c.id == id; });
  if (it == children_.end())
    return std::nullopt;
  auto pos = static_cast<std::size_t>(it - children_.begin());
  children_.erase(it);
  return pos;
}

void ManagedObject::insert_child(std::size_t position, RdnSegment segment, ObjectId id)
{
  std::unique_lock lock(mutex_);
  position = std::min(position, children_.size());
  children_.insert(children_.begin() + static_cast<std::ptrdiff_t>(position), {std::move(segment), id});
}

} // namespace rscm
