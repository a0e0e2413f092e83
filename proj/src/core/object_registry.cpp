#include "rscm/object_registry.hpp"

#include "rscm/error.hpp"

#include <mutex>

namespace rscm
{

std::atomic<std::uint64_t> ObjectRegistry::next_id_{1};

ObjectId ObjectRegistry::register_object(std::shared_ptr<ManagedObject> object)
{
  ObjectId id{next_id_.fetch_add(1, std::memory_order_relaxed)};
  object->id_ = id;
  std::unique_lock lock(mutex_);
  entries_.emplace(id, std::move(object));
  return id;
}

std::optional<ObjectHandle> ObjectRegistry::resolve(ObjectId id) const
{
  std::shared_lock lock(mutex_);
  auto it = entries_.find(id);
  if (it == entries_.end())
    return std::nullopt;
  return ObjectHandle(it->second);
}

ObjectHandle ObjectRegistry::unregister(ObjectId id)
{
  std::shared_ptr<ManagedObject> object;
  {
    std::unique_lock lock(mutex_);
    auto it = entries_.find(id);
    if (it == entries_.end())
      throw Error(ErrorCode::NotRegistered, "object " + to_string(id) + " is not registered");
    object = std::move(it->second);
    entries_.erase(it);
  }
  return ObjectHandle(std::move(object));
}

bool ObjectRegistry::contains(ObjectId id) const
{
  std::shared_lock lock(mutex_);
  return entries_.contains(id);
}

std::size_t ObjectRegistry::size() const
{
  std::shared_lock lock(mutex_);
  return entries_.size();
}

} // namespace rscm
