#pragma once

#include "rscm/managed_object.hpp"
#include "rscm/object_id.hpp"

#include <atomic>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <unordered_map>

namespace rscm
{

// Short-lived, reference-counted access to one managed object. While any
// handle is alive the object is not finalized.
//
// A handle belongs to the thread that resolved it and should be dropped
// within the object's class-specific usage interval; long-running loops
// resolve a fresh handle every iteration.
class ObjectHandle
{
public:
  explicit ObjectHandle(std::shared_ptr<ManagedObject> object) : object_(std::move(object)) {}

  ManagedObject& operator*() const noexcept { return *object_; }
  ManagedObject* operator->() const noexcept { return object_.get(); }
  ManagedObject* get() const noexcept { return object_.get(); }

  template <class T>
  std::shared_ptr<T> as() const
  {
    return std::dynamic_pointer_cast<T>(object_);
  }

private:
  std::shared_ptr<ManagedObject> object_;
};

// Thread-safe map from ObjectId to managed object. Ids come from one
// process-wide counter starting at 1 and are never reused.
class ObjectRegistry
{
public:
  ObjectRegistry() = default;
  ObjectRegistry(const ObjectRegistry&) = delete;
  ObjectRegistry& operator=(const ObjectRegistry&) = delete;

  ObjectId register_object(std::shared_ptr<ManagedObject> object);

  // Absent if the id was never issued or has been unregistered.
  std::optional<ObjectHandle> resolve(ObjectId id) const;

  template <class T>
  std::shared_ptr<T> resolve_as(ObjectId id) const
  {
    auto handle = resolve(id);
    return handle ? handle->as<T>() : nullptr;
  }

  // Drops the registry's reference. Throws Error(NotRegistered) if absent.
  // Returns the handle so the caller can run release hooks; the object is
  // finalized once that and every other outstanding handle are gone.
  ObjectHandle unregister(ObjectId id);

  bool contains(ObjectId id) const;
  std::size_t size() const;

private:
  static std::atomic<std::uint64_t> next_id_;

  mutable std::shared_mutex mutex_;
  std::unordered_map<ObjectId, std::shared_ptr<ManagedObject>> entries_;
};

} // namespace rscm
