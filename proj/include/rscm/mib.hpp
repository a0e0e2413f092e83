#pragma once

#include "rscm/object_registry.hpp"
#include "rscm/rdn_path.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rscm
{

// Walks fixed children by name and tabular children by key. Absent if any
// segment fails to match or a node on the way has been deleted.
std::optional<ObjectId> resolve_path(const ObjectRegistry& registry, ObjectId root, const RdnPath& path);

// Fixed children in schema order, tabular children as `Element="key"` in
// insertion order. Throws Error(NotRegistered).
std::vector<std::string> list_child_names(const ObjectRegistry& registry, ObjectId id);

// Path of `id` relative to the root it hangs under.
std::optional<RdnPath> canonical_path(const ObjectRegistry& registry, ObjectId id);

} // namespace rscm
