#include "rscm/mib.hpp"

#include "rscm/error.hpp"

#include <algorithm>

namespace rscm
{

std::optional<ObjectId> resolve_path(const ObjectRegistry& registry, ObjectId root, const RdnPath& path)
{
  if (!path.is_canonical())
    throw Error(ErrorCode::MalformedPath, "'..' not allowed in '" + path.str() + "'");

  ObjectId current = root;
  for (const auto& segment : path.segments()) {
    auto node = registry.resolve(current);
    if (!node)
      return std::nullopt;
    std::optional<ObjectId> next;
    if (segment.key) {
      if ((*node)->kind() != ObjectKind::Tabular || (*node)->tabular_element() != segment.name)
        return std::nullopt;
      next = (*node)->child_by_key(*segment.key);
    } else {
      if ((*node)->kind() != ObjectKind::Simple)
        return std::nullopt;
      next = (*node)->child(segment.name);
    }
    if (!next)
      return std::nullopt;
    current = *next;
  }
  if (!registry.contains(current))
    return std::nullopt;
  return current;
}

std::vector<std::string> list_child_names(const ObjectRegistry& registry, ObjectId id)
{
  auto node = registry.resolve(id);
  if (!node)
    throw Error(ErrorCode::NotRegistered, "object " + to_string(id) + " is not registered");
  std::vector<std::string> names;
  for (const auto& link : (*node)->children())
    names.push_back(link.segment.str());
  return names;
}

std::optional<RdnPath> canonical_path(const ObjectRegistry& registry, ObjectId id)
{
  std::vector<RdnSegment> reversed;
  auto node = registry.resolve(id);
  while (node) {
    auto parent = (*node)->parent();
    if (!parent)
      break;
    reversed.push_back((*node)->segment());
    node = registry.resolve(*parent);
    if (!node)
      return std::nullopt;
  }
  if (!node)
    return std::nullopt;
  std::reverse(reversed.begin(), reversed.end());
  return RdnPath{std::move(reversed)};
}

} // namespace rscm
