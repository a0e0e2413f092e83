#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>

namespace rscm
{

// Process-unique name of a managed object. The only legal long-lived
// reference from one managed object to another.
struct ObjectId
{
  std::uint64_t value = 0;

  constexpr bool valid() const noexcept { return value != 0; }
  auto operator<=>(const ObjectId&) const = default;
};

inline std::string to_string(ObjectId id) { return std::to_string(id.value); }

} // namespace rscm

template <>
struct std::hash<rscm::ObjectId>
{
  std::size_t operator()(rscm::ObjectId id) const noexcept { return std::hash<std::uint64_t>{}(id.value); }
};
