#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rscm
{

// One relative distinguished name: `Name` for a fixed child, `Name="key"`
// for a tabular child, or `..` (parent) in CLI-relative paths only.
struct RdnSegment
{
  std::string name;
  std::optional<std::string> key;

  static RdnSegment parent_ref() { return {"..", std::nullopt}; }
  bool is_parent_ref() const { return name == ".." && !key; }
  std::string str() const;

  bool operator==(const RdnSegment&) const = default;
};

class RdnPath
{
public:
  RdnPath() = default;
  explicit RdnPath(std::vector<RdnSegment> segments) : segments_(std::move(segments)) {}

  // Throws Error(MalformedPath) on unbalanced quotes, empty segments, or
  // `..` when allow_parent_refs is false.
  static RdnPath parse(std::string_view text, bool allow_parent_refs = false);

  const std::vector<RdnSegment>& segments() const { return segments_; }
  bool empty() const { return segments_.empty(); }
  std::size_t size() const { return segments_.size(); }
  bool is_canonical() const;

  RdnPath child(RdnSegment segment) const;
  RdnPath parent() const;
  const RdnSegment& back() const { return segments_.back(); }

  // Appends `relative` to this path, folding `..` segments. Throws
  // Error(MalformedPath) when `..` would climb above the root.
  RdnPath resolve(const RdnPath& relative) const;

  std::string str() const;

  bool operator==(const RdnPath&) const = default;

private:
  std::vector<RdnSegment> segments_;
};

// Quotes a key value as it appears inside `Name="..."`.
std::string quote_key(std::string_view key);

} // namespace rscm
