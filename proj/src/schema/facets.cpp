#include "rscm/schema.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

namespace rscm::schema
{

namespace
{

struct Decimal
{
  bool negative = false;
  std::string integer; // no leading zeros, "" for zero
  std::string fraction; // no trailing zeros
};

std::optional<Decimal> parse_decimal(std::string_view s)
{
  Decimal d;
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
    d.negative = s[i] == '-';
    ++i;
  }
  std::size_t int_start = i;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])))
    ++i;
  std::string_view int_part = s.substr(int_start, i - int_start);
  std::string_view frac_part;
  if (i < s.size() && s[i] == '.') {
    ++i;
    std::size_t frac_start = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])))
      ++i;
    frac_part = s.substr(frac_start, i - frac_start);
  }
  if (i != s.size() || (int_part.empty() && frac_part.empty()))
    return std::nullopt;

  while (!int_part.empty() && int_part.front() == '0')
    int_part.remove_prefix(1);
  while (!frac_part.empty() && frac_part.back() == '0')
    frac_part.remove_suffix(1);
  d.integer = std::string(int_part);
  d.fraction = std::string(frac_part);
  if (d.integer.empty() && d.fraction.empty())
    d.negative = false;
  return d;
}

int compare_magnitude(const Decimal& a, const Decimal& b)
{
  if (a.integer.size() != b.integer.size())
    return a.integer.size() < b.integer.size() ? -1 : 1;
  if (int c = a.integer.compare(b.integer); c != 0)
    return c < 0 ? -1 : 1;
  std::size_t n = std::max(a.fraction.size(), b.fraction.size());
  for (std::size_t i = 0; i < n; ++i) {
    char da = i < a.fraction.size() ? a.fraction[i] : '0';
    char db = i < b.fraction.size() ? b.fraction[i] : '0';
    if (da != db)
      return da < db ? -1 : 1;
  }
  return 0;
}

std::string_view trim(std::string_view s)
{
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

bool is_integer_literal(std::string_view s, bool allow_negative)
{
  std::size_t i = 0;
  if (!s.empty() && (s[0] == '+' || (allow_negative && s[0] == '-')))
    ++i;
  if (i == s.size())
    return false;
  for (; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i])))
      return false;
  return true;
}

} // namespace

std::string_view to_string(ScalarType type)
{
  switch (type) {
  case ScalarType::String: return "string";
  case ScalarType::Integer: return "integer";
  case ScalarType::UnsignedInt: return "unsignedInt";
  case ScalarType::UnsignedShort: return "unsignedShort";
  }
  return "string";
}

std::optional<ScalarType> scalar_from_xsd(std::string_view qualified)
{
  auto local = xml::local_name(qualified);
  if (local == qualified)
    return std::nullopt;
  if (local == "string")
    return ScalarType::String;
  if (local == "integer")
    return ScalarType::Integer;
  if (local == "unsignedInt")
    return ScalarType::UnsignedInt;
  if (local == "unsignedShort")
    return ScalarType::UnsignedShort;
  return std::nullopt;
}

bool is_decimal(std::string_view text) { return parse_decimal(text).has_value(); }

int compare_decimal(std::string_view a, std::string_view b)
{
  auto da = parse_decimal(a);
  auto db = parse_decimal(b);
  if (!da || !db)
    throw Error(ErrorCode::SchemaSyntax, "not a decimal: '" + std::string(!da ? a : b) + "'");
  if (da->negative != db->negative)
    return da->negative ? -1 : 1;
  int m = compare_magnitude(*da, *db);
  return da->negative ? -m : m;
}

std::optional<std::string> check_value(ScalarType type, const std::optional<FacetSet>& facets, std::string_view value)
{
  std::string_view v = type == ScalarType::String ? value : trim(value);
  switch (type) {
  case ScalarType::String:
    break;
  case ScalarType::Integer:
    if (!is_integer_literal(v, true))
      return "not a valid integer: '" + std::string(value) + "'";
    break;
  case ScalarType::UnsignedInt:
    if (!is_integer_literal(v, false) || compare_decimal(v, "4294967295") > 0)
      return "not a valid unsignedInt: '" + std::string(value) + "'";
    break;
  case ScalarType::UnsignedShort:
    if (!is_integer_literal(v, false) || compare_decimal(v, "65535") > 0)
      return "not a valid unsignedShort: '" + std::string(value) + "'";
    break;
  }
  if (!facets)
    return std::nullopt;

  if (facets->min_inclusive && compare_decimal(v, *facets->min_inclusive) < 0)
    return "minInclusive " + *facets->min_inclusive + ": value " + std::string(v) + " is too small";
  if (facets->max_inclusive && compare_decimal(v, *facets->max_inclusive) > 0)
    return "maxInclusive " + *facets->max_inclusive + ": value " + std::string(v) + " is too large";
  if (!facets->enumeration.empty() &&
      std::find(facets->enumeration.begin(), facets->enumeration.end(), v) == facets->enumeration.end()) {
    std::string allowed;
    for (const auto& e : facets->enumeration)
      allowed += (allowed.empty() ? "" : "|") + e;
    return "enumeration " + allowed + ": value '" + std::string(v) + "' is not allowed";
  }
  if (facets->pattern) {
    std::regex re(*facets->pattern, std::regex::ECMAScript);
    if (!std::regex_match(std::string(v), re))
      return "pattern " + *facets->pattern + ": value '" + std::string(v) + "' does not match";
  }
  return std::nullopt;
}

} // namespace rscm::schema
