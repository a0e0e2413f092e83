#pragma once

#include "rscm/schema.hpp"

namespace rscm::schema::detail
{

SchemaDocument parse_complex_type(const xml::Element& complex_type);
SchemaDocument parse_root_element(const xml::Element& element);
xml::Element to_xml(const SchemaDocument& doc);

// Flattens inheritance in `docs` (keyed by class name). Throws UnknownClass
// or InheritanceCycle.
std::map<std::string, SchemaDocument> flatten(const std::map<std::string, SchemaDocument>& docs);

[[noreturn]] void syntax_error(const xml::Element& at, const std::string& what);

} // namespace rscm::schema::detail
