#pragma once

#include "rscm/error.hpp"
#include "rscm/managed_object.hpp"
#include "rscm/xml.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Per-class schema documents in a small XSD subset, composition into the
// application's unified schema, instance validation, and the runtime class
// descriptors derived from them.
//
// Supported constructs: complexType with sequence/all, complexContent
// extension, element (type, minOccurs, maxOccurs, default), inline
// simpleType restriction with minInclusive/maxInclusive/enumeration/pattern,
// element-scoped key with `.//X` or `//X` selectors, attribute, and
// annotation/appinfo. Actions are declared by a minOccurs="0"
// maxOccurs="0" element (conventionally `ActionList`).
namespace rscm::schema
{

enum class ScalarType
{
  String,
  Integer,
  UnsignedInt,
  UnsignedShort,
};

std::string_view to_string(ScalarType type);
// Accepts "xs:string" style names; nullopt for anything outside the subset.
std::optional<ScalarType> scalar_from_xsd(std::string_view qualified);

struct FacetSet
{
  ScalarType base = ScalarType::String;
  std::optional<std::string> min_inclusive;
  std::optional<std::string> max_inclusive;
  std::vector<std::string> enumeration;
  std::optional<std::string> pattern;

  bool operator==(const FacetSet&) const = default;
};

// Three-way comparison of decimal literals of any length.
int compare_decimal(std::string_view a, std::string_view b);
bool is_decimal(std::string_view text);

// nullopt if `value` parses as `type` and satisfies every present facet,
// otherwise a reason naming the failed facet (e.g. "minInclusive 1024").
std::optional<std::string> check_value(ScalarType type, const std::optional<FacetSet>& facets, std::string_view value);

struct KeyConstraint
{
  std::string name;
  std::string selector;
  std::string field;

  // Element name the selector picks (`.//X` and `//X` both give X).
  std::string selected_element() const;

  bool operator==(const KeyConstraint&) const = default;
};

struct ActionParam
{
  std::string name;
  ScalarType type = ScalarType::String;

  bool operator==(const ActionParam&) const = default;
};

struct ActionSpec
{
  std::string name;
  std::vector<ActionParam> params;

  bool operator==(const ActionSpec&) const = default;
};

struct AttributeDecl
{
  std::string name;
  ScalarType type = ScalarType::String;
  bool required = false;

  bool operator==(const AttributeDecl&) const = default;
};

struct ElementDecl
{
  std::string name;
  std::optional<ScalarType> scalar;
  std::string class_type;
  std::size_t min_occurs = 1;
  std::optional<std::size_t> max_occurs = 1; // nullopt = unbounded
  std::optional<std::string> default_value;
  std::optional<FacetSet> facets;
  std::vector<KeyConstraint> keys;

  bool is_scalar() const { return scalar.has_value(); }
  bool unbounded() const { return !max_occurs.has_value(); }

  bool operator==(const ElementDecl&) const = default;
};

enum class Compositor
{
  Sequence,
  All,
};

struct SchemaDocument
{
  std::string class_name;
  std::optional<std::string> base_class;
  Compositor compositor = Compositor::Sequence;
  std::vector<ElementDecl> elements;
  std::vector<ActionSpec> actions;
  std::vector<AttributeDecl> attributes;

  // Set for the whole-application document, whose top level is an element
  // rather than a complexType.
  bool is_root_element = false;
  std::optional<std::string> managed_element_type;

  const ElementDecl* element(std::string_view name) const;
  std::vector<KeyConstraint> key_constraints() const;

  bool operator==(const SchemaDocument&) const = default;
};

// Throws Error(SchemaSyntax) with line information.
SchemaDocument parse_schema(std::string_view text);
std::string serialize_schema(const SchemaDocument& doc);

struct UnifiedSchema
{
  std::string root_element_name;
  // Every class with bases flattened and derived-class slots narrowed.
  // The root element document is stored under root_element_name.
  std::map<std::string, SchemaDocument> classes;
  // Declared base of each class before flattening.
  std::map<std::string, std::string> declared_bases;

  const SchemaDocument& cls(std::string_view name) const;
  const SchemaDocument& root() const { return cls(root_element_name); }
  bool derives_from(std::string_view derived, std::string_view base) const;
};

// Throws UnknownClass, InheritanceCycle or SampleMismatch.
UnifiedSchema compose_unified_schema(const std::vector<SchemaDocument>& schemas, const xml::Element& sample);

std::string serialize_unified_schema(const UnifiedSchema& schema);
UnifiedSchema parse_unified_schema(std::string_view text);

std::vector<Violation> validate_document(const UnifiedSchema& schema, const xml::Element& doc);

// Validates one element against the body of `class_name`. `path` prefixes
// every violation.
std::vector<Violation> validate_element(const UnifiedSchema& schema, std::string_view class_name,
                                        const xml::Element& element, const std::string& path);

struct ConfigParam
{
  std::string name;
  ScalarType type = ScalarType::String;
  bool required = true;
  std::optional<std::string> default_value;
  std::optional<FacetSet> facets;
  bool is_password = false;
};

struct FixedChild
{
  std::string name;
  std::string class_name;
  bool required = true;
};

struct TabularChild
{
  std::string element;
  std::string class_name;
  std::string key_attribute;
};

struct ClassDescriptor
{
  std::string class_name;
  ObjectKind kind = ObjectKind::Simple;
  std::vector<ConfigParam> config_params;
  std::vector<FixedChild> fixed_children;
  std::optional<TabularChild> tabular_child;
  std::vector<ActionSpec> actions;
  // Attributes a tabular element carries (`key`); filled by serialization.
  std::vector<AttributeDecl> attributes;

  const ConfigParam* param(std::string_view name) const;
  const ActionSpec* action(std::string_view name) const;
};

// Throws UnknownClass, AmbiguousKind or MissingKey.
ClassDescriptor derive_class_descriptor(const UnifiedSchema& schema, std::string_view class_name);

} // namespace rscm::schema
