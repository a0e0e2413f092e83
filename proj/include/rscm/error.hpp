#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rscm
{

enum class ErrorCode
{
  NotRegistered,
  MalformedPath,
  SchemaSyntax,
  UnknownClass,
  InheritanceCycle,
  SampleMismatch,
  AmbiguousKind,
  MissingKey,
  ValidationFailed,
  MissingFactory,
  DecryptFailed,
  NoSuchObject,
  NoSuchParameter,
  NotTabular,
  DuplicateKey,
  MissingRequired,
  NotDeletable,
  NoSuchAction,
  BadActionArgs,
  ActionFailed,
  NoSuchVariable,
  NoMatchingAlarm,
  PersistFailed,
  BadRequest,
  ParseError,
};

std::string_view to_string(ErrorCode code);

// One failed schema check. `path` names the offending element or parameter.
struct Violation
{
  std::string path;
  std::string reason;

  bool operator==(const Violation&) const = default;
};

class Error : public std::runtime_error
{
public:
  Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code)
  {
  }

  Error(ErrorCode code, const std::string& message, std::vector<Violation> violations)
    : std::runtime_error(message), code_(code), violations_(std::move(violations))
  {
  }

  ErrorCode code() const noexcept { return code_; }
  const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
  ErrorCode code_;
  std::vector<Violation> violations_;
};

} // namespace rscm
