#include "rscm/error.hpp"

namespace rscm
{

std::string_view to_string(ErrorCode code)
{
  switch (code) {
  case ErrorCode::NotRegistered: return "NotRegistered";
  case ErrorCode::MalformedPath: return "MalformedPath";
  case ErrorCode::SchemaSyntax: return "SchemaSyntax";
  case ErrorCode::UnknownClass: return "UnknownClass";
  case ErrorCode::InheritanceCycle: return "InheritanceCycle";
  case ErrorCode::SampleMismatch: return "SampleMismatch";
  case ErrorCode::AmbiguousKind: return "AmbiguousKind";
  case ErrorCode::MissingKey: return "MissingKey";
  case ErrorCode::ValidationFailed: return "ValidationFailed";
  case ErrorCode::MissingFactory: return "MissingFactory";
  case ErrorCode::DecryptFailed: return "DecryptFailed";
  case ErrorCode::NoSuchObject: return "NoSuchObject";
  case ErrorCode::NoSuchParameter: return "NoSuchParameter";
  case ErrorCode::NotTabular: return "NotTabular";
  case ErrorCode::DuplicateKey: return "DuplicateKey";
  case ErrorCode::MissingRequired: return "MissingRequired";
  case ErrorCode::NotDeletable: return "NotDeletable";
  case ErrorCode::NoSuchAction: return "NoSuchAction";
  case ErrorCode::BadActionArgs: return "BadActionArgs";
  case ErrorCode::ActionFailed: return "ActionFailed";
  case ErrorCode::NoSuchVariable: return "NoSuchVariable";
  case ErrorCode::NoMatchingAlarm: return "NoMatchingAlarm";
  case ErrorCode::PersistFailed: return "PersistFailed";
  case ErrorCode::BadRequest: return "BadRequest";
  case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

} // namespace rscm
