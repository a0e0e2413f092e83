#pragma once

#include "rscm/atomic_file.hpp"
#include "rscm/error.hpp"
#include "rscm/managed_object.hpp"
#include "rscm/object_registry.hpp"
#include "rscm/password_cipher.hpp"
#include "rscm/rdn_path.hpp"
#include "rscm/schema.hpp"
#include "rscm/xml.hpp"

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

namespace rscm
{

class Subagent;

struct FactoryContext
{
  const schema::ClassDescriptor& descriptor;
  // Plaintext configuration values in declaration order.
  const std::vector<std::pair<std::string, std::string>>& config;
  Subagent& subagent;
};

// Constructors for managed classes, keyed by class name. A class whose
// objects need no behavior can be registered with add_plain().
class ClassFactory
{
public:
  using Constructor = std::function<std::shared_ptr<ManagedObject>(const FactoryContext&)>;

  void add(const std::string& class_name, Constructor ctor, std::set<std::string> password_params = {});
  void add_plain(const std::string& class_name);
  // Merges another factory's entries, e.g. a library's into an application's.
  void merge(const ClassFactory& other);

  const Constructor* find(std::string_view class_name) const;
  bool is_password(std::string_view class_name, std::string_view param) const;

private:
  struct Entry
  {
    Constructor ctor;
    std::set<std::string> password_params;
  };
  std::map<std::string, Entry, std::less<>> entries_;
};

struct ParameterInfo
{
  std::string name;
  std::string type;
  std::string value;
};

struct SignatureParam
{
  std::string name; // dotted generalized attribute
  schema::ScalarType type = schema::ScalarType::String;
  bool required = true;
  std::optional<std::string> default_value;
  bool is_password = false;
};

struct CreationSignature
{
  std::string class_name;
  std::vector<SignatureParam> params;
};

enum class AlarmKind
{
  Raised,
  Cleared,
};

std::string_view to_string(AlarmKind kind);

struct Notification
{
  AlarmKind kind = AlarmKind::Raised;
  std::string source;
  std::string code;
  std::string text;
  std::chrono::system_clock::time_point timestamp;
};

struct SubagentOptions
{
  // Empty means no persistence (the MIB lives in memory only).
  std::filesystem::path config_path;
  PasswordCipher cipher;
  WriteFaultHook persist_fault;
};

// Executes management operations against the live MIB. Structural
// mutations are serialized; reads may run concurrently with each other.
// Every successful mutation is validated against the unified schema and
// persisted before it returns.
class Subagent
{
public:
  Subagent(schema::UnifiedSchema schema, ClassFactory factories, SubagentOptions options = {});
  ~Subagent();

  Subagent(const Subagent&) = delete;
  Subagent& operator=(const Subagent&) = delete;

  // Builds the whole tree. Throws ValidationFailed, MissingFactory or
  // DecryptFailed; nothing stays registered on failure.
  ObjectId load_from_config(std::string_view config_text);
  ObjectId load_from_file();

  // Unregisters every object (post-order) and runs release hooks.
  void shutdown();

  std::vector<std::string> list_children(const RdnPath& path) const;
  std::vector<ParameterInfo> list_configuration_parameters(const RdnPath& path) const;
  void set_configuration_parameters(const RdnPath& path, const std::vector<std::pair<std::string, std::string>>& assignments);
  std::vector<std::string> get_configuration_parameters(const RdnPath& path, const std::vector<std::string>& names) const;
  CreationSignature get_child_creation_signature(const RdnPath& path) const;
  // `expected_class`, when given, must name the child class or one of its bases.
  RdnPath create_managed_object(const RdnPath& parent, const std::vector<std::pair<std::string, std::string>>& assignments,
                                const std::string& expected_class = {});
  void delete_managed_object(const RdnPath& path);
  std::vector<std::string> list_actions(const RdnPath& path) const;
  std::vector<schema::ActionParam> get_action_signature(const RdnPath& path, const std::string& action) const;
  std::string do_action(const RdnPath& path, const std::string& action, const ActionArgs& args);
  std::vector<std::string> list_monitoring_variables(const RdnPath& path) const;
  std::vector<std::string> get_monitoring_variables(const RdnPath& path, const std::vector<std::string>& names) const;

  void notify_alarm(AlarmKind kind, const RdnPath& source, const std::string& code, const std::string& text);
  void notify_alarm(AlarmKind kind, ObjectId source, const std::string& code, const std::string& text);
  std::vector<Notification> notifications() const;
  std::vector<Notification> open_alarms() const;

  // Serializes, validates and atomically rewrites the configuration file.
  void persist_config_file();

  // Plaintext document of the live MIB; what load_from_config would need to
  // rebuild the current state.
  xml::Element snapshot() const;

  ObjectRegistry& registry() noexcept { return registry_; }
  const ObjectRegistry& registry() const noexcept { return registry_; }
  ObjectId root() const noexcept { return root_; }
  const schema::UnifiedSchema& unified_schema() const noexcept { return schema_; }
  const schema::ClassDescriptor& descriptor(std::string_view class_name) const;
  const SubagentOptions& options() const noexcept { return options_; }

  static constexpr std::string_view password_mask = "*****";

private:
  ObjectHandle resolve_or_throw(const RdnPath& path) const;
  ObjectId build(const std::string& class_name, const xml::Element& element, bool from_file,
                 std::vector<ObjectId>& created);
  void release_subtree(ObjectId id);
  void attach_hooks(ObjectId id);
  CreationSignature signature_for(const std::string& class_name) const;
  void flatten_params(const std::string& class_name, const std::string& prefix, std::vector<SignatureParam>& out) const;
  xml::Element creation_element(const std::string& class_name, const std::string& element_name, const std::string& prefix,
                                const std::map<std::string, std::string>& values) const;
  xml::Element to_element(ObjectId id, const std::string& element_name, bool encrypt) const;
  void persist_locked();
  std::string stored_password(ObjectId id, const std::string& param, const std::string& plain) const;

  schema::UnifiedSchema schema_;
  ClassFactory factories_;
  SubagentOptions options_;
  std::map<std::string, schema::ClassDescriptor, std::less<>> descriptors_;

  ObjectRegistry registry_;
  ObjectId root_;

  mutable std::shared_mutex mutex_;

  // Last ciphertext written per (object, parameter) so that unchanged
  // passwords keep identical bytes in the file.
  mutable std::mutex cipher_mutex_;
  mutable std::map<std::pair<ObjectId, std::string>, std::pair<std::string, std::string>> cipher_cache_;

  mutable std::mutex alarm_mutex_;
  std::vector<Notification> log_;
  std::vector<Notification> open_;
};

} // namespace rscm
