#pragma once

#include "rscm/atomic_file.hpp"
#include "rscm/schema.hpp"
#include "rscm/subagent.hpp"

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace fixtures
{

inline std::filesystem::path source_dir() { return RSCM_SOURCE_DIR; }

inline std::string read_source(const std::filesystem::path& relative)
{
  return rscm::read_file(source_dir() / relative);
}

inline std::vector<std::string> schema_files()
{
  return {
    "schemas/smpplite/SmppServer.xsd",
    "schemas/smpplite/SmppConnection.xsd",
    "schemas/smpplite/SmppExternalClient.xsd",
    "schemas/smpplite/SmppExternalClientsTable.xsd",
    "schemas/wordreplacer/WordReplacer.xsd",
    "schemas/wordreplacer/WR_Server.xsd",
    "schemas/wordreplacer/WR_Connection.xsd",
    "schemas/wordreplacer/WR_ExternalClient.xsd",
    "schemas/wordreplacer/WR_ExternalClientsTable.xsd",
    "schemas/wordreplacer/WordReplacementRulesList.xsd",
    "schemas/wordreplacer/WordReplacementRule.xsd",
    "schemas/wordreplacer/PA_Component.xsd",
  };
}

inline std::vector<rscm::schema::SchemaDocument> schema_documents()
{
  std::vector<rscm::schema::SchemaDocument> docs;
  for (const auto& f : schema_files())
    docs.push_back(rscm::schema::parse_schema(read_source(f)));
  return docs;
}

inline std::string sample_config() { return read_source("config/wordreplacer.xml"); }

inline rscm::schema::UnifiedSchema unified_schema()
{
  return rscm::schema::compose_unified_schema(schema_documents(), rscm::xml::parse(sample_config()));
}

// Every class of the schema backed by a behavior-less object; Password is
// flagged the same way the networking library flags it.
inline rscm::ClassFactory plain_factory(const rscm::schema::UnifiedSchema& schema)
{
  rscm::ClassFactory f;
  for (const auto& [name, doc] : schema.classes) {
    if (doc.element("Password"))
      f.add(name,
            [](const rscm::FactoryContext& ctx) {
              return std::make_shared<rscm::ManagedObject>(ctx.descriptor.class_name, ctx.descriptor.kind);
            },
            {"Password"});
    else
      f.add_plain(name);
  }
  return f;
}

class TempDir
{
public:
  TempDir()
  {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("rscm-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir()
  {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

} // namespace fixtures
