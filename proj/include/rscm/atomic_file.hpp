#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

namespace rscm
{

enum class WriteStage
{
  BeforeWrite,
  BeforeRename,
};

// Test hook invoked at each stage; throwing aborts the write.
using WriteFaultHook = std::function<void(WriteStage)>;

// Writes `path.tmp`, fsyncs it, then renames it over `path`. A crash or
// failure at any point leaves the previous contents of `path` intact.
// Throws Error(PersistFailed).
void write_file_atomically(const std::filesystem::path& path, std::string_view data,
                           const WriteFaultHook& hook = {});

std::string read_file(const std::filesystem::path& path);

} // namespace rscm
