#include "rscm/atomic_file.hpp"

#include "rscm/error.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

namespace rscm
{

namespace
{

[[noreturn]] void fail(const std::string& what)
{
  throw Error(ErrorCode::PersistFailed, what + ": " + std::strerror(errno));
}

class Fd
{
public:
  explicit Fd(int fd) : fd_(fd) {}
  ~Fd()
  {
    if (fd_ >= 0)
      ::close(fd_);
  }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  int get() const { return fd_; }
  int release()
  {
    int fd = fd_;
    fd_ = -1;
    return fd;
  }

private:
  int fd_;
};

} // namespace

void write_file_atomically(const std::filesystem::path& path, std::string_view data, const WriteFaultHook& hook)
{
  auto tmp = path;
  tmp += ".tmp";
  try {
    if (hook)
      hook(WriteStage::BeforeWrite);

    Fd fd(::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0600));
    if (fd.get() < 0)
      fail("cannot create " + tmp.string());
    std::size_t written = 0;
    while (written < data.size()) {
      ssize_t n = ::write(fd.get(), data.data() + written, data.size() - written);
      if (n < 0) {
        if (errno == EINTR)
          continue;
        fail("cannot write " + tmp.string());
      }
      written += static_cast<std::size_t>(n);
    }
    if (::fsync(fd.get()) != 0)
      fail("cannot fsync " + tmp.string());
    if (::close(fd.release()) != 0)
      fail("cannot close " + tmp.string());

    if (hook)
      hook(WriteStage::BeforeRename);

    if (::rename(tmp.c_str(), path.c_str()) != 0)
      fail("cannot rename " + tmp.string() + " to " + path.string());

    auto dir = path.parent_path();
    Fd dfd(::open(dir.empty() ? "." : dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC));
    if (dfd.get() >= 0)
      ::fsync(dfd.get());
  } catch (const Error&) {
    std::error_code ec;
    std::filesystem::remove(tmp, ec);
    throw;
  } catch (const std::exception& e) {
    std::error_code ec;
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::PersistFailed, std::string("write aborted: ") + e.what());
  }
}

std::string read_file(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::PersistFailed, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace rscm
