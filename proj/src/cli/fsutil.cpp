#include "salmap/fsutil.hpp"

#include <atomic>
#include <string>
#include <unistd.h>

namespace salmap {

void atomic_write(const std::filesystem::path& path, const std::function<void(const std::filesystem::path&)>& write) {
  static std::atomic<unsigned> counter{0};
  const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  const auto tmp = dir / ("." + path.stem().string() + ".tmp" + std::to_string(::getpid()) + "_" +
                          std::to_string(counter++) + path.extension().string());
  try {
    write(tmp);
    std::filesystem::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(tmp, ec);
    throw;
  }
}

}  // namespace salmap
