#pragma once

#include <filesystem>
#include <functional>

namespace salmap {

/// Calls write(tmp) with a sibling temporary path that keeps the extension,
/// then renames it onto `path`. The temporary is removed on failure.
void atomic_write(const std::filesystem::path& path, const std::function<void(const std::filesystem::path&)>& write);

}  // namespace salmap
