#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace salmap {

struct DatasetEntry {
  std::string stem;
  std::filesystem::path image;
  std::optional<std::filesystem::path> gt;
};

/// `images/<stem>.(png|jpg|jpeg)` with `masks/<stem>_segmentation.png`; a
/// directory without images/ is scanned directly. Sorted by stem.
std::vector<DatasetEntry> index_dataset(const std::filesystem::path& dir);

/// A single image file or a directory handled like index_dataset.
std::vector<DatasetEntry> index_inputs(const std::filesystem::path& image_or_dir);

/// Worker count from SALMAP_JOBS, else 1.
int default_jobs();

/// Entry point of the `salmap` tool; returns the process exit code
/// (0 success, 1 some items failed, 2 usage or fatal error).
int run_cli(int argc, char** argv);

}  // namespace salmap
