#include <algorithm>
#include <cctype>
#include <cstdlib>

#include "salmap/cli.hpp"
#include "salmap/imgcore/raster.hpp"

namespace salmap {

namespace fs = std::filesystem;

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool is_image(const fs::path& p) {
  const auto ext = lower(p.extension().string());
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::vector<DatasetEntry> index_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("'" + dir.string() + "' is not a directory");
  const fs::path images = fs::is_directory(dir / "images") ? dir / "images" : dir;
  const fs::path masks = fs::is_directory(dir / "masks") ? dir / "masks" : dir;
  std::vector<DatasetEntry> out;
  for (const auto& e : fs::directory_iterator(images)) {
    if (!e.is_regular_file() || !is_image(e.path())) continue;
    const std::string stem = e.path().stem().string();
    if (ends_with(stem, "_segmentation") || stem.front() == '.') continue;
    DatasetEntry d{stem, e.path(), std::nullopt};
    const fs::path gt = masks / (stem + "_segmentation.png");
    if (fs::exists(gt)) d.gt = gt;
    out.push_back(std::move(d));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.stem < b.stem; });
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i].stem == out[i - 1].stem)
      throw Error("two images share the stem '" + out[i].stem + "'");
  return out;
}

std::vector<DatasetEntry> index_inputs(const fs::path& p) {
  if (fs::is_directory(p)) return index_dataset(p);
  if (!fs::exists(p)) throw Error("input '" + p.string() + "' does not exist");
  DatasetEntry d{p.stem().string(), p, std::nullopt};
  const fs::path sibling = p.parent_path() / (d.stem + "_segmentation.png");
  const fs::path layout = p.parent_path().parent_path() / "masks" / (d.stem + "_segmentation.png");
  if (fs::exists(sibling))
    d.gt = sibling;
  else if (p.parent_path().filename() == "images" && fs::exists(layout))
    d.gt = layout;
  return {d};
}

int default_jobs() {
  if (const char* env = std::getenv("SALMAP_JOBS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<int>(v);
  }
  return 1;
}

}  // namespace salmap
