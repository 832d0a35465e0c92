#pragma once

#include <filesystem>
#include <iosfwd>

#include "salmap/saliency.hpp"

namespace salmap {

inline constexpr int kModelFormatVersion = 1;

/// Magic line, JSON header, END_HEADER line, then little-endian tree arrays.
/// The layout is described in docs/model_format.md.
void write_model(std::ostream& os, const SaliencyModel& model);
SaliencyModel read_model(std::istream& is);

/// Written to a temporary file first and renamed into place.
void save_model(const std::filesystem::path& path, const SaliencyModel& model);
SaliencyModel load_model(const std::filesystem::path& path);

}  // namespace salmap
