#include "salmap/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "salmap/fsutil.hpp"

namespace salmap {

using nlohmann::json;

void to_json(json& j, const PreprocessConfig& c) {
  j = {{"target_height", c.target_height}, {"target_width", c.target_width}, {"minkowski_p", c.minkowski_p},
       {"color_constancy", c.color_constancy}, {"hair_hook", c.hair_hook}};
}
void from_json(const json& j, PreprocessConfig& c) {
  j.at("target_height").get_to(c.target_height);
  j.at("target_width").get_to(c.target_width);
  j.at("minkowski_p").get_to(c.minkowski_p);
  j.at("color_constancy").get_to(c.color_constancy);
  j.at("hair_hook").get_to(c.hair_hook);
}

void to_json(json& j, const MultisegConfig& c) {
  j = {{"level_count", c.level_count}, {"felz_k", c.felz_k}, {"felz_min_size", c.felz_min_size},
       {"felz_sigma", c.felz_sigma}, {"coarsest_regions", c.coarsest_regions}, {"merge_schedule", c.merge_schedule}};
}
void from_json(const json& j, MultisegConfig& c) {
  j.at("level_count").get_to(c.level_count);
  j.at("felz_k").get_to(c.felz_k);
  j.at("felz_min_size").get_to(c.felz_min_size);
  j.at("felz_sigma").get_to(c.felz_sigma);
  j.at("coarsest_regions").get_to(c.coarsest_regions);
  j.at("merge_schedule").get_to(c.merge_schedule);
}

void to_json(json& j, const RegionFeatConfig& c) {
  j = {{"histogram_smoothing", c.histogram_smoothing},
       {"peak_prominence", c.peak_prominence},
       {"threshold_factor", c.threshold_factor},
       {"min_object_area", c.min_object_area},
       {"close_radius", c.close_radius},
       {"strip_width", c.strip_width},
       {"circle_rho", c.circle_rho},
       {"circle_min_radius", c.circle_min_radius},
       {"annulus_width", c.annulus_width},
       {"arc_disk_radius", c.arc_disk_radius},
       {"circle_sigma", c.circle_sigma},
       {"exact_budget", c.exact_budget},
       {"circle_stride", c.circle_stride},
       {"circle_exact", c.circle_exact},
       {"lab_bins", c.lab_bins},
       {"hue_bins", c.hue_bins},
       {"sat_bins", c.sat_bins}};
}
void from_json(const json& j, RegionFeatConfig& c) {
  j.at("histogram_smoothing").get_to(c.histogram_smoothing);
  j.at("peak_prominence").get_to(c.peak_prominence);
  j.at("threshold_factor").get_to(c.threshold_factor);
  j.at("min_object_area").get_to(c.min_object_area);
  j.at("close_radius").get_to(c.close_radius);
  j.at("strip_width").get_to(c.strip_width);
  j.at("circle_rho").get_to(c.circle_rho);
  j.at("circle_min_radius").get_to(c.circle_min_radius);
  j.at("annulus_width").get_to(c.annulus_width);
  j.at("arc_disk_radius").get_to(c.arc_disk_radius);
  j.at("circle_sigma").get_to(c.circle_sigma);
  j.at("exact_budget").get_to(c.exact_budget);
  j.at("circle_stride").get_to(c.circle_stride);
  j.at("circle_exact").get_to(c.circle_exact);
  j.at("lab_bins").get_to(c.lab_bins);
  j.at("hue_bins").get_to(c.hue_bins);
  j.at("sat_bins").get_to(c.sat_bins);
}

void to_json(json& j, const ForestConfig& c) {
  j = {{"tree_count", c.tree_count}, {"features_per_split", c.features_per_split}, {"min_node_size", c.min_node_size},
       {"min_variance", c.min_variance}, {"seed", c.seed}};
}
void from_json(const json& j, ForestConfig& c) {
  j.at("tree_count").get_to(c.tree_count);
  j.at("features_per_split").get_to(c.features_per_split);
  j.at("min_node_size").get_to(c.min_node_size);
  j.at("min_variance").get_to(c.min_variance);
  j.at("seed").get_to(c.seed);
}

namespace {

constexpr const char* kMagic = "SALMAP-MODEL";
constexpr const char* kEndHeader = "END_HEADER";

template <class T>
void put(std::ostream& os, T v) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U u;
  std::memcpy(&u, &v, sizeof u);
  char bytes[sizeof u];
  for (std::size_t i = 0; i < sizeof u; ++i) bytes[i] = static_cast<char>((u >> (8 * i)) & 0xFF);
  os.write(bytes, sizeof bytes);
}

template <class T>
T get(std::istream& is) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  unsigned char bytes[sizeof(U)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof bytes)) throw Error("model file truncated in tree section");
  U u = 0;
  for (std::size_t i = 0; i < sizeof u; ++i) u |= static_cast<U>(bytes[i]) << (8 * i);
  T v;
  std::memcpy(&v, &u, sizeof v);
  return v;
}

json header_of(const SaliencyModel& m) {
  const auto& c = m.config;
  json h;
  h["format_version"] = kModelFormatVersion;
  h["config"] = {{"preprocess", c.preprocess},
                 {"multiseg", c.multiseg},
                 {"regionfeat", c.regionfeat},
                 {"forest", c.forest},
                 {"positive_overlap", c.positive_overlap},
                 {"negative_overlap", c.negative_overlap}};
  h["fusion_weights"] = m.fusion_weights;
  h["forest"] = {{"tree_count", m.forest.trees.size()},
                 {"feature_count", m.forest.feature_count},
                 {"seed", m.forest.seed}};
  std::vector<std::size_t> nodes;
  for (const auto& t : m.forest.trees) nodes.push_back(t.nodes.size());
  h["tree_nodes"] = nodes;
  h["training"] = {{"images", m.info.images},         {"samples", m.info.samples},
                   {"excluded", m.info.excluded},     {"fusion_mse", m.info.fusion_mse},
                   {"oob_mse", m.info.oob_mse},       {"created", m.info.created}};
  h["tree_section"] = "per tree: int32 feature[n], int32 left[n], int32 right[n], float64 value[n]; little-endian";
  return h;
}

}  // namespace

void write_model(std::ostream& os, const SaliencyModel& m) {
  os << kMagic << ' ' << kModelFormatVersion << '\n';
  os << header_of(m).dump(2) << '\n' << kEndHeader << '\n';
  for (const auto& t : m.forest.trees) {
    for (const auto& n : t.nodes) put<std::int32_t>(os, n.feature);
    for (const auto& n : t.nodes) put<std::int32_t>(os, n.left);
    for (const auto& n : t.nodes) put<std::int32_t>(os, n.right);
    for (const auto& n : t.nodes) put<double>(os, n.value);
  }
  if (!os) throw Error("failed to write model");
}

SaliencyModel read_model(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error("empty model file");
  std::istringstream magic(line);
  std::string word;
  int version = 0;
  magic >> word >> version;
  if (word != kMagic) throw Error("not a salmap model file");
  if (version != kModelFormatVersion)
    throw Error("unsupported model format version " + std::to_string(version));
  std::string text;
  bool ended = false;
  while (std::getline(is, line)) {
    if (line == kEndHeader) {
      ended = true;
      break;
    }
    text += line;
    text += '\n';
  }
  if (!ended) throw Error("model header is not terminated");

  SaliencyModel m;
  try {
    const json h = json::parse(text);
    const json& c = h.at("config");
    c.at("preprocess").get_to(m.config.preprocess);
    c.at("multiseg").get_to(m.config.multiseg);
    c.at("regionfeat").get_to(m.config.regionfeat);
    c.at("forest").get_to(m.config.forest);
    c.at("positive_overlap").get_to(m.config.positive_overlap);
    c.at("negative_overlap").get_to(m.config.negative_overlap);
    h.at("fusion_weights").get_to(m.fusion_weights);
    h.at("forest").at("feature_count").get_to(m.forest.feature_count);
    h.at("forest").at("seed").get_to(m.forest.seed);
    const auto nodes = h.at("tree_nodes").get<std::vector<std::size_t>>();
    if (nodes.size() != h.at("forest").at("tree_count").get<std::size_t>()) throw Error("tree count mismatch");
    const json& t = h.at("training");
    t.at("images").get_to(m.info.images);
    t.at("samples").get_to(m.info.samples);
    t.at("excluded").get_to(m.info.excluded);
    t.at("fusion_mse").get_to(m.info.fusion_mse);
    t.at("oob_mse").get_to(m.info.oob_mse);
    t.at("created").get_to(m.info.created);
    m.forest.trees.resize(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      auto& tree = m.forest.trees[k].nodes;
      tree.resize(nodes[k]);
      if (tree.empty()) throw Error("tree " + std::to_string(k) + " has no nodes");
      for (auto& n : tree) n.feature = get<std::int32_t>(is);
      for (auto& n : tree) n.left = get<std::int32_t>(is);
      for (auto& n : tree) n.right = get<std::int32_t>(is);
      for (auto& n : tree) n.value = get<double>(is);
      for (std::size_t i = 0; i < tree.size(); ++i) {
        const auto& n = tree[i];
        if (n.feature < 0) continue;
        const auto bad = [&](std::int32_t c) { return c <= static_cast<std::int32_t>(i) || c >= static_cast<std::int32_t>(tree.size()); };
        if (static_cast<std::size_t>(n.feature) >= m.forest.feature_count || bad(n.left) || bad(n.right))
          throw Error("tree " + std::to_string(k) + " node " + std::to_string(i) + " is malformed");
      }
    }
  } catch (const json::exception& e) {
    throw Error(std::string("invalid model header: ") + e.what());
  }
  if (is.peek() != std::char_traits<char>::eof()) throw Error("trailing bytes after tree section");
  if (m.fusion_weights.size() != static_cast<std::size_t>(m.config.multiseg.level_count))
    throw Error("fusion weight count does not match the level count");
  return m;
}

void save_model(const std::filesystem::path& path, const SaliencyModel& model) {
  atomic_write(path, [&](const std::filesystem::path& tmp) {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw Error("cannot open '" + tmp.string() + "' for writing");
    write_model(os, model);
    os.close();
    if (!os) throw Error("failed to write '" + tmp.string() + "'");
  });
}

SaliencyModel load_model(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open model '" + path.string() + "'");
  return read_model(is);
}

}  // namespace salmap
