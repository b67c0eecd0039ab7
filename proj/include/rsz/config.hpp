#ifndef RSZ_CONFIG_HPP
#define RSZ_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsz/solver.hpp"

namespace rsz {

// ---------------------------------------------------------------------------
// Experiment description, loaded from a strict JSON file: unknown keys,
// missing keys, or wrong types are config errors with field paths.
// ---------------------------------------------------------------------------
struct ExperimentConfig {
  double lx = 0, ly = 0, h = 0;

  MediaField::Kind media_kind = MediaField::Kind::builtin_oscillatory;
  double epsilon = 0;
  std::string raster_path;

  int n_patches = 0;
  double patch_width = 0, stride = 0;

  DirichletData::Kind bc_kind = DirichletData::Kind::builtin_sine;
  std::string bc_file;

  int k = 0, p = 0;
  std::uint64_t seed = 0;

  Method method = Method::vanilla;
  int T = 0;
  bool track_history = false;

  std::string base_dir;  // directory of the config file, for relative paths
};

namespace cfgdetail {

using json = nlohmann::json;

inline const json& member(const json& obj, const std::string& path, const char* key) {
  if (!obj.is_object())
    throw error(errc::config_error, path + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end())
    throw error(errc::config_error, path + "." + key + ": missing required field");
  return *it;
}

inline void reject_unknown(const json& obj, const std::string& path,
                           std::initializer_list<const char*> keys) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : keys)
      if (it.key() == k) known = true;
    if (!known) throw error(errc::config_error, path + "." + it.key() + ": unknown key");
  }
}

inline double number(const json& obj, const std::string& path, const char* key) {
  const json& v = member(obj, path, key);
  if (!v.is_number()) throw error(errc::config_error, path + "." + key + ": expected a number");
  return v.get<double>();
}

inline int integer(const json& obj, const std::string& path, const char* key) {
  const json& v = member(obj, path, key);
  if (!v.is_number_integer())
    throw error(errc::config_error, path + "." + key + ": expected an integer");
  return v.get<int>();
}

inline std::string text(const json& obj, const std::string& path, const char* key) {
  const json& v = member(obj, path, key);
  if (!v.is_string()) throw error(errc::config_error, path + "." + key + ": expected a string");
  return v.get<std::string>();
}

inline bool flag(const json& obj, const std::string& path, const char* key) {
  const json& v = member(obj, path, key);
  if (!v.is_boolean()) throw error(errc::config_error, path + "." + key + ": expected a boolean");
  return v.get<bool>();
}

}  // namespace cfgdetail

inline ExperimentConfig parse_config(const std::string& json_text, const std::string& base_dir) {
  using cfgdetail::flag;
  using cfgdetail::integer;
  using cfgdetail::member;
  using cfgdetail::number;
  using cfgdetail::reject_unknown;
  using cfgdetail::text;
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw error(errc::config_error, std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw error(errc::config_error, "config: expected a JSON object");
  reject_unknown(root, "config", {"grid", "media", "layout", "boundary", "rsvd", "run"});

  ExperimentConfig c;
  c.base_dir = base_dir;

  const auto& grid = member(root, "config", "grid");
  reject_unknown(grid, "config.grid", {"lx", "ly", "h"});
  c.lx = number(grid, "config.grid", "lx");
  c.ly = number(grid, "config.grid", "ly");
  c.h = number(grid, "config.grid", "h");

  const auto& media = member(root, "config", "media");
  std::string mkind = text(media, "config.media", "kind");
  if (mkind == "builtin-oscillatory") {
    reject_unknown(media, "config.media", {"kind", "epsilon"});
    c.media_kind = MediaField::Kind::builtin_oscillatory;
    c.epsilon = number(media, "config.media", "epsilon");
    if (!(c.epsilon > 0))
      throw error(errc::config_error, "config.media.epsilon: must be positive");
  } else if (mkind == "raster") {
    reject_unknown(media, "config.media", {"kind", "raster_path"});
    c.media_kind = MediaField::Kind::raster;
    c.raster_path = text(media, "config.media", "raster_path");
  } else {
    throw error(errc::config_error,
                "config.media.kind: expected \"builtin-oscillatory\" or \"raster\"");
  }

  const auto& layout = member(root, "config", "layout");
  reject_unknown(layout, "config.layout", {"n_patches", "patch_width", "stride"});
  c.n_patches = integer(layout, "config.layout", "n_patches");
  c.patch_width = number(layout, "config.layout", "patch_width");
  c.stride = number(layout, "config.layout", "stride");
  if (c.n_patches < 1)
    throw error(errc::config_error, "config.layout.n_patches: must be at least 1");

  const auto& boundary = member(root, "config", "boundary");
  std::string bkind = text(boundary, "config.boundary", "kind");
  if (bkind == "builtin-sine") {
    reject_unknown(boundary, "config.boundary", {"kind"});
    c.bc_kind = DirichletData::Kind::builtin_sine;
  } else if (bkind == "from-file") {
    reject_unknown(boundary, "config.boundary", {"kind", "file"});
    c.bc_kind = DirichletData::Kind::from_file;
    c.bc_file = text(boundary, "config.boundary", "file");
  } else {
    throw error(errc::config_error,
                "config.boundary.kind: expected \"builtin-sine\" or \"from-file\"");
  }

  const auto& rsvd = member(root, "config", "rsvd");
  reject_unknown(rsvd, "config.rsvd", {"k", "p", "seed"});
  c.k = integer(rsvd, "config.rsvd", "k");
  c.p = integer(rsvd, "config.rsvd", "p");
  const auto& seed = member(rsvd, "config.rsvd", "seed");
  if (!seed.is_number_integer() || seed.get<double>() < 0)
    throw error(errc::config_error, "config.rsvd.seed: expected a nonnegative integer");
  c.seed = seed.get<std::uint64_t>();
  if (c.k < 1) throw error(errc::config_error, "config.rsvd.k: must be at least 1");
  if (c.p < 0) throw error(errc::config_error, "config.rsvd.p: must be nonnegative");

  const auto& run = member(root, "config", "run");
  reject_unknown(run, "config.run", {"method", "T", "track_history"});
  std::string method = cfgdetail::text(run, "config.run", "method");
  if (method == "vanilla")
    c.method = Method::vanilla;
  else if (method == "reduced")
    c.method = Method::reduced;
  else if (method == "global")
    c.method = Method::global;
  else
    throw error(errc::config_error,
                "config.run.method: expected \"vanilla\", \"reduced\" or \"global\"");
  c.T = integer(run, "config.run", "T");
  if (c.T < 0) throw error(errc::config_error, "config.run.T: must be nonnegative");
  c.track_history = flag(run, "config.run", "track_history");

  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error(errc::config_error, "cannot open config file " + path);
  std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::string dir = std::filesystem::path(path).parent_path().string();
  return parse_config(body, dir);
}

inline std::string resolve_path(const ExperimentConfig& c, const std::string& p) {
  std::filesystem::path fp(p);
  if (fp.is_absolute() || c.base_dir.empty()) return p;
  return (std::filesystem::path(c.base_dir) / fp).string();
}

// Build the full runtime context.  Geometry conformity is validated by
// build_grid/build_layout before any factorization work starts.
inline SchwarzContext make_context(const ExperimentConfig& c) {
  GridSpec g = build_grid(c.lx, c.ly, c.h);
  MediaField media = c.media_kind == MediaField::Kind::builtin_oscillatory
                         ? builtin_media(c.epsilon)
                         : load_raster(resolve_path(c, c.raster_path));
  Layout probe = build_layout(g, c.n_patches, c.patch_width, c.stride);
  int bnodes = 2 * (probe.w_cells + g.ny - 1);
  if (c.k + c.p > bnodes)
    throw error(errc::config_error,
                "config.rsvd: k + p exceeds the patch boundary node count (" +
                    std::to_string(bnodes) + ")");
  DirichletData bc = c.bc_kind == DirichletData::Kind::builtin_sine
                         ? builtin_sine_data(g)
                         : load_boundary(resolve_path(c, c.bc_file), g);
  return build_context(g, std::move(media), c.n_patches, c.patch_width, c.stride, std::move(bc));
}

}  // namespace rsz

#endif
