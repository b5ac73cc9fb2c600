#pragma once

// Tracker configuration files: one `key = value` per line, `#` starts a comment.
//
//   features           = hog, gray          (hog | cn | gray | external:PATH)
//   region_area_factor = 5                  (region area = factor^2 * target area)
//   canonical_side     = 224
//   scale_count        = 5
//   scale_step         = 1.02
//   learning_rate      = 0.01
//   sigma_factor       = 0.0625
//   mu_min             = 0.1
//   eta                = 3.0
//   first_iterations   = 50
//   update_iterations  = 5
//   solver_tolerance   = 1e-6
//   hog_cell = 4, cn_cell = 4, gray_cell = 4
//   cn_table           = PATH               (relative to the config file)

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "fusetrack/tracker.hpp"

namespace fusetrack {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    fail(ErrorKind::parse_error, "config key '" + std::string(key) + "': cannot parse '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace detail

// "hog,gray,external:deep.fmap" -> specs with default cells.
inline std::vector<FeatureSpec> parse_feature_list(std::string_view list) {
  std::vector<FeatureSpec> specs;
  while (true) {
    const auto pos = list.find(',');
    const auto token = detail::trim(list.substr(0, pos));
    if (!token.empty()) {
      FeatureSpec spec;
      if (token == "hog") {
        spec.kind = FeatureKind::hog;
      } else if (token == "cn") {
        spec.kind = FeatureKind::cn;
      } else if (token == "gray") {
        spec.kind = FeatureKind::gray;
      } else if (token.starts_with("external:") && token.size() > 9) {
        spec.kind = FeatureKind::external;
        spec.fmap_path = std::string(token.substr(9));
      } else {
        fail(ErrorKind::usage, "unknown feature kind '" + std::string(token) + "'");
      }
      specs.push_back(std::move(spec));
    }
    if (pos == std::string_view::npos) break;
    list.remove_prefix(pos + 1);
  }
  return specs;
}

inline TrackerConfig default_tracker_config() {
  TrackerConfig cfg;
  cfg.features = parse_feature_list("hog,gray");
#ifdef FUSETRACK_DEFAULT_CN_TABLE
  cfg.cn_table = FUSETRACK_DEFAULT_CN_TABLE;
#endif
  return cfg;
}

inline TrackerConfig parse_tracker_config(std::istream& in, const std::filesystem::path& base_dir = {}) {
  TrackerConfig cfg = default_tracker_config();
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = detail::trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorKind::parse_error, "config line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = detail::trim(view.substr(0, eq));
    const auto value = detail::trim(view.substr(eq + 1));
    using detail::parse_number;
    if (key == "features") {
      cfg.features = parse_feature_list(value);
    } else if (key == "region_area_factor") {
      cfg.region_area_factor = parse_number<double>(key, value);
    } else if (key == "canonical_side") {
      cfg.canonical_side = parse_number<int>(key, value);
    } else if (key == "scale_count") {
      cfg.scale_count = parse_number<int>(key, value);
    } else if (key == "scale_step") {
      cfg.scale_step = parse_number<double>(key, value);
    } else if (key == "learning_rate") {
      cfg.learning_rate = parse_number<double>(key, value);
    } else if (key == "sigma_factor") {
      cfg.labels.sigma_factor = parse_number<double>(key, value);
    } else if (key == "mu_min") {
      cfg.mu_min = parse_number<double>(key, value);
    } else if (key == "eta") {
      cfg.eta = parse_number<double>(key, value);
    } else if (key == "first_iterations") {
      cfg.first_solve.iterations = parse_number<int>(key, value);
    } else if (key == "update_iterations") {
      cfg.update_solve.iterations = parse_number<int>(key, value);
    } else if (key == "solver_tolerance") {
      cfg.first_solve.tolerance = cfg.update_solve.tolerance = parse_number<double>(key, value);
    } else if (key == "hog_cell") {
      cfg.cells.hog = parse_number<int>(key, value);
    } else if (key == "cn_cell") {
      cfg.cells.cn = parse_number<int>(key, value);
    } else if (key == "gray_cell") {
      cfg.cells.gray = parse_number<int>(key, value);
    } else if (key == "cn_table") {
      const std::filesystem::path p{std::string(value)};
      cfg.cn_table = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    } else {
      fail(ErrorKind::usage, "config line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
    }
  }
  cfg.use_features(std::move(cfg.features));
  return cfg;
}

inline TrackerConfig load_tracker_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::missing_file, "cannot open config " + path.string());
  return parse_tracker_config(in, path.parent_path());
}

}  // namespace fusetrack
