#pragma once

// Render and analysis tunables from a JSON file. Every key is optional;
// unknown keys are rejected so typos do not silently fall back to defaults.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "stase/analysis.hpp"
#include "stase/error.hpp"
#include "stase/renderer.hpp"
#include "stase/scene.hpp"

namespace stase {

struct EngineConfig {
  RenderConfig render;
  double analysis_tolerance_deg = analysis::kDefaultToleranceDeg;
};

namespace detail {

inline double config_number(const Json& j, const char* key) {
  if (!j.at(key).is_number()) throw Error(ErrorCode::ConfigError, std::string("'") + key + "' must be a number");
  return j.at(key).get<double>();
}

template <std::size_t N>
inline void config_array(const Json& j, const char* key, std::array<double, N>& out) {
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != N)
    throw Error(ErrorCode::ConfigError, std::string("'") + key + "' must be an array of " + std::to_string(N) + " numbers");
  for (std::size_t i = 0; i < N; ++i) {
    if (!a[i].is_number()) throw Error(ErrorCode::ConfigError, std::string("'") + key + "' must hold numbers");
    out[i] = a[i].get<double>();
    if (!(out[i] > 0.0)) throw Error(ErrorCode::ConfigError, std::string("'") + key + "' entries must be > 0");
  }
}

}  // namespace detail

inline EngineConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");
  static const std::set<std::string> known = {
      "head_radius_m",      "speed_of_sound_mps", "ild_max_db",          "shelf_fc_hz",
      "normalize_peak_dbfs", "dry_wet_law",        "schroeder",           "analysis_tolerance_deg",
      "disable_itd_delay"};
  for (const auto& [k, _] : j.items())
    if (!known.contains(k)) throw Error(ErrorCode::ConfigError, "unknown config key '" + k + "'");

  EngineConfig c;
  auto& r = c.render;
  if (j.contains("head_radius_m")) r.head.head_radius_m = detail::config_number(j, "head_radius_m");
  if (j.contains("speed_of_sound_mps")) r.head.speed_of_sound_mps = detail::config_number(j, "speed_of_sound_mps");
  if (!r.head.valid()) throw Error(ErrorCode::ConfigError, "head model outside (0.05, 0.15) m / (300, 400) m/s");
  if (j.contains("ild_max_db")) r.ild.ild_max_db = detail::config_number(j, "ild_max_db");
  if (j.contains("shelf_fc_hz")) r.ild.shelf_fc_hz = detail::config_number(j, "shelf_fc_hz");
  if (!(r.ild.ild_max_db >= 0.0 && r.ild.ild_max_db <= 40.0))
    throw Error(ErrorCode::ConfigError, "ild_max_db must be in [0, 40]");
  if (!(r.ild.shelf_fc_hz > 100.0 && r.ild.shelf_fc_hz < 20000.0))
    throw Error(ErrorCode::ConfigError, "shelf_fc_hz must be in (100, 20000)");
  if (j.contains("normalize_peak_dbfs")) {
    if (j.at("normalize_peak_dbfs").is_null()) {
      r.normalize_peak_dbfs.reset();
    } else {
      const double v = detail::config_number(j, "normalize_peak_dbfs");
      if (!(v <= 0.0)) throw Error(ErrorCode::ConfigError, "normalize_peak_dbfs must be <= 0 or null");
      r.normalize_peak_dbfs = v;
    }
  }
  if (j.contains("dry_wet_law")) {
    const auto& v = j.at("dry_wet_law");
    if (v == "constant") r.dry_wet_law = DryWetLaw::Constant;
    else if (v == "distance_scaled") r.dry_wet_law = DryWetLaw::DistanceScaled;
    else throw Error(ErrorCode::ConfigError, "dry_wet_law must be \"constant\" or \"distance_scaled\"");
  }
  if (j.contains("schroeder")) {
    const auto& s = j.at("schroeder");
    if (!s.is_object()) throw Error(ErrorCode::ConfigError, "'schroeder' must be an object");
    for (const auto& [k, _] : s.items())
      if (k != "comb_delays_ms" && k != "allpass_delays_ms" && k != "allpass_gain")
        throw Error(ErrorCode::ConfigError, "unknown schroeder key '" + k + "'");
    if (s.contains("comb_delays_ms")) detail::config_array(s, "comb_delays_ms", r.schroeder.comb_delays_ms);
    if (s.contains("allpass_delays_ms")) detail::config_array(s, "allpass_delays_ms", r.schroeder.allpass_delays_ms);
    if (s.contains("allpass_gain")) r.schroeder.allpass_gain = detail::config_number(s, "allpass_gain");
    if (!(r.schroeder.allpass_gain > 0.0 && r.schroeder.allpass_gain < 1.0))
      throw Error(ErrorCode::ConfigError, "allpass_gain must be in (0, 1)");
  }
  if (j.contains("analysis_tolerance_deg")) {
    c.analysis_tolerance_deg = detail::config_number(j, "analysis_tolerance_deg");
    if (!(c.analysis_tolerance_deg > 0.0)) throw Error(ErrorCode::ConfigError, "analysis_tolerance_deg must be > 0");
  }
  if (j.contains("disable_itd_delay")) {
    if (!j.at("disable_itd_delay").is_boolean()) throw Error(ErrorCode::ConfigError, "'disable_itd_delay' must be a boolean");
    r.disable_itd_delay = j.at("disable_itd_delay").get<bool>();
  }
  return c;
}

inline EngineConfig load_config(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".toml") throw Error(ErrorCode::ConfigError, "TOML config is not supported; use JSON");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  Json j;
  try {
    j = Json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, std::string("config does not parse: ") + e.what());
  }
  return config_from_json(j);
}

inline Json to_json(const EngineConfig& c) {
  const auto& r = c.render;
  return {{"head_radius_m", r.head.head_radius_m},
          {"speed_of_sound_mps", r.head.speed_of_sound_mps},
          {"ild_max_db", r.ild.ild_max_db},
          {"shelf_fc_hz", r.ild.shelf_fc_hz},
          {"normalize_peak_dbfs", r.normalize_peak_dbfs ? Json(*r.normalize_peak_dbfs) : Json(nullptr)},
          {"dry_wet_law", to_string(r.dry_wet_law)},
          {"schroeder",
           {{"comb_delays_ms", r.schroeder.comb_delays_ms},
            {"allpass_delays_ms", r.schroeder.allpass_delays_ms},
            {"allpass_gain", r.schroeder.allpass_gain}}},
          {"analysis_tolerance_deg", c.analysis_tolerance_deg},
          {"disable_itd_delay", r.disable_itd_delay}};
}

}  // namespace stase
