#pragma once

// HRIR and RIR banks described by JSON manifests. Manifest paths to WAV
// files are relative to the manifest's directory.

#include <cmath>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "stase/audio_buffer.hpp"
#include "stase/error.hpp"
#include "stase/scene.hpp"
#include "stase/text.hpp"
#include "stase/wav.hpp"

namespace stase {

struct HrirEntry {
  std::size_t index = 0;
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;
  AudioBuffer left;
  AudioBuffer right;
};

/// Measured (or synthetic) head-related impulse responses. All pairs share
/// one length and one sample rate; indices are dense from 0.
class HrirBank {
 public:
  HrirBank() = default;

  explicit HrirBank(std::vector<HrirEntry> entries) : entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& e = entries_[i];
      if (e.index != i) throw Error(ErrorCode::ManifestError, "HRIR indices must be unique and dense from 0");
      if (!std::isfinite(e.azimuth_deg) || !std::isfinite(e.elevation_deg))
        throw Error(ErrorCode::ManifestError, "HRIR entry " + std::to_string(i) + " has a non-finite position");
      if (!e.left.is_mono() || !e.right.is_mono())
        throw Error(ErrorCode::ManifestError, "HRIR entry " + std::to_string(i) + " must be mono per ear");
      const auto& first = entries_.front();
      if (e.left.frames() != first.left.frames() || e.right.frames() != first.left.frames())
        throw Error(ErrorCode::ManifestError, "HRIR entry " + std::to_string(i) + " length differs");
      if (e.left.sample_rate() != first.left.sample_rate() || e.right.sample_rate() != first.left.sample_rate())
        throw Error(ErrorCode::ManifestError, "HRIR entry " + std::to_string(i) + " sample rate differs");
    }
  }

  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<HrirEntry>& entries() const noexcept { return entries_; }
  const HrirEntry& at(std::size_t i) const { return entries_.at(i); }
  int sample_rate() const { return entries_.empty() ? 0 : entries_.front().left.sample_rate(); }

 private:
  std::vector<HrirEntry> entries_;
};

struct RirInfo {
  std::string rir_id;
  std::vector<std::string> keywords;
  std::string description;
};

struct RirEntry {
  RirInfo info;
  AudioBuffer ir;
};

class RirBank {
 public:
  RirBank() = default;

  explicit RirBank(std::vector<RirEntry> entries) : entries_(std::move(entries)) {
    std::set<std::string> ids;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& e = entries_[i];
      if (!ids.insert(e.info.rir_id).second)
        throw Error(ErrorCode::ManifestError, "entry " + std::to_string(i) + ": duplicate rir_id '" + e.info.rir_id + "'");
      if (!e.ir.is_mono()) throw Error(ErrorCode::ManifestError, "entry " + std::to_string(i) + ": RIR must be mono");
      if (e.ir.sample_rate() != entries_.front().ir.sample_rate())
        throw Error(ErrorCode::ManifestError, "entry " + std::to_string(i) + ": sample rate differs");
    }
  }

  const std::vector<RirEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

  const RirEntry* find(std::string_view id) const {
    for (const auto& e : entries_)
      if (e.info.rir_id == id) return &e;
    return nullptr;
  }

  std::vector<RirInfo> infos() const {
    std::vector<RirInfo> out;
    for (const auto& e : entries_) out.push_back(e.info);
    return out;
  }

  std::set<std::string> ids() const {
    std::set<std::string> out;
    for (const auto& e : entries_) out.insert(e.info.rir_id);
    return out;
  }

 private:
  std::vector<RirEntry> entries_;
};

namespace detail {

inline Json read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ManifestError, "cannot open manifest " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  Json j;
  try {
    j = Json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ManifestError, std::string("manifest does not parse: ") + e.what());
  }
  if (!j.is_array()) throw Error(ErrorCode::ManifestError, "manifest must be a JSON array");
  return j;
}

inline AudioBuffer load_entry_wav(const std::filesystem::path& dir, const Json& entry, const char* key,
                                  std::size_t index) {
  if (!entry.contains(key) || !entry.at(key).is_string())
    throw Error(ErrorCode::ManifestError, "entry " + std::to_string(index) + ": missing '" + key + "'");
  const auto file = dir / entry.at(key).get<std::string>();
  if (!std::filesystem::exists(file))
    throw Error(ErrorCode::ManifestError, "entry " + std::to_string(index) + ": missing file " + file.string());
  try {
    return wav::read_wav(file);
  } catch (const Error& e) {
    throw Error(ErrorCode::ManifestError, "entry " + std::to_string(index) + ": " + e.what());
  }
}

inline double entry_number(const Json& entry, const char* key, std::size_t index) {
  if (!entry.contains(key) || !entry.at(key).is_number())
    throw Error(ErrorCode::ManifestError, "entry " + std::to_string(index) + ": '" + key + "' must be a number");
  return entry.at(key).get<double>();
}

inline std::vector<RirInfo> rir_infos_from(const Json& j) {
  std::vector<RirInfo> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    if (!e.is_object() || !e.contains("rir_id") || !e.at("rir_id").is_string())
      throw Error(ErrorCode::ManifestError, "entry " + std::to_string(i) + ": missing 'rir_id'");
    RirInfo info;
    info.rir_id = e.at("rir_id").get<std::string>();
    if (e.contains("keywords")) {
      if (!e.at("keywords").is_array())
        throw Error(ErrorCode::ManifestError, "entry " + std::to_string(i) + ": 'keywords' must be an array");
      for (const auto& k : e.at("keywords")) {
        if (!k.is_string()) throw Error(ErrorCode::ManifestError, "entry " + std::to_string(i) + ": keyword not a string");
        info.keywords.push_back(text::to_lower(k.get<std::string>()));
      }
    }
    if (e.contains("description") && e.at("description").is_string())
      info.description = e.at("description").get<std::string>();
    out.push_back(std::move(info));
  }
  return out;
}

}  // namespace detail

/// Manifest: [{"index", "azimuth_deg", "elevation_deg", "file"}] with a stereo
/// file per position, or "file_left" / "file_right" mono pairs.
inline HrirBank load_hrir_bank(const std::filesystem::path& manifest_path) {
  const auto j = detail::read_manifest(manifest_path);
  const auto dir = manifest_path.parent_path();
  std::vector<HrirEntry> entries;
  std::optional<int> rate;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    if (!e.is_object()) throw Error(ErrorCode::ManifestError, "entry " + std::to_string(i) + " is not an object");
    HrirEntry h;
    const double idx = detail::entry_number(e, "index", i);
    if (idx < 0 || idx != std::floor(idx))
      throw Error(ErrorCode::ManifestError, "entry " + std::to_string(i) + ": index must be a non-negative integer");
    h.index = static_cast<std::size_t>(idx);
    h.azimuth_deg = detail::entry_number(e, "azimuth_deg", i);
    h.elevation_deg = detail::entry_number(e, "elevation_deg", i);
    if (e.contains("file")) {
      const auto pair = detail::load_entry_wav(dir, e, "file", i);
      if (!pair.is_stereo())
        throw Error(ErrorCode::ManifestError, "entry " + std::to_string(i) + ": 'file' must be a stereo HRIR pair");
      h.left = AudioBuffer::mono(pair.channels()[0], pair.sample_rate());
      h.right = AudioBuffer::mono(pair.channels()[1], pair.sample_rate());
    } else {
      h.left = detail::load_entry_wav(dir, e, "file_left", i);
      h.right = detail::load_entry_wav(dir, e, "file_right", i);
      if (!h.left.is_mono() || !h.right.is_mono())
        throw Error(ErrorCode::ManifestError, "entry " + std::to_string(i) + ": _L/_R files must be mono");
    }
    if (rate && (h.left.sample_rate() != *rate || h.right.sample_rate() != *rate))
      throw Error(ErrorCode::ManifestError, "entry " + std::to_string(i) + ": sample rate differs from entry 0");
    rate = h.left.sample_rate();
    entries.push_back(std::move(h));
  }
  return HrirBank(std::move(entries));
}

/// Manifest: [{"rir_id", "keywords", "description", "file"}], mono files.
inline RirBank load_rir_bank(const std::filesystem::path& manifest_path) {
  const auto j = detail::read_manifest(manifest_path);
  const auto dir = manifest_path.parent_path();
  const auto infos = detail::rir_infos_from(j);
  std::vector<RirEntry> entries;
  std::optional<int> rate;
  for (std::size_t i = 0; i < j.size(); ++i) {
    auto ir = detail::load_entry_wav(dir, j[i], "file", i);
    if (!ir.is_mono()) throw Error(ErrorCode::ManifestError, "entry " + std::to_string(i) + ": RIR must be mono");
    if (rate && ir.sample_rate() != *rate)
      throw Error(ErrorCode::ManifestError, "entry " + std::to_string(i) + ": sample rate differs from entry 0");
    rate = ir.sample_rate();
    entries.push_back({infos[i], std::move(ir)});
  }
  return RirBank(std::move(entries));
}

/// Ids and keywords only, without decoding audio (used when planning).
inline std::vector<RirInfo> load_rir_catalog(const std::filesystem::path& manifest_path) {
  return detail::rir_infos_from(detail::read_manifest(manifest_path));
}

}  // namespace stase
