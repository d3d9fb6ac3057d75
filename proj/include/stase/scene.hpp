#pragma once

// Plan schema shared by every stage: placements, reverb, output spec,
// spatial templates, and plan validation.
//
// Conventions: azimuth in degrees, positive = listener's right, 0 = front,
// +/-180 = rear; elevation in degrees, positive = up; distance in metres.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "json.hpp"

#include "stase/error.hpp"
#include "stase/text.hpp"

namespace stase {

using Json = nlohmann::ordered_json;

enum class LocalizationMode { Panning, ItdIld, Hrtf };
enum class OutputFormat { Stereo, Binaural };

inline std::string to_string(LocalizationMode m) {
  switch (m) {
    case LocalizationMode::Panning: return "panning";
    case LocalizationMode::ItdIld: return "itd_ild";
    case LocalizationMode::Hrtf: return "hrtf";
  }
  return "panning";
}

inline std::string to_string(OutputFormat f) { return f == OutputFormat::Stereo ? "stereo" : "binaural"; }

inline LocalizationMode parse_mode(const std::string& s) {
  if (s == "panning") return LocalizationMode::Panning;
  if (s == "itd_ild") return LocalizationMode::ItdIld;
  if (s == "hrtf") return LocalizationMode::Hrtf;
  throw Error(ErrorCode::SchemaError, "unknown localization mode '" + s + "'");
}

inline OutputFormat parse_format(const std::string& s) {
  if (s == "stereo") return OutputFormat::Stereo;
  if (s == "binaural") return OutputFormat::Binaural;
  throw Error(ErrorCode::SchemaError, "unknown output format '" + s + "'");
}

struct SourcePlacement {
  std::string source_id;
  std::string instrument;
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;
  double distance_m = 2.0;
  LocalizationMode mode = LocalizationMode::Panning;
  double reverb_send = 0.0;

  friend bool operator==(const SourcePlacement&, const SourcePlacement&) = default;
};

struct RirConvolution {
  std::string rir_id;
  friend bool operator==(const RirConvolution&, const RirConvolution&) = default;
};

struct Algorithmic {
  double rt60_s = 1.0;
  double predelay_ms = 0.0;
  friend bool operator==(const Algorithmic&, const Algorithmic&) = default;
};

struct ReverbSpec {
  std::variant<RirConvolution, Algorithmic> kind = Algorithmic{};
  double wet_gain = 0.0;

  const RirConvolution* rir() const { return std::get_if<RirConvolution>(&kind); }
  const Algorithmic* algorithmic() const { return std::get_if<Algorithmic>(&kind); }

  friend bool operator==(const ReverbSpec&, const ReverbSpec&) = default;
};

struct OutputSpec {
  int sample_rate_hz = 48000;
  OutputFormat format = OutputFormat::Binaural;
  friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

inline constexpr std::size_t kMaxPlanSources = 16;
inline constexpr std::size_t kMaxTemplateSlots = 6;

struct SpatialPlan {
  std::vector<SourcePlacement> sources;
  ReverbSpec reverb;
  OutputSpec output;
  std::string mix_notes;
  std::string music_description;

  friend bool operator==(const SpatialPlan&, const SpatialPlan&) = default;
};

struct TemplateSlot {
  std::string slot_instrument;
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;
  double distance_m = 2.0;
  friend bool operator==(const TemplateSlot&, const TemplateSlot&) = default;
};

struct Template {
  std::string template_id;
  std::string name;
  std::vector<std::string> keywords;
  std::string description;
  std::vector<TemplateSlot> slots;
  std::string default_environment;
  friend bool operator==(const Template&, const Template&) = default;
};

struct StemInfo {
  std::string stem_id;
  std::string instrument;
};

// ---------------------------------------------------------------------------
// Validation

/// Stable violation codes.
namespace violation {
inline constexpr const char* kSourceCount = "E_SOURCE_COUNT";
inline constexpr const char* kDuplicateId = "E_DUPLICATE_SOURCE_ID";
inline constexpr const char* kAzimuth = "E_AZIMUTH_RANGE";
inline constexpr const char* kElevation = "E_ELEVATION_RANGE";
inline constexpr const char* kDistance = "E_DISTANCE_RANGE";
inline constexpr const char* kReverbSend = "E_REVERB_SEND_RANGE";
inline constexpr const char* kMissingStem = "E_MISSING_STEM";
inline constexpr const char* kModeFormat = "E_MODE_FORMAT_CONFLICT";
inline constexpr const char* kUnknownRir = "E_UNKNOWN_RIR";
inline constexpr const char* kRt60 = "E_RT60_RANGE";
inline constexpr const char* kPredelay = "E_PREDELAY_RANGE";
inline constexpr const char* kWetGain = "E_WET_GAIN_RANGE";
inline constexpr const char* kSampleRate = "E_SAMPLE_RATE";
}  // namespace violation

struct Violation {
  std::string code;
  std::string where;
  std::string message;
  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  std::size_t count(std::string_view code) const {
    return static_cast<std::size_t>(std::count_if(violations.begin(), violations.end(),
                                                  [&](const Violation& v) { return v.code == code; }));
  }
  std::string summary() const {
    std::string s;
    for (const auto& v : violations) s += v.code + " at " + v.where + ": " + v.message + "\n";
    return s;
  }
  friend bool operator==(const ValidationReport&, const ValidationReport&) = default;
};

inline bool in_closed(double v, double lo, double hi) { return std::isfinite(v) && v >= lo && v <= hi; }

inline bool placement_coordinates_valid(double az, double el, double dist) {
  return in_closed(az, -180.0, 180.0) && in_closed(el, -90.0, 90.0) && std::isfinite(dist) && dist > 0.0;
}

/// Checks every plan invariant. `rir_ids` == nullopt skips RIR resolution
/// (used when planning without a loaded bank); likewise for `stem_ids`.
inline ValidationReport validate_plan(const SpatialPlan& plan,
                                      const std::optional<std::set<std::string>>& stem_ids,
                                      const std::optional<std::set<std::string>>& rir_ids) {
  ValidationReport r;
  auto add = [&](const char* code, std::string where, std::string msg) {
    r.violations.push_back({code, std::move(where), std::move(msg)});
  };

  if (plan.sources.empty() || plan.sources.size() > kMaxPlanSources)
    add(violation::kSourceCount, "sources", "plan needs 1..16 sources, got " + std::to_string(plan.sources.size()));

  std::set<std::string> seen;
  for (std::size_t i = 0; i < plan.sources.size(); ++i) {
    const auto& s = plan.sources[i];
    const std::string where = "sources[" + std::to_string(i) + "]";
    if (!seen.insert(s.source_id).second) add(violation::kDuplicateId, where, "duplicate source_id '" + s.source_id + "'");
    if (!in_closed(s.azimuth_deg, -180.0, 180.0)) add(violation::kAzimuth, where, "azimuth_deg outside [-180, 180]");
    if (!in_closed(s.elevation_deg, -90.0, 90.0)) add(violation::kElevation, where, "elevation_deg outside [-90, 90]");
    if (!(std::isfinite(s.distance_m) && s.distance_m > 0.0)) add(violation::kDistance, where, "distance_m must be > 0");
    if (!in_closed(s.reverb_send, 0.0, 1.0)) add(violation::kReverbSend, where, "reverb_send outside [0, 1]");
    if (stem_ids && !stem_ids->contains(s.source_id))
      add(violation::kMissingStem, where, "no stem named '" + s.source_id + "'");
    if (plan.output.format == OutputFormat::Stereo && s.mode == LocalizationMode::Hrtf)
      add(violation::kModeFormat, where, "hrtf mode requires binaural output");
  }

  if (const auto* rir = plan.reverb.rir()) {
    if (rir_ids && !rir_ids->contains(rir->rir_id)) add(violation::kUnknownRir, "reverb", "unknown rir_id '" + rir->rir_id + "'");
  } else if (const auto* alg = plan.reverb.algorithmic()) {
    if (!(std::isfinite(alg->rt60_s) && alg->rt60_s > 0.05 && alg->rt60_s <= 20.0))
      add(violation::kRt60, "reverb", "rt60_s outside (0.05, 20]");
    if (!(std::isfinite(alg->predelay_ms) && alg->predelay_ms >= 0.0))
      add(violation::kPredelay, "reverb", "predelay_ms must be >= 0");
  }
  if (!in_closed(plan.reverb.wet_gain, 0.0, 1.0)) add(violation::kWetGain, "reverb", "wet_gain outside [0, 1]");
  if (plan.output.sample_rate_hz != 44100 && plan.output.sample_rate_hz != 48000)
    add(violation::kSampleRate, "output", "sample_rate_hz must be 44100 or 48000");
  return r;
}

/// Template invariants: 1..6 slots, slot coordinates within placement ranges.
inline std::vector<std::string> template_problems(const Template& t) {
  std::vector<std::string> problems;
  if (t.template_id.empty()) problems.push_back("empty template_id");
  if (t.slots.empty() || t.slots.size() > kMaxTemplateSlots)
    problems.push_back("slot count " + std::to_string(t.slots.size()) + " outside 1..6");
  for (std::size_t i = 0; i < t.slots.size(); ++i) {
    const auto& s = t.slots[i];
    if (!placement_coordinates_valid(s.azimuth_deg, s.elevation_deg, s.distance_m))
      problems.push_back("slot " + std::to_string(i) + " coordinates out of range");
  }
  if (t.default_environment.empty()) problems.push_back("empty default_environment");
  return problems;
}

// ---------------------------------------------------------------------------
// Template merge

inline constexpr double kDefaultReverbSend = 0.3;
inline constexpr double kDefaultWetGain = 0.25;
inline constexpr double kUnmatchedAzimuth = 0.0;
inline constexpr double kUnmatchedElevation = 0.0;
inline constexpr double kUnmatchedDistance = 2.0;

/// Slot index per stem (nullopt = unmatched), by global greedy matching:
/// pairs with higher instrument overlap win; ties go to the lower slot
/// index, then the earlier stem.
inline std::vector<std::optional<std::size_t>> assign_slots(const std::vector<TemplateSlot>& slots,
                                                            const std::vector<StemInfo>& stems) {
  struct Candidate {
    std::size_t overlap, slot, stem;
  };
  std::vector<Candidate> cands;
  for (std::size_t st = 0; st < stems.size(); ++st)
    for (std::size_t sl = 0; sl < slots.size(); ++sl) {
      const auto ov = text::instrument_overlap(stems[st].instrument, slots[sl].slot_instrument);
      if (ov > 0) cands.push_back({ov, sl, st});
    }
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    return std::tuple(b.overlap, a.slot, a.stem) < std::tuple(a.overlap, b.slot, b.stem);
  });
  std::vector<std::optional<std::size_t>> out(stems.size());
  std::vector<bool> slot_used(slots.size(), false);
  for (const auto& c : cands) {
    if (out[c.stem] || slot_used[c.slot]) continue;
    out[c.stem] = c.slot;
    slot_used[c.slot] = true;
  }
  return out;
}

/// Instantiates a template for the given stems. Every source is placed in
/// Panning mode; the conductor assigns final modes for the output format.
inline SpatialPlan merge_template(const Template& tpl, const std::vector<StemInfo>& stems,
                                  const OutputSpec& output = {}) {
  SpatialPlan plan;
  plan.output = output;
  plan.reverb = ReverbSpec{RirConvolution{tpl.default_environment}, kDefaultWetGain};
  plan.mix_notes = "template: " + tpl.template_id;
  const auto assignment = assign_slots(tpl.slots, stems);
  for (std::size_t i = 0; i < stems.size(); ++i) {
    SourcePlacement p;
    p.source_id = stems[i].stem_id;
    p.instrument = stems[i].instrument;
    p.reverb_send = kDefaultReverbSend;
    if (assignment[i]) {
      const auto& slot = tpl.slots[*assignment[i]];
      p.azimuth_deg = slot.azimuth_deg;
      p.elevation_deg = slot.elevation_deg;
      p.distance_m = slot.distance_m;
    } else {
      p.azimuth_deg = kUnmatchedAzimuth;
      p.elevation_deg = kUnmatchedElevation;
      p.distance_m = kUnmatchedDistance;
    }
    plan.sources.push_back(std::move(p));
  }
  return plan;
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline void require_object(const Json& j, const std::string& what) {
  if (!j.is_object()) throw Error(ErrorCode::SchemaError, what + " must be an object");
}

// Strict field check: every key in `allowed` must be present (unless
// listed in `optional`) and no other key may appear.
inline void check_fields(const Json& j, const std::string& what, std::initializer_list<const char*> required,
                         std::initializer_list<const char*> optional = {}) {
  require_object(j, what);
  for (const char* k : required)
    if (!j.contains(k)) throw Error(ErrorCode::SchemaError, what + ": missing field '" + k + "'");
  for (const auto& [key, _] : j.items()) {
    const bool known = std::any_of(required.begin(), required.end(), [&](const char* k) { return key == k; }) ||
                       std::any_of(optional.begin(), optional.end(), [&](const char* k) { return key == k; });
    if (!known) throw Error(ErrorCode::SchemaError, what + ": unknown field '" + key + "'");
  }
}

inline double get_number(const Json& j, const char* key, const std::string& what) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw Error(ErrorCode::SchemaError, what + "." + key + " must be a number");
  return v.get<double>();
}

inline std::string get_string(const Json& j, const char* key, const std::string& what) {
  const auto& v = j.at(key);
  if (!v.is_string()) throw Error(ErrorCode::SchemaError, what + "." + key + " must be a string");
  return v.get<std::string>();
}

}  // namespace detail

inline Json to_json(const SourcePlacement& s) {
  return Json{{"source_id", s.source_id},     {"instrument", s.instrument},         {"azimuth_deg", s.azimuth_deg},
              {"elevation_deg", s.elevation_deg}, {"distance_m", s.distance_m}, {"mode", to_string(s.mode)},
              {"reverb_send", s.reverb_send}};
}

inline Json to_json(const ReverbSpec& r) {
  Json j;
  if (const auto* rir = r.rir()) {
    j["kind"] = "rir_convolution";
    j["rir_id"] = rir->rir_id;
  } else {
    const auto* alg = r.algorithmic();
    j["kind"] = "algorithmic";
    j["rt60_s"] = alg->rt60_s;
    j["predelay_ms"] = alg->predelay_ms;
  }
  j["wet_gain"] = r.wet_gain;
  return j;
}

inline Json to_json(const SpatialPlan& p) {
  Json sources = Json::array();
  for (const auto& s : p.sources) sources.push_back(to_json(s));
  return Json{{"sources", std::move(sources)},
              {"reverb", to_json(p.reverb)},
              {"output", Json{{"sample_rate_hz", p.output.sample_rate_hz}, {"format", to_string(p.output.format)}}},
              {"mix_notes", p.mix_notes},
              {"music_description", p.music_description}};
}

inline SourcePlacement placement_from_json(const Json& j, const std::string& what) {
  detail::check_fields(j, what,
                       {"source_id", "instrument", "azimuth_deg", "elevation_deg", "distance_m", "mode", "reverb_send"});
  SourcePlacement s;
  s.source_id = detail::get_string(j, "source_id", what);
  s.instrument = detail::get_string(j, "instrument", what);
  s.azimuth_deg = detail::get_number(j, "azimuth_deg", what);
  s.elevation_deg = detail::get_number(j, "elevation_deg", what);
  s.distance_m = detail::get_number(j, "distance_m", what);
  s.mode = parse_mode(detail::get_string(j, "mode", what));
  s.reverb_send = detail::get_number(j, "reverb_send", what);
  return s;
}

inline ReverbSpec reverb_from_json(const Json& j) {
  detail::require_object(j, "reverb");
  if (!j.contains("kind") || !j.at("kind").is_string()) throw Error(ErrorCode::SchemaError, "reverb.kind must be a string");
  const auto kind = j.at("kind").get<std::string>();
  ReverbSpec r;
  if (kind == "rir_convolution") {
    detail::check_fields(j, "reverb", {"kind", "rir_id", "wet_gain"});
    r.kind = RirConvolution{detail::get_string(j, "rir_id", "reverb")};
  } else if (kind == "algorithmic") {
    detail::check_fields(j, "reverb", {"kind", "rt60_s", "predelay_ms", "wet_gain"});
    r.kind = Algorithmic{detail::get_number(j, "rt60_s", "reverb"), detail::get_number(j, "predelay_ms", "reverb")};
  } else {
    throw Error(ErrorCode::SchemaError, "unknown reverb kind '" + kind + "'");
  }
  r.wet_gain = detail::get_number(j, "wet_gain", "reverb");
  return r;
}

inline SpatialPlan plan_from_json(const Json& j) {
  detail::check_fields(j, "plan", {"sources", "reverb", "output", "mix_notes", "music_description"});
  SpatialPlan p;
  if (!j.at("sources").is_array()) throw Error(ErrorCode::SchemaError, "plan.sources must be an array");
  for (std::size_t i = 0; i < j.at("sources").size(); ++i)
    p.sources.push_back(placement_from_json(j.at("sources")[i], "sources[" + std::to_string(i) + "]"));
  p.reverb = reverb_from_json(j.at("reverb"));
  const auto& out = j.at("output");
  detail::check_fields(out, "output", {"sample_rate_hz", "format"});
  if (!out.at("sample_rate_hz").is_number_integer())
    throw Error(ErrorCode::SchemaError, "output.sample_rate_hz must be an integer");
  p.output.sample_rate_hz = out.at("sample_rate_hz").get<int>();
  p.output.format = parse_format(detail::get_string(out, "format", "output"));
  p.mix_notes = detail::get_string(j, "mix_notes", "plan");
  p.music_description = detail::get_string(j, "music_description", "plan");
  return p;
}

inline SpatialPlan plan_from_json_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return plan_from_json(j);
}

inline Json to_json(const Template& t) {
  Json slots = Json::array();
  for (const auto& s : t.slots)
    slots.push_back(Json{{"slot_instrument", s.slot_instrument},
                         {"azimuth_deg", s.azimuth_deg},
                         {"elevation_deg", s.elevation_deg},
                         {"distance_m", s.distance_m}});
  return Json{{"template_id", t.template_id}, {"name", t.name},   {"keywords", t.keywords},
              {"description", t.description}, {"slots", slots}, {"default_environment", t.default_environment}};
}

inline Template template_from_json(const Json& j, const std::string& what) {
  detail::check_fields(j, what, {"template_id", "name", "keywords", "description", "slots", "default_environment"});
  Template t;
  t.template_id = detail::get_string(j, "template_id", what);
  t.name = detail::get_string(j, "name", what);
  if (!j.at("keywords").is_array()) throw Error(ErrorCode::SchemaError, what + ".keywords must be an array");
  for (const auto& k : j.at("keywords")) {
    if (!k.is_string()) throw Error(ErrorCode::SchemaError, what + ".keywords must hold strings");
    t.keywords.push_back(text::to_lower(k.get<std::string>()));
  }
  t.description = detail::get_string(j, "description", what);
  if (!j.at("slots").is_array()) throw Error(ErrorCode::SchemaError, what + ".slots must be an array");
  for (std::size_t i = 0; i < j.at("slots").size(); ++i) {
    const auto& sj = j.at("slots")[i];
    const std::string sw = what + ".slots[" + std::to_string(i) + "]";
    detail::check_fields(sj, sw, {"slot_instrument", "azimuth_deg", "elevation_deg", "distance_m"});
    t.slots.push_back({detail::get_string(sj, "slot_instrument", sw), detail::get_number(sj, "azimuth_deg", sw),
                       detail::get_number(sj, "elevation_deg", sw), detail::get_number(sj, "distance_m", sw)});
  }
  t.default_environment = detail::get_string(j, "default_environment", what);
  return t;
}

}  // namespace stase
