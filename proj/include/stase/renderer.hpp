#pragma once

// Applies a SpatialPlan to mono stems. Each source runs exactly one
// localisation chain (panning, ITD/ILD, or HRTF convolution); reverb is a
// single shared mono bus returned equally to both ears.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stase/audio_buffer.hpp"
#include "stase/banks.hpp"
#include "stase/dsp.hpp"
#include "stase/error.hpp"
#include "stase/scene.hpp"

namespace stase {

/// How the per-source reverb send depends on distance.
enum class DryWetLaw {
  Constant,       // send = reverb_send
  DistanceScaled  // send = reverb_send * min(distance / 10 m, 1)
};

inline std::string to_string(DryWetLaw law) { return law == DryWetLaw::Constant ? "constant" : "distance_scaled"; }

inline constexpr double kDryWetReferenceDistance = 10.0;

inline double reverb_send_gain(double reverb_send, double distance_m, DryWetLaw law) {
  if (law == DryWetLaw::Constant) return reverb_send;
  return reverb_send * std::min(distance_m / kDryWetReferenceDistance, 1.0);
}

struct RenderConfig {
  dsp::HeadModel head;
  dsp::IldModel ild;
  dsp::SchroederParams schroeder;
  // Peak ceiling in dBFS; nullopt disables normalisation.
  std::optional<double> normalize_peak_dbfs = -1.0;
  DryWetLaw dry_wet_law = DryWetLaw::Constant;
  // Test hook: skip the ITD delay stage (negative control for analysis).
  bool disable_itd_delay = false;
};

struct SourceTrace {
  std::string source_id;
  LocalizationMode mode = LocalizationMode::Panning;
  double distance_gain = 1.0;
  std::optional<dsp::StereoGains> pan_gains;
  std::optional<double> base_gain;
  std::optional<double> delay_samples_left;
  std::optional<double> delay_samples_right;
  std::optional<double> shelf_gain_db_left;
  std::optional<double> shelf_gain_db_right;
  std::optional<std::size_t> hrir_index;
  double reverb_send_gain = 0.0;
  std::string rir_id;
};

struct RenderTrace {
  std::vector<SourceTrace> sources;
  double peak_before = 0.0;
  double peak_after = 0.0;
  double normalization_scale = 1.0;
};

struct RenderResult {
  AudioBuffer mix;
  RenderTrace trace;
};

struct HrirChoice {
  const AudioBuffer* left = nullptr;
  const AudioBuffer* right = nullptr;
  std::size_t index = 0;
};

/// Great-circle angle in radians between two directions given in degrees.
inline double angular_distance(double az1_deg, double el1_deg, double az2_deg, double el2_deg) {
  const double a1 = dsp::deg_to_rad(az1_deg), e1 = dsp::deg_to_rad(el1_deg);
  const double a2 = dsp::deg_to_rad(az2_deg), e2 = dsp::deg_to_rad(el2_deg);
  const double x1 = std::cos(e1) * std::cos(a1), y1 = std::cos(e1) * std::sin(a1), z1 = std::sin(e1);
  const double x2 = std::cos(e2) * std::cos(a2), y2 = std::cos(e2) * std::sin(a2), z2 = std::sin(e2);
  const double cx = y1 * z2 - z1 * y2, cy = z1 * x2 - x1 * z2, cz = x1 * y2 - y1 * x2;
  return std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), x1 * x2 + y1 * y2 + z1 * z2);
}

/// Nearest measurement by great-circle distance; distances within 1e-12 rad
/// count as ties and go to the lower index.
inline HrirChoice select_hrir(double azimuth_deg, double elevation_deg, const HrirBank& bank) {
  if (bank.empty()) throw Error(ErrorCode::EmptyHrirBank, "HRIR bank has no entries");
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < bank.size(); ++i) {
    const auto& e = bank.at(i);
    const double d = angular_distance(azimuth_deg, elevation_deg, e.azimuth_deg, e.elevation_deg);
    if (d < best - 1e-12) {
      best = d;
      best_i = i;
    }
  }
  const auto& e = bank.at(best_i);
  return {&e.left, &e.right, e.index};
}

namespace detail {

inline void accumulate(std::vector<double>& into, std::span<const double> src, double gain) {
  if (into.size() < src.size()) into.resize(src.size(), 0.0);
  for (std::size_t i = 0; i < src.size(); ++i) into[i] += src[i] * gain;
}

inline void check_render_inputs(const SpatialPlan& plan, const std::map<std::string, AudioBuffer>& stems,
                                const HrirBank& hrir_bank, const RirBank& rir_bank) {
  for (const auto& s : plan.sources) {
    auto it = stems.find(s.source_id);
    if (it == stems.end()) throw Error(ErrorCode::MissingStem, "no stem for source '" + s.source_id + "'");
    if (!it->second.is_mono()) throw Error(ErrorCode::InvalidBuffer, "stem '" + s.source_id + "' is not mono");
    if (it->second.sample_rate() != plan.output.sample_rate_hz)
      throw Error(ErrorCode::SampleRateMismatch, "stem '" + s.source_id + "' is " +
                                                     std::to_string(it->second.sample_rate()) + " Hz, plan is " +
                                                     std::to_string(plan.output.sample_rate_hz) + " Hz");
  }
  if (const auto* rir = plan.reverb.rir()) {
    const auto* entry = rir_bank.find(rir->rir_id);
    if (entry == nullptr) throw Error(ErrorCode::UnknownRir, "rir_id '" + rir->rir_id + "' not in bank");
    if (entry->ir.sample_rate() != plan.output.sample_rate_hz)
      throw Error(ErrorCode::SampleRateMismatch, "RIR '" + rir->rir_id + "' sample rate differs from plan");
  }
  const bool any_hrtf = std::any_of(plan.sources.begin(), plan.sources.end(),
                                    [](const auto& s) { return s.mode == LocalizationMode::Hrtf; });
  if (any_hrtf) {
    if (hrir_bank.empty()) throw Error(ErrorCode::EmptyHrirBank, "plan uses hrtf but the HRIR bank is empty");
    if (hrir_bank.sample_rate() != plan.output.sample_rate_hz)
      throw Error(ErrorCode::SampleRateMismatch, "HRIR bank sample rate differs from plan");
  }
  const auto report = validate_plan(plan, std::nullopt, std::nullopt);
  if (!report.ok()) throw Error(ErrorCode::InvalidPlan, report.summary());
}

}  // namespace detail

/// Renders the plan to a stereo mix. Identical inputs give bit-identical
/// output; with normalisation disabled the renderer is linear in the stems.
inline RenderResult render(const SpatialPlan& plan, const std::map<std::string, AudioBuffer>& stems,
                           const HrirBank& hrir_bank, const RirBank& rir_bank, const RenderConfig& cfg = {}) {
  detail::check_render_inputs(plan, stems, hrir_bank, rir_bank);
  const int rate = plan.output.sample_rate_hz;
  const std::string rir_id = plan.reverb.rir() ? plan.reverb.rir()->rir_id : std::string();

  RenderResult result;
  std::vector<double> left, right, bus;
  bool bus_used = false;

  for (const auto& src : plan.sources) {
    const AudioBuffer& x = stems.at(src.source_id);
    SourceTrace t;
    t.source_id = src.source_id;
    t.mode = src.mode;
    t.rir_id = rir_id;
    t.distance_gain = dsp::distance_gain(src.distance_m);

    switch (src.mode) {
      case LocalizationMode::Panning: {
        const auto g = dsp::pan_gains(src.azimuth_deg);
        t.pan_gains = g;
        detail::accumulate(left, x.samples(), g.left * t.distance_gain);
        detail::accumulate(right, x.samples(), g.right * t.distance_gain);
        break;
      }
      case LocalizationMode::ItdIld: {
        const auto delays = dsp::itd_seconds(src.azimuth_deg, cfg.head);
        const auto left_ear = src.azimuth_deg < 0.0 ? dsp::Ear::Ipsilateral : dsp::Ear::Contralateral;
        const auto right_ear = src.azimuth_deg < 0.0 ? dsp::Ear::Contralateral : dsp::Ear::Ipsilateral;
        const double dl = cfg.disable_itd_delay ? 0.0 : delays.left_s;
        const double dr = cfg.disable_itd_delay ? 0.0 : delays.right_s;
        const auto l = dsp::ild_filter(dsp::fractional_delay(x, dl), src.azimuth_deg, left_ear, cfg.ild);
        const auto r = dsp::ild_filter(dsp::fractional_delay(x, dr), src.azimuth_deg, right_ear, cfg.ild);
        t.base_gain = dsp::kSqrtHalf;
        t.delay_samples_left = dl * rate;
        t.delay_samples_right = dr * rate;
        t.shelf_gain_db_left = dsp::ild_shelf_gain_db(src.azimuth_deg, left_ear, cfg.ild);
        t.shelf_gain_db_right = dsp::ild_shelf_gain_db(src.azimuth_deg, right_ear, cfg.ild);
        detail::accumulate(left, l.samples(), dsp::kSqrtHalf * t.distance_gain);
        detail::accumulate(right, r.samples(), dsp::kSqrtHalf * t.distance_gain);
        break;
      }
      case LocalizationMode::Hrtf: {
        const auto choice = select_hrir(src.azimuth_deg, src.elevation_deg, hrir_bank);
        t.hrir_index = choice.index;
        const auto l = dsp::convolve(x, *choice.left);
        const auto r = dsp::convolve(x, *choice.right);
        detail::accumulate(left, l.samples(), t.distance_gain);
        detail::accumulate(right, r.samples(), t.distance_gain);
        break;
      }
    }

    t.reverb_send_gain = reverb_send_gain(src.reverb_send, src.distance_m, cfg.dry_wet_law);
    if (t.reverb_send_gain != 0.0 && plan.reverb.wet_gain != 0.0) {
      detail::accumulate(bus, x.samples(), t.reverb_send_gain);
      bus_used = true;
    }
    result.trace.sources.push_back(std::move(t));
  }

  if (bus_used) {
    const auto bus_buf = AudioBuffer::mono(std::move(bus), rate);
    AudioBuffer wet;
    if (const auto* rir = plan.reverb.rir()) {
      wet = dsp::convolve(bus_buf, rir_bank.find(rir->rir_id)->ir);
    } else {
      const auto* alg = plan.reverb.algorithmic();
      wet = dsp::schroeder_reverb(bus_buf, alg->rt60_s, alg->predelay_ms, cfg.schroeder);
    }
    detail::accumulate(left, wet.samples(), plan.reverb.wet_gain);
    detail::accumulate(right, wet.samples(), plan.reverb.wet_gain);
  }

  const std::size_t frames = std::max(left.size(), right.size());
  left.resize(frames, 0.0);
  right.resize(frames, 0.0);
  auto mix = AudioBuffer::stereo(std::move(left), std::move(right), rate);
  result.trace.peak_before = mix.peak();

  if (cfg.normalize_peak_dbfs) {
    const double ceiling = std::pow(10.0, *cfg.normalize_peak_dbfs / 20.0);
    if (result.trace.peak_before > ceiling) {
      const double scale = ceiling / result.trace.peak_before;
      auto channels = mix.channels();
      for (auto& ch : channels)
        for (auto& s : ch) s *= scale;
      mix = AudioBuffer(std::move(channels), rate);
      result.trace.normalization_scale = scale;
    }
  }
  result.trace.peak_after = mix.peak();
  result.mix = std::move(mix);
  return result;
}

inline Json to_json(const RenderTrace& trace) {
  auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  Json sources = Json::array();
  for (const auto& s : trace.sources) {
    Json j;
    j["source_id"] = s.source_id;
    j["mode"] = to_string(s.mode);
    j["distance_gain"] = s.distance_gain;
    j["pan_gains"] = s.pan_gains ? Json{{"left", s.pan_gains->left}, {"right", s.pan_gains->right}} : Json(nullptr);
    j["base_gain"] = opt(s.base_gain);
    j["delay_samples"] = s.delay_samples_left
                             ? Json{{"left", *s.delay_samples_left}, {"right", *s.delay_samples_right}}
                             : Json(nullptr);
    j["shelf_gain_db"] = s.shelf_gain_db_left
                             ? Json{{"left", *s.shelf_gain_db_left}, {"right", *s.shelf_gain_db_right}}
                             : Json(nullptr);
    j["hrir_index"] = s.hrir_index ? Json(*s.hrir_index) : Json(nullptr);
    j["reverb_send_gain"] = s.reverb_send_gain;
    j["rir_id"] = s.rir_id.empty() ? Json(nullptr) : Json(s.rir_id);
    sources.push_back(std::move(j));
  }
  return Json{{"sources", std::move(sources)},
              {"peak_before", trace.peak_before},
              {"peak_after", trace.peak_after},
              {"normalization_scale", trace.normalization_scale}};
}

}  // namespace stase
