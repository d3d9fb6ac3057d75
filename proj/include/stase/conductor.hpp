#pragma once

// Turns a prompt, the template bank and the available stems into a
// validated SpatialPlan.

#include <algorithm>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "stase/banks.hpp"
#include "stase/error.hpp"
#include "stase/prompt.hpp"
#include "stase/remote_backend.hpp"
#include "stase/scene.hpp"
#include "stase/template_bank.hpp"
#include "stase/text.hpp"

namespace stase {

/// Stereo output always pans. Binaural output uses HRIRs off the horizontal
/// plane or behind the listener, and the ITD/ILD model otherwise.
inline LocalizationMode select_mode(double azimuth_deg, double elevation_deg, OutputFormat format) {
  if (format == OutputFormat::Stereo) return LocalizationMode::Panning;
  if (elevation_deg != 0.0 || std::abs(azimuth_deg) > 90.0) return LocalizationMode::Hrtf;
  return LocalizationMode::ItdIld;
}

namespace detail {

inline bool contains_sequence(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > hay.size()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

}  // namespace detail

/// The template's default environment, unless the notes name a keyword of
/// some RIR (first such RIR in manifest order wins).
inline std::string select_rir(const Template& tpl, std::string_view mix_notes, std::span<const RirInfo> catalog) {
  const bool known = std::any_of(catalog.begin(), catalog.end(),
                                 [&](const RirInfo& r) { return r.rir_id == tpl.default_environment; });
  if (!known)
    throw Error(ErrorCode::UnknownRir, "template '" + tpl.template_id + "' default environment '" +
                                           tpl.default_environment + "' is not in the RIR bank");
  const auto notes = text::tokenize(mix_notes);
  for (const auto& r : catalog)
    for (const auto& k : r.keywords)
      if (detail::contains_sequence(notes, text::tokenize(k))) return r.rir_id;
  return tpl.default_environment;
}

struct PlanContext {
  int sample_rate_hz = 48000;
  // RIR ids and keywords; empty means reverb ids are taken from templates unchecked.
  std::vector<RirInfo> rir_catalog;
};

struct PlanOutcome {
  SpatialPlan plan;
  std::vector<std::string> warnings;
};

/// "stereo" or "speakers" in the prompt asks for a stereo mix; binaural otherwise.
inline OutputFormat requested_format(std::string_view prompt) {
  for (const auto& t : text::tokenize(prompt))
    if (t == "stereo" || t == "speakers" || t == "loudspeakers") return OutputFormat::Stereo;
  return OutputFormat::Binaural;
}

namespace detail {

inline std::vector<StemInfo> labelled_stems(const std::vector<StemInfo>& stems) {
  if (stems.empty()) throw Error(ErrorCode::NoStems, "no stems supplied");
  std::vector<StemInfo> out = stems;
  std::set<std::string> ids;
  for (auto& s : out) {
    if (s.stem_id.empty()) throw Error(ErrorCode::InvalidPlan, "stem with empty id");
    if (!ids.insert(s.stem_id).second) throw Error(ErrorCode::InvalidPlan, "duplicate stem id '" + s.stem_id + "'");
    if (text::trim(s.instrument).empty()) s.instrument = text::infer_instrument(s.stem_id);
  }
  if (out.size() > kMaxPlanSources)
    throw Error(ErrorCode::InvalidPlan, "at most " + std::to_string(kMaxPlanSources) + " stems per plan");
  return out;
}

inline std::set<std::string> stem_id_set(const std::vector<StemInfo>& stems) {
  std::set<std::string> ids;
  for (const auto& s : stems) ids.insert(s.stem_id);
  return ids;
}

inline std::optional<std::set<std::string>> rir_id_set(const PlanContext& ctx) {
  if (ctx.rir_catalog.empty()) return std::nullopt;
  std::set<std::string> ids;
  for (const auto& r : ctx.rir_catalog) ids.insert(r.rir_id);
  return ids;
}

inline const Template& choose_template(const TemplateBank& bank, std::string_view query, std::vector<std::string>& notes) {
  const auto r = bank.retrieve(query, 1);
  if (!r.low_confidence) return *bank.find(r.ranking.front().template_id);
  const Template* fallback = bank.find(kFallbackTemplateId);
  if (fallback == nullptr) throw Error(ErrorCode::UnknownTemplate, std::string("fallback template '") + kFallbackTemplateId + "' missing from bank");
  notes.push_back("low-confidence retrieval, fallback template");
  return *fallback;
}

inline void apply_cues(SpatialPlan& plan, const std::vector<prompt::ParsedCue>& cues, std::vector<std::string>& notes,
                       std::vector<std::string>& warnings) {
  std::vector<bool> taken(plan.sources.size(), false);
  for (const auto& cue : cues) {
    std::size_t best = plan.sources.size(), best_overlap = 0;
    for (std::size_t i = 0; i < plan.sources.size(); ++i) {
      if (taken[i]) continue;
      const auto ov = text::instrument_overlap(cue.instrument, plan.sources[i].instrument);
      if (ov > best_overlap) {
        best_overlap = ov;
        best = i;
      }
    }
    if (best == plan.sources.size()) {
      warnings.push_back("cue for '" + cue.instrument + "' matched no stem");
      continue;
    }
    taken[best] = true;
    auto& s = plan.sources[best];
    if (auto az = cue.resolved_azimuth()) s.azimuth_deg = std::clamp(*az, -180.0, 180.0);
    if (auto el = cue.resolved_elevation()) s.elevation_deg = std::clamp(*el, -90.0, 90.0);
    if (cue.distance_m && *cue.distance_m > 0.0) s.distance_m = *cue.distance_m;
    notes.push_back("cue: " + s.source_id + " <- " + cue.instrument);
  }
}

inline PlanOutcome rule_based_plan(const std::string& prompt_text, const std::vector<StemInfo>& stems,
                                   const TemplateBank& bank, const PlanContext& ctx) {
  PlanOutcome out;
  std::vector<std::string> notes;
  const auto route = prompt::classify(prompt_text);
  const OutputSpec output{ctx.sample_rate_hz, requested_format(prompt_text)};

  const auto* abstract = std::get_if<prompt::Abstract>(&route);
  const std::string query = abstract ? abstract->query : text::normalize_query(prompt_text);
  const Template& tpl = choose_template(bank, query, notes);
  out.plan = merge_template(tpl, stems, output);
  if (const auto* desc = std::get_if<prompt::Description>(&route)) apply_cues(out.plan, desc->cues, notes, out.warnings);

  for (auto& s : out.plan.sources) s.mode = select_mode(s.azimuth_deg, s.elevation_deg, output.format);

  std::string environment = tpl.default_environment;
  if (!ctx.rir_catalog.empty()) environment = select_rir(tpl, prompt_text, ctx.rir_catalog);
  out.plan.reverb.kind = RirConvolution{environment};

  std::vector<std::string> head = {"template: " + tpl.template_id, "environment: " + environment,
                                   "format: " + to_string(output.format)};
  head.insert(head.end(), notes.begin(), notes.end());
  out.plan.mix_notes = text::join(head, "; ");
  out.plan.music_description = text::trim(prompt_text);
  return out;
}

inline SpatialPlan remote_plan(const Remote& backend, const std::string& prompt_text, const std::vector<StemInfo>& stems,
                               const PlanContext& ctx) {
  const auto body = remote_call(backend, remote_request_body(backend, prompt_text, stems));
  auto plan = plan_from_json(extract_plan_json(body));
  if (plan.output.sample_rate_hz != ctx.sample_rate_hz)
    throw Error(ErrorCode::InvalidPlan, "remote plan sample rate does not match the stems");
  const auto report = validate_plan(plan, stem_id_set(stems), rir_id_set(ctx));
  if (!report.ok()) throw Error(ErrorCode::InvalidPlan, report.summary());
  return plan;
}

}  // namespace detail

/// Builds a plan. The remote backend never fails the call: any transport,
/// parse or validation problem falls back to the rule-based path, with a
/// warning and a note in mix_notes.
inline PlanOutcome build_plan(const std::string& prompt_text, const std::vector<StemInfo>& stems,
                              const ConductorBackend& backend, const TemplateBank& bank, const PlanContext& ctx = {}) {
  const auto labelled = detail::labelled_stems(stems);
  if (text::trim(prompt_text).empty()) throw Error(ErrorCode::EmptyPrompt, "prompt is empty");

  PlanOutcome out;
  if (const auto* remote = std::get_if<Remote>(&backend)) {
    try {
      out.plan = detail::remote_plan(*remote, prompt_text, labelled, ctx);
      return out;
    } catch (const Error& e) {
      out = detail::rule_based_plan(prompt_text, labelled, bank, ctx);
      const std::string why = std::string("remote backend fallback: ") + e.what();
      out.warnings.insert(out.warnings.begin(), why);
      out.plan.mix_notes += "; " + why;
    }
  } else {
    out = detail::rule_based_plan(prompt_text, labelled, bank, ctx);
  }

  const auto report = validate_plan(out.plan, detail::stem_id_set(labelled), detail::rir_id_set(ctx));
  if (!report.ok()) throw Error(ErrorCode::InvalidPlan, "conductor produced an invalid plan: " + report.summary());
  return out;
}

}  // namespace stase
