#pragma once

// Minimal JSON-over-HTTP chat client for the remote conductor backend.
// Plain http only; the request carries one user message and fixed
// deterministic decoding parameters.

#include <cstdlib>
#include <optional>
#include <string>
#include <variant>

#include "httplib.h"
#include "stase/error.hpp"
#include "stase/scene.hpp"

namespace stase {

struct Decoding {
  double temperature = 0.0;
  double top_p = 1.0;
};

struct RuleBased {};

struct Remote {
  std::string endpoint_url;
  std::string model_name;
  Decoding decoding;
  int timeout_ms = 30000;
};

using ConductorBackend = std::variant<RuleBased, Remote>;

inline constexpr int kMinTimeoutMs = 100;
inline constexpr int kMaxTimeoutMs = 120000;

inline Remote make_remote(std::string endpoint_url, std::string model_name, int timeout_ms = 30000) {
  if (timeout_ms < kMinTimeoutMs || timeout_ms > kMaxTimeoutMs)
    throw Error(ErrorCode::ConfigError, "timeout_ms must be in [100, 120000], got " + std::to_string(timeout_ms));
  return Remote{std::move(endpoint_url), std::move(model_name), Decoding{}, timeout_ms};
}

/// RuleBased unless STASE_LLM_ENDPOINT is set.
inline ConductorBackend backend_from_env() {
  const char* endpoint = std::getenv("STASE_LLM_ENDPOINT");
  if (endpoint == nullptr || *endpoint == '\0') return RuleBased{};
  const char* model = std::getenv("STASE_LLM_MODEL");
  int timeout = 30000;
  if (const char* t = std::getenv("STASE_LLM_TIMEOUT_MS"); t != nullptr && *t != '\0') {
    try {
      std::size_t used = 0;
      timeout = std::stoi(t, &used);
      if (used != std::string(t).size()) throw std::invalid_argument(t);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigError, std::string("STASE_LLM_TIMEOUT_MS is not an integer: ") + t);
    }
  }
  return make_remote(endpoint, model != nullptr ? model : "default", timeout);
}

struct ParsedUrl {
  std::string host;
  int port = 80;
  std::string path = "/";
};

inline ParsedUrl parse_http_url(const std::string& url) {
  const std::string scheme = "http://";
  if (url.rfind(scheme, 0) != 0) throw Error(ErrorCode::ConfigError, "endpoint must be an http:// URL: " + url);
  const auto rest = url.substr(scheme.size());
  const auto slash = rest.find('/');
  const auto authority = rest.substr(0, slash);
  ParsedUrl out;
  if (slash != std::string::npos) out.path = rest.substr(slash);
  const auto colon = authority.rfind(':');
  out.host = authority.substr(0, colon);
  if (colon != std::string::npos) {
    try {
      out.port = std::stoi(authority.substr(colon + 1));
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigError, "bad port in endpoint: " + url);
    }
  }
  if (out.host.empty()) throw Error(ErrorCode::ConfigError, "endpoint has no host: " + url);
  return out;
}

/// JSON schema for SpatialPlan sent alongside the prompt.
inline Json plan_schema() {
  const Json number = {{"type", "number"}};
  const Json placement = {
      {"type", "object"},
      {"additionalProperties", false},
      {"required", {"source_id", "instrument", "azimuth_deg", "elevation_deg", "distance_m", "mode", "reverb_send"}},
      {"properties",
       {{"source_id", {{"type", "string"}}},
        {"instrument", {{"type", "string"}}},
        {"azimuth_deg", {{"type", "number"}, {"minimum", -180}, {"maximum", 180}}},
        {"elevation_deg", {{"type", "number"}, {"minimum", -90}, {"maximum", 90}}},
        {"distance_m", {{"type", "number"}, {"exclusiveMinimum", 0}}},
        {"mode", {{"enum", {"panning", "itd_ild", "hrtf"}}}},
        {"reverb_send", {{"type", "number"}, {"minimum", 0}, {"maximum", 1}}}}}};
  const Json reverb = {
      {"type", "object"},
      {"additionalProperties", false},
      {"required", {"kind", "wet_gain"}},
      {"properties",
       {{"kind", {{"enum", {"rir_convolution", "algorithmic"}}}},
        {"rir_id", {{"type", "string"}}},
        {"rt60_s", number},
        {"predelay_ms", number},
        {"wet_gain", {{"type", "number"}, {"minimum", 0}, {"maximum", 1}}}}}};
  const Json output = {{"type", "object"},
                       {"additionalProperties", false},
                       {"required", {"sample_rate_hz", "format"}},
                       {"properties",
                        {{"sample_rate_hz", {{"enum", {44100, 48000}}}}, {"format", {{"enum", {"stereo", "binaural"}}}}}}};
  return {{"type", "object"},
          {"additionalProperties", false},
          {"required", {"sources", "reverb", "output", "mix_notes", "music_description"}},
          {"properties",
           {{"sources", {{"type", "array"}, {"minItems", 1}, {"maxItems", kMaxPlanSources}, {"items", placement}}},
            {"reverb", reverb},
            {"output", output},
            {"mix_notes", {{"type", "string"}}},
            {"music_description", {{"type", "string"}}}}}};
}

inline Json remote_request_body(const Remote& backend, const std::string& prompt, const std::vector<StemInfo>& stems) {
  Json stem_list = Json::array();
  for (const auto& s : stems) stem_list.push_back({{"stem_id", s.stem_id}, {"instrument", s.instrument}});
  const Json content = {{"prompt", prompt}, {"stems", stem_list}, {"schema", plan_schema()}};
  return {{"model", backend.model_name},
          {"temperature", backend.decoding.temperature},
          {"top_p", backend.decoding.top_p},
          {"stream", false},
          {"messages", Json::array({{{"role", "user"}, {"content", content.dump()}}})}};
}

/// Extracts the plan object from a response: either a chat completion with
/// the plan as the message content, or the plan object itself.
inline Json extract_plan_json(const std::string& response_body) {
  Json j;
  try {
    j = Json::parse(response_body);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("response is not JSON: ") + e.what());
  }
  if (j.is_object() && j.contains("choices")) {
    const auto& choices = j.at("choices");
    if (!choices.is_array() || choices.empty() || !choices[0].is_object() || !choices[0].contains("message") ||
        !choices[0]["message"].contains("content") || !choices[0]["message"]["content"].is_string())
      throw Error(ErrorCode::SchemaError, "response has no choices[0].message.content string");
    try {
      return Json::parse(choices[0]["message"]["content"].get<std::string>());
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::ParseError, std::string("message content is not JSON: ") + e.what());
    }
  }
  return j;
}

/// POSTs the request and returns the raw response body. Throws IoError on
/// transport failure or a non-2xx status.
inline std::string remote_call(const Remote& backend, const Json& body) {
  const auto url = parse_http_url(backend.endpoint_url);
  httplib::Client client(url.host, url.port);
  const auto sec = backend.timeout_ms / 1000;
  const auto usec = (backend.timeout_ms % 1000) * 1000;
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);
  auto res = client.Post(url.path, body.dump(), "application/json");
  if (!res) throw Error(ErrorCode::IoError, "remote backend unreachable: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300)
    throw Error(ErrorCode::IoError, "remote backend returned HTTP " + std::to_string(res->status));
  return res->body;
}

}  // namespace stase
