#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "stase/error.hpp"
#include "stase/scene.hpp"
#include "stase/text.hpp"

namespace stase {

struct RetrievalHit {
  std::string template_id;
  double score = 0.0;
  friend bool operator==(const RetrievalHit&, const RetrievalHit&) = default;
};

struct RetrievalResult {
  std::vector<RetrievalHit> ranking;
  bool low_confidence = false;
};

inline constexpr double kLowConfidenceScore = 0.05;
inline constexpr const char* kFallbackTemplateId = "studio_recording";

/// Spatial templates plus a tf-idf index over keywords and description.
///
/// Term weight is count * (N / df). Using the raw inverse document
/// frequency (no logarithm) means that adding a template whose vocabulary
/// is disjoint from a query rescales every weight uniformly, so cosine
/// scores of existing templates do not move.
class TemplateBank {
 public:
  TemplateBank() = default;

  explicit TemplateBank(std::vector<Template> templates) : templates_(std::move(templates)) {
    std::set<std::string> ids;
    for (std::size_t i = 0; i < templates_.size(); ++i) {
      const auto& t = templates_[i];
      if (auto problems = template_problems(t); !problems.empty())
        throw Error(ErrorCode::SchemaError, "template '" + t.template_id + "': " + problems.front());
      if (!ids.insert(t.template_id).second)
        throw Error(ErrorCode::SchemaError, "duplicate template_id '" + t.template_id + "'");
    }
    build_index();
  }

  const std::vector<Template>& templates() const noexcept { return templates_; }
  std::size_t size() const noexcept { return templates_.size(); }

  const Template* find(std::string_view id) const {
    for (const auto& t : templates_)
      if (t.template_id == id) return &t;
    return nullptr;
  }

  /// Full ranking of every template by cosine similarity to `query`.
  /// Descending score, ties by ascending template_id.
  RetrievalResult retrieve(std::string_view query, std::size_t k) const {
    if (k == 0) throw Error(ErrorCode::InvalidPlan, "retrieve needs k >= 1");
    const auto qv = weigh(counts(text::tokenize(query)));
    const double qn = norm(qv);
    RetrievalResult r;
    for (std::size_t i = 0; i < templates_.size(); ++i) {
      double score = 0.0;
      if (qn > 0.0 && norms_[i] > 0.0) {
        double dot = 0.0;
        for (const auto& [term, w] : qv) {
          auto it = doc_weights_[i].find(term);
          if (it != doc_weights_[i].end()) dot += w * it->second;
        }
        score = std::clamp(dot / (qn * norms_[i]), 0.0, 1.0);
      }
      r.ranking.push_back({templates_[i].template_id, score});
    }
    std::sort(r.ranking.begin(), r.ranking.end(), [](const RetrievalHit& a, const RetrievalHit& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.template_id < b.template_id;
    });
    r.low_confidence = r.ranking.empty() || r.ranking.front().score < kLowConfidenceScore;
    if (r.ranking.size() > k) r.ranking.resize(k);
    return r;
  }

 private:
  using Counts = std::map<std::string, double>;

  static Counts counts(const std::vector<std::string>& tokens) {
    Counts c;
    for (const auto& t : tokens) c[t] += 1.0;
    return c;
  }

  static std::vector<std::string> document_tokens(const Template& t) {
    std::vector<std::string> tokens;
    for (const auto& k : t.keywords)
      for (auto& tok : text::tokenize(k)) tokens.push_back(std::move(tok));
    for (auto& tok : text::tokenize(t.description)) tokens.push_back(std::move(tok));
    return tokens;
  }

  Counts weigh(const Counts& tf) const {
    Counts w;
    for (const auto& [term, n] : tf) {
      auto it = idf_.find(term);
      if (it != idf_.end()) w[term] = n * it->second;
    }
    return w;
  }

  static double norm(const Counts& v) {
    double s = 0.0;
    for (const auto& [_, w] : v) s += w * w;
    return std::sqrt(s);
  }

  void build_index() {
    std::vector<Counts> tfs;
    std::map<std::string, double> df;
    for (const auto& t : templates_) {
      tfs.push_back(counts(document_tokens(t)));
      for (const auto& [term, _] : tfs.back()) df[term] += 1.0;
    }
    const double n = static_cast<double>(templates_.size());
    for (const auto& [term, d] : df) idf_[term] = n / d;
    for (const auto& tf : tfs) {
      doc_weights_.push_back(weigh(tf));
      norms_.push_back(norm(doc_weights_.back()));
    }
  }

  std::vector<Template> templates_;
  std::map<std::string, double> idf_;
  std::vector<Counts> doc_weights_;
  std::vector<double> norms_;
};

inline TemplateBank parse_bank(const std::string& content) {
  if (text::trim(content).empty()) throw Error(ErrorCode::ParseError, "template bank is empty");
  Json j;
  try {
    j = Json::parse(content);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "template bank must be a JSON array");
  std::vector<Template> templates;
  for (std::size_t i = 0; i < j.size(); ++i)
    templates.push_back(template_from_json(j[i], "templates[" + std::to_string(i) + "]"));
  return TemplateBank(std::move(templates));
}

inline TemplateBank load_bank(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_bank(ss.str());
}

}  // namespace stase
