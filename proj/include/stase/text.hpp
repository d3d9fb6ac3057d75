#pragma once

#include <algorithm>
#include <cctype>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace stase::text {

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n\f\v");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n\f\v");
  return std::string(s.substr(first, last - first + 1));
}

/// Lowercased alphanumeric tokens; everything else separates tokens.
/// Non-ASCII bytes are treated as separators.
inline std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char c : s) {
    if (c < 0x80 && std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

/// Lowercase, punctuation-stripped, single-space-joined form of a query.
inline std::string normalize_query(std::string_view s) {
  std::string out;
  for (const auto& t : tokenize(s)) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i != 0) out += sep;
    out += parts[i];
  }
  return out;
}

// Instrument synonym table: token -> instrument family. Labels are compared
// by family, so "kick" matches a "drums" slot and "violin" a "strings" slot.
inline const std::unordered_map<std::string, std::string>& instrument_families() {
  static const std::unordered_map<std::string, std::string> table = {
      {"drum", "drums"},       {"drums", "drums"},       {"kick", "drums"},
      {"snare", "drums"},      {"hihat", "drums"},       {"hat", "drums"},
      {"hats", "drums"},       {"cymbal", "drums"},      {"cymbals", "drums"},
      {"tom", "drums"},        {"toms", "drums"},        {"kit", "drums"},
      {"percussion", "percussion"}, {"perc", "percussion"}, {"conga", "percussion"},
      {"congas", "percussion"}, {"bongo", "percussion"},  {"bongos", "percussion"},
      {"djembe", "percussion"}, {"tabla", "percussion"},  {"shaker", "percussion"},
      {"timpani", "percussion"},
      {"bass", "bass"},        {"bassline", "bass"},     {"upright", "bass"},
      {"sub", "bass"},         {"808", "bass"},
      {"guitar", "guitar"},    {"guitars", "guitar"},    {"gtr", "guitar"},
      {"piano", "piano"},      {"keys", "piano"},        {"keyboard", "piano"},
      {"keyboards", "piano"},  {"rhodes", "piano"},      {"organ", "piano"},
      {"synth", "synth"},      {"synths", "synth"},      {"pad", "synth"},
      {"pads", "synth"},       {"arp", "synth"},
      {"vocal", "vocals"},     {"vocals", "vocals"},     {"vox", "vocals"},
      {"voice", "vocals"},     {"voices", "vocals"},     {"singer", "vocals"},
      {"soprano", "vocals"},   {"alto", "vocals"},       {"tenor", "vocals"},
      {"baritone", "vocals"},  {"choir", "vocals"},
      {"violin", "strings"},   {"violins", "strings"},   {"viola", "strings"},
      {"violas", "strings"},   {"cello", "strings"},     {"cellos", "strings"},
      {"contrabass", "strings"}, {"strings", "strings"}, {"string", "strings"},
      {"harp", "strings"},
      {"trumpet", "brass"},    {"trumpets", "brass"},    {"trombone", "brass"},
      {"trombones", "brass"},  {"horn", "brass"},        {"horns", "brass"},
      {"tuba", "brass"},       {"brass", "brass"},
      {"flute", "woodwinds"},  {"flutes", "woodwinds"},  {"oboe", "woodwinds"},
      {"clarinet", "woodwinds"}, {"bassoon", "woodwinds"}, {"woodwind", "woodwinds"},
      {"woodwinds", "woodwinds"},
      {"sax", "saxophone"},    {"saxophone", "saxophone"}, {"saxophones", "saxophone"},
      {"sitar", "world"},      {"oud", "world"},         {"kora", "world"},
      {"erhu", "world"},       {"koto", "world"},        {"didgeridoo", "world"},
      {"dj", "deck"},          {"deck", "deck"},         {"decks", "deck"},
      {"turntable", "deck"},   {"turntables", "deck"},   {"sampler", "deck"},
      {"beat", "drums"},       {"beats", "drums"},
  };
  return table;
}

inline bool is_instrument_token(const std::string& token) {
  return instrument_families().contains(token);
}

/// Family-mapped token set of an instrument label. Unknown tokens are kept
/// verbatim so free-text labels still match themselves.
inline std::set<std::string> instrument_signature(std::string_view label) {
  std::set<std::string> sig;
  const auto& fam = instrument_families();
  for (const auto& t : tokenize(label)) {
    auto it = fam.find(t);
    sig.insert(it == fam.end() ? t : it->second);
  }
  return sig;
}

/// Singular form of an instrument word ("violins" -> "violin") when the
/// table knows it; other tokens are returned unchanged.
inline std::string singular(const std::string& token) {
  if (token.size() > 3 && token.back() == 's') {
    auto stem = token.substr(0, token.size() - 1);
    if (is_instrument_token(stem)) return stem;
  }
  return token;
}

/// Family matches plus exact word matches, so "cello" prefers a "cellos"
/// slot over a "violins" slot although both are strings.
inline std::size_t instrument_overlap(std::string_view a, std::string_view b) {
  const auto fa = instrument_signature(a);
  const auto fb = instrument_signature(b);
  std::size_t n = 0;
  for (const auto& t : fa) n += fb.count(t);
  std::set<std::string> wa, wb;
  for (const auto& t : tokenize(a)) wa.insert(singular(t));
  for (const auto& t : tokenize(b)) wb.insert(singular(t));
  for (const auto& t : wa) n += wb.count(t);
  return n;
}

/// Instrument label inferred from a stem file name: the recognised
/// instrument tokens joined by spaces, or the whole normalised name if no
/// token is recognised.
inline std::string infer_instrument(std::string_view file_stem) {
  std::vector<std::string> hits;
  std::vector<std::string> tokens;
  // File names use separators like '_' and '-', and glue digits to words
  // ("guitar2"); strip trailing digits so the word still matches.
  for (auto t : tokenize(file_stem)) {
    if (!is_instrument_token(t)) {
      while (!t.empty() && std::isdigit(static_cast<unsigned char>(t.back()))) t.pop_back();
    }
    if (t.empty()) continue;
    tokens.push_back(t);
    if (is_instrument_token(t) || t == "lead" || t == "rhythm" || t == "backing") hits.push_back(t);
  }
  bool any_instrument = std::any_of(hits.begin(), hits.end(), [](const auto& t) { return is_instrument_token(t); });
  if (any_instrument) return join(hits, " ");
  return join(tokens, " ");
}

}  // namespace stase::text
